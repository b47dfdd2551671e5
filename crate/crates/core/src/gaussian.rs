//! Standard normal distribution functions.

use statrs::function::erf::erfc_inv;

const SQRT_2: f64 = std::f64::consts::SQRT_2;
const INV_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

/// Density φ(x).
pub fn pdf(x: f64) -> f64 {
    INV_SQRT_2PI * (-0.5 * x * x).exp()
}

/// Distribution function Φ(x).
pub fn cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / SQRT_2)
}

/// Upper tail 1 − Φ(x), accurate far into the tail.
pub fn sf(x: f64) -> f64 {
    0.5 * libm::erfc(x / SQRT_2)
}

/// Two-sided tail probability 2(1 − Φ(|z|)).
pub fn two_sided_pvalue(z: f64) -> f64 {
    libm::erfc(z.abs() / SQRT_2).min(1.0)
}

/// Quantile Φ⁻¹(u), refined by Newton steps on the distribution function.
pub fn quantile(u: f64) -> f64 {
    if u <= 0.0 {
        return f64::NEG_INFINITY;
    }
    if u >= 1.0 {
        return f64::INFINITY;
    }
    let mut x = -SQRT_2 * erfc_inv(2.0 * u);
    for _ in 0..3 {
        let density = pdf(x);
        if density <= 0.0 {
            break;
        }
        let err = if u < 0.5 { cdf(x) - u } else { (1.0 - u) - sf(x) };
        let step = err / density;
        x -= step;
        if step.abs() <= 1e-16 * x.abs().max(1.0) {
            break;
        }
    }
    x
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn known_values() {
        assert!((cdf(0.0) - 0.5).abs() < 1e-16);
        assert!((cdf(1.959963984540054) - 0.975).abs() < 1e-15);
        assert!((quantile(0.975) - 1.959963984540054).abs() < 1e-13);
        assert!((quantile(0.841344746068543) - 1.0).abs() < 1e-12);
        assert!(two_sided_pvalue(10.0) < 1e-20);
        assert_eq!(two_sided_pvalue(0.0), 1.0);
    }

    #[test]
    fn quantile_inverts_cdf() {
        for k in 1..200 {
            let u = k as f64 / 200.0;
            assert!((cdf(quantile(u)) - u).abs() < 1e-14);
        }
    }
}
