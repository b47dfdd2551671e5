//! Population fixed point of the state evolution and the VAMP iterations
//! whose iterates it describes.
//!
//! The fixed point `(γ*, η*, τ*, τ**)` solves
//!
//! ```text
//! γ/η  = E Prox′_{γ⁻¹h}(B + √τ* Z)
//! τ**  = η²/(η−γ)² · [E (Prox_{γ⁻¹h}(B + √τ* Z) − B)² − (γ/η)² τ*]
//! γ    = −R(1/η)
//! τ*   = (η/γ)² · [E (σ²D² + τ**(η−γ)²)/(D² + η − γ)² − ((η−γ)/η)² τ**]
//! ```
//!
//! with `B` drawn from the signal prior, `Z ~ N(0, 1)` and `D²` from the
//! limiting spectrum. Both laws are supplied as samples.

use ndarray::{Array1, ArrayView1, ArrayView2, Zip};
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gaussian;
use crate::penalty::Penalty;
use crate::rng::{self, Stream};
use crate::spectral::{self, DesignSpectrum};

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct FixedPointOptions {
    pub max_iter: usize,
    /// Initial damping factor; halved whenever the step size grows.
    pub damping: f64,
    /// Relative change in `(γ, τ*)` below which iteration stops.
    pub tol: f64,
    /// Bound on the relative residual of each equation.
    pub residual_tol: f64,
    /// When set, the Gaussian expectation is replaced by this many Monte
    /// Carlo draws paired with the prior samples; otherwise it is integrated
    /// exactly for each prior sample.
    pub z_draws: Option<usize>,
    pub seed: u64,
    /// Starting `(γ, τ*)`.
    pub init: Option<(f64, f64)>,
}

impl Default for FixedPointOptions {
    fn default() -> Self {
        FixedPointOptions {
            max_iter: 500,
            damping: 0.5,
            tol: 1e-11,
            residual_tol: 1e-6,
            z_draws: None,
            seed: 0,
            init: None,
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct FixedPoint {
    pub gamma_star: f64,
    pub eta_star: f64,
    pub tau_star: f64,
    pub tau_dstar: f64,
    /// Relative residuals of the four equations, in order.
    pub residuals: [f64; 4],
    pub iterations: usize,
    pub converged: bool,
}

/// Expectations of the prox over the signal prior and the Gaussian.
struct ProxExpectation<'a> {
    prior: &'a [f64],
    z: Option<Vec<f64>>,
    pen: Penalty,
}

#[derive(Debug, Clone, Copy)]
struct ProxMoments {
    /// `E Prox′`.
    deriv: f64,
    /// `E (Prox′)²`.
    deriv_sq: f64,
    /// `E (Prox − B)²`.
    mse: f64,
}

impl<'a> ProxExpectation<'a> {
    fn new(prior: &'a [f64], pen: Penalty, opts: &FixedPointOptions) -> Self {
        let z = opts.z_draws.map(|m| {
            let mut rng = rng::stream(opts.seed, Stream::Expectation);
            (0..m).map(|_| StandardNormal.sample(&mut rng)).collect()
        });
        ProxExpectation { prior, z, pen }
    }

    fn moments(&self, v: f64, tau: f64) -> ProxMoments {
        match &self.z {
            Some(z) => self.monte_carlo(z, v, tau),
            None => self.integrated(v, tau),
        }
    }

    fn monte_carlo(&self, z: &[f64], v: f64, tau: f64) -> ProxMoments {
        let s = tau.sqrt();
        let (mut d, mut d2, mut e) = (0.0, 0.0, 0.0);
        for (k, &zk) in z.iter().enumerate() {
            let b = self.prior[k % self.prior.len()];
            let x = b + s * zk;
            let pd = self.pen.prox_deriv_extended(v, x);
            let err = self.pen.prox(v, x) - b;
            d += pd;
            d2 += pd * pd;
            e += err * err;
        }
        let m = z.len() as f64;
        ProxMoments { deriv: d / m, deriv_sq: d2 / m, mse: e / m }
    }

    fn integrated(&self, v: f64, tau: f64) -> ProxMoments {
        let t = self.pen.lambda1() * v;
        let k = 1.0 / (1.0 + self.pen.lambda2() * v);
        let s = tau.sqrt();
        let (mut d, mut e) = (0.0, 0.0);
        for &b in self.prior {
            if s == 0.0 {
                let x = b;
                d += self.pen.prox_deriv_extended(v, x);
                let err = self.pen.prox(v, x) - b;
                e += err * err;
                continue;
            }
            let z1 = (t - b) / s;
            let z2 = (-t - b) / s;
            let (up, lo) = (gaussian::sf(z1), gaussian::cdf(z2));
            let (phi1, phi2) = (gaussian::pdf(z1), gaussian::pdf(z2));
            d += k * (up + lo);
            let c = k * s;
            let a_hi = (k - 1.0) * b - k * t;
            let a_lo = (k - 1.0) * b + k * t;
            let upper = a_hi * a_hi * up + 2.0 * a_hi * c * phi1 + c * c * (up + z1 * phi1);
            let lower = a_lo * a_lo * lo - 2.0 * a_lo * c * phi2 + c * c * (lo - z2 * phi2);
            let middle = b * b * (1.0 - up - lo).max(0.0);
            e += upper + lower + middle;
        }
        let m = self.prior.len() as f64;
        ProxMoments { deriv: d / m, deriv_sq: k * d / m, mse: e / m }
    }
}

/// Spectral averages used by the linear half of the state evolution.
struct SpectralAverages<'a> {
    d2: &'a [f64],
}

impl SpectralAverages<'_> {
    /// `E 1/(D² + c)`.
    fn cauchy(&self, c: f64) -> f64 {
        self.d2.iter().map(|&d| 1.0 / (d + c)).sum::<f64>() / self.d2.len() as f64
    }

    /// `E (σ²D² + τ c²)/(D² + c)²`.
    fn error(&self, c: f64, sigma2: f64, tau: f64) -> f64 {
        self.d2
            .iter()
            .map(|&d| (sigma2 * d + tau * c * c) / ((d + c) * (d + c)))
            .sum::<f64>()
            / self.d2.len() as f64
    }

    /// `E η²/(D² + η − γ)²`.
    fn weighted(&self, eta: f64, c: f64) -> f64 {
        self.d2.iter().map(|&d| eta * eta / ((d + c) * (d + c))).sum::<f64>() / self.d2.len() as f64
    }
}

struct SeStep {
    eta: f64,
    tau_dstar: f64,
    gamma_next: f64,
    tau_next: f64,
}

fn se_step(
    prox: &ProxExpectation,
    spec: &SpectralAverages,
    sigma2: f64,
    gamma: f64,
    tau: f64,
) -> Result<SeStep> {
    let m = prox.moments(1.0 / gamma, tau);
    let a1 = m.deriv;
    if !(a1 > 0.0 && a1 < 1.0) {
        return Err(Error::Domain(format!("E Prox' = {a1} leaves (0, 1) at gamma = {gamma}")));
    }
    let eta = gamma / a1;
    let g2 = eta - gamma;
    let tau2 = ((m.mse - a1 * a1 * tau) / ((1.0 - a1) * (1.0 - a1))).max(0.0);
    let a2 = g2 * spec.cauchy(g2);
    if !(a2 > 0.0 && a2 < 1.0) {
        return Err(Error::Domain(format!("linear-step ratio {a2} leaves (0, 1)")));
    }
    let eta2 = g2 / a2;
    let gamma_next = eta2 - g2;
    let tau_next = (spec.error(g2, sigma2, tau2) - a2 * a2 * tau2) / ((1.0 - a2) * (1.0 - a2));
    Ok(SeStep { eta, tau_dstar: tau2, gamma_next, tau_next })
}

fn check_samples(spectrum: &[f64], prior: &[f64], sigma2: f64) -> Result<()> {
    if spectrum.is_empty() || prior.is_empty() {
        return Err(Error::InvalidInput("spectrum and prior samples must be non-empty".into()));
    }
    if spectrum.iter().any(|&d| !(d >= 0.0) || !d.is_finite()) {
        return Err(Error::InvalidInput("spectrum samples must be finite and non-negative".into()));
    }
    if !(spectrum.iter().sum::<f64>() > 0.0) {
        return Err(Error::InvalidInput("spectrum samples have zero mean".into()));
    }
    if prior.iter().any(|b| !b.is_finite()) {
        return Err(Error::InvalidInput("prior samples must be finite".into()));
    }
    if !(sigma2 >= 0.0) {
        return Err(Error::InvalidInput("noise variance must be non-negative".into()));
    }
    Ok(())
}

/// Solves the fixed-point system by damped state-evolution iteration.
pub fn solve_fixed_point(
    spectrum_samples: &[f64],
    prior_samples: &[f64],
    sigma2: f64,
    pen: &Penalty,
    opts: &FixedPointOptions,
) -> Result<FixedPoint> {
    check_samples(spectrum_samples, prior_samples, sigma2)?;
    pen.validated()?;
    let prox = ProxExpectation::new(prior_samples, *pen, opts);
    let spec = SpectralAverages { d2: spectrum_samples };
    let mean_d2 = spectrum_samples.iter().sum::<f64>() / spectrum_samples.len() as f64;
    let second = prior_samples.iter().map(|b| b * b).sum::<f64>() / prior_samples.len() as f64;
    let (mut gamma, mut tau) = opts.init.unwrap_or((mean_d2, sigma2 + second + 1e-3));
    let mut omega = opts.damping;
    let mut last_change = f64::INFINITY;
    for it in 1..=opts.max_iter {
        let step = se_step(&prox, &spec, sigma2, gamma, tau)?;
        if !(step.gamma_next > 0.0 && step.tau_next > 0.0) {
            return Err(Error::Domain(format!(
                "state evolution produced gamma = {}, tau = {}",
                step.gamma_next, step.tau_next
            )));
        }
        let change = ((step.gamma_next - gamma) / gamma).abs() + ((step.tau_next - tau) / tau).abs();
        if change > last_change && omega > 1.0 / 64.0 {
            omega *= 0.5;
        }
        last_change = change;
        if change <= opts.tol {
            let fp = finish(&prox, &spec, spectrum_samples, sigma2, step.gamma_next, step.tau_next, it)?;
            if fp.residuals.iter().all(|&r| r <= opts.residual_tol) {
                return Ok(FixedPoint { converged: true, ..fp });
            }
        }
        gamma = (1.0 - omega) * gamma + omega * step.gamma_next;
        tau = (1.0 - omega) * tau + omega * step.tau_next;
    }
    let fp = finish(&prox, &spec, spectrum_samples, sigma2, gamma, tau, opts.max_iter)?;
    Err(Error::NonConvergence {
        what: "fixed-point iteration",
        iterations: opts.max_iter,
        residual: fp.residuals.iter().copied().fold(0.0, f64::max),
    })
}

fn finish(
    prox: &ProxExpectation,
    spec: &SpectralAverages,
    d2: &[f64],
    sigma2: f64,
    gamma: f64,
    tau: f64,
    iterations: usize,
) -> Result<FixedPoint> {
    let step = se_step(prox, spec, sigma2, gamma, tau)?;
    let eta = step.eta;
    let tau_dstar = step.tau_dstar;
    let residuals = equation_residuals(prox, spec, d2, sigma2, gamma, eta, tau, tau_dstar)?;
    Ok(FixedPoint { gamma_star: gamma, eta_star: eta, tau_star: tau, tau_dstar, residuals, iterations, converged: false })
}

#[allow(clippy::too_many_arguments)]
fn equation_residuals(
    prox: &ProxExpectation,
    spec: &SpectralAverages,
    d2: &[f64],
    sigma2: f64,
    gamma: f64,
    eta: f64,
    tau: f64,
    tau_dstar: f64,
) -> Result<[f64; 4]> {
    let m = prox.moments(1.0 / gamma, tau);
    let ratio = gamma / eta;
    let ra = (ratio - m.deriv).abs() / ratio;
    let rhs_b = eta * eta / ((eta - gamma) * (eta - gamma)) * (m.mse - ratio * ratio * tau);
    let rb = (tau_dstar - rhs_b).abs() / tau_dstar.abs().max(tau);
    let r = spectral::empirical_r_transform(d2, 1.0 / eta)?;
    let rc = (gamma + r).abs() / gamma;
    let c = eta - gamma;
    let rhs_d = (eta / gamma).powi(2) * (spec.error(c, sigma2, tau_dstar) - (c / eta).powi(2) * tau_dstar);
    let rd = (tau - rhs_d).abs() / tau;
    Ok([ra, rb, rc, rd])
}

/// Relative residuals of the four fixed-point equations at a given point.
pub fn fixed_point_residuals(
    spectrum_samples: &[f64],
    prior_samples: &[f64],
    sigma2: f64,
    pen: &Penalty,
    fp: &FixedPoint,
    opts: &FixedPointOptions,
) -> Result<[f64; 4]> {
    check_samples(spectrum_samples, prior_samples, sigma2)?;
    let prox = ProxExpectation::new(prior_samples, *pen, opts);
    let spec = SpectralAverages { d2: spectrum_samples };
    equation_residuals(
        &prox,
        &spec,
        spectrum_samples,
        sigma2,
        fp.gamma_star,
        fp.eta_star,
        fp.tau_star,
        fp.tau_dstar,
    )
}

/// Derivative at its fixed point of the map governing the correlation of
/// successive state-evolution iterates:
/// `(η/γ)² (E η²/(D² + η − γ)² − 1) · (E (Prox′)² − (γ/η)²)`.
/// Values below one certify local convergence.
pub fn correlation_map_derivative(
    spectrum_samples: &[f64],
    prior_samples: &[f64],
    pen: &Penalty,
    fp: &FixedPoint,
    opts: &FixedPointOptions,
) -> Result<f64> {
    check_samples(spectrum_samples, prior_samples, 0.0)?;
    let prox = ProxExpectation::new(prior_samples, *pen, opts);
    let spec = SpectralAverages { d2: spectrum_samples };
    let (g, e) = (fp.gamma_star, fp.eta_star);
    let m = prox.moments(1.0 / g, fp.tau_star);
    Ok((e / g).powi(2) * (spec.weighted(e, e - g) - 1.0) * (m.deriv_sq - (g / e).powi(2)))
}

/// Iterates of a VAMP run.
#[derive(Debug, Clone, Serialize)]
pub struct VampState {
    pub t: usize,
    #[serde(serialize_with = "crate::io::ser_array")]
    pub x1: Array1<f64>,
    #[serde(serialize_with = "crate::io::ser_array")]
    pub x2: Array1<f64>,
    #[serde(serialize_with = "crate::io::ser_array")]
    pub r1: Array1<f64>,
    #[serde(serialize_with = "crate::io::ser_array")]
    pub r2: Array1<f64>,
    pub gamma1: f64,
    pub gamma2: f64,
    /// `(1/p)‖x̂₁ − β̂‖²` when a reference estimate was supplied.
    pub dist_to_reference: Option<f64>,
}

/// Solves `(XᵀX + cI) x = b` through the right singular basis.
struct RidgeSolver<'a> {
    spec: &'a DesignSpectrum,
}

impl RidgeSolver<'_> {
    fn solve(&self, c: f64, b: ArrayView1<f64>) -> Array1<f64> {
        let mut w = self.spec.o.dot(&b);
        Zip::from(&mut w).and(&self.spec.d2).for_each(|wi, &d| *wi /= d + c);
        self.spec.o.t().dot(&w)
    }

    fn trace_fraction(&self, c: f64) -> f64 {
        self.spec.d2.iter().map(|&d| 1.0 / (d + c)).sum::<f64>() / self.spec.p as f64
    }
}

fn mean_sq_dist(a: &Array1<f64>, b: Option<ArrayView1<f64>>) -> Option<f64> {
    b.map(|b| Zip::from(a).and(&b).fold(0.0, |acc, &u, &v| acc + (u - v) * (u - v)) / a.len() as f64)
}

/// Oracle VAMP with the population parameters held fixed, started at
/// `r₁₀ = β* + N(0, τ* I)`.
#[allow(clippy::too_many_arguments)]
pub fn oracle_vamp(
    x: ArrayView2<f64>,
    spec: &DesignSpectrum,
    y: ArrayView1<f64>,
    beta_star: ArrayView1<f64>,
    fp: &FixedPoint,
    pen: &Penalty,
    iterations: usize,
    reference: Option<ArrayView1<f64>>,
    seed: u64,
) -> Result<Vec<VampState>> {
    let (n, p) = x.dim();
    if y.len() != n || beta_star.len() != p || spec.p != p {
        return Err(Error::DimMismatch("design, response and signal disagree".into()));
    }
    let (g, e) = (fp.gamma_star, fp.eta_star);
    if !(e > g) {
        return Err(Error::Domain(format!("eta* = {e} must exceed gamma* = {g}")));
    }
    let c = e - g;
    let mut rng = rng::stream(seed, Stream::Init);
    let sd = fp.tau_star.sqrt();
    let mut r1 = beta_star.mapv(|b| b + sd * <StandardNormal as Distribution<f64>>::sample(&StandardNormal, &mut rng));
    let xty = x.t().dot(&y);
    let solver = RidgeSolver { spec };
    let mut out = Vec::with_capacity(iterations);
    for t in 1..=iterations {
        let x1 = r1.mapv(|v| pen.prox(1.0 / g, v));
        let r2 = (&x1 * e - &r1 * g) / c;
        let x2 = solver.solve(c, (&xty + &(&r2 * c)).view());
        r1 = (&x2 * e - &r2 * c) / g;
        let dist = mean_sq_dist(&x1, reference);
        out.push(VampState { t, x1, x2, r1: r1.clone(), r2, gamma1: g, gamma2: c, dist_to_reference: dist });
    }
    Ok(out)
}

/// Starting point for [`data_vamp`].
#[derive(Debug, Clone)]
pub struct DataVampInit {
    pub gamma1: f64,
    pub r1: Array1<f64>,
}

/// VAMP with the precisions estimated from the iterates themselves.
pub fn data_vamp(
    x: ArrayView2<f64>,
    spec: &DesignSpectrum,
    y: ArrayView1<f64>,
    pen: &Penalty,
    init: &DataVampInit,
    iterations: usize,
    reference: Option<ArrayView1<f64>>,
) -> Result<Vec<VampState>> {
    let (n, p) = x.dim();
    if y.len() != n || init.r1.len() != p || spec.p != p {
        return Err(Error::DimMismatch("design, response and initialization disagree".into()));
    }
    if !(init.gamma1 > 0.0) {
        return Err(Error::InvalidInput("initial gamma must be positive".into()));
    }
    let xty = x.t().dot(&y);
    let solver = RidgeSolver { spec };
    let mut g1 = init.gamma1;
    let mut r1 = init.r1.clone();
    let mut out = Vec::with_capacity(iterations);
    for t in 1..=iterations {
        let v = 1.0 / g1;
        let x1 = r1.mapv(|r| pen.prox(v, r));
        let a1 = r1.iter().map(|&r| pen.prox_deriv_extended(v, r)).sum::<f64>() / p as f64;
        if !(a1 > 0.0 && a1 < 1.0) {
            return Err(Error::Domain(format!("average prox derivative {a1} leaves (0, 1) at t = {t}")));
        }
        let eta1 = g1 / a1;
        let g2 = eta1 - g1;
        let r2 = (&x1 * eta1 - &r1 * g1) / g2;
        let x2 = solver.solve(g2, (&xty + &(&r2 * g2)).view());
        let a2 = g2 * solver.trace_fraction(g2);
        let eta2 = g2 / a2;
        let g1_next = eta2 - g2;
        if !(g1_next > 0.0 && g1_next.is_finite()) {
            return Err(Error::Domain(format!("gamma left (0, inf) at t = {t}")));
        }
        r1 = (&x2 * eta2 - &r2 * g2) / g1_next;
        let dist = mean_sq_dist(&x1, reference);
        out.push(VampState { t, x1, x2, r1: r1.clone(), r2, gamma1: g1, gamma2: g2, dist_to_reference: dist });
        g1 = g1_next;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn integrated_moments_match_monte_carlo() {
        let prior: Vec<f64> = (0..50).map(|k| if k % 3 == 0 { 0.0 } else { (k as f64 - 25.0) / 5.0 }).collect();
        let pen = Penalty::elastic_net(1.0, 0.1).unwrap();
        let exact = ProxExpectation::new(&prior, pen, &FixedPointOptions::default());
        let mc = ProxExpectation::new(&prior, pen, &FixedPointOptions { z_draws: Some(400_000), ..Default::default() });
        let (a, b) = (exact.moments(0.7, 1.3), mc.moments(0.7, 1.3));
        assert!((a.deriv - b.deriv).abs() < 5e-3);
        assert!((a.mse - b.mse).abs() / a.mse < 1e-2);
        assert!((a.deriv_sq - b.deriv_sq).abs() < 5e-3);
    }

    #[test]
    fn constant_spectrum_gamma() {
        let d2 = vec![1.7; 10];
        let prior = vec![0.0, 1.0, -2.0, 0.0, 3.0];
        let pen = Penalty::ridge(0.4).unwrap();
        let fp = solve_fixed_point(&d2, &prior, 1.0, &pen, &FixedPointOptions::default()).unwrap();
        assert!((fp.gamma_star - 1.7).abs() < 1e-8);
    }
}
