//! Simulated designs, signals and noise.
//!
//! Every generator is a pure function of its recipe and seed. Designs are
//! rescaled so that the eigenvalues of `XᵀX` average to one.

use ndarray::{s, Array1, Array2, ArrayView2, Axis};
use ndarray_linalg::{SolveTriangular, QR};
use ndarray_linalg::{Diag, UPLO};
use rand::Rng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{ChiSquared, Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{self, Stream};
use crate::spectral;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DesignFamily {
    Gaussian,
    MatrixNormal,
    Spiked,
    Lnn,
    Var,
    MultT,
    MatrixNormalB,
    SpikedB,
    LnnB,
    VarB,
    MultCauchy,
}

impl DesignFamily {
    pub const ALL: [DesignFamily; 11] = [
        DesignFamily::Gaussian,
        DesignFamily::MatrixNormal,
        DesignFamily::Spiked,
        DesignFamily::Lnn,
        DesignFamily::Var,
        DesignFamily::MultT,
        DesignFamily::MatrixNormalB,
        DesignFamily::SpikedB,
        DesignFamily::LnnB,
        DesignFamily::VarB,
        DesignFamily::MultCauchy,
    ];

    pub fn name(self) -> &'static str {
        match self {
            DesignFamily::Gaussian => "gaussian",
            DesignFamily::MatrixNormal => "matrix_normal",
            DesignFamily::Spiked => "spiked",
            DesignFamily::Lnn => "lnn",
            DesignFamily::Var => "var",
            DesignFamily::MultT => "mult_t",
            DesignFamily::MatrixNormalB => "matrix_normal_b",
            DesignFamily::SpikedB => "spiked_b",
            DesignFamily::LnnB => "lnn_b",
            DesignFamily::VarB => "var_b",
            DesignFamily::MultCauchy => "mult_cauchy",
        }
    }

    /// Parameters used when a recipe leaves them unspecified.
    pub fn default_params(self) -> DesignParams {
        match self {
            DesignFamily::Gaussian => DesignParams::Gaussian,
            DesignFamily::MatrixNormal => DesignParams::MatrixNormal { rho: 0.5, nu_factor: Some(1.1) },
            DesignFamily::MatrixNormalB => DesignParams::MatrixNormal { rho: 0.9, nu_factor: Some(1.002) },
            DesignFamily::Spiked => DesignParams::Spiked { strengths: vec![10.0; 50] },
            DesignFamily::SpikedB => DesignParams::Spiked { strengths: vec![500.0, 250.0, 50.0] },
            DesignFamily::Lnn => DesignParams::Lnn { factors: 4, power: 1 },
            DesignFamily::LnnB => DesignParams::Lnn { factors: 2, power: 15 },
            DesignFamily::Var => DesignParams::Var { alpha: vec![0.4, 0.08, 0.04], nu_factor: 1.1, zero_first_row: false },
            DesignFamily::VarB => DesignParams::Var { alpha: vec![0.7, 0.14, 0.07], nu_factor: 1.1, zero_first_row: true },
            DesignFamily::MultT => DesignParams::MultT { df: 3.0 },
            DesignFamily::MultCauchy => DesignParams::MultT { df: 1.0 },
        }
    }
}

impl std::fmt::Display for DesignFamily {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for DesignFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        DesignFamily::ALL
            .iter()
            .copied()
            .find(|f| f.name() == s.trim())
            .ok_or_else(|| Error::InvalidInput(format!("unknown design family '{s}'")))
    }
}

/// Family-specific design parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DesignParams {
    /// iid `N(0, 1)` entries.
    Gaussian,
    /// Row covariance `ρ^{|i−j|}`; column covariance inverse-Wishart with
    /// `nu_factor·p` degrees of freedom, or the identity when absent.
    MatrixNormal { rho: f64, nu_factor: Option<f64> },
    /// `V diag(strengths) Wᵀ + n⁻¹G` with Haar `V`, `W`.
    Spiked { strengths: Vec<f64> },
    /// `X₁^power X₂ ⋯ X_factors` with square leading factors.
    Lnn { factors: usize, power: usize },
    /// Rows follow `x_i = Σ_k α_k x_{i−k} + ε_i` with inverse-Wishart noise.
    Var { alpha: Vec<f64>, nu_factor: f64, zero_first_row: bool },
    /// iid multivariate-t rows with identity scale.
    MultT { df: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DesignRecipe {
    pub family: DesignFamily,
    pub n: usize,
    pub p: usize,
    #[serde(default)]
    pub params: Option<DesignParams>,
    #[serde(default)]
    pub seed: u64,
}

impl DesignRecipe {
    pub fn new(family: DesignFamily, n: usize, p: usize, seed: u64) -> Self {
        DesignRecipe { family, n, p, params: None, seed }
    }

    pub fn with_seed(&self, seed: u64) -> Self {
        DesignRecipe { seed, ..self.clone() }
    }

    pub fn resolved_params(&self) -> DesignParams {
        self.params.clone().unwrap_or_else(|| self.family.default_params())
    }
}

/// Generates the design and rescales it to unit mean eigenvalue.
pub fn generate_design(recipe: &DesignRecipe) -> Result<Array2<f64>> {
    let (n, p) = (recipe.n, recipe.p);
    if n == 0 || p == 0 {
        return Err(Error::InvalidInput("design dimensions must be positive".into()));
    }
    let mut rng = rng::stream(recipe.seed, Stream::Design);
    let x = match recipe.resolved_params() {
        DesignParams::Gaussian => gaussian_matrix(n, p, &mut rng),
        DesignParams::MatrixNormal { rho, nu_factor } => matrix_normal(n, p, rho, nu_factor, &mut rng)?,
        DesignParams::Spiked { strengths } => {
            let mut haar = rng::stream(recipe.seed, Stream::Haar);
            spiked(n, p, &strengths, &mut rng, &mut haar)?
        }
        DesignParams::Lnn { factors, power } => lnn(n, p, factors, power, &mut rng)?,
        DesignParams::Var { alpha, nu_factor, zero_first_row } => {
            var_design(n, p, &alpha, nu_factor, zero_first_row, &mut rng)?
        }
        DesignParams::MultT { df } => mult_t(n, p, df, &mut rng)?,
    };
    Ok(spectral::rescale_unit_mean_eig(x.view())?.0)
}

fn gaussian_matrix<R: Rng>(n: usize, p: usize, rng: &mut R) -> Array2<f64> {
    Array2::from_shape_simple_fn((n, p), || StandardNormal.sample(rng))
}

fn check_nu(nu_factor: f64, p: usize) -> Result<f64> {
    let nu = nu_factor * p as f64;
    if nu > p as f64 - 1.0 {
        Ok(nu)
    } else {
        Err(Error::InvalidInput(format!("inverse-Wishart degrees of freedom {nu} must exceed p - 1")))
    }
}

/// Lower Bartlett factor `L` of a `Wishart(I_p, ν)` draw `W = LLᵀ`.
fn bartlett_factor<R: Rng>(p: usize, nu: f64, rng: &mut R) -> Result<Array2<f64>> {
    let mut l = Array2::<f64>::zeros((p, p));
    for i in 0..p {
        let chi = ChiSquared::new(nu - i as f64).map_err(|e| Error::InvalidInput(e.to_string()))?;
        l[[i, i]] = chi.sample(rng).sqrt();
        for j in 0..i {
            l[[i, j]] = StandardNormal.sample(rng);
        }
    }
    Ok(l)
}

/// Multiplies `G` on the right by a square-root factor `A` of an
/// `InverseWishart(I_p, ν)` draw `Σ = AᵀA`, with `A = L⁻¹`.
fn right_inverse_wishart<R: Rng>(g: Array2<f64>, nu: f64, rng: &mut R) -> Result<Array2<f64>> {
    let p = g.ncols();
    let l = bartlett_factor(p, nu, rng)?;
    // Z = G L⁻¹  ⇔  Lᵀ Zᵀ = Gᵀ.
    let zt = l.t().to_owned().solve_triangular(UPLO::Upper, Diag::NonUnit, &g.t().to_owned())?;
    Ok(zt.reversed_axes())
}

fn matrix_normal<R: Rng>(n: usize, p: usize, rho: f64, nu_factor: Option<f64>, rng: &mut R) -> Result<Array2<f64>> {
    if !(rho.abs() < 1.0) {
        return Err(Error::InvalidInput(format!("correlation {rho} must lie in (-1, 1)")));
    }
    let mut g = gaussian_matrix(n, p, rng);
    let c = (1.0 - rho * rho).sqrt();
    for i in 1..n {
        let (prev, mut cur) = g.multi_slice_mut((s![i - 1, ..], s![i, ..]));
        cur.zip_mut_with(&prev, |b, &a| *b = rho * a + c * *b);
    }
    match nu_factor {
        Some(f) => right_inverse_wishart(g, check_nu(f, p)?, rng),
        None => Ok(g),
    }
}

/// First `m` columns of a Haar-distributed `n×n` orthogonal matrix.
pub fn haar_columns<R: Rng>(n: usize, m: usize, rng: &mut R) -> Result<Array2<f64>> {
    if m > n {
        return Err(Error::InvalidInput(format!("cannot take {m} orthonormal columns in dimension {n}")));
    }
    let g = gaussian_matrix(n, m, rng);
    let (mut q, r) = g.qr()?;
    for j in 0..m {
        if r[[j, j]] < 0.0 {
            q.column_mut(j).mapv_inplace(|v| -v);
        }
    }
    Ok(q)
}

/// Haar-distributed `p×p` orthogonal matrix (QR of a Gaussian matrix with
/// the diagonal of `R` made positive).
pub fn haar_orthogonal(p: usize, seed: u64) -> Result<Array2<f64>> {
    if p == 0 {
        return Err(Error::InvalidInput("dimension must be positive".into()));
    }
    haar_columns(p, p, &mut rng::stream(seed, Stream::Haar))
}

fn spiked<R: Rng>(n: usize, p: usize, strengths: &[f64], rng: &mut R, haar: &mut R) -> Result<Array2<f64>> {
    let m = strengths.len();
    if m > n.min(p) {
        return Err(Error::InvalidInput(format!("{m} spikes exceed min(n, p) = {}", n.min(p))));
    }
    let v = haar_columns(n, m, haar)?;
    let w = haar_columns(p, m, haar)?;
    let mut vr = v;
    for (j, &a) in strengths.iter().enumerate() {
        vr.column_mut(j).mapv_inplace(|x| x * a);
    }
    let noise = gaussian_matrix(n, p, rng) / n as f64;
    Ok(vr.dot(&w.t()) + noise)
}

fn lnn<R: Rng>(n: usize, p: usize, factors: usize, power: usize, rng: &mut R) -> Result<Array2<f64>> {
    if factors < 1 || power < 1 {
        return Err(Error::InvalidInput("LNN needs at least one factor and a positive power".into()));
    }
    if factors == 1 {
        return Ok(gaussian_matrix(n, p, rng));
    }
    let scale = 1.0 / (n as f64).sqrt();
    let first = gaussian_matrix(n, n, rng) * scale;
    let mut acc = first.clone();
    for _ in 1..power {
        acc = acc.dot(&first);
    }
    for _ in 1..factors - 1 {
        acc = acc.dot(&(gaussian_matrix(n, n, rng) * scale));
    }
    Ok(acc.dot(&gaussian_matrix(n, p, rng)))
}

fn var_design<R: Rng>(
    n: usize,
    p: usize,
    alpha: &[f64],
    nu_factor: f64,
    zero_first_row: bool,
    rng: &mut R,
) -> Result<Array2<f64>> {
    let eps = right_inverse_wishart(gaussian_matrix(n, p, rng), check_nu(nu_factor, p)?, rng)?;
    let mut x = Array2::<f64>::zeros((n, p));
    for i in 0..n {
        if i == 0 && zero_first_row {
            continue;
        }
        let mut row = eps.row(i).to_owned();
        for (k, &a) in alpha.iter().enumerate() {
            if i > k {
                row.scaled_add(a, &x.row(i - k - 1));
            }
        }
        x.row_mut(i).assign(&row);
    }
    Ok(x)
}

fn mult_t<R: Rng>(n: usize, p: usize, df: f64, rng: &mut R) -> Result<Array2<f64>> {
    let chi = ChiSquared::new(df).map_err(|e| Error::InvalidInput(e.to_string()))?;
    let mut x = gaussian_matrix(n, p, rng);
    for mut row in x.axis_iter_mut(Axis(0)) {
        let w: f64 = chi.sample(rng);
        let s = (df / w).sqrt();
        row.mapv_inplace(|v| v * s);
    }
    Ok(x)
}

/// One component `weight·N(mean, sd²)` of a mixture (`sd = 0` is a point mass).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MixtureComponent {
    pub weight: f64,
    pub mean: f64,
    pub sd: f64,
}

/// Signal component along selected principal directions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Alignment {
    /// Zero-based indices into the descending-eigenvalue order.
    pub indices: Vec<usize>,
    pub magnitudes: Vec<f64>,
    /// When true, magnitudes are multiplied by `√p`.
    #[serde(default)]
    pub sqrt_p_units: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignalRecipe {
    pub mixture: Vec<MixtureComponent>,
    #[serde(default)]
    pub alignment: Option<Alignment>,
    #[serde(default)]
    pub seed: u64,
}

impl SignalRecipe {
    /// `0.24·N(−20, 1) + 0.06·N(10, 1) + 0.7·δ₀`.
    pub fn default_mixture() -> Vec<MixtureComponent> {
        vec![
            MixtureComponent { weight: 0.24, mean: -20.0, sd: 1.0 },
            MixtureComponent { weight: 0.06, mean: 10.0, sd: 1.0 },
            MixtureComponent { weight: 0.7, mean: 0.0, sd: 0.0 },
        ]
    }

    pub fn mixture_only(seed: u64) -> Self {
        SignalRecipe { mixture: Self::default_mixture(), alignment: None, seed }
    }

    fn validate(&self) -> Result<()> {
        if self.mixture.is_empty() {
            return Err(Error::InvalidInput("mixture needs at least one component".into()));
        }
        let total: f64 = self.mixture.iter().map(|c| c.weight).sum();
        if self.mixture.iter().any(|c| !(c.weight >= 0.0) || !(c.sd >= 0.0) || !c.mean.is_finite())
            || (total - 1.0).abs() > 1e-9
        {
            return Err(Error::InvalidInput("mixture weights must be non-negative and sum to one".into()));
        }
        Ok(())
    }

    /// Draws `count` iid samples from the mixture.
    pub fn sample_mixture<R: Rng>(&self, count: usize, rng: &mut R) -> Result<Array1<f64>> {
        self.validate()?;
        Ok(Array1::from_shape_simple_fn(count, || {
            let u: f64 = rng.random();
            let mut acc = 0.0;
            let mut comp = self.mixture[self.mixture.len() - 1];
            for c in &self.mixture {
                acc += c.weight;
                if u < acc {
                    comp = *c;
                    break;
                }
            }
            let z: f64 = StandardNormal.sample(rng);
            comp.mean + comp.sd * z
        }))
    }

    /// The mixture part `ζ*` of the signal.
    pub fn zeta(&self, p: usize) -> Result<Array1<f64>> {
        self.sample_mixture(p, &mut rng::stream(self.seed, Stream::Signal))
    }

    /// Samples from the signal prior for population computations.
    pub fn prior_samples(&self, count: usize, seed: u64) -> Result<Vec<f64>> {
        Ok(self.sample_mixture(count, &mut rng::stream(seed, Stream::Prior))?.to_vec())
    }
}

/// `Σ_i υ*_i o_{J(i)}`, with `o` the rows of the right singular basis.
pub fn aligned_component(alignment: &Alignment, o: ArrayView2<f64>) -> Result<Array1<f64>> {
    let p = o.ncols();
    if alignment.indices.len() != alignment.magnitudes.len() {
        return Err(Error::InvalidInput("alignment indices and magnitudes differ in length".into()));
    }
    let scale = if alignment.sqrt_p_units { (p as f64).sqrt() } else { 1.0 };
    let mut b = Array1::<f64>::zeros(p);
    for (&i, &m) in alignment.indices.iter().zip(&alignment.magnitudes) {
        if i >= o.nrows() {
            return Err(Error::InvalidInput(format!("alignment index {i} out of range for p = {p}")));
        }
        b.scaled_add(m * scale, &o.row(i));
    }
    Ok(b)
}

/// `β* = β*_al + ζ*`; the alignment part needs the right singular basis.
pub fn generate_signal(recipe: &SignalRecipe, p: usize, o: Option<ArrayView2<f64>>) -> Result<Array1<f64>> {
    let zeta = recipe.zeta(p)?;
    match &recipe.alignment {
        None => Ok(zeta),
        Some(al) => {
            let o = o.ok_or_else(|| Error::InvalidInput("aligned signal requires the right singular basis".into()))?;
            if o.ncols() != p {
                return Err(Error::DimMismatch(format!("basis has {} columns, expected {p}", o.ncols())));
            }
            Ok(zeta + aligned_component(al, o)?)
        }
    }
}

/// `N(0, σ² I_n)` noise.
pub fn generate_noise(n: usize, sigma2: f64, seed: u64) -> Result<Array1<f64>> {
    if !(sigma2 >= 0.0) {
        return Err(Error::InvalidInput("noise variance must be non-negative".into()));
    }
    let mut rng = rng::stream(seed, Stream::Noise);
    let s = sigma2.sqrt();
    Ok(Array1::from_shape_simple_fn(n, || s * <StandardNormal as Distribution<f64>>::sample(&StandardNormal, &mut rng)))
}

/// Marchenko–Pastur law with ratio `y ∈ (0, 1]` (unit-variance entries).
#[derive(Debug, Clone)]
pub struct MarchenkoPastur {
    pub ratio: f64,
    lo: f64,
    hi: f64,
    /// Cumulative mass on a uniform grid in the angle `θ`, where
    /// `x = (lo + hi)/2 − (hi − lo)/2 · cos θ`.
    cdf: Vec<f64>,
}

const MP_GRID: usize = 8192;

impl MarchenkoPastur {
    pub fn new(ratio: f64) -> Result<Self> {
        if !(ratio > 0.0 && ratio <= 1.0) {
            return Err(Error::InvalidInput(format!("ratio {ratio} must lie in (0, 1]")));
        }
        let lo = (1.0 - ratio.sqrt()).powi(2);
        let hi = (1.0 + ratio.sqrt()).powi(2);
        let (mid, rad) = ((lo + hi) / 2.0, (hi - lo) / 2.0);
        let h = std::f64::consts::PI / MP_GRID as f64;
        // Density in θ: rad² sin²θ / (2π y x); vanishes at θ = 0 unless y = 1.
        let dens = |t: f64| {
            let x = mid - rad * t.cos();
            if x <= 0.0 {
                0.0
            } else {
                rad * rad * t.sin().powi(2) / (2.0 * std::f64::consts::PI * ratio * x)
            }
        };
        let mut cdf = vec![0.0; MP_GRID + 1];
        for k in 0..MP_GRID {
            let (a, b) = (k as f64 * h, (k + 1) as f64 * h);
            // Gauss–Legendre with three nodes on each cell.
            let (c, r) = ((a + b) / 2.0, (b - a) / 2.0);
            let nodes = [(-0.774_596_669_241_483_4, 5.0 / 9.0), (0.0, 8.0 / 9.0), (0.774_596_669_241_483_4, 5.0 / 9.0)];
            let cell: f64 = nodes.iter().map(|&(u, w)| w * dens(c + r * u)).sum::<f64>() * r;
            cdf[k + 1] = cdf[k] + cell;
        }
        let total = cdf[MP_GRID];
        cdf.iter_mut().for_each(|v| *v /= total);
        Ok(MarchenkoPastur { ratio, lo, hi, cdf })
    }

    pub fn support(&self) -> (f64, f64) {
        (self.lo, self.hi)
    }

    pub fn density(&self, x: f64) -> f64 {
        if x <= self.lo || x >= self.hi {
            return 0.0;
        }
        ((self.hi - x) * (x - self.lo)).sqrt() / (2.0 * std::f64::consts::PI * self.ratio * x)
    }

    pub fn quantile(&self, u: f64) -> f64 {
        let u = u.clamp(0.0, 1.0);
        let k = self.cdf.partition_point(|&c| c < u).clamp(1, MP_GRID);
        let (c0, c1) = (self.cdf[k - 1], self.cdf[k]);
        let frac = if c1 > c0 { (u - c0) / (c1 - c0) } else { 0.0 };
        let theta = (k as f64 - 1.0 + frac) * std::f64::consts::PI / MP_GRID as f64;
        let (mid, rad) = ((self.lo + self.hi) / 2.0, (self.hi - self.lo) / 2.0);
        mid - rad * theta.cos()
    }
}

/// Limiting eigenvalue law of `XᵀX` for `X` with iid `N(0, 1/n)` entries
/// and aspect ratio `δ = n/p`, mapped from uniforms.
fn mp_eigenvalue(delta: f64, mp: &MarchenkoPastur, u: f64, v: f64) -> f64 {
    if delta >= 1.0 {
        mp.quantile(u)
    } else if v < 1.0 - delta {
        0.0
    } else {
        mp.quantile(u) / delta
    }
}

fn mp_for(delta: f64) -> Result<MarchenkoPastur> {
    if !(delta > 0.0 && delta.is_finite()) {
        return Err(Error::InvalidInput(format!("aspect ratio {delta} must be positive")));
    }
    MarchenkoPastur::new(if delta >= 1.0 { 1.0 / delta } else { delta })
}

/// `count` iid draws of the limiting eigenvalue law for aspect ratio `δ`.
pub fn mp_samples(delta: f64, count: usize, seed: u64) -> Result<Vec<f64>> {
    let mp = mp_for(delta)?;
    let mut rng: ChaCha20Rng = rng::stream(seed, Stream::Prior);
    Ok((0..count)
        .map(|_| {
            let (u, v): (f64, f64) = (rng.random(), rng.random());
            mp_eigenvalue(delta, &mp, u, v)
        })
        .collect())
}

/// Deterministic midpoint quantiles of the limiting eigenvalue law.
pub fn mp_quantiles(delta: f64, count: usize) -> Result<Vec<f64>> {
    let mp = mp_for(delta)?;
    let zeros = if delta >= 1.0 { 0 } else { ((1.0 - delta) * count as f64).round() as usize };
    let rest = count - zeros;
    let mut out = vec![0.0; zeros];
    let scale = if delta >= 1.0 { 1.0 } else { 1.0 / delta };
    out.extend((0..rest).map(|k| scale * mp.quantile((k as f64 + 0.5) / rest as f64)));
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn family_names_roundtrip() {
        for f in DesignFamily::ALL {
            assert_eq!(f.name().parse::<DesignFamily>().unwrap(), f);
        }
        assert!("nope".parse::<DesignFamily>().is_err());
    }

    #[test]
    fn mp_mean_is_one() {
        for delta in [0.5, 2.0] {
            let q = mp_quantiles(delta, 20000).unwrap();
            let m = q.iter().sum::<f64>() / q.len() as f64;
            assert!((m - 1.0).abs() < 1e-3, "delta {delta}: {m}");
        }
    }

    #[test]
    fn mp_quantile_inverts_density() {
        let mp = MarchenkoPastur::new(0.5).unwrap();
        let x = mp.quantile(0.3);
        let (lo, _) = mp.support();
        let n = 20000;
        let h = (x - lo) / n as f64;
        let mass: f64 = (0..n).map(|k| mp.density(lo + (k as f64 + 0.5) * h) * h).sum();
        assert!((mass - 0.3).abs() < 1e-4);
    }

    #[test]
    fn pure_point_mass_is_zero() {
        let r = SignalRecipe {
            mixture: vec![MixtureComponent { weight: 1.0, mean: 0.0, sd: 0.0 }],
            alignment: None,
            seed: 1,
        };
        assert!(r.zeta(50).unwrap().iter().all(|&b| b == 0.0));
    }
}
