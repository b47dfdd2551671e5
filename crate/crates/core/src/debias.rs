//! Spectrum-aware debiasing and its scalar statistics.
//!
//! Given a fitted `β̂`, the debiased estimator is
//! `β̂ᵘ = β̂ + Xᵀ(y − Xβ̂)/adj`, and each coordinate of `β̂ᵘ − β*` is
//! approximately `N(0, τ̂*)`.

use ndarray::{Array1, ArrayView1, ArrayView2, Zip};
use serde::{Deserialize, Serialize};

use crate::adjust::{self, Adjustment, AdjustmentProblem};
use crate::error::{Error, Result};
use crate::fit::{self, FitOptions, FitResult};
use crate::io::ser_array;
use crate::penalty::Penalty;
use crate::spectral;

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct DebiasOptions {
    /// The noise level is declared unidentifiable when the feasibility
    /// ratio is within this distance of one.
    pub feasibility_tol: f64,
}

impl Default for DebiasOptions {
    fn default() -> Self {
        DebiasOptions { feasibility_tol: 1e-6 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sigma2Source {
    Known,
    Estimated,
}

/// Conditions noticed while debiasing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Flag {
    /// `τ̂**` came out negative and was clamped to zero.
    TauDstarClamped,
    /// `τ̂* ≤ 0`; the run is invalid.
    TauStarNonPositive,
    /// `σ̂² ≤ 0`; the run is invalid.
    Sigma2NonPositive,
    /// The penalized fit stopped before reaching its tolerance.
    FitNotConverged,
    /// A negative alignment variance `ω̂` was clamped to zero.
    OmegaClamped,
}

#[derive(Debug, Clone, Serialize)]
pub struct DebiasResult {
    #[serde(serialize_with = "ser_array")]
    pub beta_hat: Array1<f64>,
    #[serde(serialize_with = "ser_array")]
    pub beta_u: Array1<f64>,
    pub adj: f64,
    pub eta_star: f64,
    pub tau_star: f64,
    pub tau_dstar: f64,
    pub sigma2: f64,
    pub sigma2_source: Sigma2Source,
    /// Feasibility ratio; computed whenever `η̂ ≠ adj`.
    pub feasibility_lhs: Option<f64>,
    #[serde(serialize_with = "ser_array")]
    pub r_dstar: Array1<f64>,
    pub adjustment: Adjustment,
    pub support_size: usize,
    pub flags: Vec<Flag>,
}

impl DebiasResult {
    /// A run is valid when both variances are positive.
    pub fn is_valid(&self) -> bool {
        !self.flags.iter().any(|f| matches!(f, Flag::TauStarNonPositive | Flag::Sigma2NonPositive))
    }

    /// Standardized errors `(β̂ᵘ − β*)/√τ̂*`.
    pub fn standardized_errors(&self, beta_star: ArrayView1<f64>) -> Array1<f64> {
        let s = self.tau_star.sqrt();
        Zip::from(&self.beta_u).and(&beta_star).map_collect(|&b, &t| (b - t) / s)
    }
}

fn check_dims(x: ArrayView2<f64>, y: ArrayView1<f64>, beta: ArrayView1<f64>, d2: ArrayView1<f64>) -> Result<()> {
    let (n, p) = x.dim();
    if y.len() != n {
        return Err(Error::DimMismatch(format!("X has {n} rows but y has {} entries", y.len())));
    }
    if beta.len() != p || d2.len() != p {
        return Err(Error::DimMismatch(format!(
            "X has {p} columns but beta has {} and the spectrum {} entries",
            beta.len(),
            d2.len()
        )));
    }
    Ok(())
}

/// `η̂* = ((1/p) Σ_j 1/(adj + h″_j))⁻¹` with `1/∞ = 0`.
pub fn eta_hat(adj: f64, hpp: &[f64]) -> Result<f64> {
    let s: f64 = hpp.iter().filter(|h| h.is_finite()).map(|&h| 1.0 / (adj + h)).sum();
    if s == 0.0 {
        return Err(Error::InvalidInput("all curvatures are infinite".into()));
    }
    Ok(hpp.len() as f64 / s)
}

/// `‖(I + XXᵀ/(η − adj))(y − Xβ̂)‖²`.
fn filtered_residual_norm2(x: ArrayView2<f64>, r: ArrayView1<f64>, adj: f64, eta: f64) -> f64 {
    let c = 1.0 / (eta - adj);
    let v = &r + &(x.dot(&x.t().dot(&r)) * c);
    v.dot(&v)
}

/// `τ̂** = (‖(I + XXᵀ/(η − adj))(y − Xβ̂)‖² − nσ²) / Σ d_i²`.
pub fn tau_dstar_hat(
    x: ArrayView2<f64>,
    y: ArrayView1<f64>,
    beta_hat: ArrayView1<f64>,
    adj: f64,
    eta: f64,
    sigma2: f64,
    d2: ArrayView1<f64>,
) -> Result<f64> {
    check_dims(x, y, beta_hat, d2)?;
    if eta == adj {
        return Err(Error::InvalidInput("tau** is undefined when eta equals adj".into()));
    }
    let r = &y - &x.dot(&beta_hat);
    let num = filtered_residual_norm2(x, r.view(), adj, eta) - x.nrows() as f64 * sigma2;
    Ok(num / d2.sum())
}

/// `r̂** = β̂ + Xᵀ(Xβ̂ − y)/(η − adj)`.
pub fn r_dstar(x: ArrayView2<f64>, y: ArrayView1<f64>, beta_hat: ArrayView1<f64>, adj: f64, eta: f64) -> Array1<f64> {
    let r = &x.dot(&beta_hat) - &y;
    &beta_hat + &(x.t().dot(&r) / (eta - adj))
}

/// `τ̂**` written through `r̂**`: `(‖Xr̂** − y‖² − nσ²) / Σ d_i²`.
pub fn tau_dstar_via_r_dstar(
    x: ArrayView2<f64>,
    y: ArrayView1<f64>,
    r_dstar: ArrayView1<f64>,
    sigma2: f64,
    d2: ArrayView1<f64>,
) -> Result<f64> {
    check_dims(x, y, r_dstar, d2)?;
    let v = &x.dot(&r_dstar) - &y;
    Ok((v.dot(&v) - x.nrows() as f64 * sigma2) / d2.sum())
}

/// `τ̂* = (1/p) Σ_i [η²d²σ² + (d² − adj + 2η)(adj − d²)(η − adj)²τ**] / [(d² − adj + η)² adj²]`.
pub fn tau_star_hat(d2: ArrayView1<f64>, adj: f64, eta: f64, sigma2: f64, tau_dstar: f64) -> f64 {
    let e = eta - adj;
    let s: f64 = d2
        .iter()
        .map(|&d| {
            let num = eta * eta * d * sigma2 + (d - adj + 2.0 * eta) * (adj - d) * e * e * tau_dstar;
            let den = (d - adj + eta).powi(2) * adj * adj;
            num / den
        })
        .sum();
    s / d2.len() as f64
}

/// Feasibility ratio `(n/p)·mean(d²(1 − u²)) / (mean(d²)·mean(1 − u²))` with
/// `u_i = (η − adj)/(d_i² + η − adj)`. The noise level is identifiable only
/// when this differs from one.
pub fn feasibility_lhs(d2: ArrayView1<f64>, adj: f64, eta: f64, n: usize, p: usize) -> f64 {
    let e = eta - adj;
    let len = d2.len() as f64;
    let (mut a, mut b, mut c) = (0.0, 0.0, 0.0);
    for &d in d2.iter() {
        let u = e / (d + e);
        let w = 1.0 - u * u;
        a += d * w;
        b += d;
        c += w;
    }
    (n as f64 / p as f64) * (a / len) / ((b / len) * (c / len))
}

/// Noise-level estimator; requires a feasibility ratio away from one.
pub fn sigma2_hat(
    x: ArrayView2<f64>,
    y: ArrayView1<f64>,
    beta_hat: ArrayView1<f64>,
    adj: f64,
    eta: f64,
    d2: ArrayView1<f64>,
) -> Result<f64> {
    check_dims(x, y, beta_hat, d2)?;
    let (n, p) = x.dim();
    let r = &y - &x.dot(&beta_hat);
    Ok(sigma2_hat_from_residual(x, r.view(), adj, eta, d2, n, p))
}

fn sigma2_hat_from_residual(
    x: ArrayView2<f64>,
    r: ArrayView1<f64>,
    adj: f64,
    eta: f64,
    d2: ArrayView1<f64>,
    n: usize,
    p: usize,
) -> f64 {
    let e = eta - adj;
    let total: f64 = d2.sum();
    let filtered = filtered_residual_norm2(x, r, adj, eta);
    let (mut s1, mut s2) = (0.0, 0.0);
    for &d in d2.iter() {
        let q = (d + e) * (d + e);
        s1 += e * e * d / q;
        s2 += e * e * (total - n as f64 * d) / (q * total);
    }
    let num = r.dot(&r) - filtered / total * s1;
    let den = s2 + n as f64 - p as f64;
    num / den
}

/// Debiases a fitted estimator using the spectrum `d2` of `XᵀX`.
///
/// When `sigma2` is `None` the noise level is estimated, which requires the
/// feasibility ratio to differ from one.
pub fn debias(
    x: ArrayView2<f64>,
    y: ArrayView1<f64>,
    d2: ArrayView1<f64>,
    fit: &FitResult,
    pen: &Penalty,
    sigma2: Option<f64>,
    opts: &DebiasOptions,
) -> Result<DebiasResult> {
    let beta_hat = fit.beta_hat.view();
    check_dims(x, y, beta_hat, d2)?;
    let (n, p) = x.dim();
    let hpp: Vec<f64> = beta_hat.iter().map(|&b| pen.hpp_extended(b)).collect();
    let prob = AdjustmentProblem::new(d2, &hpp)?;
    let adjustment = adjust::solve_adjustment(&prob)?;
    let adj = adjustment.adj;
    let eta = eta_hat(adj, &hpp)?;
    if eta == adj {
        return Err(Error::InvalidInput("eta equals adj; the variance formulas are undefined".into()));
    }

    let r = &y - &x.dot(&beta_hat);
    let g = x.t().dot(&r);
    let beta_u = &beta_hat + &(&g / adj);
    let r_dstar = &beta_hat - &(&g / (eta - adj));

    let mut flags = Vec::new();
    if !fit.converged {
        flags.push(Flag::FitNotConverged);
    }
    let ratio = feasibility_lhs(d2, adj, eta, n, p);
    let (sigma2, source) = match sigma2 {
        Some(s) => (s, Sigma2Source::Known),
        None => {
            if !ratio.is_finite() || (ratio - 1.0).abs() <= opts.feasibility_tol {
                return Err(Error::Feasibility { ratio, tol: opts.feasibility_tol });
            }
            let s = sigma2_hat_from_residual(x, r.view(), adj, eta, d2, n, p);
            if !(s > 0.0) {
                flags.push(Flag::Sigma2NonPositive);
            }
            (s, Sigma2Source::Estimated)
        }
    };

    let mut tau_dstar = (filtered_residual_norm2(x, r.view(), adj, eta) - n as f64 * sigma2) / d2.sum();
    if tau_dstar < 0.0 {
        tau_dstar = 0.0;
        flags.push(Flag::TauDstarClamped);
    }
    let tau_star = tau_star_hat(d2, adj, eta, sigma2, tau_dstar);
    if !(tau_star > 0.0) {
        flags.push(Flag::TauStarNonPositive);
    }

    Ok(DebiasResult {
        beta_hat: fit.beta_hat.clone(),
        beta_u,
        adj,
        eta_star: eta,
        tau_star,
        tau_dstar,
        sigma2,
        sigma2_source: source,
        feasibility_lhs: Some(ratio),
        r_dstar,
        adjustment,
        support_size: fit.support_size(),
        flags,
    })
}

/// Fits the penalized estimator and debiases it in one call.
pub fn spectrum_aware_debias(
    x: ArrayView2<f64>,
    y: ArrayView1<f64>,
    pen: &Penalty,
    sigma2: Option<f64>,
    fit_opts: &FitOptions,
    opts: &DebiasOptions,
) -> Result<(FitResult, DebiasResult)> {
    let d2 = spectral::eigenvalues(x)?;
    let fit_opts = FitOptions { lipschitz: Some(d2[0]), ..*fit_opts };
    let f = fit::fit(x, y, pen, &fit_opts)?;
    let d = debias(x, y, d2.view(), &f, pen, sigma2, opts)?;
    Ok((f, d))
}

/// Degrees-of-freedom debiasing baseline.
#[derive(Debug, Clone, Serialize)]
pub struct DfDebiasResult {
    #[serde(serialize_with = "ser_array")]
    pub beta_u: Array1<f64>,
    pub adj: f64,
    /// `‖y − Xβ̂‖² / (n·adj²)`.
    pub tau: f64,
}

impl DfDebiasResult {
    pub fn standardized_errors(&self, beta_star: ArrayView1<f64>) -> Array1<f64> {
        let s = self.tau.sqrt();
        Zip::from(&self.beta_u).and(&beta_star).map_collect(|&b, &t| (b - t) / s)
    }
}

/// Debiases with the degrees-of-freedom adjustment `1 − df/n`.
pub fn debias_degrees_of_freedom(
    x: ArrayView2<f64>,
    y: ArrayView1<f64>,
    fit: &FitResult,
    pen: &Penalty,
) -> Result<DfDebiasResult> {
    let beta_hat = fit.beta_hat.view();
    let n = x.nrows();
    if y.len() != n || beta_hat.len() != x.ncols() {
        return Err(Error::DimMismatch("design, response and coefficients disagree".into()));
    }
    let adj = adjust::df_adjustment_elastic_net(x, beta_hat, pen.lambda2())?;
    let r = &y - &x.dot(&beta_hat);
    let beta_u = &beta_hat + &(x.t().dot(&r) / adj);
    let tau = r.dot(&r) / (n as f64 * adj * adj);
    Ok(DfDebiasResult { beta_u, adj, tau })
}
