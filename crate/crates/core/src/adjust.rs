//! The spectrum-aware adjustment equation `g_p(γ) = 1` and the
//! degrees-of-freedom baselines it replaces.

use ndarray::{Array1, ArrayView1, ArrayView2, Axis};
use serde::Serialize;

use crate::error::{CertificateFailure, Error, Result};
use crate::roots;
use crate::spectral;

const NEWTON_MAX_ITER: usize = 50;
const G_TOL: f64 = 1e-12;
const BRACKET_RTOL: f64 = 1e-12;

/// Spectrum and curvatures entering `g_p`.
#[derive(Debug, Clone)]
pub struct AdjustmentProblem {
    d2: Array1<f64>,
    hpp_finite: Vec<f64>,
    n_infinite: usize,
    max_d2: f64,
    mean_d2: f64,
}

/// How the root was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RootMethod {
    Newton,
    Brent,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct Adjustment {
    pub adj: f64,
    /// `g_p(adj) − 1`.
    pub residual: f64,
    pub newton_steps: usize,
    pub method: RootMethod,
}

impl AdjustmentProblem {
    /// Builds the problem from the padded eigenvalue vector and the extended
    /// second derivatives `h″(β̂_j)` (entries in `[0, +∞]`).
    pub fn new(d2: ArrayView1<f64>, hpp: &[f64]) -> Result<Self> {
        let p = d2.len();
        if p == 0 {
            return Err(Error::InvalidInput("empty spectrum".into()));
        }
        if hpp.len() != p {
            return Err(Error::DimMismatch(format!(
                "spectrum has length {p} but {} curvatures were given",
                hpp.len()
            )));
        }
        if d2.iter().any(|&v| !(v >= 0.0) || !v.is_finite()) {
            return Err(Error::InvalidInput("eigenvalues must be finite and non-negative".into()));
        }
        if hpp.iter().any(|&h| !(h >= 0.0)) {
            return Err(Error::InvalidInput("curvatures must lie in [0, +inf]".into()));
        }
        let hpp_finite: Vec<f64> = hpp.iter().copied().filter(|h| h.is_finite()).collect();
        let n_infinite = p - hpp_finite.len();
        let max_d2 = d2.iter().copied().fold(0.0, f64::max);
        let mean_d2 = d2.sum() / p as f64;
        Ok(AdjustmentProblem { d2: d2.to_owned(), hpp_finite, n_infinite, max_d2, mean_d2 })
    }

    pub fn p(&self) -> usize {
        self.d2.len()
    }

    pub fn d2(&self) -> ArrayView1<'_, f64> {
        self.d2.view()
    }

    /// Number of infinite curvatures.
    pub fn n_infinite(&self) -> usize {
        self.n_infinite
    }

    /// Checks the well-definedness certificate and names the failing branch.
    pub fn certificate(&self) -> Result<()> {
        let p = self.p();
        if self.hpp_finite.is_empty() {
            return Err(Error::Certificate(CertificateFailure::NoFiniteCurvature));
        }
        let nnz_hpp = self.n_infinite + self.hpp_finite.iter().filter(|&&h| h != 0.0).count();
        let nnz_d2 = self.d2.iter().filter(|&&v| v != 0.0).count();
        if nnz_hpp == p || nnz_d2 == p || nnz_d2 + nnz_hpp > p {
            Ok(())
        } else {
            Err(Error::Certificate(CertificateFailure::InsufficientRank { nnz_d2, nnz_hpp, p }))
        }
    }

    /// `m(γ) = (1/p) Σ_j 1/(γ + h_j)` and its derivative.
    fn m_and_derivative(&self, gamma: f64) -> (f64, f64) {
        let (mut m, mut dm) = (0.0, 0.0);
        for &h in &self.hpp_finite {
            let inv = 1.0 / (gamma + h);
            m += inv;
            dm -= inv * inv;
        }
        let p = self.p() as f64;
        (m / p, dm / p)
    }

    /// `g_p(γ)` and `g_p′(γ)`.
    pub fn g_and_derivative(&self, gamma: f64) -> Result<(f64, f64)> {
        let (m, dm) = self.m_and_derivative(gamma);
        let (mut g, mut dg) = (0.0, 0.0);
        for &di in self.d2.iter() {
            let den = (di - gamma) * m + 1.0;
            if den == 0.0 {
                return Err(Error::InvalidInput(format!("g_p has a zero denominator at gamma = {gamma}")));
            }
            g += 1.0 / den;
            dg -= (-m + (di - gamma) * dm) / (den * den);
        }
        let p = self.p() as f64;
        Ok((g / p, dg / p))
    }

    pub fn g(&self, gamma: f64) -> Result<f64> {
        if !(gamma > 0.0) {
            return Err(Error::InvalidInput(format!("g_p requires gamma > 0, got {gamma}")));
        }
        self.g_and_derivative(gamma).map(|(g, _)| g)
    }
}

/// Evaluates `g_p(γ)`.
pub fn g_p(prob: &AdjustmentProblem, gamma: f64) -> Result<f64> {
    prob.g(gamma)
}

/// Solves `g_p(γ) = 1` by Newton from `mean(d2)`, falling back to Brent.
pub fn solve_adjustment(prob: &AdjustmentProblem) -> Result<Adjustment> {
    solve_adjustment_from(prob, prob.mean_d2)
}

/// Solves `g_p(γ) = 1` by Newton from `gamma0`, falling back to Brent.
pub fn solve_adjustment_from(prob: &AdjustmentProblem, gamma0: f64) -> Result<Adjustment> {
    prob.certificate()?;
    if prob.max_d2 <= 0.0 {
        return Err(Error::InvalidInput("spectrum is identically zero".into()));
    }
    if let Some(a) = newton(prob, gamma0) {
        return Ok(a);
    }
    brent_fallback(prob)
}

fn newton(prob: &AdjustmentProblem, gamma0: f64) -> Option<Adjustment> {
    let mut gamma = gamma0;
    if !(gamma > 0.0 && gamma <= prob.max_d2) {
        return None;
    }
    let mut last_step = f64::INFINITY;
    for k in 0..=NEWTON_MAX_ITER {
        let (g, dg) = prob.g_and_derivative(gamma).ok()?;
        let r = g - 1.0;
        if r.abs() <= G_TOL {
            return Some(Adjustment { adj: gamma, residual: r, newton_steps: k, method: RootMethod::Newton });
        }
        if !(dg > 0.0) || !dg.is_finite() {
            return None;
        }
        let step = r / dg;
        if step.abs() <= BRACKET_RTOL * prob.mean_d2 * 1e-3 {
            return Some(Adjustment { adj: gamma, residual: r, newton_steps: k, method: RootMethod::Newton });
        }
        if k > 3 && step.abs() >= last_step {
            return None;
        }
        last_step = step.abs();
        gamma -= step;
        if !(gamma > 0.0 && gamma <= prob.max_d2) {
            return None;
        }
    }
    None
}

fn brent_fallback(prob: &AdjustmentProblem) -> Result<Adjustment> {
    let f = |gamma: f64| prob.g_and_derivative(gamma).map(|(g, _)| g - 1.0).unwrap_or(f64::NAN);
    let hi = prob.max_d2;
    let mut lo = 1e-8 * prob.mean_d2;
    while f(lo) >= 0.0 {
        lo *= 1e-4;
        if lo < 1e-300 {
            return Err(Error::NonConvergence {
                what: "adjustment root bracketing",
                iterations: 0,
                residual: f(lo),
            });
        }
    }
    let root = roots::brent(f, lo, hi, BRACKET_RTOL * prob.mean_d2, G_TOL, 500).ok_or(
        Error::NonConvergence { what: "adjustment root bracketing", iterations: 0, residual: f64::NAN },
    )?;
    Ok(Adjustment { adj: root.x, residual: root.fx, newton_steps: 0, method: RootMethod::Brent })
}

/// Ridge degrees-of-freedom adjustment `1 − (1/n) Σ d_i²/(d_i² + λ₂)`.
pub fn df_adjustment_ridge(d2: ArrayView1<f64>, lambda2: f64, n: usize) -> Result<f64> {
    if !(lambda2 > 0.0) {
        return Err(Error::InvalidInput("ridge degrees of freedom need lambda2 > 0".into()));
    }
    let df: f64 = d2.iter().map(|&v| v / (v + lambda2)).sum();
    Ok(1.0 - df / n as f64)
}

/// Lasso degrees-of-freedom adjustment `1 − ŝ/n`.
pub fn df_adjustment_lasso(s_hat: usize, n: usize) -> Result<f64> {
    if s_hat >= n {
        return Err(Error::InvalidInput(format!("support size {s_hat} must be below n = {n}")));
    }
    Ok(1.0 - s_hat as f64 / n as f64)
}

/// Elastic-net degrees-of-freedom adjustment `1 − df/n` with
/// `df = tr X_S (X_SᵀX_S + λ₂I)⁻¹ X_Sᵀ` over the support `S` of `β̂`.
pub fn df_adjustment_elastic_net(x: ArrayView2<f64>, beta_hat: ArrayView1<f64>, lambda2: f64) -> Result<f64> {
    let n = x.nrows();
    let support: Vec<usize> = (0..beta_hat.len()).filter(|&j| beta_hat[j] != 0.0).collect();
    let df = if support.is_empty() {
        0.0
    } else {
        let xs = x.select(Axis(1), &support);
        if xs.iter().all(|&v| v == 0.0) {
            0.0
        } else {
            let mu = spectral::eigenvalues(xs.view())?;
            mu.iter()
                .filter(|&&m| m > 0.0)
                .map(|&m| if lambda2 > 0.0 { m / (m + lambda2) } else { 1.0 })
                .sum()
        }
    };
    if df >= n as f64 {
        return Err(Error::InvalidInput(format!("degrees of freedom {df} reach n = {n}")));
    }
    Ok(1.0 - df / n as f64)
}
