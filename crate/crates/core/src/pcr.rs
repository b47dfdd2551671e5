//! Debiasing when the signal aligns with leading principal components.
//!
//! The signal is split as `β* = Σ_i υ*_i o_{J(i)} + ζ*`. The aligned part is
//! estimated by principal components regression on the selected directions
//! `J`; the remainder by spectrum-aware debiasing on a transformed dataset
//! built from the other directions. The two estimates are summed.

use std::str::FromStr;

use ndarray::{Array1, Array2, ArrayView1, ArrayView2, Axis};
use ndarray_linalg::Solve;
use serde::{Deserialize, Serialize};

use crate::debias::{self, DebiasOptions, DebiasResult, DfDebiasResult, Flag};
use crate::error::{Error, Result};
use crate::fit::{self, FitOptions};
use crate::gaussian;
use crate::inference;
use crate::io::ser_array;
use crate::penalty::Penalty;
use crate::spectral::{self, DesignSpectrum};

/// Selection of principal components (0-based, in descending eigenvalue order).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum JSpec {
    /// The `k` leading components.
    Top(usize),
    /// An explicit list of component indices.
    List(Vec<usize>),
}

impl JSpec {
    pub fn resolve(&self, p: usize) -> Result<Vec<usize>> {
        let j = match self {
            JSpec::Top(k) => (0..*k).collect::<Vec<_>>(),
            JSpec::List(v) => v.clone(),
        };
        let mut sorted = j.clone();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != j.len() {
            return Err(Error::InvalidInput("component list has duplicates".into()));
        }
        if let Some(&bad) = j.iter().find(|&&i| i >= p) {
            return Err(Error::InvalidInput(format!("component index {bad} is out of range for p = {p}")));
        }
        Ok(j)
    }
}

impl FromStr for JSpec {
    type Err = Error;

    /// Parses `top:k`, a comma-separated index list, or the empty string.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if let Some(k) = s.strip_prefix("top:") {
            return k
                .trim()
                .parse()
                .map(JSpec::Top)
                .map_err(|_| Error::InvalidInput(format!("cannot parse component spec '{s}'")));
        }
        if s.is_empty() || s == "none" {
            return Ok(JSpec::List(Vec::new()));
        }
        s.split(',')
            .map(|t| t.trim().parse::<usize>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map(JSpec::List)
            .map_err(|_| Error::InvalidInput(format!("cannot parse component spec '{s}'")))
    }
}

fn check_j(spec: &DesignSpectrum, j: &[usize]) -> Result<()> {
    for &i in j {
        if i >= spec.p {
            return Err(Error::InvalidInput(format!("component index {i} is out of range")));
        }
        if spec.d2[i] <= 0.0 {
            return Err(Error::InvalidInput(format!("component {i} has a zero eigenvalue")));
        }
    }
    if !j.is_empty() && j.len() >= spec.n {
        return Err(Error::InvalidInput(format!("{} components selected but n = {}", j.len(), spec.n)));
    }
    Ok(())
}

/// PCR coefficients `θ̂_i = q_iᵀy / d_i` and `β̂_al = O_Jᵀ θ̂`.
pub fn alignment_pcr(spec: &DesignSpectrum, y: ArrayView1<f64>, j: &[usize]) -> Result<(Array1<f64>, Array1<f64>)> {
    if y.len() != spec.n {
        return Err(Error::DimMismatch(format!("y has {} entries but n = {}", y.len(), spec.n)));
    }
    check_j(spec, j)?;
    let theta = Array1::from_iter(j.iter().map(|&i| spec.q.row(i).dot(&y) / spec.d2[i].sqrt()));
    let beta_al = spec.o.select(Axis(0), j).t().dot(&theta);
    Ok((theta, beta_al))
}

/// PCR coefficients by least squares on `W = X O_Jᵀ`.
pub fn alignment_pcr_direct(
    x: ArrayView2<f64>,
    spec: &DesignSpectrum,
    y: ArrayView1<f64>,
    j: &[usize],
) -> Result<(Array1<f64>, Array1<f64>)> {
    check_j(spec, j)?;
    if j.is_empty() {
        return Ok((Array1::zeros(0), Array1::zeros(spec.p)));
    }
    let oj = spec.o.select(Axis(0), j);
    let w = x.dot(&oj.t());
    let theta = w.t().dot(&w).solve_into(w.t().dot(&y))?;
    let beta_al = oj.t().dot(&theta);
    Ok((theta, beta_al))
}

/// The transformed dataset for the directions outside `J`.
#[derive(Debug, Clone)]
pub struct ComplementData {
    pub x_new: Array2<f64>,
    pub y_new: Array1<f64>,
    /// Decomposition of `x_new`, read off the parent decomposition.
    pub spectrum: DesignSpectrum,
    /// Indices of the retained directions.
    pub jbar: Vec<usize>,
}

/// Builds `X_new = diag(d_J̄) O_J̄` and `y_new = diag(d_J̄) θ̂(J̄)`.
pub fn complement_dataset(spec: &DesignSpectrum, y: ArrayView1<f64>, j: &[usize]) -> Result<ComplementData> {
    if y.len() != spec.n {
        return Err(Error::DimMismatch(format!("y has {} entries but n = {}", y.len(), spec.n)));
    }
    check_j(spec, j)?;
    let jbar: Vec<usize> = (0..spec.p).filter(|i| spec.d2[*i] > 0.0 && !j.contains(i)).collect();
    if jbar.is_empty() {
        return Err(Error::InvalidInput("no directions remain outside the selected components".into()));
    }
    let m = jbar.len();
    let mut x_new = spec.o.select(Axis(0), &jbar);
    for (mut row, &i) in x_new.axis_iter_mut(Axis(0)).zip(&jbar) {
        let d = spec.d2[i].sqrt();
        row.mapv_inplace(|v| v * d);
    }
    let y_new = Array1::from_iter(jbar.iter().map(|&i| spec.q.row(i).dot(&y)));

    let mut order = jbar.clone();
    order.extend(j.iter().copied());
    order.extend((0..spec.p).filter(|i| spec.d2[*i] <= 0.0 && !j.contains(i)));
    let mut d2 = Array1::<f64>::zeros(spec.p);
    for (k, &i) in jbar.iter().enumerate() {
        d2[k] = spec.d2[i];
    }
    let spectrum = DesignSpectrum {
        n: m,
        p: spec.p,
        q: Array2::eye(m),
        o: spec.o.select(Axis(0), &order),
        d2,
        scale_factor: spec.scale_factor,
    };
    Ok(ComplementData { x_new, y_new, spectrum, jbar })
}

/// Adjustment used in the complement step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ComplementMethod {
    SpectrumAware,
    DegreesOfFreedom,
}

/// Alignment test statistics.
#[derive(Debug, Clone, Serialize)]
pub struct AlignmentTest {
    /// Standard deviations `s_i`.
    pub s: Vec<f64>,
    pub pvalues: Vec<f64>,
    pub adjusted: Vec<f64>,
    /// Positions in `J` rejected by Benjamini–Hochberg.
    pub rejected: Vec<usize>,
    pub q: f64,
}

/// Tests `υ*_i = 0` for each selected component with `s_i² = σ²/d²_{J(i)} + ω`.
pub fn alignment_test(
    theta: ArrayView1<f64>,
    d2_j: ArrayView1<f64>,
    sigma2: f64,
    omega_hat: f64,
    q: f64,
) -> Result<AlignmentTest> {
    if theta.len() != d2_j.len() {
        return Err(Error::DimMismatch("theta and eigenvalues differ in length".into()));
    }
    if d2_j.iter().any(|&d| !(d > 0.0)) {
        return Err(Error::InvalidInput("selected eigenvalues must be positive".into()));
    }
    let mut s = Vec::with_capacity(theta.len());
    let mut pvalues = Vec::with_capacity(theta.len());
    for (&t, &d) in theta.iter().zip(d2_j.iter()) {
        let var = sigma2 / d + omega_hat;
        if !(var > 0.0) {
            return Err(Error::InvalidInput(format!("alignment variance {var} is not positive")));
        }
        let si = var.sqrt();
        s.push(si);
        pvalues.push(gaussian::two_sided_pvalue(t / si));
    }
    let adjusted = inference::bh_adjusted(&pvalues);
    let rejected = inference::benjamini_hochberg(&pvalues, q);
    Ok(AlignmentTest { s, pvalues, adjusted, rejected, q })
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct PcrOptions {
    pub method: ComplementMethod,
    /// FDR level of the alignment test.
    pub q: f64,
    pub fit: FitOptions,
    pub debias: DebiasOptions,
}

impl Default for PcrOptions {
    fn default() -> Self {
        PcrOptions {
            method: ComplementMethod::SpectrumAware,
            q: 0.1,
            fit: FitOptions::default(),
            debias: DebiasOptions::default(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct PcrResult {
    pub j: Vec<usize>,
    #[serde(serialize_with = "ser_array")]
    pub theta_pcr: Array1<f64>,
    #[serde(serialize_with = "ser_array")]
    pub beta_al: Array1<f64>,
    #[serde(serialize_with = "ser_array")]
    pub beta_co: Array1<f64>,
    #[serde(serialize_with = "ser_array")]
    pub beta_pcr: Array1<f64>,
    /// Variance of the complement estimator.
    pub tau_star: f64,
    pub omega_hat: f64,
    /// Noise level used by the alignment test, if available.
    pub sigma2: Option<f64>,
    /// `s_i²` per selected component.
    pub gamma_diag: Vec<f64>,
    pub alignment: Option<AlignmentTest>,
    pub complement: Option<DebiasResult>,
    pub complement_df: Option<DfDebiasResult>,
    pub flags: Vec<Flag>,
}

impl PcrResult {
    pub fn standardized_errors(&self, beta_star: ArrayView1<f64>) -> Array1<f64> {
        let s = self.tau_star.sqrt();
        (&self.beta_pcr - &beta_star) / s
    }
}

/// Runs the full alignment + complement pipeline on `(X, y)`.
pub fn debiased_pcr(
    x: ArrayView2<f64>,
    y: ArrayView1<f64>,
    j: &JSpec,
    pen: &Penalty,
    sigma2: Option<f64>,
    opts: &PcrOptions,
) -> Result<PcrResult> {
    if y.len() != x.nrows() {
        return Err(Error::DimMismatch(format!("X has {} rows but y has {} entries", x.nrows(), y.len())));
    }
    let spec = spectral::decompose(x)?;
    debiased_pcr_with_spectrum(&spec, y, j, pen, sigma2, opts)
}

/// As [`debiased_pcr`] with a precomputed decomposition.
pub fn debiased_pcr_with_spectrum(
    spec: &DesignSpectrum,
    y: ArrayView1<f64>,
    j: &JSpec,
    pen: &Penalty,
    sigma2: Option<f64>,
    opts: &PcrOptions,
) -> Result<PcrResult> {
    let j = j.resolve(spec.p)?;
    let (theta, beta_al) = alignment_pcr(spec, y, &j)?;
    let comp = complement_dataset(spec, y, &j)?;
    let fit_opts = FitOptions { lipschitz: Some(comp.spectrum.d2[0]), ..opts.fit };
    let f = fit::fit(comp.x_new.view(), comp.y_new.view(), pen, &fit_opts)?;

    let mut flags = Vec::new();
    let (beta_co, tau_star, sigma2_used, complement, complement_df) = match opts.method {
        ComplementMethod::SpectrumAware => {
            let d = debias::debias(
                comp.x_new.view(),
                comp.y_new.view(),
                comp.spectrum.d2.view(),
                &f,
                pen,
                sigma2,
                &opts.debias,
            )?;
            flags.extend(d.flags.iter().copied());
            (d.beta_u.clone(), d.tau_star, Some(d.sigma2), Some(d), None)
        }
        ComplementMethod::DegreesOfFreedom => {
            if !f.converged {
                flags.push(Flag::FitNotConverged);
            }
            let d = debias::debias_degrees_of_freedom(comp.x_new.view(), comp.y_new.view(), &f, pen)?;
            (d.beta_u.clone(), d.tau, sigma2, None, Some(d))
        }
    };
    let beta_pcr = &beta_al + &beta_co;
    let mut omega_hat = beta_co.dot(&beta_co) / spec.p as f64 - tau_star;
    if omega_hat < 0.0 {
        omega_hat = 0.0;
        flags.push(Flag::OmegaClamped);
    }
    let d2_j = Array1::from_iter(j.iter().map(|&i| spec.d2[i]));
    let (gamma_diag, alignment) = match sigma2_used {
        Some(s2) if !j.is_empty() && s2 > 0.0 => {
            let t = alignment_test(theta.view(), d2_j.view(), s2, omega_hat, opts.q)?;
            (t.s.iter().map(|v| v * v).collect(), Some(t))
        }
        _ => (Vec::new(), None),
    };
    Ok(PcrResult {
        j,
        theta_pcr: theta,
        beta_al,
        beta_co,
        beta_pcr,
        tau_star,
        omega_hat,
        sigma2: sigma2_used,
        gamma_diag,
        alignment,
        complement,
        complement_df,
        flags,
    })
}
