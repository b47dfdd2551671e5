//! Coordinate-wise tests, confidence intervals and calibration metrics for a
//! debiased estimator with per-coordinate variance `τ̂*`.

use std::io::Write;
use std::path::Path;

use ndarray::{Array1, ArrayView1};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::gaussian;

/// Two-sided p-values `2(1 − Φ(|β̂ᵘ_i|/√τ̂*))`.
pub fn p_values(beta_u: ArrayView1<f64>, tau_star: f64) -> Result<Array1<f64>> {
    if !(tau_star > 0.0) {
        return Err(Error::InvalidInput(format!("tau_star must be positive, got {tau_star}")));
    }
    let s = tau_star.sqrt();
    Ok(beta_u.mapv(|b| gaussian::two_sided_pvalue(b / s)))
}

/// Quantile offsets `(a, b)` with `Φ(b) − Φ(a) = 1 − α`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IntervalOffsets {
    pub a: f64,
    pub b: f64,
}

impl IntervalOffsets {
    /// `a = Φ⁻¹(α/2)`, `b = Φ⁻¹(1 − α/2)`.
    pub fn symmetric(alpha: f64) -> Result<Self> {
        check_alpha(alpha)?;
        Ok(IntervalOffsets { a: gaussian::quantile(alpha / 2.0), b: gaussian::quantile(1.0 - alpha / 2.0) })
    }

    /// Offsets placing lower-tail mass `alpha_lo` below the interval.
    pub fn with_lower_mass(alpha: f64, alpha_lo: f64) -> Result<Self> {
        check_alpha(alpha)?;
        if !(alpha_lo >= 0.0 && alpha_lo <= alpha) {
            return Err(Error::InvalidInput(format!("lower mass {alpha_lo} must lie in [0, {alpha}]")));
        }
        Ok(IntervalOffsets { a: gaussian::quantile(alpha_lo), b: gaussian::quantile(1.0 - (alpha - alpha_lo)) })
    }
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!("alpha must lie in (0, 1), got {alpha}")))
    }
}

/// Intervals `(β̂ᵘ_i + a√τ̂*, β̂ᵘ_i + b√τ̂*)`.
pub fn confidence_intervals(
    beta_u: ArrayView1<f64>,
    tau_star: f64,
    offsets: IntervalOffsets,
) -> Result<Vec<(f64, f64)>> {
    if !(tau_star > 0.0) {
        return Err(Error::InvalidInput(format!("tau_star must be positive, got {tau_star}")));
    }
    let s = tau_star.sqrt();
    Ok(beta_u.iter().map(|&b| (b + offsets.a * s, b + offsets.b * s)).collect())
}

/// Symmetric intervals at level `1 − α`.
pub fn symmetric_intervals(beta_u: ArrayView1<f64>, tau_star: f64, alpha: f64) -> Result<Vec<(f64, f64)>> {
    confidence_intervals(beta_u, tau_star, IntervalOffsets::symmetric(alpha)?)
}

#[derive(Debug, Clone, Serialize)]
pub struct InferenceReport {
    pub alpha: f64,
    pub offsets: IntervalOffsets,
    pub pvalues: Vec<f64>,
    pub decisions: Vec<bool>,
    pub intervals: Vec<(f64, f64)>,
}

/// p-values, level-α decisions and symmetric intervals in one report.
pub fn report(beta_u: ArrayView1<f64>, tau_star: f64, alpha: f64) -> Result<InferenceReport> {
    let offsets = IntervalOffsets::symmetric(alpha)?;
    let pvalues = p_values(beta_u, tau_star)?.to_vec();
    let decisions = pvalues.iter().map(|&pv| pv <= alpha).collect();
    let intervals = confidence_intervals(beta_u, tau_star, offsets)?;
    Ok(InferenceReport { alpha, offsets, pvalues, decisions, intervals })
}

impl InferenceReport {
    /// Writes `index,beta_u,pvalue,ci_lo,ci_hi,reject` rows.
    pub fn write_csv(&self, path: &Path, beta_u: ArrayView1<f64>) -> Result<()> {
        let mut w = std::io::BufWriter::new(
            std::fs::File::create(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?,
        );
        writeln!(w, "index,beta_u,pvalue,ci_lo,ci_hi,reject")?;
        for i in 0..self.pvalues.len() {
            let (lo, hi) = self.intervals[i];
            writeln!(w, "{i},{:e},{:e},{lo:e},{hi:e},{}", beta_u[i], self.pvalues[i], self.decisions[i] as u8)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// FPR, TPR and FCP; `None` marks a zero denominator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CalibrationMetrics {
    pub fpr: Option<f64>,
    pub tpr: Option<f64>,
    pub fcp: Option<f64>,
}

/// Calibration of tests and intervals against a known signal.
pub fn calibration_metrics(
    beta_star: ArrayView1<f64>,
    pvalues: ArrayView1<f64>,
    intervals: &[(f64, f64)],
    alpha: f64,
) -> Result<CalibrationMetrics> {
    let p = beta_star.len();
    if pvalues.len() != p || intervals.len() != p {
        return Err(Error::DimMismatch("signal, p-values and intervals differ in length".into()));
    }
    let (mut nulls, mut false_pos, mut alts, mut true_pos, mut miss) = (0usize, 0usize, 0usize, 0usize, 0usize);
    for i in 0..p {
        let reject = pvalues[i] <= alpha;
        if beta_star[i] == 0.0 {
            nulls += 1;
            false_pos += reject as usize;
        } else {
            alts += 1;
            true_pos += reject as usize;
        }
        let (lo, hi) = intervals[i];
        if !(lo <= beta_star[i] && beta_star[i] <= hi) {
            miss += 1;
        }
    }
    let ratio = |a: usize, b: usize| if b == 0 { None } else { Some(a as f64 / b as f64) };
    Ok(CalibrationMetrics { fpr: ratio(false_pos, nulls), tpr: ratio(true_pos, alts), fcp: ratio(miss, p) })
}

/// Limiting TPR `P(|B/√τ + Z| ≥ z_{1−α/2}, |B| ≥ μ₀) / P(|B| ≥ μ₀)`,
/// averaging over the prior samples with the Gaussian integrated exactly.
pub fn tpr_limit(prior_samples: &[f64], tau_star: f64, alpha: f64, mu0: f64) -> Result<f64> {
    check_alpha(alpha)?;
    let c = gaussian::quantile(1.0 - alpha / 2.0);
    let s = tau_star.sqrt();
    let (mut hits, mut count) = (0.0, 0usize);
    for &b in prior_samples.iter().filter(|b| b.abs() >= mu0 && **b != 0.0) {
        count += 1;
        hits += if s == 0.0 {
            1.0
        } else {
            let m = b / s;
            gaussian::cdf(-c - m) + gaussian::sf(c - m)
        };
    }
    if count == 0 {
        return Err(Error::InvalidInput("prior has no mass above the signal threshold".into()));
    }
    Ok(hits / count as f64)
}

/// Benjamini–Hochberg step-up procedure; returns rejected indices in
/// increasing order.
pub fn benjamini_hochberg(pvalues: &[f64], q: f64) -> Vec<usize> {
    let m = pvalues.len();
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| pvalues[a].total_cmp(&pvalues[b]));
    let k = (0..m)
        .rev()
        .find(|&r| pvalues[order[r]] <= q * (r + 1) as f64 / m as f64)
        .map_or(0, |r| r + 1);
    let mut rejected: Vec<usize> = order[..k].to_vec();
    rejected.sort_unstable();
    rejected
}

/// Benjamini–Hochberg adjusted p-values `min_{k ≥ r} m·P_(k)/k`, capped at 1.
pub fn bh_adjusted(pvalues: &[f64]) -> Vec<f64> {
    let m = pvalues.len();
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| pvalues[a].total_cmp(&pvalues[b]));
    let mut adjusted = vec![0.0; m];
    let mut running = 1.0f64;
    for r in (0..m).rev() {
        let i = order[r];
        running = running.min(pvalues[i] * m as f64 / (r + 1) as f64);
        adjusted[i] = running;
    }
    adjusted
}
