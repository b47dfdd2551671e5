//! Singular value decomposition of the design and spectral transforms.
//!
//! A design is factored as `X = Qᵀ D O` with `Q` (n×n) and `O` (p×p)
//! orthogonal and `D` rectangular diagonal. The eigenvalues of `XᵀX` are
//! stored as a length-`p` vector `d2`, sorted descending and zero-padded.

use ndarray::{Array1, Array2, ArrayView2, Axis};
use ndarray_linalg::{JobSvd, SVDDC};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::roots;

/// Relative threshold below which eigenvalues are treated as exact zeros.
pub const ZERO_EIG_RTOL: f64 = 1e-12;

/// Lower-edge offset used when inverting the Cauchy transform.
const R_EPS: f64 = 1e-9;
/// Bisection tolerance for the Cauchy transform inverse.
const R_TOL: f64 = 1e-12;

/// Singular value decomposition of a design matrix.
#[derive(Debug, Clone)]
pub struct DesignSpectrum {
    pub n: usize,
    pub p: usize,
    /// Left basis; `X = Qᵀ D O`.
    pub q: Array2<f64>,
    /// Right basis; row `i` is the `i`-th principal direction `o_i`.
    pub o: Array2<f64>,
    /// Eigenvalues of `XᵀX`, descending, length `p`.
    pub d2: Array1<f64>,
    /// Factor applied to the original matrix before decomposition.
    pub scale_factor: f64,
}

/// Diagnostics about the spectrum that do not affect any computation.
#[derive(Debug, Clone, Serialize)]
pub struct SpectrumSummary {
    pub rank: usize,
    pub max_eig: f64,
    pub mean_eig: f64,
    /// Smallest nonzero eigenvalue.
    pub min_nonzero_eig: f64,
}

fn check_finite_nonzero(x: ArrayView2<f64>) -> Result<()> {
    if x.nrows() == 0 || x.ncols() == 0 {
        return Err(Error::InvalidInput("design matrix is empty".into()));
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput("design matrix has non-finite entries".into()));
    }
    if x.iter().all(|&v| v == 0.0) {
        return Err(Error::InvalidInput("design matrix is identically zero".into()));
    }
    Ok(())
}

fn padded_eigenvalues(s: &Array1<f64>, p: usize) -> Array1<f64> {
    let mut d2 = Array1::<f64>::zeros(p);
    for (i, &si) in s.iter().enumerate().take(p) {
        d2[i] = si * si;
    }
    let cut = ZERO_EIG_RTOL * d2[0];
    d2.mapv_inplace(|v| if v <= cut { 0.0 } else { v });
    d2
}

/// Full decomposition `X = Qᵀ D O`.
pub fn decompose(x: ArrayView2<f64>) -> Result<DesignSpectrum> {
    check_finite_nonzero(x)?;
    let (n, p) = x.dim();
    let (u, s, vt) = x.to_owned().svddc(JobSvd::All)?;
    let u = u.ok_or_else(|| Error::Linalg("missing left singular vectors".into()))?;
    let vt = vt.ok_or_else(|| Error::Linalg("missing right singular vectors".into()))?;
    let mut q = u.reversed_axes();
    let mut o = vt;
    let k = n.min(p);
    for i in 0..p {
        let flip = o
            .row(i)
            .iter()
            .find(|v| v.abs() > 1e-14)
            .is_some_and(|&v| v < 0.0);
        if flip {
            o.row_mut(i).mapv_inplace(|v| -v);
            if i < k {
                q.row_mut(i).mapv_inplace(|v| -v);
            }
        }
    }
    let d2 = padded_eigenvalues(&s, p);
    Ok(DesignSpectrum { n, p, q, o, d2, scale_factor: 1.0 })
}

/// Eigenvalues of `XᵀX` only (descending, zero-padded to length `p`).
pub fn eigenvalues(x: ArrayView2<f64>) -> Result<Array1<f64>> {
    check_finite_nonzero(x)?;
    let (_, s, _) = x.to_owned().svddc(JobSvd::None)?;
    Ok(padded_eigenvalues(&s, x.ncols()))
}

/// Rescales `X` so that the eigenvalues of `XᵀX` average to one.
pub fn rescale_unit_mean_eig(x: ArrayView2<f64>) -> Result<(Array2<f64>, f64)> {
    check_finite_nonzero(x)?;
    let frob2: f64 = x.iter().map(|v| v * v).sum();
    let scale = (x.ncols() as f64 / frob2).sqrt();
    Ok((x.mapv(|v| v * scale), scale))
}

impl DesignSpectrum {
    /// Singular values `d_i = √d2_i` for `i < min(n, p)`.
    pub fn singular_values(&self) -> Array1<f64> {
        self.d2.slice(ndarray::s![..self.n.min(self.p)]).mapv(f64::sqrt)
    }

    /// Number of nonzero eigenvalues.
    pub fn rank(&self) -> usize {
        self.d2.iter().filter(|&&v| v > 0.0).count()
    }

    /// Rebuilds `Qᵀ D O`.
    pub fn reconstruct(&self) -> Array2<f64> {
        let k = self.n.min(self.p);
        let d = self.singular_values();
        let mut dof = self.o.slice(ndarray::s![..k, ..]).to_owned();
        for (mut row, &di) in dof.axis_iter_mut(Axis(0)).zip(d.iter()) {
            row.mapv_inplace(|v| v * di);
        }
        self.q.slice(ndarray::s![..k, ..]).t().dot(&dof)
    }

    pub fn summary(&self) -> SpectrumSummary {
        let min_nonzero = self
            .d2
            .iter()
            .copied()
            .filter(|&v| v > 0.0)
            .fold(f64::INFINITY, f64::min);
        SpectrumSummary {
            rank: self.rank(),
            max_eig: self.d2[0],
            mean_eig: self.d2.mean().unwrap_or(0.0),
            min_nonzero_eig: min_nonzero,
        }
    }
}

/// Empirical Cauchy transform `G(z) = (1/p) Σ 1/(z + d_i²)`.
pub fn empirical_cauchy(d2: &[f64], z: f64) -> Result<f64> {
    let mut acc = 0.0;
    for &v in d2 {
        let den = z + v;
        if den <= 0.0 {
            return Err(Error::InvalidInput(format!(
                "Cauchy transform evaluated at or below the pole -{v}"
            )));
        }
        acc += 1.0 / den;
    }
    Ok(acc / d2.len() as f64)
}

/// Empirical R-transform `R(z) = G⁻¹(z) − 1/z`, inverting `G` by bisection.
pub fn empirical_r_transform(d2: &[f64], z: f64) -> Result<f64> {
    if d2.is_empty() {
        return Err(Error::InvalidInput("empty spectrum".into()));
    }
    if !(z > 0.0) || !z.is_finite() {
        return Err(Error::InvalidInput(format!("R-transform argument {z} must be positive")));
    }
    let dmin = d2.iter().copied().fold(f64::INFINITY, f64::min);
    let lo = -dmin + R_EPS;
    let hi = 1.0 / z - dmin;
    let g_lo = empirical_cauchy(d2, lo)?;
    if g_lo < z {
        return Err(Error::InvalidInput(format!(
            "R-transform argument {z} exceeds the range of the empirical Cauchy transform ({g_lo})"
        )));
    }
    if hi <= lo {
        return Err(Error::InvalidInput(format!("R-transform argument {z} is too large")));
    }
    let tol = R_TOL * hi.abs().max(1.0);
    let w = roots::bisect(|w| z - 1.0 / d2.len() as f64 * d2.iter().map(|v| 1.0 / (w + v)).sum::<f64>(), lo, hi, tol)
        .ok_or_else(|| Error::InvalidInput(format!("could not invert the Cauchy transform at {z}")))?;
    Ok(w - 1.0 / z)
}
