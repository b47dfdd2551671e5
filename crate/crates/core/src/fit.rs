//! Penalized least squares `½‖y − Xβ‖² + Σ h(β_j)` by accelerated proximal
//! gradient with function-value restart.

use ndarray::{Array1, ArrayView1, ArrayView2, Zip};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::penalty::Penalty;
use crate::spectral;

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct FitOptions {
    /// Target for the max-norm KKT residual.
    pub tol: f64,
    pub max_iter: usize,
    /// Largest eigenvalue of `XᵀX`; computed from the design when absent.
    pub lipschitz: Option<f64>,
}

impl Default for FitOptions {
    fn default() -> Self {
        FitOptions { tol: 1e-9, max_iter: 50_000, lipschitz: None }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct FitResult {
    #[serde(serialize_with = "crate::io::ser_array")]
    pub beta_hat: Array1<f64>,
    pub iterations: usize,
    pub kkt_residual: f64,
    pub objective: f64,
    pub converged: bool,
}

impl FitResult {
    /// Number of nonzero coefficients.
    pub fn support_size(&self) -> usize {
        self.beta_hat.iter().filter(|&&b| b != 0.0).count()
    }
}

/// Penalized objective at `beta` given the fitted values `xb = Xβ`.
pub fn objective(y: ArrayView1<f64>, xb: ArrayView1<f64>, beta: ArrayView1<f64>, pen: &Penalty) -> f64 {
    let rss: f64 = Zip::from(&y).and(&xb).fold(0.0, |acc, &a, &b| acc + (a - b) * (a - b));
    0.5 * rss + beta.iter().map(|&b| pen.value(b)).sum::<f64>()
}

/// Max-norm distance from `Xᵀ(y − Xβ)` to the subdifferential of the penalty.
pub fn kkt_residual(x: ArrayView2<f64>, y: ArrayView1<f64>, beta: ArrayView1<f64>, pen: &Penalty) -> f64 {
    let r = &y - &x.dot(&beta);
    let g = x.t().dot(&r);
    kkt_from_gradient(beta, g.view(), pen)
}

fn kkt_from_gradient(beta: ArrayView1<f64>, g: ArrayView1<f64>, pen: &Penalty) -> f64 {
    Zip::from(&beta)
        .and(&g)
        .fold(0.0f64, |acc, &b, &gj| acc.max(pen.subgradient_residual(b, gj)))
}

fn snap_zeros(beta: &mut Array1<f64>) {
    let scale = beta.iter().fold(1.0f64, |m, b| m.max(b.abs()));
    let cut = 1e-10 * scale;
    beta.mapv_inplace(|b| if b.abs() <= cut { 0.0 } else { b });
}

/// Minimizes the penalized least-squares objective.
///
/// Non-convergence is not an error: the returned result carries
/// `converged = false` together with its residual.
pub fn fit(x: ArrayView2<f64>, y: ArrayView1<f64>, pen: &Penalty, opts: &FitOptions) -> Result<FitResult> {
    fit_impl(x, y, pen, opts, None)
}

/// Like [`fit`], also returning the objective value of every accepted iterate.
pub fn fit_with_trace(
    x: ArrayView2<f64>,
    y: ArrayView1<f64>,
    pen: &Penalty,
    opts: &FitOptions,
) -> Result<(FitResult, Vec<f64>)> {
    let mut trace = Vec::new();
    let f = fit_impl(x, y, pen, opts, Some(&mut trace))?;
    Ok((f, trace))
}

fn fit_impl(
    x: ArrayView2<f64>,
    y: ArrayView1<f64>,
    pen: &Penalty,
    opts: &FitOptions,
    mut trace: Option<&mut Vec<f64>>,
) -> Result<FitResult> {
    let (n, p) = x.dim();
    if y.len() != n {
        return Err(Error::DimMismatch(format!("X has {n} rows but y has {} entries", y.len())));
    }
    if !(opts.tol > 0.0) {
        return Err(Error::InvalidInput("fit tolerance must be positive".into()));
    }
    pen.validated()?;
    let lip = match opts.lipschitz {
        Some(l) => l,
        None if x.iter().all(|&v| v == 0.0) => 0.0,
        None => spectral::eigenvalues(x)?[0],
    };
    let xt = x.t().as_standard_layout().into_owned();
    let finish = |beta: Array1<f64>, iterations: usize| {
        let xb = x.dot(&beta);
        let r = &y - &xb;
        let g = xt.dot(&r);
        let kkt = kkt_from_gradient(beta.view(), g.view(), pen);
        let obj = objective(y, xb.view(), beta.view(), pen);
        FitResult { beta_hat: beta, iterations, kkt_residual: kkt, objective: obj, converged: kkt <= opts.tol }
    };
    if lip <= 0.0 {
        return Ok(finish(Array1::zeros(p), 0));
    }
    let step = 1.0 / lip;

    let mut xk = Array1::<f64>::zeros(p);
    let mut xxk = Array1::<f64>::zeros(n);
    let mut obj_k = objective(y, xxk.view(), xk.view(), pen);
    let mut yk = xk.clone();
    let mut xyk = xxk.clone();
    let mut t = 1.0f64;
    let mut restarted = true;
    let mut it = 0;
    while it < opts.max_iter {
        it += 1;
        let resid = &xyk - &y;
        let grad = xt.dot(&resid);
        let mut xnew = Array1::<f64>::zeros(p);
        Zip::from(&mut xnew)
            .and(&yk)
            .and(&grad)
            .for_each(|xn, &yv, &gv| *xn = pen.prox(step, yv - step * gv));
        let xxnew = x.dot(&xnew);
        let obj_new = objective(y, xxnew.view(), xnew.view(), pen);
        if obj_new > obj_k && !restarted {
            yk.assign(&xk);
            xyk.assign(&xxk);
            t = 1.0;
            restarted = true;
            continue;
        }
        restarted = false;
        if let Some(tr) = trace.as_deref_mut() {
            tr.push(obj_new);
        }

        let gap = Zip::from(&xnew).and(&yk).fold(0.0f64, |m, &a, &b| m.max((a - b).abs())) * lip;
        if gap <= opts.tol || it % 100 == 0 {
            let g = xt.dot(&(&y - &xxnew));
            if kkt_from_gradient(xnew.view(), g.view(), pen) <= opts.tol {
                let mut beta = xnew;
                snap_zeros(&mut beta);
                return Ok(finish(beta, it));
            }
        }

        let t_new = 0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt());
        let mom = (t - 1.0) / t_new;
        yk = &xnew + &((&xnew - &xk) * mom);
        xyk = &xxnew + &((&xxnew - &xxk) * mom);
        xk = xnew;
        xxk = xxnew;
        obj_k = obj_new;
        t = t_new;
    }
    let mut beta = xk;
    snap_zeros(&mut beta);
    Ok(finish(beta, it))
}
