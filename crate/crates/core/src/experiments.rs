//! Monte Carlo calibration studies.
//!
//! Each trial draws a fresh design and noise from a seed derived from the
//! base seed and the trial index; the mixture part of the signal is drawn
//! once and held fixed. Trials run in parallel and are aggregated in trial
//! order, so results do not depend on scheduling.

use std::io::Write;
use std::path::{Path, PathBuf};

use ndarray::{Array1, Array2, ArrayView1};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::debias::{self, DebiasOptions};
use crate::designs::{self, DesignRecipe, SignalRecipe};
use crate::error::{Error, Result};
use crate::fit::{self, FitOptions};
use crate::inference::{self, CalibrationMetrics};
use crate::pcr::{self, ComplementMethod, JSpec, PcrOptions};
use crate::penalty::Penalty;
use crate::rng;
use crate::spectral::{self, DesignSpectrum};
use crate::stats;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Sa,
    Df,
    PcrSa,
    PcrDf,
}

impl Method {
    pub fn is_pcr(self) -> bool {
        matches!(self, Method::PcrSa | Method::PcrDf)
    }

    pub fn name(self) -> &'static str {
        match self {
            Method::Sa => "sa",
            Method::Df => "df",
            Method::PcrSa => "pcrsa",
            Method::PcrDf => "pcrdf",
        }
    }
}

impl std::str::FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "sa" => Ok(Method::Sa),
            "df" => Ok(Method::Df),
            "pcrsa" => Ok(Method::PcrSa),
            "pcrdf" => Ok(Method::PcrDf),
            _ => Err(Error::InvalidInput(format!("unknown method '{s}'"))),
        }
    }
}

fn default_sigma2() -> f64 {
    1.0
}
fn default_trials() -> usize {
    50
}
fn default_alpha_grid() -> Vec<f64> {
    (1..=19).map(|k| k as f64 * 0.05).collect()
}
fn default_fdr_levels() -> Vec<f64> {
    vec![0.05, 0.1]
}
fn default_qq() -> usize {
    200
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub design: DesignRecipe,
    pub signal: SignalRecipe,
    #[serde(default = "default_sigma2")]
    pub sigma2: f64,
    /// Estimate the noise level instead of using `sigma2`.
    #[serde(default)]
    pub estimate_sigma2: bool,
    pub penalty: Penalty,
    pub method: Method,
    /// Component selection for the PCR methods (`top:k` or a comma list).
    #[serde(default)]
    pub j: Option<String>,
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default = "default_alpha_grid")]
    pub alpha_grid: Vec<f64>,
    #[serde(default = "default_fdr_levels")]
    pub fdr_levels: Vec<f64>,
    #[serde(default = "default_qq")]
    pub qq_points: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
    #[serde(default)]
    pub fit: FitOptions,
    #[serde(default)]
    pub debias: DebiasOptions,
}

impl ExperimentConfig {
    /// Reads a TOML or JSON config, chosen by file extension.
    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        match path.extension().and_then(|e| e.to_str()) {
            Some("json") => Self::from_json_str(&text),
            _ => Self::from_toml_str(&text),
        }
    }

    pub fn from_toml_str(s: &str) -> Result<Self> {
        toml::from_str(s).map_err(|e| Error::InvalidInput(format!("config: {e}")))
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| Error::InvalidInput(format!("config: {e}")))
    }

    pub fn jspec(&self) -> Result<Option<JSpec>> {
        self.j.as_deref().map(str::parse).transpose()
    }

    fn validate(&self) -> Result<()> {
        self.penalty.validated()?;
        if self.trials == 0 {
            return Err(Error::InvalidInput("trials must be positive".into()));
        }
        if self.alpha_grid.iter().any(|&a| !(a > 0.0 && a < 1.0)) {
            return Err(Error::InvalidInput("alpha grid must lie in (0, 1)".into()));
        }
        if !(self.sigma2 >= 0.0) {
            return Err(Error::InvalidInput("sigma2 must be non-negative".into()));
        }
        Ok(())
    }
}

/// One simulated dataset.
#[derive(Debug, Clone)]
pub struct SimulatedData {
    pub x: Array2<f64>,
    pub y: Array1<f64>,
    pub beta_star: Array1<f64>,
    /// Full decomposition, present when it was needed to build the signal.
    pub spectrum: Option<DesignSpectrum>,
}

/// Draws `(X, β*, y)` for a trial seed. `zeta` is the fixed mixture part of
/// the signal; any alignment component is built from this design's basis.
pub fn simulate(
    design: &DesignRecipe,
    signal: &SignalRecipe,
    zeta: ArrayView1<f64>,
    sigma2: f64,
    seed: u64,
    need_spectrum: bool,
) -> Result<SimulatedData> {
    let x = designs::generate_design(&design.with_seed(seed))?;
    if zeta.len() != x.ncols() {
        return Err(Error::DimMismatch("signal and design dimensions differ".into()));
    }
    let spectrum = if need_spectrum || signal.alignment.is_some() {
        Some(spectral::decompose(x.view())?)
    } else {
        None
    };
    let mut beta_star = zeta.to_owned();
    if let Some(al) = &signal.alignment {
        let o = &spectrum.as_ref().expect("decomposed above").o;
        beta_star += &designs::aligned_component(al, o.view())?;
    }
    let noise = designs::generate_noise(x.nrows(), sigma2, seed)?;
    let y = x.dot(&beta_star) + noise;
    Ok(SimulatedData { x, y, beta_star, spectrum })
}

/// Alignment test results of one trial.
#[derive(Debug, Clone, Serialize)]
pub struct TrialAlignment {
    pub j: Vec<usize>,
    pub pvalues: Vec<f64>,
    pub adjusted: Vec<f64>,
    /// Rejection indicators per FDR level, aligned with `j`.
    pub rejected: Vec<Vec<bool>>,
    /// Angles in degrees between each selected direction and `β*`.
    pub angles: Vec<f64>,
}

/// Outputs of one method on one trial.
#[derive(Debug, Clone, Serialize)]
pub struct TrialOutcome {
    pub trial: usize,
    pub seed: u64,
    pub standardized: Vec<f64>,
    pub ks: f64,
    pub tau_star: f64,
    pub sigma2_hat: Option<f64>,
    pub metrics: Vec<CalibrationMetrics>,
    pub alignment: Option<TrialAlignment>,
}

#[derive(Debug, Clone, Serialize)]
pub struct TrialError {
    pub trial: usize,
    pub code: String,
    pub message: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct AlphaSummary {
    pub alpha: f64,
    pub fpr: Option<f64>,
    pub tpr: Option<f64>,
    pub fcp: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct CalibrationSummary {
    pub method: Method,
    pub trials: usize,
    pub effective_n: usize,
    pub errors: Vec<TrialError>,
    pub ks_per_trial: Vec<f64>,
    pub mean_ks: f64,
    pub pooled_ks: f64,
    pub mean_tau_star: f64,
    pub median_sigma2_hat: Option<f64>,
    pub curve: Vec<AlphaSummary>,
    pub qq: Vec<(f64, f64)>,
    #[serde(skip)]
    pub outcomes: Vec<TrialOutcome>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ComponentSummary {
    pub component: usize,
    pub aligned: bool,
    pub mean_adjusted_pvalue: f64,
    /// Rejection frequency per FDR level.
    pub rejection_rate: Vec<f64>,
    pub mean_angle: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct AlignmentSummary {
    pub method: Method,
    pub trials: usize,
    pub effective_n: usize,
    pub errors: Vec<TrialError>,
    pub fdr_levels: Vec<f64>,
    pub components: Vec<ComponentSummary>,
    /// Mean false discovery proportion per level.
    pub empirical_fdr: Vec<f64>,
    /// Fraction of trials in which every aligned component was rejected.
    pub all_aligned_rejected: Vec<f64>,
    #[serde(skip)]
    pub outcomes: Vec<TrialOutcome>,
}

fn angle_degrees(o: ArrayView1<f64>, beta: ArrayView1<f64>) -> f64 {
    let nb = beta.dot(&beta).sqrt();
    if nb == 0.0 {
        return 90.0;
    }
    let c = (o.dot(&beta) / (nb * o.dot(&o).sqrt())).clamp(-1.0, 1.0);
    c.acos().to_degrees()
}

/// Angle in degrees between a direction and the signal.
pub fn alignment_angle(o: ArrayView1<f64>, beta: ArrayView1<f64>) -> f64 {
    angle_degrees(o, beta)
}

fn metrics_for(
    cfg: &ExperimentConfig,
    beta_u: ArrayView1<f64>,
    beta_star: ArrayView1<f64>,
    tau: f64,
) -> Result<(Vec<f64>, Vec<CalibrationMetrics>)> {
    let s = tau.sqrt();
    let standardized: Vec<f64> = beta_u.iter().zip(beta_star.iter()).map(|(b, t)| (b - t) / s).collect();
    let pv = inference::p_values(beta_u, tau)?;
    let metrics = cfg
        .alpha_grid
        .iter()
        .map(|&a| {
            let ci = inference::symmetric_intervals(beta_u, tau, a)?;
            inference::calibration_metrics(beta_star, pv.view(), &ci, a)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((standardized, metrics))
}

fn outcome(
    cfg: &ExperimentConfig,
    trial: usize,
    seed: u64,
    beta_u: ArrayView1<f64>,
    beta_star: ArrayView1<f64>,
    tau: f64,
    sigma2_hat: Option<f64>,
) -> Result<TrialOutcome> {
    if !(tau > 0.0) {
        return Err(Error::InvalidInput(format!("variance estimate {tau} is not positive")));
    }
    let (standardized, metrics) = metrics_for(cfg, beta_u, beta_star, tau)?;
    let ks = stats::ks_normal(&standardized);
    Ok(TrialOutcome { trial, seed, standardized, ks, tau_star: tau, sigma2_hat, metrics, alignment: None })
}

/// Runs every method in `methods` on trial `trial`, sharing the dataset and
/// the penalized fit between methods.
pub fn run_trial(
    cfg: &ExperimentConfig,
    zeta: ArrayView1<f64>,
    trial: usize,
    methods: &[Method],
) -> Vec<Result<TrialOutcome>> {
    let seed = rng::trial_seed(cfg.seed, trial as u64);
    let need_spec = methods.iter().any(|m| m.is_pcr());
    let data = match simulate(&cfg.design, &cfg.signal, zeta, cfg.sigma2, seed, need_spec) {
        Ok(d) => d,
        Err(e) => {
            let msg = e.to_string();
            let code = e.code();
            return methods.iter().map(|_| Err(clone_error(code, &msg))).collect();
        }
    };
    let sigma2 = (!cfg.estimate_sigma2).then_some(cfg.sigma2);
    let mut plain: Option<Result<(Array1<f64>, fit::FitResult)>> = None;
    methods
        .iter()
        .map(|&m| match m {
            Method::Sa | Method::Df => {
                let shared = plain.get_or_insert_with(|| {
                    let d2 = match &data.spectrum {
                        Some(s) => s.d2.clone(),
                        None => spectral::eigenvalues(data.x.view())?,
                    };
                    let fo = FitOptions { lipschitz: Some(d2[0]), ..cfg.fit };
                    let f = fit::fit(data.x.view(), data.y.view(), &cfg.penalty, &fo)?;
                    Ok((d2, f))
                });
                let (d2, f) = match shared {
                    Ok(v) => v,
                    Err(e) => return Err(clone_error(e.code(), &e.to_string())),
                };
                if m == Method::Sa {
                    let d = debias::debias(data.x.view(), data.y.view(), d2.view(), f, &cfg.penalty, sigma2, &cfg.debias)?;
                    let s2 = (d.sigma2_source == debias::Sigma2Source::Estimated).then_some(d.sigma2);
                    outcome(cfg, trial, seed, d.beta_u.view(), data.beta_star.view(), d.tau_star, s2)
                } else {
                    let d = debias::debias_degrees_of_freedom(data.x.view(), data.y.view(), f, &cfg.penalty)?;
                    outcome(cfg, trial, seed, d.beta_u.view(), data.beta_star.view(), d.tau, None)
                }
            }
            Method::PcrSa | Method::PcrDf => {
                let spec = data.spectrum.as_ref().expect("decomposed for PCR");
                let j = cfg.jspec()?.unwrap_or(JSpec::List(Vec::new()));
                let opts = PcrOptions {
                    method: if m == Method::PcrSa { ComplementMethod::SpectrumAware } else { ComplementMethod::DegreesOfFreedom },
                    q: cfg.fdr_levels.first().copied().unwrap_or(0.1),
                    fit: cfg.fit,
                    debias: cfg.debias,
                };
                let r = pcr::debiased_pcr_with_spectrum(spec, data.y.view(), &j, &cfg.penalty, sigma2, &opts)?;
                let s2 = r.complement.as_ref().and_then(|c| {
                    (c.sigma2_source == debias::Sigma2Source::Estimated).then_some(c.sigma2)
                });
                let mut out = outcome(cfg, trial, seed, r.beta_pcr.view(), data.beta_star.view(), r.tau_star, s2)?;
                if let Some(t) = &r.alignment {
                    let rejected = cfg
                        .fdr_levels
                        .iter()
                        .map(|&q| {
                            let rej = inference::benjamini_hochberg(&t.pvalues, q);
                            (0..r.j.len()).map(|k| rej.contains(&k)).collect()
                        })
                        .collect();
                    let angles = r.j.iter().map(|&i| angle_degrees(spec.o.row(i), data.beta_star.view())).collect();
                    out.alignment = Some(TrialAlignment {
                        j: r.j.clone(),
                        pvalues: t.pvalues.clone(),
                        adjusted: t.adjusted.clone(),
                        rejected,
                        angles,
                    });
                }
                Ok(out)
            }
        })
        .collect()
}

fn clone_error(code: &str, msg: &str) -> Error {
    match code {
        "DIM_MISMATCH" => Error::DimMismatch(msg.to_string()),
        "IO" => Error::Io(msg.to_string()),
        "LINALG" => Error::Linalg(msg.to_string()),
        "NONCONVERGENCE" => Error::Domain(msg.to_string()),
        _ => Error::InvalidInput(msg.to_string()),
    }
}

fn run_trials(cfg: &ExperimentConfig, methods: &[Method], jobs: Option<usize>) -> Result<Vec<Vec<Result<TrialOutcome>>>> {
    cfg.validate()?;
    let zeta = cfg.signal.zeta(cfg.design.p)?;
    let work = || (0..cfg.trials).into_par_iter().map(|t| run_trial(cfg, zeta.view(), t, methods)).collect();
    match jobs {
        Some(j) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(j.max(1))
                .build()
                .map_err(|e| Error::InvalidInput(e.to_string()))?;
            Ok(pool.install(work))
        }
        None => Ok(work()),
    }
}

fn split(method_index: usize, per_trial: &[Vec<Result<TrialOutcome>>]) -> (Vec<TrialOutcome>, Vec<TrialError>) {
    let mut ok = Vec::new();
    let mut errors = Vec::new();
    for (trial, results) in per_trial.iter().enumerate() {
        match &results[method_index] {
            Ok(o) => ok.push(o.clone()),
            Err(e) => errors.push(TrialError { trial, code: e.code().to_string(), message: e.to_string() }),
        }
    }
    (ok, errors)
}

fn mean_option(values: impl Iterator<Item = Option<f64>>) -> Option<f64> {
    let v: Vec<f64> = values.flatten().collect();
    (!v.is_empty()).then(|| stats::mean(&v))
}

fn calibration_summary(cfg: &ExperimentConfig, method: Method, outcomes: Vec<TrialOutcome>, errors: Vec<TrialError>) -> CalibrationSummary {
    let ks_per_trial: Vec<f64> = outcomes.iter().map(|o| o.ks).collect();
    let pooled: Vec<f64> = outcomes.iter().flat_map(|o| o.standardized.iter().copied()).collect();
    let curve = cfg
        .alpha_grid
        .iter()
        .enumerate()
        .map(|(k, &alpha)| AlphaSummary {
            alpha,
            fpr: mean_option(outcomes.iter().map(|o| o.metrics[k].fpr)),
            tpr: mean_option(outcomes.iter().map(|o| o.metrics[k].tpr)),
            fcp: mean_option(outcomes.iter().map(|o| o.metrics[k].fcp)),
        })
        .collect();
    let s2: Vec<f64> = outcomes.iter().filter_map(|o| o.sigma2_hat).collect();
    CalibrationSummary {
        method,
        trials: cfg.trials,
        effective_n: outcomes.len(),
        errors,
        mean_ks: stats::mean(&ks_per_trial),
        pooled_ks: stats::ks_normal(&pooled),
        ks_per_trial,
        mean_tau_star: stats::mean(&outcomes.iter().map(|o| o.tau_star).collect::<Vec<_>>()),
        median_sigma2_hat: (!s2.is_empty()).then(|| stats::median(&s2)),
        curve,
        qq: stats::qq_points(&pooled, cfg.qq_points),
        outcomes,
    }
}

/// Runs the configured method; see [`run_calibration_methods`].
pub fn run_calibration(cfg: &ExperimentConfig, jobs: Option<usize>) -> Result<CalibrationSummary> {
    Ok(run_calibration_methods(cfg, &[cfg.method], jobs)?.remove(0))
}

/// Calibration summaries for several methods on the same simulated trials.
pub fn run_calibration_methods(
    cfg: &ExperimentConfig,
    methods: &[Method],
    jobs: Option<usize>,
) -> Result<Vec<CalibrationSummary>> {
    let per_trial = run_trials(cfg, methods, jobs)?;
    Ok(methods
        .iter()
        .enumerate()
        .map(|(k, &m)| {
            let (ok, errors) = split(k, &per_trial);
            calibration_summary(cfg, m, ok, errors)
        })
        .collect())
}

fn alignment_summary(cfg: &ExperimentConfig, outcomes: Vec<TrialOutcome>, errors: Vec<TrialError>) -> AlignmentSummary {
    let aligned: Vec<usize> = cfg.signal.alignment.as_ref().map(|a| a.indices.clone()).unwrap_or_default();
    let tested: Vec<&TrialAlignment> = outcomes.iter().filter_map(|o| o.alignment.as_ref()).collect();
    let levels = cfg.fdr_levels.clone();
    let j: Vec<usize> = tested.first().map(|t| t.j.clone()).unwrap_or_default();
    let count = tested.len().max(1) as f64;
    let components = j
        .iter()
        .enumerate()
        .map(|(k, &c)| ComponentSummary {
            component: c,
            aligned: aligned.contains(&c),
            mean_adjusted_pvalue: stats::mean(&tested.iter().map(|t| t.adjusted[k]).collect::<Vec<_>>()),
            rejection_rate: (0..levels.len())
                .map(|l| tested.iter().filter(|t| t.rejected[l][k]).count() as f64 / count)
                .collect(),
            mean_angle: stats::mean(&tested.iter().map(|t| t.angles[k]).collect::<Vec<_>>()),
        })
        .collect();
    let empirical_fdr = (0..levels.len())
        .map(|l| {
            let fdp: Vec<f64> = tested
                .iter()
                .map(|t| {
                    let rej: Vec<usize> = t.j.iter().zip(&t.rejected[l]).filter(|(_, &r)| r).map(|(&c, _)| c).collect();
                    let false_rej = rej.iter().filter(|c| !aligned.contains(c)).count();
                    false_rej as f64 / rej.len().max(1) as f64
                })
                .collect();
            stats::mean(&fdp)
        })
        .collect();
    let all_aligned_rejected = (0..levels.len())
        .map(|l| {
            let hits = tested
                .iter()
                .filter(|t| {
                    aligned.iter().filter(|c| t.j.contains(c)).all(|c| {
                        let k = t.j.iter().position(|x| x == c).expect("contained");
                        t.rejected[l][k]
                    })
                })
                .count();
            hits as f64 / count
        })
        .collect();
    AlignmentSummary {
        method: cfg.method,
        trials: cfg.trials,
        effective_n: tested.len(),
        errors,
        fdr_levels: levels,
        components,
        empirical_fdr,
        all_aligned_rejected,
        outcomes,
    }
}

/// Alignment-test study for a PCR method.
pub fn run_alignment_study(cfg: &ExperimentConfig, jobs: Option<usize>) -> Result<AlignmentSummary> {
    if !cfg.method.is_pcr() {
        return Err(Error::InvalidInput("the alignment study needs a PCR method".into()));
    }
    if cfg.j.is_none() {
        return Err(Error::InvalidInput("the alignment study needs a component selection".into()));
    }
    let per_trial = run_trials(cfg, &[cfg.method], jobs)?;
    let (ok, errors) = split(0, &per_trial);
    Ok(alignment_summary(cfg, ok, errors))
}

#[derive(Debug, Clone, Serialize)]
pub struct ExperimentReport {
    pub calibration: CalibrationSummary,
    pub alignment: Option<AlignmentSummary>,
}

/// Runs the calibration study, plus the alignment study for PCR methods,
/// and writes the output files when an output directory is configured.
pub fn run_experiment(cfg: &ExperimentConfig, jobs: Option<usize>) -> Result<ExperimentReport> {
    let per_trial = run_trials(cfg, &[cfg.method], jobs)?;
    let (ok, errors) = split(0, &per_trial);
    let alignment = (cfg.method.is_pcr() && cfg.j.is_some()).then(|| alignment_summary(cfg, ok.clone(), errors.clone()));
    let calibration = calibration_summary(cfg, cfg.method, ok, errors);
    let report = ExperimentReport { calibration, alignment };
    if let Some(dir) = &cfg.output_dir {
        write_outputs(&report, dir)?;
    }
    Ok(report)
}

fn create(path: &Path) -> Result<std::io::BufWriter<std::fs::File>> {
    Ok(std::io::BufWriter::new(
        std::fs::File::create(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?,
    ))
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(String::new, |x| format!("{x:e}"))
}

/// Writes `summary.json`, `errors_standardized.csv`, `qq.csv`,
/// `fcp_curve.csv` and, for alignment studies, `alignment.csv`.
pub fn write_outputs(report: &ExperimentReport, dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::Io(format!("{}: {e}", dir.display())))?;
    let summary = serde_json::to_string_pretty(report).map_err(|e| Error::Io(e.to_string()))?;
    std::fs::write(dir.join("summary.json"), summary + "\n")?;

    let cal = &report.calibration;
    let mut w = create(&dir.join("errors_standardized.csv"))?;
    writeln!(w, "trial,index,z")?;
    for o in &cal.outcomes {
        for (i, z) in o.standardized.iter().enumerate() {
            writeln!(w, "{},{i},{z:e}", o.trial)?;
        }
    }
    w.flush()?;

    let mut w = create(&dir.join("qq.csv"))?;
    writeln!(w, "theoretical,empirical")?;
    for (a, b) in &cal.qq {
        writeln!(w, "{a:e},{b:e}")?;
    }
    w.flush()?;

    let mut w = create(&dir.join("fcp_curve.csv"))?;
    writeln!(w, "alpha,fpr,tpr,fcp")?;
    for c in &cal.curve {
        writeln!(w, "{},{},{},{}", c.alpha, fmt_opt(c.fpr), fmt_opt(c.tpr), fmt_opt(c.fcp))?;
    }
    w.flush()?;

    if let Some(al) = &report.alignment {
        let mut w = create(&dir.join("alignment.csv"))?;
        let levels: Vec<String> = al.fdr_levels.iter().map(|q| format!("reject_{q}")).collect();
        writeln!(w, "trial,component,pvalue,adjusted,{},angle_deg", levels.join(","))?;
        for o in &al.outcomes {
            if let Some(t) = &o.alignment {
                for (k, &c) in t.j.iter().enumerate() {
                    let rej: Vec<String> = t.rejected.iter().map(|r| (r[k] as u8).to_string()).collect();
                    writeln!(w, "{},{c},{:e},{:e},{},{}", o.trial, t.pvalues[k], t.adjusted[k], rej.join(","), t.angles[k])?;
                }
            }
        }
        w.flush()?;
    }
    Ok(())
}
