use std::fmt::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use ndarray::{Array1, Array2};
use serde::Serialize;

use spectrum_debias::debias::{self, DebiasOptions, DebiasResult};
use spectrum_debias::designs::{DesignFamily, DesignRecipe, SignalRecipe};
use spectrum_debias::experiments::{self, ExperimentConfig};
use spectrum_debias::fit::{self, FitOptions, FitResult};
use spectrum_debias::pcr::{self, ComplementMethod, JSpec, PcrOptions, PcrResult};
use spectrum_debias::vamp::{self, FixedPoint, FixedPointOptions};
use spectrum_debias::{designs, inference, io, Error, Penalty, Result};

#[derive(Parser)]
#[command(name = "spectrum-debias", version, about = "Spectrum-aware debiasing for regularized linear regression")]
struct Cli {
    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,

    /// Worker threads for Monte Carlo trials.
    #[arg(long, global = true, env = "SPECTRUM_DEBIAS_JOBS")]
    jobs: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Subcommand)]
enum Command {
    /// Fit the penalized estimator.
    Fit(FitArgs),
    /// Fit and debias with the spectrum-aware adjustment.
    Debias(DebiasArgs),
    /// Debias after principal components regression on selected components.
    PcrDebias(PcrArgs),
    /// Test which selected components the signal aligns with.
    AlignTest(PcrArgs),
    /// Solve the population fixed-point equations.
    FixedPoint(FixedPointArgs),
    /// Draw a design, signal and response.
    Simulate(SimulateArgs),
    /// Run a Monte Carlo study from a config file.
    Experiment(ExperimentArgs),
}

#[derive(Args)]
struct DataArgs {
    /// Design matrix (CSV, one row per sample, or binary).
    #[arg(long)]
    x: PathBuf,
    /// Response vector.
    #[arg(long)]
    y: PathBuf,
    /// The CSV inputs have a header row.
    #[arg(long)]
    header: bool,
    /// `ridge:λ₂`, `lasso:λ₁` or `en:λ₁,λ₂`.
    #[arg(long)]
    penalty: Penalty,
}

#[derive(Args)]
struct FitArgs {
    #[command(flatten)]
    data: DataArgs,
    /// Convergence tolerance of the solver.
    #[arg(long, default_value_t = 1e-9)]
    tol: f64,
    /// Iteration cap of the solver.
    #[arg(long, default_value_t = 50_000)]
    max_iter: usize,
}

#[derive(Args)]
struct DebiasArgs {
    #[command(flatten)]
    data: DataArgs,
    /// Known noise variance; estimated when omitted.
    #[arg(long)]
    sigma2: Option<f64>,
    /// Level of the reported intervals (CSV output).
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
}

#[derive(Args)]
struct PcrArgs {
    #[command(flatten)]
    data: DataArgs,
    /// Components to regress on: `top:k` or a comma-separated list (0-based).
    #[arg(long)]
    j: JSpec,
    /// Known noise variance; estimated when omitted.
    #[arg(long)]
    sigma2: Option<f64>,
    /// Adjustment for the complement step.
    #[arg(long, value_enum, default_value_t = Complement::Sa)]
    method: Complement,
    /// FDR level of the alignment test.
    #[arg(long, default_value_t = 0.1)]
    q: f64,
}

#[derive(Clone, Copy, ValueEnum)]
enum Complement {
    Sa,
    Df,
}

#[derive(Args)]
struct FixedPointArgs {
    /// `ridge:λ₂`, `lasso:λ₁` or `en:λ₁,λ₂`.
    #[arg(long)]
    penalty: Penalty,
    /// Eigenvalue samples of XᵀX; a Marchenko–Pastur law is used otherwise.
    #[arg(long, conflicts_with = "delta")]
    spectrum: Option<PathBuf>,
    /// Aspect ratio n/p of the Marchenko–Pastur law.
    #[arg(long, default_value_t = 0.5)]
    delta: f64,
    /// Quantile points drawn from the Marchenko–Pastur law.
    #[arg(long, default_value_t = 2000)]
    spectrum_samples: usize,
    /// Signal prior samples; the default mixture is used otherwise.
    #[arg(long)]
    prior: Option<PathBuf>,
    /// Points drawn from the default mixture.
    #[arg(long, default_value_t = 20_000)]
    prior_samples: usize,
    /// Noise variance.
    #[arg(long, default_value_t = 1.0)]
    sigma2: f64,
    /// Seed of the default prior and of any Monte Carlo draws.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Iteration cap of the damped iteration.
    #[arg(long, default_value_t = 500)]
    max_iter: usize,
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long)]
    family: DesignFamily,
    #[arg(long)]
    n: usize,
    #[arg(long)]
    p: usize,
    /// Noise variance.
    #[arg(long, default_value_t = 1.0)]
    sigma2: f64,
    /// Seed of the design, signal and noise.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Directory receiving x, y.csv and beta.csv.
    #[arg(long)]
    out: PathBuf,
    /// Write the design in the binary format.
    #[arg(long)]
    binary: bool,
}

#[derive(Args)]
struct ExperimentArgs {
    /// TOML or JSON config.
    #[arg(long)]
    config: PathBuf,
    /// Overrides the configured output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Overrides the configured seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides the configured number of trials.
    #[arg(long)]
    trials: Option<usize>,
}

#[derive(Serialize)]
struct ErrorReport<'a> {
    code: &'a str,
    message: String,
}

/// Fixed point together with its contraction certificate.
#[derive(Debug, Serialize)]
struct FixedPointReport {
    fixed_point: FixedPoint,
    contraction: f64,
}

#[derive(Serialize)]
struct SimulateReport {
    family: DesignFamily,
    n: usize,
    p: usize,
    seed: u64,
    x: PathBuf,
    y: PathBuf,
    beta: PathBuf,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(out) => {
            print!("{out}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            let report = ErrorReport { code: e.code(), message: e.to_string() };
            eprintln!("{}", serde_json::to_string(&report).expect("error report serializes"));
            ExitCode::from(2)
        }
    }
}

fn json<T: Serialize>(v: &T) -> Result<String> {
    serde_json::to_string_pretty(v).map(|s| s + "\n").map_err(|e| Error::Io(e.to_string()))
}

fn load(d: &DataArgs) -> Result<(Array2<f64>, Array1<f64>)> {
    let x = io::read_matrix(&d.x, d.header)?;
    let y = io::read_vector(&d.y, d.header)?;
    if x.nrows() != y.len() {
        return Err(Error::DimMismatch(format!("X has {} rows but y has {} entries", x.nrows(), y.len())));
    }
    Ok((x, y))
}

fn run(cli: &Cli) -> Result<String> {
    match &cli.command {
        Command::Fit(a) => {
            let (x, y) = load(&a.data)?;
            let opts = FitOptions { tol: a.tol, max_iter: a.max_iter, lipschitz: None };
            let f = fit::fit(x.view(), y.view(), &a.data.penalty, &opts)?;
            match cli.format {
                Format::Json => json(&f),
                Format::Csv => Ok(fit_csv(&f)),
            }
        }
        Command::Debias(a) => {
            let (x, y) = load(&a.data)?;
            let (_, d) = debias::spectrum_aware_debias(
                x.view(),
                y.view(),
                &a.data.penalty,
                a.sigma2,
                &FitOptions::default(),
                &DebiasOptions::default(),
            )?;
            match cli.format {
                Format::Json => json(&d),
                Format::Csv => debias_csv(&d, a.alpha),
            }
        }
        Command::PcrDebias(a) => {
            let r = run_pcr(a)?;
            match cli.format {
                Format::Json => json(&r),
                Format::Csv => Ok(pcr_csv(&r)),
            }
        }
        Command::AlignTest(a) => {
            let r = run_pcr(a)?;
            let test = r
                .alignment
                .ok_or_else(|| Error::InvalidInput("no noise level is available for the alignment test".into()))?;
            match cli.format {
                Format::Json => json(&test),
                Format::Csv => {
                    let mut s = String::from("component,theta,s,pvalue,adjusted,reject\n");
                    for (k, &c) in r.j.iter().enumerate() {
                        let rej = test.rejected.contains(&k) as u8;
                        writeln!(
                            s,
                            "{c},{},{},{},{},{rej}",
                            r.theta_pcr[k], test.s[k], test.pvalues[k], test.adjusted[k]
                        )
                        .expect("write to string");
                    }
                    Ok(s)
                }
            }
        }
        Command::FixedPoint(a) => {
            let rep = run_fixed_point(a)?;
            match cli.format {
                Format::Json => json(&rep),
                Format::Csv => {
                    let fp = &rep.fixed_point;
                    let mut s = String::from("name,value\n");
                    for (k, v) in [
                        ("gamma_star", fp.gamma_star),
                        ("eta_star", fp.eta_star),
                        ("tau_star", fp.tau_star),
                        ("tau_dstar", fp.tau_dstar),
                        ("contraction", rep.contraction),
                    ] {
                        writeln!(s, "{k},{v}").expect("write to string");
                    }
                    Ok(s)
                }
            }
        }
        Command::Simulate(a) => {
            let rep = run_simulate(a)?;
            json(&rep)
        }
        Command::Experiment(a) => {
            let mut cfg = ExperimentConfig::from_path(&a.config)?;
            if let Some(out) = &a.out {
                cfg.output_dir = Some(out.clone());
            }
            if let Some(seed) = a.seed {
                cfg.seed = seed;
            }
            if let Some(t) = a.trials {
                cfg.trials = t;
            }
            let report = experiments::run_experiment(&cfg, cli.jobs)?;
            json(&report)
        }
    }
}

/// Runs the PCR pipeline exactly as the library does.
fn run_pcr(a: &PcrArgs) -> Result<PcrResult> {
    let (x, y) = load(&a.data)?;
    let opts = PcrOptions {
        method: match a.method {
            Complement::Sa => ComplementMethod::SpectrumAware,
            Complement::Df => ComplementMethod::DegreesOfFreedom,
        },
        q: a.q,
        ..PcrOptions::default()
    };
    pcr::debiased_pcr(x.view(), y.view(), &a.j, &a.data.penalty, a.sigma2, &opts)
}

fn run_fixed_point(a: &FixedPointArgs) -> Result<FixedPointReport> {
    let spectrum = match &a.spectrum {
        Some(path) => io::read_vector(path, false)?.to_vec(),
        None => designs::mp_quantiles(a.delta, a.spectrum_samples)?,
    };
    let prior = match &a.prior {
        Some(path) => io::read_vector(path, false)?.to_vec(),
        None => SignalRecipe::mixture_only(a.seed).prior_samples(a.prior_samples, a.seed)?,
    };
    let opts = FixedPointOptions { max_iter: a.max_iter, seed: a.seed, ..FixedPointOptions::default() };
    let fixed_point = vamp::solve_fixed_point(&spectrum, &prior, a.sigma2, &a.penalty, &opts)?;
    let contraction = vamp::correlation_map_derivative(&spectrum, &prior, &a.penalty, &fixed_point, &opts)?;
    Ok(FixedPointReport { fixed_point, contraction })
}

fn run_simulate(a: &SimulateArgs) -> Result<SimulateReport> {
    let design = DesignRecipe::new(a.family, a.n, a.p, a.seed);
    let signal = SignalRecipe::mixture_only(a.seed);
    let zeta = signal.zeta(a.p)?;
    let data = experiments::simulate(&design, &signal, zeta.view(), a.sigma2, a.seed, false)?;
    std::fs::create_dir_all(&a.out).map_err(|e| Error::Io(format!("{}: {e}", a.out.display())))?;
    let xp = a.out.join(if a.binary { "x.bin" } else { "x.csv" });
    if a.binary {
        io::write_matrix_binary(&xp, data.x.view())?;
    } else {
        io::write_matrix_csv(&xp, data.x.view())?;
    }
    let yp = a.out.join("y.csv");
    let bp = a.out.join("beta.csv");
    io::write_vector_csv(&yp, data.y.view())?;
    io::write_vector_csv(&bp, data.beta_star.view())?;
    Ok(SimulateReport { family: a.family, n: a.n, p: a.p, seed: a.seed, x: xp, y: yp, beta: bp })
}

fn fit_csv(f: &FitResult) -> String {
    let mut s = String::from("index,beta_hat\n");
    for (i, b) in f.beta_hat.iter().enumerate() {
        writeln!(s, "{i},{b}").expect("write to string");
    }
    s
}

fn debias_csv(d: &DebiasResult, alpha: f64) -> Result<String> {
    let rep = inference::report(d.beta_u.view(), d.tau_star, alpha)?;
    let mut s = String::from("index,beta_hat,beta_u,pvalue,ci_lo,ci_hi,reject\n");
    for i in 0..d.beta_u.len() {
        let (lo, hi) = rep.intervals[i];
        writeln!(
            s,
            "{i},{},{},{},{lo},{hi},{}",
            d.beta_hat[i],
            d.beta_u[i],
            rep.pvalues[i],
            rep.decisions[i] as u8
        )
        .expect("write to string");
    }
    Ok(s)
}

fn pcr_csv(r: &PcrResult) -> String {
    let mut s = String::from("index,beta_al,beta_co,beta_pcr\n");
    for i in 0..r.beta_pcr.len() {
        writeln!(s, "{i},{},{},{}", r.beta_al[i], r.beta_co[i], r.beta_pcr[i]).expect("write to string");
    }
    s
}
