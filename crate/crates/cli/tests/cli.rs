use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use spectrum_debias::debias::{self, DebiasOptions};
use spectrum_debias::designs::{self, DesignFamily, DesignRecipe, SignalRecipe};
use spectrum_debias::experiments::{self, ExperimentConfig};
use spectrum_debias::fit::{self, FitOptions};
use spectrum_debias::pcr::{self, JSpec, PcrOptions};
use spectrum_debias::vamp::{self, FixedPointOptions};
use spectrum_debias::{io, Penalty};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_spectrum-debias"));
    c.env_remove("SPECTRUM_DEBIAS_JOBS");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn stdout(out: &Output) -> String {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn pretty<T: serde::Serialize>(v: &T) -> String {
    serde_json::to_string_pretty(v).unwrap() + "\n"
}

fn simulate(dir: &Path, family: &str, n: usize, p: usize, seed: u64) -> (PathBuf, PathBuf) {
    let out = run(&[
        "simulate",
        "--family",
        family,
        "--n",
        &n.to_string(),
        "--p",
        &p.to_string(),
        "--seed",
        &seed.to_string(),
        "--out",
        dir.to_str().unwrap(),
    ]);
    stdout(&out);
    (dir.join("x.csv"), dir.join("y.csv"))
}

fn error_code(out: &Output) -> String {
    assert_eq!(out.status.code(), Some(2));
    let v: Value = serde_json::from_slice(&out.stderr).unwrap();
    assert!(v["message"].is_string());
    v["code"].as_str().unwrap().to_string()
}

#[test]
fn simulate_matches_the_library() {
    let dir = tempfile::tempdir().unwrap();
    let (xp, yp) = simulate(dir.path(), "matrix_normal", 40, 80, 7);
    let design = DesignRecipe::new(DesignFamily::MatrixNormal, 40, 80, 7);
    let signal = SignalRecipe::mixture_only(7);
    let zeta = signal.zeta(80).unwrap();
    let data = experiments::simulate(&design, &signal, zeta.view(), 1.0, 7, false).unwrap();
    assert_eq!(io::read_matrix(&xp, false).unwrap(), data.x);
    assert_eq!(io::read_vector(&yp, false).unwrap(), data.y);
    assert_eq!(io::read_vector(&dir.path().join("beta.csv"), false).unwrap(), data.beta_star);

    let again = tempfile::tempdir().unwrap();
    simulate(again.path(), "matrix_normal", 40, 80, 7);
    for f in ["x.csv", "y.csv", "beta.csv"] {
        assert_eq!(std::fs::read(dir.path().join(f)).unwrap(), std::fs::read(again.path().join(f)).unwrap());
    }
}

#[test]
fn fit_and_debias_match_the_library() {
    let dir = tempfile::tempdir().unwrap();
    let (xp, yp) = simulate(dir.path(), "gaussian", 60, 100, 1);
    let x = io::read_matrix(&xp, false).unwrap();
    let y = io::read_vector(&yp, false).unwrap();
    let pen: Penalty = "en:1.0,0.1".parse().unwrap();
    let (xs, ys) = (xp.to_str().unwrap(), yp.to_str().unwrap());

    let f = fit::fit(x.view(), y.view(), &pen, &FitOptions::default()).unwrap();
    assert_eq!(stdout(&run(&["fit", "--x", xs, "--y", ys, "--penalty", "en:1.0,0.1"])), pretty(&f));

    let (_, d) =
        debias::spectrum_aware_debias(x.view(), y.view(), &pen, Some(1.0), &FitOptions::default(), &DebiasOptions::default())
            .unwrap();
    let got = stdout(&run(&["debias", "--x", xs, "--y", ys, "--penalty", "en:1.0,0.1", "--sigma2", "1"]));
    assert_eq!(got, pretty(&d));

    let (_, e) =
        debias::spectrum_aware_debias(x.view(), y.view(), &pen, None, &FitOptions::default(), &DebiasOptions::default())
            .unwrap();
    let got = stdout(&run(&["debias", "--x", xs, "--y", ys, "--penalty", "en:1.0,0.1"]));
    assert_eq!(got, pretty(&e));
    let v: Value = serde_json::from_str(&got).unwrap();
    assert_eq!(v["sigma2_source"], "estimated");

    let csv = stdout(&run(&["debias", "--x", xs, "--y", ys, "--penalty", "en:1.0,0.1", "--sigma2", "1", "--format", "csv"]));
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "index,beta_hat,beta_u,pvalue,ci_lo,ci_hi,reject");
    assert_eq!(lines.len(), 101);
    let first: Vec<&str> = lines[1].split(',').collect();
    assert_eq!(first[2].parse::<f64>().unwrap(), d.beta_u[0]);
}

#[test]
fn pcr_and_alignment_match_the_library() {
    let dir = tempfile::tempdir().unwrap();
    let (xp, yp) = simulate(dir.path(), "spiked", 120, 200, 2);
    let x = io::read_matrix(&xp, false).unwrap();
    let y = io::read_vector(&yp, false).unwrap();
    let pen: Penalty = "en:1.0,0.1".parse().unwrap();
    let (xs, ys) = (xp.to_str().unwrap(), yp.to_str().unwrap());
    let r = pcr::debiased_pcr(x.view(), y.view(), &JSpec::Top(20), &pen, Some(1.0), &PcrOptions::default()).unwrap();
    let args = ["--x", xs, "--y", ys, "--penalty", "en:1.0,0.1", "--j", "top:20", "--sigma2", "1"];
    let got = stdout(&bin().arg("pcr-debias").args(args).output().unwrap());
    assert_eq!(got, pretty(&r));
    let got = stdout(&bin().arg("align-test").args(args).output().unwrap());
    assert_eq!(got, pretty(r.alignment.as_ref().unwrap()));

    let j = JSpec::List(vec![1, 3, 5]);
    let r = pcr::debiased_pcr(x.view(), y.view(), &j, &pen, Some(1.0), &PcrOptions::default()).unwrap();
    let args = ["--x", xs, "--y", ys, "--penalty", "en:1.0,0.1", "--j", "1,3,5", "--sigma2", "1"];
    assert_eq!(stdout(&bin().arg("pcr-debias").args(args).output().unwrap()), pretty(&r));
}

#[test]
fn fixed_point_matches_the_library() {
    let pen: Penalty = "en:1,0.1".parse().unwrap();
    let spectrum = designs::mp_quantiles(0.5, 500).unwrap();
    let prior = SignalRecipe::mixture_only(4).prior_samples(3000, 4).unwrap();
    let opts = FixedPointOptions { seed: 4, ..FixedPointOptions::default() };
    let fp = vamp::solve_fixed_point(&spectrum, &prior, 1.0, &pen, &opts).unwrap();
    let c = vamp::correlation_map_derivative(&spectrum, &prior, &pen, &fp, &opts).unwrap();
    let got = stdout(&run(&[
        "fixed-point",
        "--penalty",
        "en:1,0.1",
        "--spectrum-samples",
        "500",
        "--prior-samples",
        "3000",
        "--seed",
        "4",
    ]));
    #[derive(serde::Serialize)]
    struct Report {
        fixed_point: vamp::FixedPoint,
        contraction: f64,
    }
    assert_eq!(got, pretty(&Report { fixed_point: fp, contraction: c }));
}

#[test]
fn experiment_matches_the_library() {
    let dir = tempfile::tempdir().unwrap();
    let cfg_path = dir.path().join("study.toml");
    std::fs::write(
        &cfg_path,
        r#"
method = "sa"
penalty = "en:1,0.1"
trials = 2
seed = 5
alpha_grid = [0.1, 0.5]
[design]
family = "matrix_normal"
n = 60
p = 120
[signal]
mixture = [{ weight = 0.3, mean = 3.0, sd = 1.0 }, { weight = 0.7, mean = 0.0, sd = 0.0 }]
"#,
    )
    .unwrap();
    let out_dir = dir.path().join("out");
    let got = stdout(
        &bin()
            .args(["experiment", "--config", cfg_path.to_str().unwrap(), "--out", out_dir.to_str().unwrap()])
            .env("SPECTRUM_DEBIAS_JOBS", "2")
            .output()
            .unwrap(),
    );
    let cfg = ExperimentConfig::from_path(&cfg_path).unwrap();
    let report = experiments::run_experiment(&cfg, None).unwrap();
    assert_eq!(got, pretty(&report));
    let summary = std::fs::read_to_string(out_dir.join("summary.json")).unwrap();
    assert_eq!(summary, got);
    let lib_dir = dir.path().join("lib");
    experiments::write_outputs(&report, &lib_dir).unwrap();
    for f in ["errors_standardized.csv", "qq.csv", "fcp_curve.csv"] {
        assert_eq!(std::fs::read(out_dir.join(f)).unwrap(), std::fs::read(lib_dir.join(f)).unwrap(), "{f}");
    }
}

#[test]
fn failures_exit_with_code_two() {
    let dir = tempfile::tempdir().unwrap();
    let (xp, yp) = simulate(dir.path(), "gaussian", 30, 50, 3);
    let (xs, ys) = (xp.to_str().unwrap(), yp.to_str().unwrap());
    let beta = dir.path().join("beta.csv");

    let out = run(&["debias", "--x", xs, "--y", beta.to_str().unwrap(), "--penalty", "lasso:1"]);
    assert_eq!(error_code(&out), "DIM_MISMATCH");
    let out = run(&["debias", "--x", "/nonexistent.csv", "--y", ys, "--penalty", "lasso:1"]);
    assert_eq!(error_code(&out), "IO");
    let out = run(&["debias", "--x", xs, "--y", ys, "--penalty", "lasso:1000000", "--sigma2", "1"]);
    assert_eq!(error_code(&out), "CERTIFICATE_FAILED");
    let out = run(&["pcr-debias", "--x", xs, "--y", ys, "--penalty", "lasso:1", "--j", "99"]);
    assert_eq!(error_code(&out), "INVALID_INPUT");

    let out = run(&["debias", "--x", xs, "--y", ys, "--penalty", "bogus"]);
    assert_eq!(out.status.code(), Some(2));
    let out = run(&["pcr-debias", "--x", xs, "--y", ys, "--penalty", "lasso:1"]);
    assert_eq!(out.status.code(), Some(2));
}
