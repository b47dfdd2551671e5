use ndarray::{Array1, Array2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;
use spectrum_debias::debias::{self, DebiasOptions, Sigma2Source};
use spectrum_debias::fit::FitOptions;
use spectrum_debias::{spectral, Penalty};

fn data(seed: u64, n: usize, p: usize) -> (Array2<f64>, Array1<f64>, Array1<f64>) {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let x = Array2::from_shape_fn((n, p), |_| rng.sample::<f64, _>(StandardNormal) / (n as f64).sqrt());
    let beta = Array1::from_shape_fn(p, |i| if i % 4 == 0 { 2.5 } else { 0.0 });
    let y = x.dot(&beta) + Array1::from_shape_fn(n, |_| rng.sample::<f64, _>(StandardNormal));
    (x, y, beta)
}

fn en() -> Penalty {
    Penalty::elastic_net(1.0, 0.1).unwrap()
}

#[test]
fn noise_estimate_solves_the_two_by_two_system() {
    for seed in 0..4 {
        let (x, y, _) = data(seed, 80, 120);
        let (f, d) =
            debias::spectrum_aware_debias(x.view(), y.view(), &en(), None, &FitOptions::default(), &DebiasOptions::default())
                .unwrap();
        assert_eq!(d.sigma2_source, Sigma2Source::Estimated);
        let d2 = spectral::eigenvalues(x.view()).unwrap();
        let (n, p) = (80.0, 120.0);
        let e = d.eta_star - d.adj;
        let rd = debias::r_dstar(x.view(), y.view(), f.beta_hat.view(), d.adj, d.eta_star);
        let v = x.dot(&rd) - &y;
        let r = &y - &x.dot(&f.beta_hat);
        let lhs = [v.dot(&v) / p, r.dot(&r) / p];
        let mean = |g: &dyn Fn(f64) -> f64| d2.iter().map(|&t| g(t)).sum::<f64>() / p;
        let a11 = mean(&|t| t);
        let a12 = n / p;
        let a21 = mean(&|t| t * e * e / ((t + e) * (t + e)));
        let a22 = (n - p) / p + mean(&|t| (e / (t + e)).powi(2));
        let det = a11 * a22 - a12 * a21;
        let tau = (lhs[0] * a22 - a12 * lhs[1]) / det;
        let sigma2 = (a11 * lhs[1] - a21 * lhs[0]) / det;
        assert!((sigma2 - d.sigma2).abs() < 1e-9 * sigma2.abs().max(1.0), "{sigma2} vs {}", d.sigma2);
        if !d.flags.contains(&debias::Flag::TauDstarClamped) {
            assert!((tau - d.tau_dstar).abs() < 1e-9 * tau.abs().max(1.0), "{tau} vs {}", d.tau_dstar);
        }
    }
}

#[test]
fn dual_formula_for_tau_dstar() {
    for seed in 10..15 {
        let (x, y, _) = data(seed, 60, 90);
        let (f, d) = debias::spectrum_aware_debias(
            x.view(),
            y.view(),
            &en(),
            Some(1.0),
            &FitOptions::default(),
            &DebiasOptions::default(),
        )
        .unwrap();
        let d2 = spectral::eigenvalues(x.view()).unwrap();
        let direct =
            debias::tau_dstar_hat(x.view(), y.view(), f.beta_hat.view(), d.adj, d.eta_star, 1.0, d2.view()).unwrap();
        let dual = debias::tau_dstar_via_r_dstar(x.view(), y.view(), d.r_dstar.view(), 1.0, d2.view()).unwrap();
        assert!((direct - dual).abs() <= 1e-9 * direct.abs().max(1.0));
    }
}

#[test]
fn ridge_debiasing_centres_the_conditional_mean() {
    let (x, y, _) = data(20, 50, 80);
    let l2 = 0.5;
    let pen = Penalty::ridge(l2).unwrap();
    let (_, d) =
        debias::spectrum_aware_debias(x.view(), y.view(), &pen, Some(1.0), &FitOptions::default(), &DebiasOptions::default())
            .unwrap();
    let d2 = spectral::eigenvalues(x.view()).unwrap();
    let avg = (1.0 + l2 / d.adj) * d2.iter().map(|&t| t / (t + l2)).sum::<f64>() / 80.0;
    assert!((avg - 1.0).abs() < 1e-9);
}

#[test]
fn tau_star_formula_reduces_for_constant_spectrum() {
    let d2 = Array1::from_elem(10, 2.0);
    let (adj, eta, s2, tdd) = (2.0, 3.0, 0.7, 4.0);
    let t = debias::tau_star_hat(d2.view(), adj, eta, s2, tdd);
    let expect = (eta * eta * 2.0 * s2) / ((eta * eta) * adj * adj);
    assert!((t - expect).abs() < 1e-14);
}

#[test]
fn standardized_errors_are_roughly_gaussian() {
    let (x, y, beta) = data(30, 400, 800);
    let (_, d) =
        debias::spectrum_aware_debias(x.view(), y.view(), &en(), Some(1.0), &FitOptions::default(), &DebiasOptions::default())
            .unwrap();
    let z = d.standardized_errors(beta.view());
    let ks = spectrum_debias::stats::ks_normal(z.as_slice().unwrap());
    assert!(ks < 0.08, "{ks}");
}

#[test]
fn estimation_refused_near_unit_feasibility_ratio() {
    let (x, y, _) = data(40, 40, 40);
    let opts = DebiasOptions { feasibility_tol: 10.0 };
    let err = debias::spectrum_aware_debias(x.view(), y.view(), &en(), None, &FitOptions::default(), &opts).unwrap_err();
    assert_eq!(err.code(), "FEASIBILITY_FAILED");
}

#[test]
fn dimension_mismatch_is_reported() {
    let (x, _, _) = data(50, 20, 30);
    let y = Array1::zeros(19);
    let err = debias::spectrum_aware_debias(x.view(), y.view(), &en(), Some(1.0), &FitOptions::default(), &DebiasOptions::default())
        .unwrap_err();
    assert_eq!(err.code(), "DIM_MISMATCH");
}
