use ndarray::Array1;
use rand_distr::{Distribution, StandardNormal};
use spectrum_debias::designs::{DesignFamily, DesignRecipe, SignalRecipe};
use spectrum_debias::experiments::{self, SimulatedData};
use spectrum_debias::fit::{self, FitOptions};
use spectrum_debias::rng::{self, Stream};
use spectrum_debias::vamp::{self, DataVampInit, FixedPoint, FixedPointOptions};
use spectrum_debias::{designs, spectral, Penalty};

fn dataset(n: usize, p: usize, seed: u64) -> (SimulatedData, Array1<f64>) {
    let design = DesignRecipe::new(DesignFamily::Gaussian, n, p, seed);
    let sig = SignalRecipe::mixture_only(seed);
    let zeta = sig.zeta(p).unwrap();
    (experiments::simulate(&design, &sig, zeta.view(), 1.0, seed, true).unwrap(), zeta)
}

fn fixed_point(data: &SimulatedData, prior: &Array1<f64>, pen: &Penalty) -> FixedPoint {
    let d2 = &data.spectrum.as_ref().unwrap().d2;
    vamp::solve_fixed_point(d2.as_slice().unwrap(), prior.as_slice().unwrap(), 1.0, pen, &FixedPointOptions::default())
        .unwrap()
}

fn reference(data: &SimulatedData, pen: &Penalty) -> Array1<f64> {
    fit::fit(data.x.view(), data.y.view(), pen, &FitOptions { tol: 1e-12, ..FitOptions::default() }).unwrap().beta_hat
}

#[test]
fn oracle_vamp_tracks_the_elastic_net() {
    let pen = Penalty::elastic_net(1.0, 0.1).unwrap();
    let (data, zeta) = dataset(400, 800, 12);
    let fp = fixed_point(&data, &zeta, &pen);
    let bh = reference(&data, &pen);
    let spec = data.spectrum.as_ref().unwrap();
    let states =
        vamp::oracle_vamp(data.x.view(), spec, data.y.view(), data.beta_star.view(), &fp, &pen, 50, Some(bh.view()), 12)
            .unwrap();
    let d: Vec<f64> = states.iter().map(|s| s.dist_to_reference.unwrap()).collect();
    assert!(d[49] <= 1e-4, "{}", d[49]);
    assert!(d[20] < d[2] && d[10] < d[1]);
}

#[test]
fn ridge_reaches_the_estimator_after_one_round() {
    let pen = Penalty::ridge(0.5).unwrap();
    let (data, zeta) = dataset(150, 300, 3);
    let fp = fixed_point(&data, &zeta, &pen);
    let bh = reference(&data, &pen);
    let spec = data.spectrum.as_ref().unwrap();
    let states =
        vamp::oracle_vamp(data.x.view(), spec, data.y.view(), data.beta_star.view(), &fp, &pen, 3, Some(bh.view()), 3)
            .unwrap();
    let err = (&states[0].x2 - &bh).iter().fold(0.0f64, |m, v| m.max(v.abs()));
    assert!(err < 1e-8, "{err}");
    assert!(states[1].dist_to_reference.unwrap() < 1e-16);
}

#[test]
fn data_vamp_reproduces_oracle_vamp_for_ridge() {
    let pen = Penalty::ridge(0.8).unwrap();
    let (data, zeta) = dataset(120, 240, 5);
    let fp = fixed_point(&data, &zeta, &pen);
    let spec = data.spectrum.as_ref().unwrap();
    let seed = 5;
    let oracle =
        vamp::oracle_vamp(data.x.view(), spec, data.y.view(), data.beta_star.view(), &fp, &pen, 10, None, seed).unwrap();
    let mut r = rng::stream(seed, Stream::Init);
    let sd = fp.tau_star.sqrt();
    let r1 = data.beta_star.mapv(|b| b + sd * <StandardNormal as Distribution<f64>>::sample(&StandardNormal, &mut r));
    let init = DataVampInit { gamma1: fp.gamma_star, r1 };
    let data_run = vamp::data_vamp(data.x.view(), spec, data.y.view(), &pen, &init, 10, None).unwrap();
    for (a, b) in oracle.iter().zip(&data_run) {
        let err = (&a.x1 - &b.x1).iter().fold(0.0f64, |m, v| m.max(v.abs()));
        assert!(err < 1e-8, "t = {}: {err}", a.t);
    }
}

#[test]
fn zero_data_stays_at_zero() {
    let pen = Penalty::elastic_net(0.5, 0.2).unwrap();
    let x = designs::generate_design(&DesignRecipe::new(DesignFamily::Gaussian, 40, 80, 1)).unwrap();
    let spec = spectral::decompose(x.view()).unwrap();
    let y = Array1::zeros(40);
    let init = DataVampInit { gamma1: 0.5, r1: Array1::zeros(80) };
    match vamp::data_vamp(x.view(), &spec, y.view(), &pen, &init, 5, None) {
        Ok(states) => {
            for s in states {
                assert!(s.x1.iter().all(|&v| v == 0.0));
            }
        }
        Err(e) => assert_eq!(e.code(), "NONCONVERGENCE"),
    }
    let ridge = Penalty::ridge(0.5).unwrap();
    let states = vamp::data_vamp(x.view(), &spec, y.view(), &ridge, &init, 5, None).unwrap();
    for s in states {
        assert!(s.x1.iter().chain(s.x2.iter()).all(|&v| v == 0.0));
    }
}

#[test]
fn fixed_point_equations_hold_at_the_solution() {
    let pen = Penalty::elastic_net(1.0, 0.1).unwrap();
    let spectrum = designs::mp_quantiles(0.5, 2000).unwrap();
    let prior = SignalRecipe::mixture_only(0).prior_samples(5000, 0).unwrap();
    let opts = FixedPointOptions::default();
    let fp = vamp::solve_fixed_point(&spectrum, &prior, 1.0, &pen, &opts).unwrap();
    assert!(fp.converged);
    assert!(fp.eta_star > fp.gamma_star && fp.gamma_star > 0.0);
    let res = vamp::fixed_point_residuals(&spectrum, &prior, 1.0, &pen, &fp, &opts).unwrap();
    assert!(res.iter().all(|&r| r <= 1e-6), "{res:?}");
    let c = vamp::correlation_map_derivative(&spectrum, &prior, &pen, &fp, &opts).unwrap();
    assert!(c.abs() < 1.0, "{c}");
}

#[test]
fn cauchy_inverse_of_the_r_transform() {
    let d2 = designs::mp_quantiles(2.0, 3000).unwrap();
    for z in [0.3, 1.0, 2.0] {
        let r = spectral::empirical_r_transform(&d2, z).unwrap();
        let w = r + 1.0 / z;
        let g = spectral::empirical_cauchy(&d2, w).unwrap();
        assert!((g - z).abs() < 1e-8 * z, "{g} vs {z}");
    }
}

#[test]
fn monte_carlo_expectation_agrees_with_integration() {
    let pen = Penalty::elastic_net(1.0, 0.1).unwrap();
    let spectrum = designs::mp_quantiles(0.5, 2000).unwrap();
    let prior = SignalRecipe::mixture_only(0).prior_samples(20_000, 0).unwrap();
    let exact = vamp::solve_fixed_point(&spectrum, &prior, 1.0, &pen, &FixedPointOptions::default()).unwrap();
    let opts = FixedPointOptions { z_draws: Some(20_000), residual_tol: 1e-2, init: Some((exact.gamma_star, exact.tau_star)), ..FixedPointOptions::default() };
    let res = vamp::fixed_point_residuals(&spectrum, &prior, 1.0, &pen, &exact, &opts).unwrap();
    assert!(res.iter().all(|&r| r < 0.05), "{res:?}");
}
