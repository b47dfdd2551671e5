use ndarray::{Array1, Array2};
use ndarray_linalg::Solve;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;
use spectrum_debias::fit::{self, FitOptions};
use spectrum_debias::Penalty;

fn problem(seed: u64, n: usize, p: usize) -> (Array2<f64>, Array1<f64>) {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let x = Array2::from_shape_fn((n, p), |_| rng.sample::<f64, _>(StandardNormal) / (n as f64).sqrt());
    let beta = Array1::from_shape_fn(p, |i| if i % 3 == 0 { 3.0 } else { 0.0 });
    let y = x.dot(&beta) + Array1::from_shape_fn(n, |_| rng.sample::<f64, _>(StandardNormal));
    (x, y)
}

#[test]
fn ridge_fit_matches_normal_equations() {
    let (x, y) = problem(1, 40, 70);
    let pen = Penalty::ridge(0.7).unwrap();
    let f = fit::fit(x.view(), y.view(), &pen, &FitOptions::default()).unwrap();
    let a = x.t().dot(&x) + Array2::<f64>::eye(70) * 0.7;
    let exact = a.solve_into(x.t().dot(&y)).unwrap();
    let err = (&f.beta_hat - &exact).iter().fold(0.0f64, |m, v| m.max(v.abs()));
    assert!(err < 1e-7, "{err}");
}

#[test]
fn zero_fit_when_lambda_dominates() {
    let (x, y) = problem(2, 30, 50);
    let lmax = x.t().dot(&y).iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let pen = Penalty::lasso(lmax * 1.01).unwrap();
    let f = fit::fit(x.view(), y.view(), &pen, &FitOptions::default()).unwrap();
    assert_eq!(f.support_size(), 0);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn fit_satisfies_optimality(seed in 0u64..10_000, l1 in 0.05f64..2.0, l2 in 0.0f64..1.0) {
        let (x, y) = problem(seed, 30, 60);
        let pen = Penalty::elastic_net(l1, l2).unwrap();
        let f = fit::fit(x.view(), y.view(), &pen, &FitOptions::default()).unwrap();
        prop_assert!(f.converged);
        prop_assert!(fit::kkt_residual(x.view(), y.view(), f.beta_hat.view(), &pen) <= 1e-9);
        let obj = f.objective;
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        for _ in 0..20 {
            let pert = &f.beta_hat + &Array1::from_shape_fn(60, |_| 1e-3 * rng.sample::<f64, _>(StandardNormal));
            let xb = x.dot(&pert);
            prop_assert!(fit::objective(y.view(), xb.view(), pert.view(), &pen) >= obj - 1e-9);
        }
    }
}
