use proptest::prelude::*;
use spectrum_debias::Penalty;

fn penalty() -> impl Strategy<Value = Penalty> {
    prop_oneof![
        (0.01f64..5.0).prop_map(|l2| Penalty::ridge(l2).unwrap()),
        (0.01f64..5.0).prop_map(|l1| Penalty::lasso(l1).unwrap()),
        (0.01f64..5.0, 0.01f64..5.0).prop_map(|(l1, l2)| Penalty::elastic_net(l1, l2).unwrap()),
    ]
}

/// Minimizes `(z − x)²/(2v) + h(z)` by golden-section search.
fn prox_by_search(pen: &Penalty, v: f64, x: f64) -> f64 {
    let (mut a, mut b) = (-x.abs() - 1.0, x.abs() + 1.0);
    let f = |z: f64| (z - x) * (z - x) / (2.0 * v) + pen.value(z);
    let r = (5f64.sqrt() - 1.0) / 2.0;
    for _ in 0..200 {
        let c = b - r * (b - a);
        let d = a + r * (b - a);
        if f(c) < f(d) {
            b = d;
        } else {
            a = c;
        }
    }
    0.5 * (a + b)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(2000))]

    #[test]
    fn prox_minimizes_the_moreau_objective(pen in penalty(), v in 0.05f64..4.0, x in -20.0f64..20.0) {
        let f = |z: f64| (z - x) * (z - x) / (2.0 * v) + pen.value(z);
        let (p, s) = (pen.prox(v, x), prox_by_search(&pen, v, x));
        prop_assert!(f(p) <= f(s) + 1e-12 * (1.0 + f(s).abs()));
        prop_assert!((p - s).abs() < 1e-5);
    }

    #[test]
    fn prox_is_firmly_nonexpansive(pen in penalty(), v in 0.01f64..5.0, x in -50.0f64..50.0, y in -50.0f64..50.0) {
        let (px, py) = (pen.prox(v, x), pen.prox(v, y));
        prop_assert!((px - py) * (x - y) >= (px - py).powi(2) - 1e-12);
    }

    #[test]
    fn jacobian_identity_holds_pointwise(pen in penalty(), v in 0.05f64..4.0, x in -10.0f64..10.0) {
        let lhs = pen.prox_deriv_extended(v, x);
        let rhs = 1.0 / (1.0 + v * pen.hpp_extended(pen.prox(v, x)));
        prop_assert!((lhs - rhs).abs() < 1e-14);
    }

    #[test]
    fn prox_derivative_matches_finite_differences(pen in penalty(), v in 0.05f64..4.0, x in -10.0f64..10.0) {
        let t = v * pen.lambda1();
        prop_assume!((x.abs() - t).abs() > 1e-3);
        let h = 1e-6;
        let fd = (pen.prox(v, x + h) - pen.prox(v, x - h)) / (2.0 * h);
        prop_assert!((fd - pen.prox_deriv_extended(v, x)).abs() < 1e-6);
    }
}

#[test]
fn firm_nonexpansiveness_on_many_pairs() {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha20Rng::seed_from_u64(3);
    for _ in 0..100_000 {
        let pen = Penalty::elastic_net(rng.random_range(0.0..4.0), rng.random_range(0.0..4.0)).unwrap();
        let v: f64 = rng.random_range(0.01..5.0);
        let x: f64 = rng.random_range(-30.0..30.0);
        let y: f64 = rng.random_range(-30.0..30.0);
        let (px, py) = (pen.prox(v, x), pen.prox(v, y));
        assert!((px - py) * (x - y) >= (px - py).powi(2) - 1e-12);
    }
}

#[test]
fn jacobian_at_thresholds() {
    let pen = Penalty::elastic_net(1.0, 0.5).unwrap();
    let v = 0.8;
    for x in [0.8, -0.8, 0.0, 0.8 + 1e-12] {
        let lhs = pen.prox_deriv_extended(v, x);
        let rhs = 1.0 / (1.0 + v * pen.hpp_extended(pen.prox(v, x)));
        assert_eq!(lhs, rhs, "x = {x}");
    }
    assert_eq!(pen.prox_deriv_extended(v, 0.8), 0.0);
    assert!((pen.prox_deriv_extended(v, 2.0) - 1.0 / 1.4).abs() < 1e-15);
}

#[test]
fn penalty_strings_round_trip() {
    for s in ["ridge:0.5", "lasso:1", "en:1,0.1"] {
        let p: Penalty = s.parse().unwrap();
        assert_eq!(p.to_string().parse::<Penalty>().unwrap(), p);
    }
    assert!("en:1".parse::<Penalty>().is_err());
    assert!("ridge:-1".parse::<Penalty>().is_err());
}
