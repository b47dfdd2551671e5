use ndarray::Axis;
use spectrum_debias::designs::{self, DesignFamily, DesignParams, DesignRecipe, MarchenkoPastur, SignalRecipe};
use spectrum_debias::{spectral, stats};

#[test]
fn every_family_has_unit_mean_eigenvalue() {
    for fam in DesignFamily::ALL {
        let x = designs::generate_design(&DesignRecipe::new(fam, 60, 120, 1)).unwrap();
        assert_eq!(x.dim(), (60, 120));
        let mean = x.iter().map(|v| v * v).sum::<f64>() / 120.0;
        assert!((mean - 1.0).abs() < 1e-10, "{fam}: {mean}");
    }
}

#[test]
fn designs_are_reproducible_from_the_seed() {
    let r = DesignRecipe::new(DesignFamily::MatrixNormal, 30, 50, 9);
    assert_eq!(designs::generate_design(&r).unwrap(), designs::generate_design(&r).unwrap());
    assert_ne!(designs::generate_design(&r).unwrap(), designs::generate_design(&r.with_seed(10)).unwrap());
}

#[test]
fn gaussian_spectrum_matches_the_mp_cauchy_transform() {
    let (n, p) = (600, 1200);
    let x = designs::generate_design(&DesignRecipe::new(DesignFamily::Gaussian, n, p, 2)).unwrap();
    let d2 = spectral::eigenvalues(x.view()).unwrap();
    let y = p as f64 / n as f64;
    for z in [-0.5, -1.0, -3.0] {
        let emp = d2.iter().map(|&d| 1.0 / (d - z)).sum::<f64>() / p as f64;
        // m solves y·z·m² + (z − 1 + y)·m + 1 = 0 with m > 0 for z < 0.
        let (qa, qb) = (y * z, z - 1.0 + y);
        let disc = (qb * qb - 4.0 * qa).sqrt();
        let theory = [(-qb + disc) / (2.0 * qa), (-qb - disc) / (2.0 * qa)]
            .into_iter()
            .find(|&m| m > 0.0)
            .unwrap();
        assert!((emp - theory).abs() < 0.01 * theory.abs(), "z = {z}: {emp} vs {theory}");
    }
}

#[test]
fn mp_sampler_matches_its_moments() {
    for delta in [0.5, 2.0] {
        let s = designs::mp_samples(delta, 200_000, 3).unwrap();
        let m1 = stats::mean(&s);
        let m2 = stats::mean(&s.iter().map(|v| v * v).collect::<Vec<_>>());
        // Unit-mean MP with ratio c = p/n has second moment 1 + c.
        let c = 1.0 / delta;
        assert!((m1 - 1.0).abs() < 0.01, "mean {m1}");
        assert!((m2 - (1.0 + c)).abs() < 0.03 * (1.0 + c), "second moment {m2}");
    }
    let mp = MarchenkoPastur::new(0.5).unwrap();
    let (lo, hi) = mp.support();
    assert!((lo - (1.0 - 0.5f64.sqrt()).powi(2)).abs() < 1e-12);
    assert!((hi - (1.0 + 0.5f64.sqrt()).powi(2)).abs() < 1e-12);
}

#[test]
fn mp_quantiles_cover_the_atom() {
    let q = designs::mp_quantiles(0.5, 1000).unwrap();
    let zeros = q.iter().filter(|&&v| v == 0.0).count();
    assert!((zeros as f64 - 500.0).abs() <= 1.0, "{zeros}");
}

#[test]
fn spiked_design_separates_fifty_eigenvalues() {
    let x = designs::generate_design(&DesignRecipe::new(DesignFamily::Spiked, 200, 400, 4)).unwrap();
    let d2 = spectral::eigenvalues(x.view()).unwrap();
    let gap = d2[49] / d2[50];
    assert!(gap > 20.0, "gap {gap}");
    assert!(d2[0] / d2[49] < 2.0);
}

#[test]
fn var_rows_are_autocorrelated() {
    let recipe = DesignRecipe {
        params: Some(DesignParams::Var { alpha: vec![0.8], nu_factor: 1.1, zero_first_row: false }),
        ..DesignRecipe::new(DesignFamily::Var, 400, 200, 5)
    };
    let x = designs::generate_design(&recipe).unwrap();
    let (mut num, mut den) = (0.0, 0.0);
    for i in 1..x.nrows() {
        num += x.row(i).dot(&x.row(i - 1));
        den += x.row(i - 1).dot(&x.row(i - 1));
    }
    let rho = num / den;
    assert!((rho - 0.8).abs() < 0.05, "lag-1 coefficient {rho}");
}

#[test]
fn var_b_has_a_zero_first_row() {
    let x = designs::generate_design(&DesignRecipe::new(DesignFamily::VarB, 30, 60, 6)).unwrap();
    assert!(x.row(0).iter().all(|&v| v == 0.0));
}

#[test]
fn matrix_normal_rows_follow_ar1_correlation() {
    let recipe = DesignRecipe {
        params: Some(DesignParams::MatrixNormal { rho: 0.5, nu_factor: None }),
        ..DesignRecipe::new(DesignFamily::MatrixNormal, 300, 400, 7)
    };
    let x = designs::generate_design(&recipe).unwrap();
    let mut c = 0.0;
    let mut v = 0.0;
    for j in 0..x.ncols() {
        let col = x.column(j);
        for i in 1..x.nrows() {
            c += col[i] * col[i - 1];
        }
        v += col.dot(&col);
    }
    let rho = c / v;
    assert!((rho - 0.5).abs() < 0.03, "{rho}");
}

#[test]
fn haar_one_by_one_signs_are_balanced() {
    let pos = (0..4000).filter(|&s| designs::haar_orthogonal(1, s).unwrap()[[0, 0]] > 0.0).count();
    assert!((pos as f64 / 4000.0 - 0.5).abs() < 0.03, "{pos}");
}

#[test]
fn haar_matrices_are_orthogonal_and_unbiased() {
    let p = 30;
    let mut diag = 0.0;
    for s in 0..200 {
        let o = designs::haar_orthogonal(p, s).unwrap();
        let err = (o.t().dot(&o) - ndarray::Array2::<f64>::eye(p)).iter().fold(0.0f64, |m, v| m.max(v.abs()));
        assert!(err < 1e-12);
        diag += o[[0, 0]];
    }
    assert!((diag / 200.0).abs() < 0.05);
}

#[test]
fn mixture_signal_has_the_stated_law() {
    let s = SignalRecipe::mixture_only(8).prior_samples(200_000, 8).unwrap();
    let zero = s.iter().filter(|&&v| v == 0.0).count() as f64 / s.len() as f64;
    let neg = s.iter().filter(|&&v| v < -10.0).count() as f64 / s.len() as f64;
    assert!((zero - 0.7).abs() < 0.005);
    assert!((neg - 0.24).abs() < 0.005);
    let m2 = stats::mean(&s.iter().map(|v| v * v).collect::<Vec<_>>());
    assert!((m2 - (0.24 * 401.0 + 0.06 * 101.0)).abs() < 2.0);
}

#[test]
fn aligned_component_lies_in_the_span() {
    let x = designs::generate_design(&DesignRecipe::new(DesignFamily::Gaussian, 20, 40, 9)).unwrap();
    let spec = spectral::decompose(x.view()).unwrap();
    let al = designs::Alignment { indices: vec![1, 3], magnitudes: vec![2.0, -1.0], sqrt_p_units: false };
    let b = designs::aligned_component(&al, spec.o.view()).unwrap();
    let coords = spec.o.dot(&b);
    assert!((coords[1] - 2.0).abs() < 1e-12 && (coords[3] + 1.0).abs() < 1e-12);
    let rest: f64 = coords.iter().enumerate().filter(|(i, _)| *i != 1 && *i != 3).map(|(_, v)| v * v).sum();
    assert!(rest < 1e-20);
    assert_eq!(spec.o.len_of(Axis(0)), 40);
}

#[test]
fn noise_has_the_requested_variance() {
    let e = designs::generate_noise(100_000, 2.5, 1).unwrap();
    let v = e.iter().map(|x| x * x).sum::<f64>() / e.len() as f64;
    assert!((v - 2.5).abs() < 0.05);
}
