//! Solver contracts against independent oracles: pseudo-inverse least
//! squares, basis-enumeration LAD, KKT and subgradient certificates, and
//! cross-validation behavior.

mod support;

use nalgebra::{DMatrix, DVector};
use robust_bayes_core::baselines::{
    cross_validate, fit_lad, fit_ls, fit_penalized, lambda_grid, objective, CvConfig, Lambda,
    Loss, Penalty, PenaltySpec,
};
use robust_bayes_core::model::Dataset;
use robust_bayes_core::rng::RngStream;
use support::{
    lad_enumeration_objective, lad_subgradient_violation, lasso_kkt_violation, random_matrix,
    random_vector,
};

fn dataset_from(x: DMatrix<f64>, y: DVector<f64>) -> Dataset {
    Dataset::new(x, y, None).unwrap()
}

#[test]
fn ls_matches_pseudo_inverse_oracle() {
    let mut rng = RngStream::new(101, 0).rng();
    for trial in 0..20 {
        let p = 2 + trial % 19;
        let n = p + 5 + trial;
        let x = random_matrix(n, p, &mut rng);
        let y = random_vector(n, &mut rng);
        let d = dataset_from(x.clone(), y.clone());
        let beta = fit_ls(&d).unwrap();
        let pinv = x
            .clone()
            .svd(true, true)
            .pseudo_inverse(1e-12)
            .unwrap();
        let oracle = &pinv * &y;
        let err = (&beta - &oracle).amax();
        assert!(err < 1e-8, "trial {trial}: deviation {err}");
    }
}

#[test]
fn lad_matches_enumeration_oracle() {
    let mut rng = RngStream::new(102, 0).rng();
    for trial in 0..30 {
        let p = 1 + trial % 2;
        let n = p + 3 + trial % 9;
        let x = random_matrix(n, p, &mut rng);
        let y = random_vector(n, &mut rng);
        let d = dataset_from(x.clone(), y.clone());
        let beta = fit_lad(&d).unwrap();
        let got = objective(&d, Loss::Absolute, Penalty::None, 0.0, &beta);
        let best = lad_enumeration_objective(&x, &y);
        let rel = (got - best) / best.max(1e-12);
        assert!(
            rel < 1e-6,
            "trial {trial} (n={n}, p={p}): objective {got} vs oracle {best}"
        );
    }
}

#[test]
fn lad_resists_a_gross_outlier() {
    // one wild response value: the absolute-loss fit stays near the truth
    // while least squares is dragged away
    let x = DMatrix::from_column_slice(5, 1, &[1.0, 2.0, 3.0, 4.0, 5.0]);
    let beta0 = 1.0;
    let mut y = &x * DVector::from_element(1, beta0);
    y[4] += 50.0;
    let d = dataset_from(x.clone(), y.clone());
    let lad = fit_lad(&d).unwrap();
    let ls = fit_ls(&d).unwrap();
    assert!((lad[0] - beta0).abs() < 1e-6, "lad = {}", lad[0]);
    assert!((ls[0] - beta0).abs() > 0.5, "ls = {}", ls[0]);
    // and the returned objective is the enumeration optimum
    let got = objective(&d, Loss::Absolute, Penalty::None, 0.0, &lad);
    let best = lad_enumeration_objective(&x, &y);
    assert!((got - best).abs() / best < 1e-6);
}

#[test]
fn zero_lambda_matches_unpenalized_fits() {
    let mut rng = RngStream::new(103, 0).rng();
    let x = random_matrix(25, 4, &mut rng);
    let y = random_vector(25, &mut rng);
    let d = dataset_from(x, y);
    let ls = fit_ls(&d).unwrap();
    let lasso0 = fit_penalized(
        &d,
        &PenaltySpec::new(Loss::Squared, Penalty::L1, Lambda::Fixed(0.0)).unwrap(),
    )
    .unwrap();
    assert!((&ls - &lasso0).amax() < 1e-6);

    let lad = fit_lad(&d).unwrap();
    for penalty in [Penalty::L1, Penalty::L2] {
        let fit0 = fit_penalized(
            &d,
            &PenaltySpec::new(Loss::Absolute, penalty, Lambda::Fixed(0.0)).unwrap(),
        )
        .unwrap();
        let obj_lad = objective(&d, Loss::Absolute, Penalty::None, 0.0, &lad);
        let obj_fit = objective(&d, Loss::Absolute, Penalty::None, 0.0, &fit0);
        assert!(
            (obj_fit - obj_lad).abs() / obj_lad < 1e-6,
            "{penalty:?}: {obj_fit} vs {obj_lad}"
        );
    }
}

#[test]
fn lasso_kkt_certificate_on_random_instances() {
    let mut rng = RngStream::new(104, 0).rng();
    for trial in 0..30 {
        let p = 2 + trial % 6;
        let n = p + 8 + trial % 11;
        let x = random_matrix(n, p, &mut rng);
        let y = random_vector(n, &mut rng);
        let d = dataset_from(x.clone(), y.clone());
        let grid = lambda_grid(&d, Loss::Squared, &CvConfig::default());
        for lambda in [grid[5], grid[20], grid[40]] {
            let beta = fit_penalized(
                &d,
                &PenaltySpec::new(Loss::Squared, Penalty::L1, Lambda::Fixed(lambda)).unwrap(),
            )
            .unwrap();
            let viol = lasso_kkt_violation(&x, &y, lambda, &beta);
            assert!(
                viol < 1e-6,
                "trial {trial}, lambda {lambda}: KKT violation {viol}"
            );
        }
    }
}

#[test]
fn ridge_matches_closed_form_on_random_instances() {
    let mut rng = RngStream::new(105, 0).rng();
    for trial in 0..30 {
        let p = 2 + trial % 8;
        let n = p + 6 + trial % 7;
        let x = random_matrix(n, p, &mut rng);
        let y = random_vector(n, &mut rng);
        let d = dataset_from(x.clone(), y.clone());
        let lambda = 0.1 + trial as f64 * 0.2;
        let beta = fit_penalized(
            &d,
            &PenaltySpec::new(Loss::Squared, Penalty::L2, Lambda::Fixed(lambda)).unwrap(),
        )
        .unwrap();
        let mut a = x.transpose() * &x;
        for j in 0..p {
            a[(j, j)] += lambda;
        }
        let oracle = a.try_inverse().unwrap() * (x.transpose() * &y);
        assert!((&beta - &oracle).amax() < 1e-8, "trial {trial}");
    }
}

#[test]
fn penalized_lad_zero_subgradient_certificate() {
    let mut rng = RngStream::new(106, 0).rng();
    for trial in 0..20 {
        let p = 2 + trial % 4;
        let n = p + 10 + trial % 9;
        let x = random_matrix(n, p, &mut rng);
        let y = random_vector(n, &mut rng);
        let d = dataset_from(x.clone(), y.clone());
        for penalty in [Penalty::L1, Penalty::L2] {
            let lambda = 0.3 + 0.1 * (trial % 5) as f64;
            let beta = fit_penalized(
                &d,
                &PenaltySpec::new(Loss::Absolute, penalty, Lambda::Fixed(lambda)).unwrap(),
            )
            .unwrap();
            let viol =
                lad_subgradient_violation(&x, &y, penalty == Penalty::L1, lambda, &beta);
            assert!(
                viol < 1e-4,
                "trial {trial} {penalty:?}: subgradient violation {viol}"
            );
        }
    }
}

#[test]
fn cv_shrinks_under_pure_noise() {
    // no signal: the selected lambda sits in the large half of the grid
    // and the fit is smaller than least squares
    let mut rng = RngStream::new(107, 0).rng();
    let x = random_matrix(60, 10, &mut rng);
    let y = random_vector(60, &mut rng);
    let d = dataset_from(x, y);
    let spec = PenaltySpec::new(Loss::Squared, Penalty::L1, Lambda::CrossValidate).unwrap();
    let cfg = CvConfig::default();
    let mut cv_rng = RngStream::new(108, 0).rng();
    let (lambda, beta) = cross_validate(&d, &spec, &cfg, &mut cv_rng).unwrap();
    let grid = lambda_grid(&d, Loss::Squared, &cfg);
    assert!(
        lambda >= grid[grid.len() / 2],
        "selected lambda {lambda} is in the small half of the grid"
    );
    let ls = fit_ls(&d).unwrap();
    assert!(beta.norm() < ls.norm());
}

#[test]
fn objective_never_increases_along_cd_path() {
    // warm-started path fits must not raise the objective at any lambda
    // when refit at the same lambda (sanity on the solver's stationarity)
    let mut rng = RngStream::new(109, 0).rng();
    let x = random_matrix(40, 6, &mut rng);
    let y = random_vector(40, &mut rng);
    let d = dataset_from(x, y);
    let grid = lambda_grid(&d, Loss::Squared, &CvConfig { grid_size: 10, ..CvConfig::default() });
    let mut prev_obj_at_prev_lambda = f64::INFINITY;
    for &lambda in &grid {
        let beta = fit_penalized(
            &d,
            &PenaltySpec::new(Loss::Squared, Penalty::L1, Lambda::Fixed(lambda)).unwrap(),
        )
        .unwrap();
        let obj = objective(&d, Loss::Squared, Penalty::L1, lambda, &beta);
        // descending lambda: optimal objective is non-increasing
        assert!(obj <= prev_obj_at_prev_lambda + 1e-9);
        prev_obj_at_prev_lambda = obj;
    }
}
