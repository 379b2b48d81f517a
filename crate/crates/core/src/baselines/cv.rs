//! K-fold cross-validation over a descending lambda path.

use nalgebra::{DMatrix, DVector};
use rand::seq::SliceRandom;
use rand::Rng;

use super::{admm, cd, Lambda, Loss, Penalty, PenaltySpec};
use crate::error::{Error, Result};
use crate::model::Dataset;

/// Fold count and lambda-grid geometry.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct CvConfig {
    pub folds: usize,
    /// Number of grid points, log-spaced from `lambda_max` down to
    /// `lambda_min_ratio * lambda_max`.
    pub grid_size: usize,
    pub lambda_min_ratio: f64,
}

impl Default for CvConfig {
    fn default() -> Self {
        CvConfig {
            folds: 5,
            grid_size: 50,
            lambda_min_ratio: 1e-4,
        }
    }
}

impl CvConfig {
    fn validate(&self, n: usize) -> Result<()> {
        if self.folds < 2 {
            return Err(Error::Config(format!(
                "cross-validation needs >= 2 folds, got {}",
                self.folds
            )));
        }
        if self.folds > n {
            return Err(Error::Config(format!(
                "{} folds cannot partition {n} observations",
                self.folds
            )));
        }
        if self.grid_size == 0 {
            return Err(Error::Config("lambda grid is empty".into()));
        }
        if !(self.lambda_min_ratio > 0.0 && self.lambda_min_ratio <= 1.0) {
            return Err(Error::Config(format!(
                "lambda_min_ratio must lie in (0, 1], got {}",
                self.lambda_min_ratio
            )));
        }
        Ok(())
    }
}

/// The descending lambda path for a dataset.
///
/// The top of the grid is the smallest lambda that zeroes every
/// coordinate of the l1 fit (`2 ||X'y||_inf` for squared loss,
/// `||X' sign(y)||_inf` for absolute loss); l2 paths reuse the same scale
/// since ridge shrinkage there is essentially total.
pub fn lambda_grid(dataset: &Dataset, loss: Loss, cfg: &CvConfig) -> Vec<f64> {
    let top = match loss {
        Loss::Squared => 2.0 * (dataset.x().transpose() * dataset.y()).abs().max(),
        Loss::Absolute => {
            let signs = dataset.y().map(|v| if v >= 0.0 { 1.0 } else { -1.0 });
            (dataset.x().transpose() * signs).abs().max()
        }
    };
    let top = if top > 0.0 { top } else { 1.0 };
    if cfg.grid_size == 1 {
        return vec![top];
    }
    let log_top = top.ln();
    let log_bottom = (top * cfg.lambda_min_ratio).ln();
    (0..cfg.grid_size)
        .map(|k| {
            let t = k as f64 / (cfg.grid_size - 1) as f64;
            (log_top + t * (log_bottom - log_top)).exp()
        })
        .collect()
}

/// Select the tuning constant by k-fold cross-validation and refit on the
/// full data.
///
/// Held-out loss matches the fitting loss. The winning lambda minimizes
/// the mean held-out loss; exact ties go to the smallest lambda. Fold
/// assignment is a deterministic function of the supplied generator.
pub fn cross_validate<R: Rng + ?Sized>(
    dataset: &Dataset,
    spec: &PenaltySpec,
    cfg: &CvConfig,
    rng: &mut R,
) -> Result<(f64, DVector<f64>)> {
    if spec.lambda != Lambda::CrossValidate {
        return Err(Error::Config(
            "cross_validate requires a spec with lambda = cross-validate".into(),
        ));
    }
    if spec.penalty == Penalty::None {
        return Err(Error::Config(
            "cross-validation needs a penalized spec".into(),
        ));
    }
    let n = dataset.n();
    cfg.validate(n)?;
    let grid = lambda_grid(dataset, spec.loss, cfg);

    // shuffled round-robin fold assignment
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let mut fold_of = vec![0usize; n];
    for (pos, &i) in order.iter().enumerate() {
        fold_of[i] = pos % cfg.folds;
    }

    let mut total_loss = vec![0.0f64; grid.len()];
    for fold in 0..cfg.folds {
        let train_rows: Vec<usize> = (0..n).filter(|i| fold_of[*i] != fold).collect();
        let test_rows: Vec<usize> = (0..n).filter(|i| fold_of[*i] == fold).collect();
        if train_rows.len() <= dataset.p() {
            return Err(Error::Config(format!(
                "fold {fold} leaves {} training rows for p = {}",
                train_rows.len(),
                dataset.p()
            )));
        }
        let xtr = dataset.x().select_rows(train_rows.iter());
        let ytr = dataset.y().select_rows(train_rows.iter());
        let xte = dataset.x().select_rows(test_rows.iter());
        let yte = dataset.y().select_rows(test_rows.iter());

        let fits = path_fits(&xtr, &ytr, spec, &grid)?;
        for (k, beta) in fits.iter().enumerate() {
            let resid = &yte - &xte * beta;
            total_loss[k] += match spec.loss {
                Loss::Squared => resid.norm_squared(),
                Loss::Absolute => resid.iter().map(|v| v.abs()).sum::<f64>(),
            };
        }
    }

    // grid is descending, so `<=` settles ties on the smallest lambda
    let mut best = 0usize;
    for k in 1..grid.len() {
        if total_loss[k] <= total_loss[best] {
            best = k;
        }
    }
    let lambda_star = grid[best];
    let beta = super::fit_with_lambda(dataset, spec.loss, spec.penalty, lambda_star, None)?;
    Ok((lambda_star, beta))
}

/// Fit the whole descending path on one training set, warm-starting each
/// lambda from its predecessor.
fn path_fits(
    x: &DMatrix<f64>,
    y: &DVector<f64>,
    spec: &PenaltySpec,
    grid: &[f64],
) -> Result<Vec<DVector<f64>>> {
    let mut out = Vec::with_capacity(grid.len());
    match spec.loss {
        Loss::Squared => {
            let prob = cd::QuadraticProblem::new(x, y);
            let mut warm: Option<DVector<f64>> = None;
            for &lambda in grid {
                let beta = match spec.penalty {
                    Penalty::L1 => prob.solve_l1(lambda, warm.as_ref())?,
                    Penalty::L2 => prob.solve_l2(lambda)?,
                    Penalty::None => unreachable!("validated above"),
                };
                warm = Some(beta.clone());
                out.push(beta);
            }
        }
        Loss::Absolute => {
            let mut solver = admm::AdmmSolver::new(x, y);
            let settings = admm::AdmmSettings::fold_fit();
            let mut warm: Option<DVector<f64>> = None;
            for &lambda in grid {
                let beta = solver.fit(spec.penalty, lambda, warm.as_ref(), &settings)?;
                warm = Some(beta.clone());
                out.push(beta);
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::RngStream;

    fn noise_dataset(n: usize, p: usize, seed: u64) -> Dataset {
        use rand_distr::{Distribution, StandardNormal};
        let mut rng = RngStream::new(seed, 0).rng();
        let x = DMatrix::from_fn(n, p, |_, _| StandardNormal.sample(&mut rng));
        let y = DVector::from_fn(n, |_, _| StandardNormal.sample(&mut rng));
        Dataset::new(x, y, None).unwrap()
    }

    #[test]
    fn grid_is_descending_and_zeroing_at_top() {
        let d = noise_dataset(40, 5, 1);
        let cfg = CvConfig::default();
        let grid = lambda_grid(&d, Loss::Squared, &cfg);
        assert_eq!(grid.len(), 50);
        assert!(grid.windows(2).all(|w| w[1] < w[0]));
        let beta = cd::QuadraticProblem::new(d.x(), d.y())
            .solve_l1(grid[0], None)
            .unwrap();
        assert!(beta.abs().max() <= 1e-10);
    }

    #[test]
    fn single_point_grid_returns_that_lambda() {
        let d = noise_dataset(30, 3, 2);
        let cfg = CvConfig {
            grid_size: 1,
            ..CvConfig::default()
        };
        let spec = PenaltySpec::new(Loss::Squared, Penalty::L1, Lambda::CrossValidate).unwrap();
        let mut rng = RngStream::new(5, 0).rng();
        let (lambda, _) = cross_validate(&d, &spec, &cfg, &mut rng).unwrap();
        let grid = lambda_grid(&d, Loss::Squared, &cfg);
        assert_eq!(lambda, grid[0]);
    }

    #[test]
    fn deterministic_given_stream() {
        let d = noise_dataset(30, 3, 3);
        let spec = PenaltySpec::new(Loss::Squared, Penalty::L1, Lambda::CrossValidate).unwrap();
        let cfg = CvConfig {
            grid_size: 10,
            ..CvConfig::default()
        };
        let run = || {
            let mut rng = RngStream::new(9, 9).rng();
            cross_validate(&d, &spec, &cfg, &mut rng).unwrap()
        };
        let (l1, b1) = run();
        let (l2, b2) = run();
        assert_eq!(l1.to_bits(), l2.to_bits());
        assert_eq!(b1, b2);
    }

    #[test]
    fn config_validation() {
        let d = noise_dataset(10, 2, 4);
        let spec = PenaltySpec::new(Loss::Squared, Penalty::L1, Lambda::CrossValidate).unwrap();
        let mut rng = RngStream::new(0, 0).rng();
        let bad = CvConfig {
            grid_size: 0,
            ..CvConfig::default()
        };
        assert!(cross_validate(&d, &spec, &bad, &mut rng).is_err());
        let bad = CvConfig {
            folds: 11,
            ..CvConfig::default()
        };
        assert!(cross_validate(&d, &spec, &bad, &mut rng).is_err());
        let fixed = PenaltySpec::new(Loss::Squared, Penalty::L1, Lambda::Fixed(1.0)).unwrap();
        assert!(cross_validate(&d, &fixed, &CvConfig::default(), &mut rng).is_err());
    }
}
