//! The comparison estimators: least squares, least absolute deviations,
//! and their l1/l2-penalized variants, with k-fold cross-validated tuning.
//!
//! Objective convention throughout: the loss is the plain sum over
//! observations, `f(beta) = sum_i rho(y_i - x_i' beta) + P_lambda(beta)`,
//! with `P_lambda` either `lambda * ||beta||_1` or `lambda * ||beta||^2`.
//! No `1/n` factor anywhere; tolerances and threshold formulas are stated
//! under this convention.

mod admm;
mod cd;
mod cv;
mod ls;

pub use cv::{cross_validate, lambda_grid, CvConfig};

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::model::Dataset;

/// Loss applied to each residual.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Loss {
    Squared,
    Absolute,
}

/// Regularizer applied to the coefficients.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Penalty {
    None,
    L1,
    L2,
}

/// Tuning constant: fixed, or selected by cross-validation.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Lambda {
    Fixed(f64),
    CrossValidate,
}

/// A fitting problem: which loss, which penalty, which tuning constant.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct PenaltySpec {
    pub loss: Loss,
    pub penalty: Penalty,
    pub lambda: Lambda,
}

impl PenaltySpec {
    pub fn new(loss: Loss, penalty: Penalty, lambda: Lambda) -> Result<Self> {
        if let Lambda::Fixed(v) = lambda {
            if !(v >= 0.0) || !v.is_finite() {
                return Err(Error::Domain(format!(
                    "lambda must be finite and >= 0, got {v}"
                )));
            }
        }
        Ok(PenaltySpec { loss, penalty, lambda })
    }

    fn fixed_lambda(&self) -> Result<f64> {
        match self.lambda {
            Lambda::Fixed(v) if v >= 0.0 && v.is_finite() => Ok(v),
            Lambda::Fixed(v) => Err(Error::Domain(format!(
                "lambda must be finite and >= 0, got {v}"
            ))),
            Lambda::CrossValidate => Err(Error::Config(
                "this fit needs an explicit lambda; run cross_validate instead".into(),
            )),
        }
    }
}

/// The objective value `sum rho(residual) + penalty` at `beta`.
pub fn objective(dataset: &Dataset, loss: Loss, penalty: Penalty, lambda: f64, beta: &DVector<f64>) -> f64 {
    let r = dataset.y() - dataset.x() * beta;
    let fit = match loss {
        Loss::Squared => r.iter().map(|v| v * v).sum::<f64>(),
        Loss::Absolute => r.iter().map(|v| v.abs()).sum::<f64>(),
    };
    fit + penalty_value(penalty, lambda, beta)
}

pub(crate) fn penalty_value(penalty: Penalty, lambda: f64, beta: &DVector<f64>) -> f64 {
    match penalty {
        Penalty::None => 0.0,
        Penalty::L1 => lambda * beta.iter().map(|b| b.abs()).sum::<f64>(),
        Penalty::L2 => lambda * beta.norm_squared(),
    }
}

/// Ordinary least squares via the normal equations.
pub fn fit_ls(dataset: &Dataset) -> Result<DVector<f64>> {
    ls::solve(dataset.x(), dataset.y())
}

/// Least absolute deviations.
pub fn fit_lad(dataset: &Dataset) -> Result<DVector<f64>> {
    admm::AdmmSolver::new(dataset.x(), dataset.y()).fit(
        Penalty::None,
        0.0,
        None,
        &admm::AdmmSettings::default(),
    )
}

/// Fit under an explicit tuning constant.
pub fn fit_penalized(dataset: &Dataset, spec: &PenaltySpec) -> Result<DVector<f64>> {
    let lambda = match spec.penalty {
        Penalty::None => 0.0,
        _ => spec.fixed_lambda()?,
    };
    fit_with_lambda(dataset, spec.loss, spec.penalty, lambda, None)
}

pub(crate) fn fit_with_lambda(
    dataset: &Dataset,
    loss: Loss,
    penalty: Penalty,
    lambda: f64,
    warm: Option<&DVector<f64>>,
) -> Result<DVector<f64>> {
    match (loss, penalty) {
        (Loss::Squared, Penalty::None) => fit_ls(dataset),
        (Loss::Squared, Penalty::L1) => {
            cd::QuadraticProblem::new(dataset.x(), dataset.y()).solve_l1(lambda, warm)
        }
        (Loss::Squared, Penalty::L2) => {
            cd::QuadraticProblem::new(dataset.x(), dataset.y()).solve_l2(lambda)
        }
        (Loss::Absolute, penalty) => {
            // a zero tuning constant is exactly the unpenalized problem
            let penalty = if lambda == 0.0 { Penalty::None } else { penalty };
            admm::AdmmSolver::new(dataset.x(), dataset.y()).fit(
                penalty,
                lambda,
                warm,
                &admm::AdmmSettings::default(),
            )
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DMatrix;

    #[test]
    fn spec_validation() {
        assert!(PenaltySpec::new(Loss::Squared, Penalty::L1, Lambda::Fixed(-1.0)).is_err());
        assert!(PenaltySpec::new(Loss::Squared, Penalty::L1, Lambda::Fixed(0.0)).is_ok());
        let spec = PenaltySpec::new(Loss::Squared, Penalty::L1, Lambda::CrossValidate).unwrap();
        let x = DMatrix::from_row_slice(3, 1, &[1.0, 2.0, 3.0]);
        let y = DVector::from_vec(vec![1.0, 2.0, 3.0]);
        let d = Dataset::new(x, y, None).unwrap();
        // cross-validate lambda cannot be fit directly
        assert!(matches!(fit_penalized(&d, &spec), Err(Error::Config(_))));
    }

    #[test]
    fn objective_convention_is_plain_sum() {
        let x = DMatrix::from_row_slice(2, 1, &[1.0, 1.0]);
        let y = DVector::from_vec(vec![3.0, -1.0]);
        let d = Dataset::new(x, y, None).unwrap();
        let beta = DVector::from_vec(vec![1.0]);
        // residuals 2 and -2
        assert_eq!(objective(&d, Loss::Squared, Penalty::None, 0.0, &beta), 8.0);
        assert_eq!(objective(&d, Loss::Absolute, Penalty::None, 0.0, &beta), 4.0);
        assert_eq!(objective(&d, Loss::Squared, Penalty::L1, 3.0, &beta), 11.0);
        assert_eq!(objective(&d, Loss::Absolute, Penalty::L2, 3.0, &beta), 7.0);
    }
}
