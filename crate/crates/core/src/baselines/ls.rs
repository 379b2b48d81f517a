//! Least squares by Cholesky on the normal equations.

use nalgebra::{Cholesky, DMatrix, DVector};

use crate::error::{Error, Result};

pub(crate) fn solve(x: &DMatrix<f64>, y: &DVector<f64>) -> Result<DVector<f64>> {
    let gram = x.transpose() * x;
    let chol = Cholesky::new(gram).ok_or(Error::SingularDesign)?;
    Ok(chol.solve(&(x.transpose() * y)))
}
