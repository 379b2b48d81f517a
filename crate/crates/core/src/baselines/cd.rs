//! Squared-loss penalized solvers: cyclic coordinate descent with
//! covariance updates for the l1 penalty, the closed form for l2.

use nalgebra::{Cholesky, DMatrix, DVector};

use crate::error::{Error, Result};

/// Convergence threshold on the largest coordinate change in one sweep.
const COORDINATE_TOL: f64 = 1e-7;
const MAX_SWEEPS: usize = 100_000;

pub(crate) fn soft_threshold(z: f64, t: f64) -> f64 {
    if z > t {
        z - t
    } else if z < -t {
        z + t
    } else {
        0.0
    }
}

/// The quadratic part of a squared-loss problem, held as sufficient
/// statistics so a whole lambda path reuses one Gram matrix.
pub(crate) struct QuadraticProblem {
    gram: DMatrix<f64>,
    xty: DVector<f64>,
    yty: f64,
}

impl QuadraticProblem {
    pub(crate) fn new(x: &DMatrix<f64>, y: &DVector<f64>) -> Self {
        let xt = x.transpose();
        QuadraticProblem {
            gram: &xt * x,
            xty: xt * y,
            yty: y.norm_squared(),
        }
    }

    /// `sum r^2 + lambda ||beta||_1` evaluated from the sufficient stats.
    fn l1_objective(&self, beta: &DVector<f64>, lambda: f64) -> f64 {
        let quad = (&self.gram * beta).dot(beta);
        self.yty - 2.0 * self.xty.dot(beta) + quad
            + lambda * beta.iter().map(|b| b.abs()).sum::<f64>()
    }

    /// Largest KKT violation at `beta` given the maintained `s = G beta`:
    /// active coordinates need `2 x_j' r = lambda sign(beta_j)`, zero
    /// coordinates `|2 x_j' r| <= lambda`.
    fn kkt_violation(&self, beta: &DVector<f64>, s: &DVector<f64>, lambda: f64) -> f64 {
        let mut worst = 0.0f64;
        for j in 0..beta.len() {
            let g = 2.0 * (self.xty[j] - s[j]);
            let v = if beta[j] != 0.0 {
                (g - lambda * beta[j].signum()).abs()
            } else {
                (g.abs() - lambda).max(0.0)
            };
            worst = worst.max(v);
        }
        worst
    }

    /// Cyclic coordinate descent for `sum r^2 + lambda ||beta||_1`.
    ///
    /// Coordinate update under the plain-sum convention:
    /// `beta_j <- S(x_j'y - sum_{k != j} G_jk beta_k, lambda/2) / G_jj`.
    /// The sweep loop runs until coordinate changes fall below the
    /// threshold and the stationarity residual is driven well under the
    /// certificate scale (small coordinate moves alone leave a KKT
    /// residual of order `n` times the move).
    pub(crate) fn solve_l1(&self, lambda: f64, warm: Option<&DVector<f64>>) -> Result<DVector<f64>> {
        let p = self.gram.nrows();
        let mut beta = match warm {
            Some(w) => w.clone(),
            None => DVector::zeros(p),
        };
        // s = G beta, maintained incrementally
        let mut s = &self.gram * &beta;
        let kkt_target = 1e-8 * (1.0 + 2.0 * self.xty.amax());
        let mut prev_obj = f64::INFINITY;
        for sweep in 0..MAX_SWEEPS {
            let mut max_change = 0.0f64;
            for j in 0..p {
                let gjj = self.gram[(j, j)];
                if gjj <= 0.0 {
                    return Err(Error::SingularDesign);
                }
                let old = beta[j];
                let partial = self.xty[j] - s[j] + gjj * old;
                let new = soft_threshold(partial, lambda / 2.0) / gjj;
                if new != old {
                    let delta = new - old;
                    s.axpy(delta, &self.gram.column(j).into_owned(), 1.0);
                    beta[j] = new;
                    max_change = max_change.max(delta.abs());
                }
            }
            if cfg!(debug_assertions) {
                let obj = self.l1_objective(&beta, lambda);
                debug_assert!(
                    obj <= prev_obj + 1e-9 * (1.0 + prev_obj.abs()),
                    "coordinate descent objective rose: {prev_obj} -> {obj} (sweep {sweep})"
                );
                prev_obj = obj;
            }
            if max_change < COORDINATE_TOL && self.kkt_violation(&beta, &s, lambda) <= kkt_target
            {
                return Ok(beta);
            }
        }
        Err(Error::Convergence {
            iterations: MAX_SWEEPS,
            objective: self.l1_objective(&beta, lambda),
        })
    }

    /// Closed-form ridge: `(X'X + lambda I) beta = X'y`.
    pub(crate) fn solve_l2(&self, lambda: f64) -> Result<DVector<f64>> {
        let mut a = self.gram.clone();
        for j in 0..a.nrows() {
            a[(j, j)] += lambda;
        }
        let chol = Cholesky::new(a).ok_or(Error::SingularDesign)?;
        Ok(chol.solve(&self.xty))
    }
}
