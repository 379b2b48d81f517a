//! Random variate generation for every distribution the sampler and the
//! simulator need.
//!
//! Parameterization contracts (they differ across textbooks, so they are
//! pinned here once and converted at call sites):
//!
//! * Gamma and inverse-Gamma take `(shape, rate)` and `(shape, scale)`
//!   respectively: `Gamma(shape s, rate r)` has mean `s/r`;
//!   `InvGamma(shape a, scale g)` is the reciprocal of `Gamma(a, rate g)`
//!   and has mean `g/(a-1)` for `a > 1`.
//! * The inverse Gaussian takes `(shape a, mean b)` for the density
//!   `sqrt(a/2pi) t^{-3/2} exp[-a(t-b)^2 / (2 b^2 t)]`, so the mean is `b`
//!   and the variance `b^3/a`.
//! * The Laplace distribution takes the rate `theta` of the density
//!   `(theta/2) exp(-theta |t|)`, with variance `2/theta^2`.
//!
//! Every sampler is a pure function of `(parameters, rng)`; callers own
//! their generator, so the functions are safe to use from parallel workers.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use rand::Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};

use crate::error::{Error, Result};

/// Parameters of the inverse Gaussian distribution: `shape` is `a` and
/// `mean` is `b` in the density above.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InverseGaussianParams {
    pub shape: f64,
    pub mean: f64,
}

impl InverseGaussianParams {
    pub fn new(shape: f64, mean: f64) -> Result<Self> {
        if !(shape > 0.0) || !(mean > 0.0) {
            return Err(Error::Domain(format!(
                "inverse gaussian requires shape > 0 and mean > 0, got ({shape}, {mean})"
            )));
        }
        Ok(InverseGaussianParams { shape, mean })
    }
}

/// Draw from the inverse Gaussian distribution.
///
/// Uses the transformation-with-roots method: one chi-square(1) variate,
/// one uniform for the root selection. Exact and O(1) per draw.
pub fn sample_inverse_gaussian<R: Rng + ?Sized>(p: InverseGaussianParams, rng: &mut R) -> f64 {
    let a = p.shape;
    let b = p.mean;
    let v: f64 = StandardNormal.sample(rng);
    let y = v * v;
    let x = b + (b * b * y) / (2.0 * a) - (b / (2.0 * a)) * (4.0 * a * b * y + b * b * y * y).sqrt();
    let u: f64 = rng.random();
    if u <= b / (b + x) {
        // the root can round to zero when a/b^2 is extreme
        x.max(f64::MIN_POSITIVE)
    } else {
        b * b / x.max(f64::MIN_POSITIVE)
    }
}

/// Draw from `Gamma(shape, rate)`.
pub fn sample_gamma<R: Rng + ?Sized>(shape: f64, rate: f64, rng: &mut R) -> Result<f64> {
    if !(shape > 0.0) || !(rate > 0.0) {
        return Err(Error::Domain(format!(
            "gamma requires shape > 0 and rate > 0, got ({shape}, {rate})"
        )));
    }
    let g = rand_distr::Gamma::new(shape, 1.0 / rate)
        .map_err(|e| Error::Domain(format!("gamma({shape}, rate {rate}): {e}")))?;
    Ok(g.sample(rng))
}

/// Draw from `InvGamma(shape, scale)`: the reciprocal of a
/// `Gamma(shape, rate = scale)` draw.
pub fn sample_inverse_gamma<R: Rng + ?Sized>(shape: f64, scale: f64, rng: &mut R) -> Result<f64> {
    if !(shape > 0.0) || !(scale > 0.0) {
        return Err(Error::Domain(format!(
            "inverse gamma requires shape > 0 and scale > 0, got ({shape}, {scale})"
        )));
    }
    let g = sample_gamma(shape, scale, rng)?;
    Ok(1.0 / g.max(f64::MIN_POSITIVE))
}

/// Draw from `Beta(alpha, gamma)`.
pub fn sample_beta<R: Rng + ?Sized>(alpha: f64, gamma: f64, rng: &mut R) -> Result<f64> {
    if !(alpha > 0.0) || !(gamma > 0.0) {
        return Err(Error::Domain(format!(
            "beta requires both parameters > 0, got ({alpha}, {gamma})"
        )));
    }
    let b = rand_distr::Beta::new(alpha, gamma)
        .map_err(|e| Error::Domain(format!("beta({alpha}, {gamma}): {e}")))?;
    Ok(b.sample(rng))
}

/// Draw from the Laplace distribution with rate `theta`.
///
/// Sampled as the difference of two unit exponentials scaled by `1/theta`,
/// which avoids the log-of-zero edge of the inverse-CDF route.
pub fn sample_laplace<R: Rng + ?Sized>(theta: f64, rng: &mut R) -> Result<f64> {
    if !(theta > 0.0) {
        return Err(Error::Domain(format!(
            "laplace requires theta > 0, got {theta}"
        )));
    }
    let e1: f64 = Exp1.sample(rng);
    let e2: f64 = Exp1.sample(rng);
    Ok((e1 - e2) / theta)
}

/// Draw a standard normal vector of length `p`.
pub fn sample_standard_normal_vector<R: Rng + ?Sized>(p: usize, rng: &mut R) -> DVector<f64> {
    DVector::from_fn(p, |_, _| StandardNormal.sample(rng))
}

/// Jitter escalation for a failed Cholesky factorization: start at
/// `1e-10 * mean(diag(A))` and multiply by 10 up to `1e-6 * mean(diag(A))`.
const JITTER_EXPONENTS: [f64; 5] = [1e-10, 1e-9, 1e-8, 1e-7, 1e-6];

/// Factor a symmetric positive-definite matrix, applying the diagonal
/// jitter policy on failure.
pub(crate) fn cholesky_with_jitter(a: &DMatrix<f64>) -> Result<Cholesky<f64, Dyn>> {
    if let Some(chol) = Cholesky::new(a.clone()) {
        return Ok(chol);
    }
    let diag_mean = a.diagonal().mean();
    let mut attempted = Vec::new();
    for factor in JITTER_EXPONENTS {
        let jitter = factor * diag_mean;
        attempted.push(jitter);
        let mut aj = a.clone();
        for i in 0..aj.nrows() {
            aj[(i, i)] += jitter;
        }
        if let Some(chol) = Cholesky::new(aj) {
            return Ok(chol);
        }
    }
    Err(Error::Conditioning { attempted })
}

/// Draw from the multivariate normal `N(A^{-1} c, A^{-1})` given the
/// precision matrix `A` and the linear term `c`.
///
/// `A` is factored once (`A = L L^T`); the draw is recovered with two
/// triangular solves: `L u = c`, then `L^T x = u + z` for a standard
/// normal `z`, so `x = A^{-1} c + L^{-T} z`.
pub fn sample_mvn_precision<R: Rng + ?Sized>(
    a: &DMatrix<f64>,
    c: &DVector<f64>,
    rng: &mut R,
) -> Result<DVector<f64>> {
    let p = a.nrows();
    if a.ncols() != p {
        return Err(Error::Dimension(format!(
            "precision matrix must be square, got {}x{}",
            a.nrows(),
            a.ncols()
        )));
    }
    if c.len() != p {
        return Err(Error::Dimension(format!(
            "linear term has length {} but precision matrix is {p}x{p}",
            c.len()
        )));
    }
    let chol = cholesky_with_jitter(a)?;
    let l = chol.l_dirty();

    // L u = c  (forward substitution, reading only the lower triangle)
    let mut u = c.clone();
    forward_substitute(l, &mut u);
    // L^T x = u + z  (backward substitution)
    let mut x = u;
    for i in 0..p {
        let z: f64 = StandardNormal.sample(rng);
        x[i] += z;
    }
    backward_substitute_transposed(l, &mut x);
    Ok(x)
}

/// Solve `L v = b` in place for lower-triangular `L` (upper part ignored).
fn forward_substitute(l: &DMatrix<f64>, b: &mut DVector<f64>) {
    let p = l.nrows();
    for j in 0..p {
        b[j] /= l[(j, j)];
        let bj = b[j];
        let col = l.column(j);
        for i in (j + 1)..p {
            b[i] -= col[i] * bj;
        }
    }
}

/// Solve `L^T v = b` in place for lower-triangular `L` (upper part ignored).
fn backward_substitute_transposed(l: &DMatrix<f64>, b: &mut DVector<f64>) {
    let p = l.nrows();
    for j in (0..p).rev() {
        let col = l.column(j);
        let mut acc = b[j];
        for i in (j + 1)..p {
            acc -= col[i] * b[i];
        }
        b[j] = acc / col[j];
    }
}
