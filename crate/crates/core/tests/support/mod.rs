//! Shared oracles for the integration suites. Everything here is
//! independent of the library's sampling/solver implementation paths: the
//! inverse-Gaussian oracle is a rejection sampler with an analytic
//! envelope, the LAD oracle enumerates interpolating bases, and the
//! optimality certificates are evaluated from first-order conditions.

#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use statrs::distribution::{ChiSquared, ContinuousCDF, Normal};

/// Exact rejection sampler for the inverse Gaussian with shape `a` and
/// mean `b`.
///
/// Writing the density as `f(t) ∝ t^{-3/2} exp(-a t/(2b^2) - a/(2t))` and
/// proposing from `Exp(lambda)` with `lambda = a/(4 b^2)` leaves the ratio
/// `f/q ∝ g(t) = t^{-3/2} exp(-lambda t - (a/2)/t)`, which is unimodal
/// with an explicit maximizer, so the envelope constant is exact and the
/// sampler is unbiased.
pub fn inverse_gaussian_rejection<R: Rng + ?Sized>(a: f64, b: f64, rng: &mut R) -> f64 {
    assert!(a > 0.0 && b > 0.0);
    let lambda = a / (4.0 * b * b);
    let gamma = a / 2.0;
    // maximizer of log g: gamma - (3/2) t - lambda t^2 = 0
    let t_star = (-1.5 + (2.25 + 4.0 * lambda * gamma).sqrt()) / (2.0 * lambda);
    let log_g = |t: f64| -1.5 * t.ln() - lambda * t - gamma / t;
    let log_m = log_g(t_star);
    loop {
        let u1: f64 = rng.random();
        let t = (-u1.ln()) / lambda;
        if t <= 0.0 || !t.is_finite() {
            continue;
        }
        let u2: f64 = rng.random();
        if u2.ln() <= log_g(t) - log_m {
            return t;
        }
    }
}

/// Closed-form inverse-Gaussian CDF (shape `a`, mean `b`).
pub fn inverse_gaussian_cdf(a: f64, b: f64, t: f64) -> f64 {
    if t <= 0.0 {
        return 0.0;
    }
    let normal = Normal::new(0.0, 1.0).unwrap();
    let s = (a / t).sqrt();
    let term1 = normal.cdf(s * (t / b - 1.0));
    let term2 = (2.0 * a / b).exp() * normal.cdf(-s * (t / b + 1.0));
    (term1 + term2).clamp(0.0, 1.0)
}

/// Two-sample Kolmogorov-Smirnov statistic.
pub fn ks_two_sample(xs: &[f64], ys: &[f64]) -> f64 {
    let mut a = xs.to_vec();
    let mut b = ys.to_vec();
    a.sort_by(|u, v| u.partial_cmp(v).unwrap());
    b.sort_by(|u, v| u.partial_cmp(v).unwrap());
    let (n, m) = (a.len(), b.len());
    let (mut i, mut j) = (0usize, 0usize);
    let mut d = 0.0f64;
    while i < n && j < m {
        let v = a[i].min(b[j]);
        while i < n && a[i] <= v {
            i += 1;
        }
        while j < m && b[j] <= v {
            j += 1;
        }
        d = d.max((i as f64 / n as f64 - j as f64 / m as f64).abs());
    }
    d
}

/// Two-sample KS critical value at the 1% level.
pub fn ks_critical_1pct(n: usize, m: usize) -> f64 {
    1.628 * ((n + m) as f64 / (n as f64 * m as f64)).sqrt()
}

/// Chi-square goodness-of-fit p-value against a known CDF, using `k`
/// equiprobable bins through the probability transform.
pub fn chi_square_gof_pvalue(draws: &[f64], cdf: impl Fn(f64) -> f64, k: usize) -> f64 {
    let n = draws.len();
    let mut counts = vec![0usize; k];
    for &x in draws {
        let u = cdf(x).clamp(0.0, 1.0 - 1e-12);
        counts[(u * k as f64) as usize] += 1;
    }
    let expected = n as f64 / k as f64;
    let stat: f64 = counts
        .iter()
        .map(|&c| {
            let d = c as f64 - expected;
            d * d / expected
        })
        .sum();
    let chi2 = ChiSquared::new((k - 1) as f64).unwrap();
    1.0 - chi2.cdf(stat)
}

/// Exhaustive LAD oracle: an optimum interpolates p observations, so the
/// minimum over all p-subsets of rows is the global optimum. Returns the
/// optimal objective value.
pub fn lad_enumeration_objective(x: &DMatrix<f64>, y: &DVector<f64>) -> f64 {
    let (n, p) = (x.nrows(), x.ncols());
    assert!(p <= 3, "enumeration oracle is for tiny p");
    let mut best = f64::INFINITY;
    let mut subset = vec![0usize; p];
    enumerate_subsets(n, p, 0, 0, &mut subset, &mut |rows: &[usize]| {
        let mut xs = DMatrix::<f64>::zeros(p, p);
        let mut ys = DVector::<f64>::zeros(p);
        for (k, &i) in rows.iter().enumerate() {
            xs.row_mut(k).copy_from(&x.row(i));
            ys[k] = y[i];
        }
        if let Some(beta) = xs.lu().solve(&ys) {
            if beta.iter().all(|v| v.is_finite()) {
                let obj: f64 = (y - x * &beta).iter().map(|r| r.abs()).sum();
                if obj < best {
                    best = obj;
                }
            }
        }
    });
    best
}

fn enumerate_subsets(
    n: usize,
    p: usize,
    depth: usize,
    start: usize,
    subset: &mut Vec<usize>,
    visit: &mut impl FnMut(&[usize]),
) {
    if depth == p {
        visit(subset);
        return;
    }
    for i in start..n {
        subset[depth] = i;
        enumerate_subsets(n, p, depth + 1, i + 1, subset, visit);
    }
}

/// Largest KKT violation of a lasso solution under the plain-sum
/// objective `sum r^2 + lambda ||beta||_1`: active coordinates must
/// satisfy `2 x_j' r = lambda sign(beta_j)` and zero coordinates
/// `|2 x_j' r| <= lambda`.
pub fn lasso_kkt_violation(
    x: &DMatrix<f64>,
    y: &DVector<f64>,
    lambda: f64,
    beta: &DVector<f64>,
) -> f64 {
    let r = y - x * beta;
    let g = x.transpose() * r * 2.0;
    let mut worst = 0.0f64;
    for j in 0..beta.len() {
        let v = if beta[j].abs() > 1e-9 {
            (g[j] - lambda * beta[j].signum()).abs()
        } else {
            (g[j].abs() - lambda).max(0.0)
        };
        worst = worst.max(v);
    }
    worst
}

/// Componentwise zero-subgradient violation for absolute-loss fits with an
/// l1 or l2 penalty (lambda = 0 and the l2 branch cover plain LAD too).
///
/// For each coordinate the subdifferential is an interval: residuals
/// within `eps_r` of zero contribute `[-|x_ij|, |x_ij|]`, an l1 penalty on
/// a zero coefficient contributes `[-lambda, lambda]`. The violation is
/// the distance from zero to the interval.
pub fn lad_subgradient_violation(
    x: &DMatrix<f64>,
    y: &DVector<f64>,
    penalty_l1: bool,
    lambda: f64,
    beta: &DVector<f64>,
) -> f64 {
    let (n, p) = (x.nrows(), x.ncols());
    let r = y - x * beta;
    let eps_r = 1e-6 * y.amax().max(1.0);
    let eps_b = 1e-8 * beta.amax().max(1.0);
    let mut worst = 0.0f64;
    for j in 0..p {
        let mut center = 0.0;
        let mut width = 0.0;
        for i in 0..n {
            if r[i].abs() > eps_r {
                center -= x[(i, j)] * r[i].signum();
            } else {
                width += x[(i, j)].abs();
            }
        }
        if penalty_l1 {
            if beta[j].abs() > eps_b {
                center += lambda * beta[j].signum();
            } else {
                width += lambda;
            }
        } else {
            center += 2.0 * lambda * beta[j];
        }
        worst = worst.max((center.abs() - width).max(0.0));
    }
    worst
}

/// Standard-normal design matrix and response helpers.
pub fn random_matrix<R: Rng + ?Sized>(n: usize, p: usize, rng: &mut R) -> DMatrix<f64> {
    use rand_distr::{Distribution, StandardNormal};
    DMatrix::from_fn(n, p, |_, _| StandardNormal.sample(rng))
}

pub fn random_vector<R: Rng + ?Sized>(n: usize, rng: &mut R) -> DVector<f64> {
    use rand_distr::{Distribution, StandardNormal};
    DVector::from_fn(n, |_, _| StandardNormal.sample(rng))
}
