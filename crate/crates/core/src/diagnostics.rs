//! Self-check suites: two-moment tests for every sampler and a covariance
//! check for the precision-parameterized multivariate normal.
//!
//! Each check draws a fixed number of variates from a named stream and
//! compares the sample mean (and, where the analytic value is finite, the
//! sample variance) against the analytic value within three standard
//! errors. Standard errors come from the drawn sample, which makes the
//! checks self-contained; the acceptance suite runs them verbatim.

use nalgebra::{DMatrix, DVector};
use rand_distr::{Distribution, StandardNormal};

use crate::dist::{
    sample_beta, sample_gamma, sample_inverse_gamma, sample_inverse_gaussian, sample_laplace,
    sample_mvn_precision, InverseGaussianParams,
};
use crate::error::Result;
use crate::rng::RngStream;

/// Outcome of one check.
#[derive(Debug, Clone)]
pub struct CheckResult {
    pub name: String,
    pub observed: f64,
    pub expected: f64,
    /// Half-width of the acceptance band (three standard errors).
    pub tolerance: f64,
    pub pass: bool,
}

impl CheckResult {
    fn new(name: impl Into<String>, observed: f64, expected: f64, tolerance: f64) -> Self {
        let pass = (observed - expected).abs() <= tolerance && observed.is_finite();
        CheckResult {
            name: name.into(),
            observed,
            expected,
            tolerance,
            pass,
        }
    }
}

fn moments(xs: &[f64]) -> (f64, f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let m2 = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
    let m4 = xs.iter().map(|x| (x - mean).powi(4)).sum::<f64>() / n;
    (mean, m2, m4)
}

fn two_moment_checks(
    name: &str,
    draws: &[f64],
    mean: f64,
    variance: Option<f64>,
    out: &mut Vec<CheckResult>,
) {
    let n = draws.len() as f64;
    let (m, m2, m4) = moments(draws);
    let se_mean = (m2 / n).sqrt();
    out.push(CheckResult::new(
        format!("{name} mean"),
        m,
        mean,
        3.0 * se_mean,
    ));
    if let Some(v) = variance {
        let se_var = ((m4 - m2 * m2).max(0.0) / n).sqrt();
        out.push(CheckResult::new(
            format!("{name} variance"),
            m2,
            v,
            3.0 * se_var,
        ));
    }
}

/// Run the full sampler moment suite with `draws` variates per setting
/// (the module contract uses 100_000).
pub fn moment_suite(stream: RngStream, draws: usize) -> Result<Vec<CheckResult>> {
    let mut out = Vec::new();
    let n = draws;

    // inverse Gaussian: mean b, variance b^3/a
    for (k, (a, b)) in [(1.0, 1.0), (4.0, 2.0), (0.5, 5.0)].iter().enumerate() {
        let mut rng = stream.substream(0x10 + k as u64).rng();
        let params = InverseGaussianParams::new(*a, *b)?;
        let xs: Vec<f64> = (0..n)
            .map(|_| sample_inverse_gaussian(params, &mut rng))
            .collect();
        two_moment_checks(
            &format!("inverse_gaussian({a},{b})"),
            &xs,
            *b,
            Some(b * b * b / a),
            &mut out,
        );
    }
    // a nearly-degenerate setting concentrates at its mean
    {
        let mut rng = stream.substream(0x1f).rng();
        let params = InverseGaussianParams::new(1e6, 3.0)?;
        let xs: Vec<f64> = (0..n)
            .map(|_| sample_inverse_gaussian(params, &mut rng))
            .collect();
        let (_, m2, _) = moments(&xs);
        out.push(CheckResult::new(
            "inverse_gaussian(1e6,3) sample sd below 0.01",
            m2.sqrt(),
            0.0,
            0.01,
        ));
    }

    // gamma(shape, rate): mean s/r, variance s/r^2
    for (k, (s, r)) in [(1.0, 1.0), (3.0, 2.0), (2.5, 0.5)].iter().enumerate() {
        let mut rng = stream.substream(0x21 + k as u64).rng();
        let xs: Vec<f64> = (0..n)
            .map(|_| sample_gamma(*s, *r, &mut rng))
            .collect::<Result<_>>()?;
        two_moment_checks(
            &format!("gamma({s},{r})"),
            &xs,
            s / r,
            Some(s / (r * r)),
            &mut out,
        );
    }

    // inverse gamma: mean g/(a-1); variance finite only for a > 2
    let n500 = 500f64;
    let ig_settings = [
        (2.0, 1.0, None),
        (2.0, n500.ln() / n500, None),
        (3.0, 4.0, Some(4.0)),
        (5.0, 3.0, Some(9.0 / (16.0 * 3.0))),
    ];
    for (k, (a, g, var)) in ig_settings.iter().enumerate() {
        let mut rng = stream.substream(0x30 + k as u64).rng();
        let xs: Vec<f64> = (0..n)
            .map(|_| sample_inverse_gamma(*a, *g, &mut rng))
            .collect::<Result<_>>()?;
        two_moment_checks(
            &format!("inverse_gamma({a},{g:.6})"),
            &xs,
            g / (a - 1.0),
            *var,
            &mut out,
        );
    }

    // beta: mean a/(a+g), variance ag/((a+g)^2 (a+g+1))
    let bphi = 30.0 * (3.0 * 0.3 * n500.ln() - 1.0);
    for (k, (a, g)) in [(1.0, 1.0), (30.0, bphi), (2.0, 2.0)].iter().enumerate() {
        let mut rng = stream.substream(0x40 + k as u64).rng();
        let xs: Vec<f64> = (0..n)
            .map(|_| sample_beta(*a, *g, &mut rng))
            .collect::<Result<_>>()?;
        let s = a + g;
        two_moment_checks(
            &format!("beta({a},{g:.4})"),
            &xs,
            a / s,
            Some(a * g / (s * s * (s + 1.0))),
            &mut out,
        );
    }

    // laplace: mean 0, variance 2/theta^2; plus the theta = 1 tail mass
    for (k, theta) in [1.0, 2.0, 0.5].iter().enumerate() {
        let mut rng = stream.substream(0x50 + k as u64).rng();
        let xs: Vec<f64> = (0..n)
            .map(|_| sample_laplace(*theta, &mut rng))
            .collect::<Result<_>>()?;
        two_moment_checks(
            &format!("laplace({theta})"),
            &xs,
            0.0,
            Some(2.0 / (theta * theta)),
            &mut out,
        );
        if *theta == 1.0 {
            let tail = xs.iter().filter(|x| x.abs() > 3.0).count() as f64 / n as f64;
            let p = (-3.0f64).exp();
            let se = (p * (1.0 - p) / n as f64).sqrt();
            out.push(CheckResult::new(
                "laplace(1) tail P(|X|>3)",
                tail,
                p,
                3.0 * se,
            ));
        }
    }

    out.extend(mvn_covariance_check(stream.substream(0x60), n)?);
    Ok(out)
}

/// Draw from `N(A^{-1}c, A^{-1})` for a random 10x10 SPD precision matrix
/// and compare the sample mean and covariance entrywise against the
/// explicit inverse.
fn mvn_covariance_check(stream: RngStream, draws: usize) -> Result<Vec<CheckResult>> {
    let p = 10usize;
    let mut setup_rng = stream.substream(0).rng();
    let b = DMatrix::<f64>::from_fn(p, p, |_, _| StandardNormal.sample(&mut setup_rng));
    let mut a = &b * b.transpose();
    for j in 0..p {
        a[(j, j)] += 0.5;
    }
    let c = DVector::<f64>::from_fn(p, |_, _| StandardNormal.sample(&mut setup_rng));
    let cov = a.clone().try_inverse().expect("SPD matrix inverts");
    let mu = &cov * &c;

    let mut rng = stream.substream(1).rng();
    let mut mean = DVector::<f64>::zeros(p);
    let mut second = DMatrix::<f64>::zeros(p, p);
    for _ in 0..draws {
        let v = sample_mvn_precision(&a, &c, &mut rng)?;
        mean += &v;
        second.ger(1.0, &v, &v, 1.0);
    }
    let nf = draws as f64;
    mean /= nf;
    let mut sample_cov = second / nf;
    sample_cov.ger(-1.0, &mean, &mean, 1.0);

    // entrywise z-scores; the band for the max over m entries is the
    // Bonferroni bound at the 1% level, since a plain 3-SE band applied
    // to the maximum of 55 comparisons rejects correct samplers far too
    // often, while a genuine bias pushes z past either bound by orders
    // of magnitude
    let mut out = Vec::new();
    let mut worst_mean: (f64, usize) = (0.0, 0);
    for i in 0..p {
        let se = (cov[(i, i)] / nf).sqrt();
        let z = (mean[i] - mu[i]).abs() / se;
        if z > worst_mean.0 {
            worst_mean = (z, i);
        }
    }
    out.push(CheckResult::new(
        format!("mvn mean max|z| over {p} coordinates (worst {})", worst_mean.1),
        worst_mean.0,
        0.0,
        bonferroni_bound(p),
    ));
    let mut worst_cov: (f64, usize, usize) = (0.0, 0, 0);
    for i in 0..p {
        for j in 0..=i {
            let se = ((cov[(i, i)] * cov[(j, j)] + cov[(i, j)] * cov[(i, j)]) / nf).sqrt();
            let z = (sample_cov[(i, j)] - cov[(i, j)]).abs() / se;
            if z > worst_cov.0 {
                worst_cov = (z, i, j);
            }
        }
    }
    let m = p * (p + 1) / 2;
    out.push(CheckResult::new(
        format!(
            "mvn covariance max|z| over {m} entries (worst {},{})",
            worst_cov.1, worst_cov.2
        ),
        worst_cov.0,
        0.0,
        bonferroni_bound(m),
    ));
    Ok(out)
}

/// Two-sided normal quantile for `m` simultaneous comparisons at overall
/// level 1%: `Phi^{-1}(1 - 0.005/m)` via the Acklam rational approximation
/// (absolute error below 1e-9, ample for a test band).
fn bonferroni_bound(m: usize) -> f64 {
    let p = 1.0 - 0.005 / m as f64;
    inverse_normal_cdf(p)
}

pub(crate) fn inverse_normal_cdf(p: f64) -> f64 {
    debug_assert!(p > 0.0 && p < 1.0);
    const A: [f64; 6] = [
        -3.969683028665376e+01,
        2.209460984245205e+02,
        -2.759285104469687e+02,
        1.383577518672690e+02,
        -3.066479806614716e+01,
        2.506628277459239e+00,
    ];
    const B: [f64; 5] = [
        -5.447609879822406e+01,
        1.615858368580409e+02,
        -1.556989798598866e+02,
        6.680131188771972e+01,
        -1.328068155288572e+01,
    ];
    const C: [f64; 6] = [
        -7.784894002430293e-03,
        -3.223964580411365e-01,
        -2.400758277161838e+00,
        -2.549732539343734e+00,
        4.374664141464968e+00,
        2.938163982698783e+00,
    ];
    const D: [f64; 4] = [
        7.784695709041462e-03,
        3.224671290700398e-01,
        2.445134137142996e+00,
        3.754408661907416e+00,
    ];
    let p_low = 0.02425;
    if p < p_low {
        let q = (-2.0 * p.ln()).sqrt();
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    } else if p <= 1.0 - p_low {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    } else {
        -inverse_normal_cdf(1.0 - p)
    }
}
