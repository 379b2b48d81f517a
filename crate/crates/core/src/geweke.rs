//! Joint-distribution correctness validator for the Gibbs kernels
//! ("getting it right").
//!
//! Two samplers of the joint law of (parameters, data) are compared:
//! the marginal-conditional simulator draws parameters from the prior and
//! data from the likelihood, independently each cycle; the
//! successive-conditional simulator alternates one Gibbs sweep with a data
//! regeneration step. If every full conditional is correct, both target
//! the same joint distribution, so the two samples of any test function
//! agree up to Monte Carlo noise; a kernel bug shows up as a diverging
//! z-score on the affected function.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::dist::sample_gamma;
use crate::error::{Error, Result};
use crate::gibbs::GibbsKernel;
use crate::model::{Component, GibbsState, PriorHyperparams, ThetaShapeMode};
use crate::rng::RngStream;
use crate::sim::draw_coefficient_prior;

/// Configuration of one validation run.
#[derive(Debug, Clone)]
pub struct GewekeConfig {
    pub n: usize,
    pub p: usize,
    pub cycles: usize,
    pub stream: RngStream,
    pub theta_shape: ThetaShapeMode,
    /// Defaults to the scaling rule at `(n, p/n)` when absent.
    pub hyper: Option<PriorHyperparams>,
}

impl GewekeConfig {
    pub fn new(n: usize, p: usize, cycles: usize, stream: RngStream) -> Self {
        GewekeConfig {
            n,
            p,
            cycles,
            stream,
            theta_shape: ThetaShapeMode::default(),
            hyper: None,
        }
    }

    pub fn with_theta_shape(mut self, mode: ThetaShapeMode) -> Self {
        self.theta_shape = mode;
        self
    }
}

/// Per-test-function z-scores of one validation run.
#[derive(Debug, Clone)]
pub struct GewekeReport {
    pub cycles: usize,
    pub z_scores: Vec<(&'static str, f64)>,
}

impl GewekeReport {
    pub fn max_abs_z(&self) -> f64 {
        self.z_scores
            .iter()
            .map(|(_, z)| z.abs())
            .fold(0.0, f64::max)
    }

    pub fn z(&self, name: &str) -> Option<f64> {
        self.z_scores
            .iter()
            .find(|(n, _)| *n == name)
            .map(|(_, z)| *z)
    }
}

const TEST_FUNCTIONS: [(&str, fn(&GibbsState) -> f64); 6] = [
    ("beta1", |s| s.beta[0]),
    ("beta1_sq", |s| s.beta[0] * s.beta[0]),
    ("theta_sq", |s| s.theta_sq),
    ("delta1_sq", |s| s.delta_sq[0]),
    ("phi_frac", |s| s.phi_frac),
    ("n_large", |s| s.group_count(Component::Large) as f64),
];

/// Draw a complete parameter state from the prior hierarchy, including the
/// latent per-observation variances of the scale-mixture representation.
pub fn draw_prior_state<R: Rng + ?Sized>(
    n: usize,
    p: usize,
    hyper: &PriorHyperparams,
    rng: &mut R,
) -> Result<GibbsState> {
    let theta_sq = sample_gamma(1.0, hyper.theta_rate, rng)?;
    let mut sigma_sq = Vec::with_capacity(n);
    for _ in 0..n {
        sigma_sq.push(sample_gamma(1.0, theta_sq / 2.0, rng)?);
    }
    let (phi_frac, delta_sq, labels, beta) = draw_coefficient_prior(p, hyper, rng)?;
    Ok(GibbsState {
        beta,
        labels,
        sigma_sq,
        theta_sq,
        delta_sq,
        phi_frac,
    })
}

/// Regenerate the response from the augmented likelihood
/// `y | beta, sigma^2 ~ N(X beta, diag(sigma^2))`.
pub fn regenerate_response<R: Rng + ?Sized>(
    x: &DMatrix<f64>,
    state: &GibbsState,
    rng: &mut R,
) -> DVector<f64> {
    let beta = DVector::from_column_slice(&state.beta);
    let mut y = x * beta;
    for i in 0..y.len() {
        let z: f64 = StandardNormal.sample(rng);
        y[i] += z * state.sigma_sq[i].sqrt();
    }
    y
}

/// Run the validator and return z-scores for the six test functions.
pub fn geweke_joint_test(config: &GewekeConfig) -> Result<GewekeReport> {
    if config.cycles == 0 {
        return Err(Error::Config("geweke test needs at least one cycle".into()));
    }
    if config.p == 0 || config.p >= config.n {
        return Err(Error::Config(format!(
            "geweke test needs 1 <= p < n, got n = {}, p = {}",
            config.n, config.p
        )));
    }
    let hyper = match config.hyper {
        Some(h) => h,
        None => PriorHyperparams::scaled(config.n, config.p as f64 / config.n as f64)?,
    };
    hyper.validate()?;

    // fixed design shared by both simulators
    let mut design_rng = config.stream.substream(0).rng();
    let x = DMatrix::from_fn(config.n, config.p, |_, _| {
        StandardNormal.sample(&mut design_rng)
    });

    // marginal-conditional side: iid draws from the prior
    let mut mc_rng = config.stream.substream(1).rng();
    let mut mc_samples = vec![Vec::with_capacity(config.cycles); TEST_FUNCTIONS.len()];
    for _ in 0..config.cycles {
        let state = draw_prior_state(config.n, config.p, &hyper, &mut mc_rng)?;
        for (k, (_, f)) in TEST_FUNCTIONS.iter().enumerate() {
            mc_samples[k].push(f(&state));
        }
    }

    // successive-conditional side: sweep, then regenerate the data
    let mut sc_rng = config.stream.substream(2).rng();
    let mut kernel = GibbsKernel::new(&x, hyper, config.theta_shape);
    let mut state = draw_prior_state(config.n, config.p, &hyper, &mut sc_rng)?;
    let mut y = regenerate_response(&x, &state, &mut sc_rng);
    let mut sc_samples = vec![Vec::with_capacity(config.cycles); TEST_FUNCTIONS.len()];
    for _ in 0..config.cycles {
        kernel.sweep(&y, &mut state, &mut sc_rng)?;
        y = regenerate_response(&x, &state, &mut sc_rng);
        for (k, (_, f)) in TEST_FUNCTIONS.iter().enumerate() {
            sc_samples[k].push(f(&state));
        }
    }

    let z_scores = TEST_FUNCTIONS
        .iter()
        .enumerate()
        .map(|(k, (name, _))| {
            let (mc_mean, mc_se_sq) = iid_mean_se_sq(&mc_samples[k]);
            let (sc_mean, sc_se_sq) = batch_mean_se_sq(&sc_samples[k]);
            let z = (mc_mean - sc_mean) / (mc_se_sq + sc_se_sq).sqrt();
            (*name, z)
        })
        .collect();

    Ok(GewekeReport {
        cycles: config.cycles,
        z_scores,
    })
}

fn iid_mean_se_sq(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var / n)
}

/// Mean and squared standard error of a correlated chain via batch means.
fn batch_mean_se_sq(xs: &[f64]) -> (f64, f64) {
    let n = xs.len();
    let batches = if n >= 1000 { 100 } else { n.min(20).max(1) };
    let size = n / batches;
    let used = batches * size;
    let mean = xs[..used].iter().sum::<f64>() / used as f64;
    if batches < 2 {
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n as f64 - 1.0).max(1.0);
        return (mean, var / n as f64);
    }
    let mut between = 0.0;
    for b in 0..batches {
        let bm = xs[b * size..(b + 1) * size].iter().sum::<f64>() / size as f64;
        between += (bm - mean).powi(2);
    }
    let var_of_batch_mean = between / (batches as f64 - 1.0);
    (mean, var_of_batch_mean / batches as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_cycles_is_an_error() {
        let cfg = GewekeConfig::new(20, 5, 0, RngStream::new(1, 0));
        assert!(matches!(geweke_joint_test(&cfg), Err(Error::Config(_))));
        let cfg = GewekeConfig::new(5, 5, 10, RngStream::new(1, 0));
        assert!(geweke_joint_test(&cfg).is_err());
    }

    #[test]
    fn prior_state_draw_is_valid() {
        let hyper = PriorHyperparams::scaled(20, 0.25).unwrap();
        let mut rng = RngStream::new(4, 0).rng();
        for _ in 0..200 {
            let s = draw_prior_state(20, 5, &hyper, &mut rng).unwrap();
            s.validate().unwrap();
        }
    }

    // Inexpensive smoke run; the acceptance suite runs the full-length test.
    #[test]
    fn short_run_produces_moderate_z_scores() {
        let cfg = GewekeConfig::new(20, 5, 5_000, RngStream::new(2024, 0));
        let report = geweke_joint_test(&cfg).unwrap();
        assert_eq!(report.z_scores.len(), 6);
        assert!(
            report.max_abs_z() < 8.0,
            "z-scores unexpectedly large: {:?}",
            report.z_scores
        );
    }

    #[test]
    fn deterministic_given_stream() {
        let cfg = GewekeConfig::new(15, 3, 500, RngStream::new(7, 7));
        let a = geweke_joint_test(&cfg).unwrap();
        let b = geweke_joint_test(&cfg).unwrap();
        for ((_, za), (_, zb)) in a.z_scores.iter().zip(&b.z_scores) {
            assert_eq!(za.to_bits(), zb.to_bits());
        }
    }
}
