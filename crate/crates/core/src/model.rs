//! Domain types shared by the sampler, the simulator, the frequentist
//! baselines, and the benchmark harness.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::RngStream;

/// Mixture component of a coefficient: `Large` carries the spread-out
/// variance `delta_1^2`, `Small` the concentrated `delta_2^2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Component {
    Large,
    Small,
}

impl Component {
    /// Index into `[delta_1^2, delta_2^2]`-shaped arrays.
    pub fn idx(self) -> usize {
        match self {
            Component::Large => 0,
            Component::Small => 1,
        }
    }

    /// The conventional 1/2 label.
    pub fn label(self) -> u8 {
        match self {
            Component::Large => 1,
            Component::Small => 2,
        }
    }

    pub fn from_label(label: u8) -> Result<Self> {
        match label {
            1 => Ok(Component::Large),
            2 => Ok(Component::Small),
            other => Err(Error::Domain(format!(
                "component label must be 1 or 2, got {other}"
            ))),
        }
    }
}

/// Ground truth attached to simulated data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Truth {
    pub beta: Vec<f64>,
    pub theta: f64,
    pub labels: Vec<Component>,
}

/// A regression dataset: design matrix `x` (one row per observation),
/// response `y`, and optionally the generating truth.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    x: DMatrix<f64>,
    y: DVector<f64>,
    truth: Option<Truth>,
}

impl Dataset {
    pub fn new(x: DMatrix<f64>, y: DVector<f64>, truth: Option<Truth>) -> Result<Self> {
        let (n, p) = (x.nrows(), x.ncols());
        if n < 1 || p < 1 || p >= n {
            return Err(Error::Dimension(format!(
                "need 1 <= p < n, got n = {n}, p = {p}"
            )));
        }
        if y.len() != n {
            return Err(Error::Dimension(format!(
                "y has length {} but x has {n} rows",
                y.len()
            )));
        }
        if let Some(t) = &truth {
            if t.beta.len() != p || t.labels.len() != p {
                return Err(Error::Dimension(format!(
                    "truth vectors have lengths {}/{} but p = {p}",
                    t.beta.len(),
                    t.labels.len()
                )));
            }
        }
        Ok(Dataset { x, y, truth })
    }

    pub fn n(&self) -> usize {
        self.x.nrows()
    }

    pub fn p(&self) -> usize {
        self.x.ncols()
    }

    pub fn x(&self) -> &DMatrix<f64> {
        &self.x
    }

    pub fn y(&self) -> &DVector<f64> {
        &self.y
    }

    pub fn truth(&self) -> Option<&Truth> {
        self.truth.as_ref()
    }

    /// Replace the response in place. Used by the joint-distribution
    /// validator, which regenerates data against a fixed design.
    pub fn set_y(&mut self, y: DVector<f64>) -> Result<()> {
        if y.len() != self.n() {
            return Err(Error::Dimension(format!(
                "y has length {} but x has {} rows",
                y.len(),
                self.n()
            )));
        }
        self.y = y;
        Ok(())
    }

    /// FNV-1a fingerprint of the numeric content; used by the benchmark
    /// harness to verify that every estimator in a cell saw the same data.
    pub fn content_hash(&self) -> u64 {
        let mut h = 0xcbf2_9ce4_8422_2325u64;
        let mut eat = |bytes: &[u8]| {
            for &b in bytes {
                h ^= b as u64;
                h = h.wrapping_mul(0x0000_0100_0000_01b3);
            }
        };
        eat(&(self.n() as u64).to_le_bytes());
        eat(&(self.p() as u64).to_le_bytes());
        for v in self.x.iter() {
            eat(&v.to_bits().to_le_bytes());
        }
        for v in self.y.iter() {
            eat(&v.to_bits().to_le_bytes());
        }
        h
    }
}

/// Hyperparameters of the prior hierarchy: inverse-Gamma `(alpha_k,
/// gamma_k)` on each mixture variance, `Beta(alpha_phi, gamma_phi)` on the
/// mixing fraction, and an exponential prior with rate `theta_rate` on the
/// squared error-rate parameter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PriorHyperparams {
    pub alpha1: f64,
    pub gamma1: f64,
    pub alpha2: f64,
    pub gamma2: f64,
    pub alpha_phi: f64,
    pub gamma_phi: f64,
    pub theta_rate: f64,
}

impl PriorHyperparams {
    pub fn new(
        alpha1: f64,
        gamma1: f64,
        alpha2: f64,
        gamma2: f64,
        alpha_phi: f64,
        gamma_phi: f64,
        theta_rate: f64,
    ) -> Result<Self> {
        let h = PriorHyperparams {
            alpha1,
            gamma1,
            alpha2,
            gamma2,
            alpha_phi,
            gamma_phi,
            theta_rate,
        };
        h.validate()?;
        Ok(h)
    }

    /// The scaling rule tying the hyperparameters to the problem size:
    /// `alpha_phi = 30`, `gamma_phi = 30 (3 kappa log n - 1)`,
    /// `alpha_k = 2`, `gamma_1 = log(n)/n`, `gamma_2 = n^{-3/2}`, and a
    /// unit-rate exponential prior on the squared rate parameter. Under
    /// this rule the prior means are `E(phi/p) = 1/(3 kappa log n)`,
    /// `E(delta_1^2) = log(n)/n`, `E(delta_2^2) = n^{-3/2}`.
    pub fn scaled(n: usize, kappa: f64) -> Result<Self> {
        if n < 2 {
            return Err(Error::Config(format!("scaling rule needs n >= 2, got {n}")));
        }
        if !(kappa > 0.0 && kappa < 1.0) {
            return Err(Error::Config(format!(
                "scaling rule needs kappa in (0,1), got {kappa}"
            )));
        }
        let nf = n as f64;
        let log_n = nf.ln();
        let gamma_phi = 30.0 * (3.0 * kappa * log_n - 1.0);
        if !(gamma_phi > 0.0) {
            return Err(Error::Config(format!(
                "scaling rule needs 3 kappa log(n) > 1 (n = {n}, kappa = {kappa})"
            )));
        }
        PriorHyperparams::new(
            2.0,
            log_n / nf,
            2.0,
            nf.powf(-1.5),
            30.0,
            gamma_phi,
            1.0,
        )
    }

    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("alpha1", self.alpha1),
            ("gamma1", self.gamma1),
            ("alpha2", self.alpha2),
            ("gamma2", self.gamma2),
            ("alpha_phi", self.alpha_phi),
            ("gamma_phi", self.gamma_phi),
            ("theta_rate", self.theta_rate),
        ];
        for (name, v) in fields {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Domain(format!(
                    "hyperparameter {name} must be positive and finite, got {v}"
                )));
            }
        }
        Ok(())
    }

    /// Prior mean of the mixing fraction `phi/p`.
    pub fn mean_phi_frac(&self) -> f64 {
        self.alpha_phi / (self.alpha_phi + self.gamma_phi)
    }

    /// Prior mean of `delta_k^2` (requires `alpha_k > 1`).
    pub fn mean_delta_sq(&self, k: Component) -> f64 {
        match k {
            Component::Large => self.gamma1 / (self.alpha1 - 1.0),
            Component::Small => self.gamma2 / (self.alpha2 - 1.0),
        }
    }

    pub fn alpha(&self, k: Component) -> f64 {
        match k {
            Component::Large => self.alpha1,
            Component::Small => self.alpha2,
        }
    }

    pub fn gamma(&self, k: Component) -> f64 {
        match k {
            Component::Large => self.gamma1,
            Component::Small => self.gamma2,
        }
    }
}

/// Shape convention for the squared-rate full conditional.
///
/// `Derived` uses shape `n + 1`, which is what the augmented joint density
/// yields and what the joint-distribution validator certifies;
/// `PaperLiteral` selects `n/2 + 1` for comparison runs.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ThetaShapeMode {
    #[default]
    Derived,
    PaperLiteral,
}

/// One point of the Gibbs chain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GibbsState {
    pub beta: Vec<f64>,
    pub labels: Vec<Component>,
    pub sigma_sq: Vec<f64>,
    pub theta_sq: f64,
    /// `[delta_1^2, delta_2^2]`, indexed by [`Component::idx`].
    pub delta_sq: [f64; 2],
    /// The mixing fraction `phi/p`.
    pub phi_frac: f64,
}

impl GibbsState {
    pub fn p(&self) -> usize {
        self.beta.len()
    }

    pub fn n(&self) -> usize {
        self.sigma_sq.len()
    }

    /// Count of coordinates assigned to `component`.
    pub fn group_count(&self, component: Component) -> usize {
        self.labels.iter().filter(|t| **t == component).count()
    }

    pub fn validate(&self) -> Result<()> {
        if self.labels.len() != self.beta.len() {
            return Err(Error::Dimension(format!(
                "labels length {} != beta length {}",
                self.labels.len(),
                self.beta.len()
            )));
        }
        if !self.beta.iter().all(|b| b.is_finite()) {
            return Err(Error::Domain("beta contains a non-finite entry".into()));
        }
        if !self.sigma_sq.iter().all(|s| *s > 0.0 && s.is_finite()) {
            return Err(Error::Domain("sigma_sq must be positive".into()));
        }
        if !(self.theta_sq > 0.0 && self.theta_sq.is_finite()) {
            return Err(Error::Domain(format!(
                "theta_sq must be positive, got {}",
                self.theta_sq
            )));
        }
        for (k, d) in self.delta_sq.iter().enumerate() {
            if !(*d > 0.0 && d.is_finite()) {
                return Err(Error::Domain(format!(
                    "delta_sq[{k}] must be positive, got {d}"
                )));
            }
        }
        if !(self.phi_frac > 0.0 && self.phi_frac < 1.0) {
            return Err(Error::Domain(format!(
                "phi_frac must lie in (0,1), got {}",
                self.phi_frac
            )));
        }
        Ok(())
    }
}

/// Chain length, burn-in, thinning, and the stream driving the chain.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GibbsConfig {
    pub iterations: usize,
    pub burn_in: usize,
    pub thinning: usize,
    pub stream: RngStream,
    #[serde(default)]
    pub theta_shape: ThetaShapeMode,
}

impl GibbsConfig {
    /// Burn-in defaults to half the iterations, thinning to 1.
    pub fn new(iterations: usize, stream: RngStream) -> Result<Self> {
        GibbsConfig::with_schedule(iterations, iterations / 2, 1, stream)
    }

    pub fn with_schedule(
        iterations: usize,
        burn_in: usize,
        thinning: usize,
        stream: RngStream,
    ) -> Result<Self> {
        if iterations == 0 {
            return Err(Error::Config("iterations must be positive".into()));
        }
        if burn_in >= iterations {
            return Err(Error::Config(format!(
                "burn-in ({burn_in}) must be smaller than iterations ({iterations})"
            )));
        }
        if thinning == 0 {
            return Err(Error::Config("thinning must be positive".into()));
        }
        Ok(GibbsConfig {
            iterations,
            burn_in,
            thinning,
            stream,
            theta_shape: ThetaShapeMode::default(),
        })
    }

    pub fn with_theta_shape(mut self, mode: ThetaShapeMode) -> Self {
        self.theta_shape = mode;
        self
    }

    /// Number of states the chain will retain.
    pub fn retained_count(&self) -> usize {
        (self.iterations - self.burn_in) / self.thinning
    }

    /// Whether the (1-based) sweep index is retained.
    pub fn retains(&self, iteration: usize) -> bool {
        iteration > self.burn_in && (iteration - self.burn_in) % self.thinning == 0
    }
}

/// Quantile levels reported per coordinate.
pub const QUANTILE_LEVELS: [f64; 3] = [0.025, 0.5, 0.975];

/// Posterior reducers over the retained states. The point estimator for
/// `beta` is the posterior mean of the retained draws.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PosteriorSummary {
    pub beta_mean: Vec<f64>,
    /// Per-coordinate quantiles at [`QUANTILE_LEVELS`].
    pub beta_quantiles: Vec<[f64; 3]>,
    /// Per-coordinate frequency of assignment to the large component.
    pub inclusion_frequency: Vec<f64>,
    pub theta_sq_mean: f64,
    pub delta_sq_mean: [f64; 2],
    pub phi_frac_mean: f64,
}

/// Retained post-burn-in states plus their summary.
#[derive(Debug, Clone, PartialEq)]
pub struct PosteriorDraws {
    pub config: GibbsConfig,
    pub states: Vec<GibbsState>,
    pub summary: PosteriorSummary,
}

impl PosteriorDraws {
    pub fn from_states(config: GibbsConfig, states: Vec<GibbsState>) -> Result<Self> {
        if states.is_empty() {
            return Err(Error::Config("no retained states".into()));
        }
        let summary = summarize(&states);
        Ok(PosteriorDraws {
            config,
            states,
            summary,
        })
    }

    /// The Bayes point estimate of the coefficient vector.
    pub fn beta_estimate(&self) -> DVector<f64> {
        DVector::from_column_slice(&self.summary.beta_mean)
    }
}

fn summarize(states: &[GibbsState]) -> PosteriorSummary {
    let m = states.len();
    let p = states[0].p();
    let mf = m as f64;

    let mut beta_mean = vec![0.0; p];
    let mut inclusion = vec![0.0; p];
    let mut theta_sq_mean = 0.0;
    let mut delta_sq_mean = [0.0; 2];
    let mut phi_frac_mean = 0.0;
    for s in states {
        for j in 0..p {
            beta_mean[j] += s.beta[j];
            if s.labels[j] == Component::Large {
                inclusion[j] += 1.0;
            }
        }
        theta_sq_mean += s.theta_sq;
        delta_sq_mean[0] += s.delta_sq[0];
        delta_sq_mean[1] += s.delta_sq[1];
        phi_frac_mean += s.phi_frac;
    }
    for j in 0..p {
        beta_mean[j] /= mf;
        inclusion[j] /= mf;
    }
    theta_sq_mean /= mf;
    delta_sq_mean[0] /= mf;
    delta_sq_mean[1] /= mf;
    phi_frac_mean /= mf;

    let mut beta_quantiles = Vec::with_capacity(p);
    let mut scratch = vec![0.0; m];
    for j in 0..p {
        for (i, s) in states.iter().enumerate() {
            scratch[i] = s.beta[j];
        }
        scratch.sort_by(|a, b| a.partial_cmp(b).unwrap());
        beta_quantiles.push([
            quantile_sorted(&scratch, QUANTILE_LEVELS[0]),
            quantile_sorted(&scratch, QUANTILE_LEVELS[1]),
            quantile_sorted(&scratch, QUANTILE_LEVELS[2]),
        ]);
    }

    PosteriorSummary {
        beta_mean,
        beta_quantiles,
        inclusion_frequency: inclusion,
        theta_sq_mean,
        delta_sq_mean,
        phi_frac_mean,
    }
}

/// Linear-interpolation quantile of an ascending slice.
pub fn quantile_sorted(sorted: &[f64], level: f64) -> f64 {
    debug_assert!(!sorted.is_empty());
    debug_assert!((0.0..=1.0).contains(&level));
    let idx = level * (sorted.len() - 1) as f64;
    let lo = idx.floor() as usize;
    let hi = idx.ceil() as usize;
    if lo == hi {
        sorted[lo]
    } else {
        let w = idx - lo as f64;
        sorted[lo] * (1.0 - w) + sorted[hi] * w
    }
}

/// Expected squared norm of the coefficient vector given the hierarchy
/// level: `phi * delta_1^2 + (p - phi) * delta_2^2`, where `phi` counts the
/// large-variance coordinates.
pub fn prior_expected_signal(phi: f64, delta1_sq: f64, delta2_sq: f64, p: usize) -> f64 {
    debug_assert!(phi >= 0.0 && delta1_sq >= 0.0 && delta2_sq >= 0.0);
    debug_assert!(phi <= p as f64);
    phi * delta1_sq + (p as f64 - phi) * delta2_sq
}

/// Squared Euclidean error between an estimate and the truth.
pub fn l2_error(estimate: &DVector<f64>, truth: &DVector<f64>) -> Result<f64> {
    if estimate.len() != truth.len() {
        return Err(Error::Dimension(format!(
            "estimate length {} != truth length {}",
            estimate.len(),
            truth.len()
        )));
    }
    Ok((estimate - truth).norm_squared())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn dataset_rejects_bad_shapes() {
        let x = DMatrix::<f64>::zeros(3, 3);
        let y = DVector::zeros(3);
        assert!(Dataset::new(x, y, None).is_err()); // p == n
        let x = DMatrix::<f64>::zeros(3, 2);
        let y = DVector::zeros(4);
        assert!(Dataset::new(x, y, None).is_err()); // y length
    }

    #[test]
    fn scaling_rule_reproduces_prior_means() {
        let n = 500usize;
        let kappa = 0.3;
        let h = PriorHyperparams::scaled(n, kappa).unwrap();
        let log_n = (n as f64).ln();
        assert_relative_eq!(h.mean_phi_frac(), 1.0 / (3.0 * kappa * log_n), epsilon = 1e-12);
        assert_relative_eq!(
            h.mean_delta_sq(Component::Large),
            log_n / n as f64,
            epsilon = 1e-12
        );
        assert_relative_eq!(
            h.mean_delta_sq(Component::Small),
            (n as f64).powf(-1.5),
            epsilon = 1e-12
        );
        assert_relative_eq!(h.alpha_phi, 30.0, epsilon = 1e-12);
        assert_relative_eq!(
            h.gamma_phi,
            30.0 * (3.0 * kappa * log_n - 1.0),
            epsilon = 1e-12
        );
    }

    #[test]
    fn scaling_rule_rejects_degenerate_sizes() {
        // 3 kappa log(n) <= 1 leaves the Beta prior without positive mass
        assert!(PriorHyperparams::scaled(3, 0.05).is_err());
        assert!(PriorHyperparams::scaled(500, 0.0).is_err());
        assert!(PriorHyperparams::scaled(1, 0.3).is_err());
    }

    #[test]
    fn prior_expected_signal_examples() {
        assert_eq!(prior_expected_signal(0.0, 5.0, 0.0, 10), 0.0);
        assert_eq!(prior_expected_signal(10.0, 0.25, 123.0, 10), 2.5);

        // scaling-rule expectations at n = 500, kappa = 0.3
        let n = 500f64;
        let log_n = n.ln();
        let phi = n / (3.0 * log_n);
        let d1 = log_n / n;
        let d2 = n.powf(-1.5);
        let p = 150usize;
        let got = prior_expected_signal(phi, d1, d2, p);
        // phi * d1 is exactly 1/3; the small-component term adds ~0.011
        let expected = 1.0 / 3.0 + (p as f64 - phi) * d2;
        assert_relative_eq!(got, expected, epsilon = 1e-12);
        assert_relative_eq!(got, 0.344351, epsilon = 1e-6);
    }

    #[test]
    fn l2_error_examples() {
        let a = DVector::from_vec(vec![1.0, 0.0]);
        assert_eq!(l2_error(&a, &a).unwrap(), 0.0);
        let b = DVector::from_vec(vec![0.0, 1.0]);
        assert_eq!(l2_error(&a, &b).unwrap(), 2.0);
        let c = DVector::from_vec(vec![0.5, -0.5, 1.0]);
        let z = DVector::zeros(3);
        assert_eq!(l2_error(&c, &z).unwrap(), 1.5);
        assert!(l2_error(&a, &z).is_err());
    }

    #[test]
    fn gibbs_config_validation_and_retention() {
        let s = RngStream::new(0, 0);
        assert!(GibbsConfig::with_schedule(0, 0, 1, s).is_err());
        assert!(GibbsConfig::with_schedule(10, 10, 1, s).is_err());
        assert!(GibbsConfig::with_schedule(10, 2, 0, s).is_err());
        let c = GibbsConfig::with_schedule(11, 4, 2, s).unwrap();
        assert_eq!(c.retained_count(), 3);
        let retained: Vec<usize> = (1..=11).filter(|i| c.retains(*i)).collect();
        assert_eq!(retained, vec![6, 8, 10]);
        assert_eq!(retained.len(), c.retained_count());

        let d = GibbsConfig::new(1000, s).unwrap();
        assert_eq!(d.burn_in, 500);
        assert_eq!(d.thinning, 1);
        assert_eq!(d.retained_count(), 500);
    }

    #[test]
    fn state_validation_catches_violations() {
        let mut s = GibbsState {
            beta: vec![0.1, -0.2],
            labels: vec![Component::Large, Component::Small],
            sigma_sq: vec![1.0, 2.0, 3.0],
            theta_sq: 1.0,
            delta_sq: [0.5, 0.01],
            phi_frac: 0.3,
        };
        assert!(s.validate().is_ok());
        s.phi_frac = 1.0;
        assert!(s.validate().is_err());
        s.phi_frac = 0.3;
        s.sigma_sq[1] = 0.0;
        assert!(s.validate().is_err());
    }

    #[test]
    fn state_serialization_round_trips_bit_exactly() {
        let s = GibbsState {
            beta: vec![0.1, -2.0e-13, 3.5e104],
            labels: vec![Component::Large, Component::Small, Component::Small],
            sigma_sq: vec![1.0, 0.25],
            theta_sq: 0.7071067811865476,
            delta_sq: [1.2e-9, 3.0],
            phi_frac: 0.12345678901234567,
        };
        let json = serde_json::to_string(&s).unwrap();
        let back: GibbsState = serde_json::from_str(&json).unwrap();
        assert_eq!(s, back);
        for (a, b) in s.beta.iter().zip(&back.beta) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
        assert_eq!(s.theta_sq.to_bits(), back.theta_sq.to_bits());
    }

    #[test]
    fn summary_reducers() {
        let mk = |beta: Vec<f64>, label: Component, theta: f64| GibbsState {
            labels: vec![label; beta.len()],
            sigma_sq: vec![1.0],
            theta_sq: theta,
            delta_sq: [1.0, 2.0],
            phi_frac: 0.5,
            beta,
        };
        let draws = PosteriorDraws::from_states(
            GibbsConfig::new(4, RngStream::new(0, 0)).unwrap(),
            vec![
                mk(vec![1.0, 0.0], Component::Large, 1.0),
                mk(vec![3.0, 2.0], Component::Small, 3.0),
            ],
        )
        .unwrap();
        assert_eq!(draws.summary.beta_mean, vec![2.0, 1.0]);
        assert_eq!(draws.summary.theta_sq_mean, 2.0);
        assert_eq!(draws.summary.inclusion_frequency, vec![0.5, 0.5]);
        // median with two states interpolates halfway
        assert_eq!(draws.summary.beta_quantiles[0][1], 2.0);
    }
}
