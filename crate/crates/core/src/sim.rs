//! Data generation for the simulation study, and the Monte Carlo
//! diagnostic for the prior's large-coefficient proportion.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::dist::{sample_beta, sample_gamma, sample_inverse_gamma, sample_laplace};
use crate::error::{Error, Result};
use crate::model::{Component, Dataset, PriorHyperparams, Truth};
use crate::rng::RngStream;

/// The prior scaling fixes `delta_2^2` at `n^{-xi}` with this exponent;
/// the large-coefficient diagnostic requires `eta < xi`.
pub const XI: f64 = 1.5;

/// One simulation cell: size, aspect ratio, hyperparameters, stream.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimDesign {
    pub n: usize,
    pub kappa: f64,
    pub hyper: PriorHyperparams,
    pub stream: RngStream,
    /// When set, the error-rate parameter is frozen at this value instead
    /// of being redrawn; used for variance-reduction studies.
    pub frozen_theta: Option<f64>,
}

impl SimDesign {
    /// Build a design with the hyperparameter scaling rule at `(n, kappa)`.
    pub fn new(n: usize, kappa: f64, stream: RngStream) -> Result<Self> {
        let hyper = PriorHyperparams::scaled(n, kappa)?;
        SimDesign::with_hyper(n, kappa, hyper, stream)
    }

    pub fn with_hyper(
        n: usize,
        kappa: f64,
        hyper: PriorHyperparams,
        stream: RngStream,
    ) -> Result<Self> {
        let design = SimDesign {
            n,
            kappa,
            hyper,
            stream,
            frozen_theta: None,
        };
        let p = design.p();
        if p < 1 || p >= n {
            return Err(Error::Config(format!(
                "kappa = {kappa} at n = {n} gives p = {p}, need 1 <= p < n"
            )));
        }
        Ok(design)
    }

    pub fn freeze_theta(mut self, theta: f64) -> Result<Self> {
        if !(theta > 0.0 && theta.is_finite()) {
            return Err(Error::Domain(format!(
                "frozen theta must be positive, got {theta}"
            )));
        }
        self.frozen_theta = Some(theta);
        Ok(self)
    }

    /// Number of predictors: `ceil(kappa * n)`.
    pub fn p(&self) -> usize {
        (self.kappa * self.n as f64).ceil() as usize
    }
}

/// Draw `(phi_frac, delta_sq, labels, beta)` from the coefficient prior:
/// the mixing fraction, both mixture variances, all labels, then all
/// coefficients, in that order. This is the exact sequence
/// [`generate_dataset`] uses for its coefficient block.
pub fn draw_coefficient_prior<R: Rng + ?Sized>(
    p: usize,
    hyper: &PriorHyperparams,
    rng: &mut R,
) -> Result<(f64, [f64; 2], Vec<Component>, Vec<f64>)> {
    let phi_frac = sample_beta(hyper.alpha_phi, hyper.gamma_phi, rng)?;
    let delta_sq = [
        sample_inverse_gamma(hyper.alpha1, hyper.gamma1, rng)?,
        sample_inverse_gamma(hyper.alpha2, hyper.gamma2, rng)?,
    ];
    let mut labels = Vec::with_capacity(p);
    for _ in 0..p {
        let u: f64 = rng.random();
        labels.push(if u < phi_frac {
            Component::Large
        } else {
            Component::Small
        });
    }
    let mut beta = Vec::with_capacity(p);
    for label in &labels {
        let z: f64 = StandardNormal.sample(rng);
        beta.push(z * delta_sq[label.idx()].sqrt());
    }
    Ok((phi_frac, delta_sq, labels, beta))
}

/// Generate one dataset with truth.
///
/// Generation order: the design matrix row by row (rows iid standard
/// normal), the mixing fraction, the two mixture variances, the labels,
/// the coefficients, the error-rate parameter (the square root of a unit
/// exponential draw, matching the prior placed on the squared rate), and
/// finally the Laplace errors. All randomness comes from `design.stream`.
pub fn generate_dataset(design: &SimDesign) -> Result<Dataset> {
    let mut rng = design.stream.rng();
    let (n, p) = (design.n, design.p());

    let mut x = DMatrix::<f64>::zeros(n, p);
    for i in 0..n {
        for j in 0..p {
            x[(i, j)] = StandardNormal.sample(&mut rng);
        }
    }

    let (_, _, labels, beta) = draw_coefficient_prior(p, &design.hyper, &mut rng)?;

    let theta = match design.frozen_theta {
        Some(t) => t,
        None => sample_gamma(1.0, design.hyper.theta_rate, &mut rng)?.sqrt(),
    };

    let beta_v = DVector::from_column_slice(&beta);
    let mut y = &x * &beta_v;
    for i in 0..n {
        y[i] += sample_laplace(theta, &mut rng)?;
    }

    Dataset::new(
        x,
        y,
        Some(Truth {
            beta,
            theta,
            labels,
        }),
    )
}

/// Monte Carlo summary of the proportion of prior coefficients exceeding
/// the threshold `C n^{-eta/2}`, against the drawn mixing fraction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LemmaDiagnostic {
    pub reps: usize,
    pub mean_b: f64,
    pub mean_phi_frac: f64,
    /// Mean over replications of `|B - phi/p| / (phi/p)`.
    pub mean_rel_deviation: f64,
    /// Largest single-replication relative deviation.
    pub max_rel_deviation: f64,
}

/// Estimate the large-coefficient proportion `B = p^{-1} sum 1{|beta_j| >
/// C n^{-eta/2}}` under the prior, and its concentration around `phi/p`.
pub fn check_large_coef_proportion(
    design: &SimDesign,
    c: f64,
    eta: f64,
    reps: usize,
) -> Result<LemmaDiagnostic> {
    if !(1.0..XI).contains(&eta) {
        return Err(Error::Domain(format!(
            "eta must satisfy 1 <= eta < {XI}, got {eta}"
        )));
    }
    if !(c >= 0.0) {
        return Err(Error::Domain(format!("C must be non-negative, got {c}")));
    }
    if reps < 100 {
        return Err(Error::Config(format!(
            "diagnostic needs at least 100 replications, got {reps}"
        )));
    }
    let p = design.p();
    let threshold = c * (design.n as f64).powf(-eta / 2.0);
    let mut rng = design.stream.substream(0x4c45_4d41).rng();

    let mut sum_b = 0.0;
    let mut sum_phi = 0.0;
    let mut sum_dev = 0.0;
    let mut max_dev = 0.0f64;
    for _ in 0..reps {
        let (phi_frac, _, _, beta) = draw_coefficient_prior(p, &design.hyper, &mut rng)?;
        let count = beta.iter().filter(|b| b.abs() > threshold).count();
        let b = count as f64 / p as f64;
        let dev = (b - phi_frac).abs() / phi_frac;
        sum_b += b;
        sum_phi += phi_frac;
        sum_dev += dev;
        max_dev = max_dev.max(dev);
    }
    let reps_f = reps as f64;
    Ok(LemmaDiagnostic {
        reps,
        mean_b: sum_b / reps_f,
        mean_phi_frac: sum_phi / reps_f,
        mean_rel_deviation: sum_dev / reps_f,
        max_rel_deviation: max_dev,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn p_is_ceiling_of_kappa_n() {
        let d = SimDesign::new(500, 0.3, RngStream::new(0, 0)).unwrap();
        assert_eq!(d.p(), 150);
        // non-integer kappa*n rounds up (custom hyper: the scaling rule
        // would reject this aspect ratio at n = 10)
        let hyper = PriorHyperparams::new(2.0, 1.0, 2.0, 1.0, 1.0, 1.0, 1.0).unwrap();
        let d = SimDesign::with_hyper(10, 0.11, hyper, RngStream::new(0, 0)).unwrap();
        assert_eq!(d.p(), 2);
    }

    #[test]
    fn generation_is_deterministic() {
        let d = SimDesign::new(40, 0.2, RngStream::new(123, 5)).unwrap();
        let a = generate_dataset(&d).unwrap();
        let b = generate_dataset(&d).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.content_hash(), b.content_hash());
        let other = SimDesign::new(40, 0.2, RngStream::new(123, 6)).unwrap();
        assert_ne!(generate_dataset(&other).unwrap().content_hash(), a.content_hash());
    }

    #[test]
    fn truth_dimensions_and_frozen_theta() {
        let d = SimDesign::new(60, 0.25, RngStream::new(7, 0))
            .unwrap()
            .freeze_theta(1.25)
            .unwrap();
        let data = generate_dataset(&d).unwrap();
        let t = data.truth().unwrap();
        assert_eq!(t.beta.len(), d.p());
        assert_eq!(t.labels.len(), d.p());
        assert_eq!(t.theta, 1.25);
        assert!(SimDesign::new(60, 0.25, RngStream::new(7, 0))
            .unwrap()
            .freeze_theta(-1.0)
            .is_err());
    }

    #[test]
    fn lemma_diagnostic_extreme_thresholds() {
        let d = SimDesign::new(200, 0.3, RngStream::new(11, 0)).unwrap();
        // C = 0: every coefficient exceeds a zero threshold
        let full = check_large_coef_proportion(&d, 0.0, 1.0, 100).unwrap();
        assert_eq!(full.mean_b, 1.0);
        // enormous C: none do
        let empty = check_large_coef_proportion(&d, 1e9, 1.0, 100).unwrap();
        assert_eq!(empty.mean_b, 0.0);
    }

    #[test]
    fn lemma_diagnostic_preconditions() {
        let d = SimDesign::new(200, 0.3, RngStream::new(11, 0)).unwrap();
        assert!(check_large_coef_proportion(&d, 1.0, 1.5, 100).is_err());
        assert!(check_large_coef_proportion(&d, 1.0, 0.5, 100).is_err());
        assert!(check_large_coef_proportion(&d, 1.0, 1.0, 99).is_err());
        assert!(check_large_coef_proportion(&d, -1.0, 1.0, 100).is_err());
    }
}
