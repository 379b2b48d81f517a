//! Blocked Gibbs sampler for the hierarchical robust-regression model.
//!
//! The error distribution is Laplace with rate `theta`; writing it as a
//! scale mixture of normals introduces one latent variance `sigma_i^2` per
//! observation with exponential mixing density `q(s | theta) =
//! (theta^2/2) exp(-theta^2 s / 2)`. Conditional on the latent variances
//! the model is Gaussian, so the whole coefficient vector is drawn in one
//! multivariate-normal block. A sweep updates, in this fixed order:
//!
//! 1. `theta^2`   ~ Gamma(shape, theta_rate + sum(sigma^2)/2)
//! 2. `sigma_i^-2`~ InverseGaussian(theta^2, theta/|y_i - x_i' beta|)
//! 3. `beta`      ~ N(A^{-1} c, A^{-1}),  A = X' Gamma^{-1} X + V^{-1}
//! 4. `t_j`       ~ two-point conditional on beta_j
//! 5. `delta_k^2` ~ InvGamma(alpha_k + N_k/2, gamma_k + sum beta_j^2 / 2)
//! 6. `phi/p`     ~ Beta(alpha_phi + N_1, gamma_phi + N_2)
//!
//! The `theta^2` shape is `n + 1` by default (see [`ThetaShapeMode`]); the
//! joint-distribution validator in [`crate::geweke`] certifies the choice.

use std::path::{Path, PathBuf};

use nalgebra::{DMatrix, DVector};
use rand::Rng;

use crate::dist::{
    sample_beta, sample_gamma, sample_inverse_gamma, sample_inverse_gaussian,
    sample_mvn_precision, InverseGaussianParams,
};
use crate::error::{Error, Result};
use crate::io::{write_checkpoint, ChainCheckpoint};
use crate::model::{
    Component, Dataset, GibbsConfig, GibbsState, PosteriorDraws, PriorHyperparams, ThetaShapeMode,
};

/// Residuals smaller than this are clamped before forming the
/// inverse-Gaussian mean, which would otherwise be infinite.
pub const RESIDUAL_CLAMP: f64 = 1e-10;

/// Floor applied to the squared residuals used as initial latent variances.
const INITIAL_SIGMA_SQ_FLOOR: f64 = 1e-4;

/// Gamma parameters (shape, rate) of the `theta^2` full conditional.
pub fn theta_sq_conditional(
    n: usize,
    sum_sigma_sq: f64,
    theta_rate: f64,
    mode: ThetaShapeMode,
) -> (f64, f64) {
    let shape = match mode {
        ThetaShapeMode::Derived => n as f64 + 1.0,
        ThetaShapeMode::PaperLiteral => n as f64 / 2.0 + 1.0,
    };
    (shape, theta_rate + 0.5 * sum_sigma_sq)
}

/// Inverse-Gaussian parameters of the `sigma_i^-2` full conditional given
/// the current rate parameter and the observation residual.
pub fn sigma_inv_sq_conditional(theta_sq: f64, residual: f64) -> InverseGaussianParams {
    let theta = theta_sq.sqrt();
    let r = residual.abs().max(RESIDUAL_CLAMP);
    InverseGaussianParams {
        shape: theta_sq,
        mean: theta / r,
    }
}

/// Inverse-Gamma parameters (shape, scale) of the `delta_k^2` conditional.
pub fn delta_sq_conditional(alpha: f64, gamma: f64, count: usize, sum_sq: f64) -> (f64, f64) {
    (alpha + count as f64 / 2.0, gamma + 0.5 * sum_sq)
}

/// Beta parameters of the mixing-fraction conditional.
pub fn phi_conditional(hyper: &PriorHyperparams, n_large: usize, n_small: usize) -> (f64, f64) {
    (
        hyper.alpha_phi + n_large as f64,
        hyper.gamma_phi + n_small as f64,
    )
}

/// Probability that coordinate `j` belongs to the large-variance component,
/// computed in log space so that huge `beta_j^2 / delta^2` ratios saturate
/// to 0/1 instead of overflowing.
pub fn large_component_probability(beta_j: f64, phi_frac: f64, delta_sq: [f64; 2]) -> f64 {
    let lw1 = phi_frac.ln() - 0.5 * delta_sq[0].ln() - beta_j * beta_j / (2.0 * delta_sq[0]);
    let lw2 =
        (1.0 - phi_frac).ln() - 0.5 * delta_sq[1].ln() - beta_j * beta_j / (2.0 * delta_sq[1]);
    1.0 / (1.0 + (lw2 - lw1).exp())
}

/// The full-conditional updates over a fixed design.
///
/// The kernel caches `X`, its transpose, and the sweep workspace; the
/// response vector is passed per call so that validators can regenerate
/// data against the same design without rebuilding the kernel.
pub struct GibbsKernel {
    hyper: PriorHyperparams,
    theta_shape: ThetaShapeMode,
    x: DMatrix<f64>,
    xt: DMatrix<f64>,
    // workspace reused across sweeps
    xt_w: DMatrix<f64>,
    precision: DMatrix<f64>,
    linear: DVector<f64>,
    residuals: DVector<f64>,
}

impl GibbsKernel {
    pub fn new(x: &DMatrix<f64>, hyper: PriorHyperparams, theta_shape: ThetaShapeMode) -> Self {
        let (n, p) = (x.nrows(), x.ncols());
        GibbsKernel {
            hyper,
            theta_shape,
            x: x.clone(),
            xt: x.transpose(),
            xt_w: DMatrix::zeros(p, n),
            precision: DMatrix::zeros(p, p),
            linear: DVector::zeros(p),
            residuals: DVector::zeros(n),
        }
    }

    pub fn n(&self) -> usize {
        self.x.nrows()
    }

    pub fn p(&self) -> usize {
        self.x.ncols()
    }

    pub fn hyper(&self) -> &PriorHyperparams {
        &self.hyper
    }

    pub fn update_theta_sq<R: Rng + ?Sized>(&self, state: &mut GibbsState, rng: &mut R) -> Result<()> {
        let sum: f64 = state.sigma_sq.iter().sum();
        let (shape, rate) =
            theta_sq_conditional(state.n(), sum, self.hyper.theta_rate, self.theta_shape);
        state.theta_sq = sample_gamma(shape, rate, rng)?;
        Ok(())
    }

    pub fn update_sigma_sq<R: Rng + ?Sized>(
        &mut self,
        y: &DVector<f64>,
        state: &mut GibbsState,
        rng: &mut R,
    ) {
        self.compute_residuals(y, &state.beta);
        for i in 0..state.n() {
            let params = sigma_inv_sq_conditional(state.theta_sq, self.residuals[i]);
            let precision = sample_inverse_gaussian(params, rng);
            state.sigma_sq[i] = 1.0 / precision;
        }
    }

    pub fn update_beta<R: Rng + ?Sized>(
        &mut self,
        y: &DVector<f64>,
        state: &mut GibbsState,
        rng: &mut R,
    ) -> Result<()> {
        self.build_beta_conditional(y, state);
        let draw = sample_mvn_precision(&self.precision, &self.linear, rng)?;
        state.beta.copy_from_slice(draw.as_slice());
        Ok(())
    }

    /// The precision matrix `A = X' Gamma^{-1} X + V^{-1}` and linear term
    /// `c = X' Gamma^{-1} y` of the coefficient block's full conditional
    /// `N(A^{-1} c, A^{-1})`.
    pub fn beta_conditional(
        &mut self,
        y: &DVector<f64>,
        state: &GibbsState,
    ) -> (DMatrix<f64>, DVector<f64>) {
        self.build_beta_conditional(y, state);
        (self.precision.clone(), self.linear.clone())
    }

    fn build_beta_conditional(&mut self, y: &DVector<f64>, state: &GibbsState) {
        let p = self.p();
        // X' Gamma^{-1} as X^T with columns scaled by 1/sigma_i^2
        self.xt_w.copy_from(&self.xt);
        for (i, mut col) in self.xt_w.column_iter_mut().enumerate() {
            col *= 1.0 / state.sigma_sq[i];
        }
        self.precision.gemm(1.0, &self.xt_w, &self.x, 0.0);
        for j in 0..p {
            self.precision[(j, j)] += 1.0 / state.delta_sq[state.labels[j].idx()];
        }
        self.linear.gemv(1.0, &self.xt_w, y, 0.0);
    }

    pub fn update_labels<R: Rng + ?Sized>(&self, state: &mut GibbsState, rng: &mut R) {
        for j in 0..state.p() {
            let p_large = large_component_probability(state.beta[j], state.phi_frac, state.delta_sq);
            let u: f64 = rng.random();
            state.labels[j] = if u < p_large {
                Component::Large
            } else {
                Component::Small
            };
        }
    }

    pub fn update_delta_sq<R: Rng + ?Sized>(&self, state: &mut GibbsState, rng: &mut R) -> Result<()> {
        for component in [Component::Large, Component::Small] {
            let mut count = 0usize;
            let mut sum_sq = 0.0;
            for (j, label) in state.labels.iter().enumerate() {
                if *label == component {
                    count += 1;
                    sum_sq += state.beta[j] * state.beta[j];
                }
            }
            let (shape, scale) = delta_sq_conditional(
                self.hyper.alpha(component),
                self.hyper.gamma(component),
                count,
                sum_sq,
            );
            state.delta_sq[component.idx()] = sample_inverse_gamma(shape, scale, rng)?;
        }
        Ok(())
    }

    pub fn update_phi<R: Rng + ?Sized>(&self, state: &mut GibbsState, rng: &mut R) -> Result<()> {
        let n_large = state.group_count(Component::Large);
        let (a, g) = phi_conditional(&self.hyper, n_large, state.p() - n_large);
        state.phi_frac = sample_beta(a, g, rng)?;
        Ok(())
    }

    /// One full sweep in the fixed scan order.
    pub fn sweep<R: Rng + ?Sized>(
        &mut self,
        y: &DVector<f64>,
        state: &mut GibbsState,
        rng: &mut R,
    ) -> Result<()> {
        self.update_theta_sq(state, rng)?;
        self.update_sigma_sq(y, state, rng);
        self.update_beta(y, state, rng)?;
        self.update_labels(state, rng);
        self.update_delta_sq(state, rng)?;
        self.update_phi(state, rng)?;
        Ok(())
    }

    /// Deterministic starting point: ridge coefficients, residual-based
    /// latent variances, and hyperparameters at their prior centers. The
    /// `ceil(E(phi))` coordinates with the largest |beta| start in the
    /// large component.
    pub fn initial_state(&self, y: &DVector<f64>) -> Result<GibbsState> {
        let (n, p) = (self.n(), self.p());
        let mut gram = &self.xt * &self.x;
        for j in 0..p {
            gram[(j, j)] += 1.0;
        }
        let chol = nalgebra::Cholesky::new(gram)
            .ok_or_else(|| Error::Conditioning { attempted: vec![] })?;
        let beta = chol.solve(&(&self.xt * y));

        let mut residuals = y.clone();
        residuals.gemv(-1.0, &self.x, &beta, 1.0);
        let sigma_sq: Vec<f64> = residuals
            .iter()
            .map(|r| (r * r).max(INITIAL_SIGMA_SQ_FLOOR))
            .collect();

        let phi_frac = self.hyper.mean_phi_frac();
        let delta_sq = [
            prior_center(self.hyper.alpha1, self.hyper.gamma1),
            prior_center(self.hyper.alpha2, self.hyper.gamma2),
        ];

        let n_large = ((p as f64 * phi_frac).ceil() as usize).clamp(0, p);
        let mut order: Vec<usize> = (0..p).collect();
        order.sort_by(|a, b| beta[*b].abs().partial_cmp(&beta[*a].abs()).unwrap());
        let mut labels = vec![Component::Small; p];
        for &j in order.iter().take(n_large) {
            labels[j] = Component::Large;
        }

        let state = GibbsState {
            beta: beta.as_slice().to_vec(),
            labels,
            sigma_sq,
            theta_sq: 1.0,
            delta_sq,
            phi_frac,
        };
        debug_assert_eq!(state.n(), n);
        state.validate()?;
        Ok(state)
    }

    fn compute_residuals(&mut self, y: &DVector<f64>, beta: &[f64]) {
        self.residuals.copy_from(y);
        let beta = DVector::from_column_slice(beta);
        self.residuals.gemv(-1.0, &self.x, &beta, 1.0);
    }
}

/// Inverse-Gamma prior center used for initialization: the mean when it
/// exists, otherwise the mode.
fn prior_center(alpha: f64, gamma: f64) -> f64 {
    if alpha > 1.0 {
        gamma / (alpha - 1.0)
    } else {
        gamma / (alpha + 1.0)
    }
}

/// Side effects of a chain run: periodic checkpoints and an optional
/// per-sweep trace log.
#[derive(Debug, Default, Clone)]
pub struct ChainOptions {
    /// Write a checkpoint to the path every `usize` completed sweeps.
    pub checkpoint: Option<(PathBuf, usize)>,
    /// Append every sweep (scalars plus the coefficient vector) to a CSV.
    pub draw_log: Option<PathBuf>,
}

/// Run the chain: initialize, sweep `config.iterations` times, retain the
/// post-burn-in thinned states, and reduce them.
pub fn run_chain(
    dataset: &Dataset,
    hyper: &PriorHyperparams,
    config: &GibbsConfig,
) -> Result<PosteriorDraws> {
    run_chain_with(dataset, hyper, config, &ChainOptions::default(), None)
}

/// Resume a checkpointed chain. The dataset and hyperparameters must be
/// the ones the checkpoint was created under; the config is taken from the
/// checkpoint itself.
pub fn resume_chain(
    dataset: &Dataset,
    hyper: &PriorHyperparams,
    checkpoint: ChainCheckpoint,
    options: &ChainOptions,
) -> Result<PosteriorDraws> {
    let config = checkpoint.config;
    run_chain_with(dataset, hyper, &config, options, Some(checkpoint))
}

pub fn run_chain_with(
    dataset: &Dataset,
    hyper: &PriorHyperparams,
    config: &GibbsConfig,
    options: &ChainOptions,
    resume: Option<ChainCheckpoint>,
) -> Result<PosteriorDraws> {
    hyper.validate()?;
    let mut kernel = GibbsKernel::new(dataset.x(), *hyper, config.theta_shape);
    let y = dataset.y();

    let (mut state, mut retained, start, mut rng) = match resume {
        Some(ck) => {
            if ck.config != *config {
                return Err(Error::Checkpoint(
                    "checkpoint configuration does not match the requested run".into(),
                ));
            }
            if ck.state.n() != dataset.n() || ck.state.p() != dataset.p() {
                return Err(Error::Checkpoint(format!(
                    "checkpoint is for a {}x{} problem, dataset is {}x{}",
                    ck.state.n(),
                    ck.state.p(),
                    dataset.n(),
                    dataset.p()
                )));
            }
            let rng = config.stream.rng_at(ck.rng_word_pos);
            (ck.state, ck.retained, ck.completed, rng)
        }
        None => {
            let state = kernel.initial_state(y)?;
            (state, Vec::with_capacity(config.retained_count()), 0, config.stream.rng())
        }
    };

    let mut trace = match &options.draw_log {
        Some(path) => Some(TraceLog::open(path, dataset.p(), start > 0)?),
        None => None,
    };

    for iteration in (start + 1)..=config.iterations {
        kernel
            .sweep(y, &mut state, &mut rng)
            .map_err(|e| Error::Chain {
                iteration,
                source: Box::new(e),
            })?;
        debug_assert!(state.validate().is_ok());
        if config.retains(iteration) {
            retained.push(state.clone());
        }
        if let Some(t) = &mut trace {
            t.record(iteration, &state)?;
        }
        if let Some((path, every)) = &options.checkpoint {
            if *every > 0 && iteration % every == 0 && iteration < config.iterations {
                let ck = ChainCheckpoint {
                    config: *config,
                    completed: iteration,
                    rng_word_pos: rng.get_word_pos(),
                    state: state.clone(),
                    retained: retained.clone(),
                };
                write_checkpoint(path, &ck)?;
            }
        }
    }

    PosteriorDraws::from_states(*config, retained)
}

struct TraceLog {
    writer: csv::Writer<std::fs::File>,
    path: PathBuf,
}

impl TraceLog {
    fn open(path: &Path, p: usize, append: bool) -> Result<Self> {
        let file = std::fs::OpenOptions::new()
            .create(true)
            .append(append)
            .write(true)
            .truncate(!append)
            .open(path)
            .map_err(|e| Error::io(path, e))?;
        let mut writer = csv::WriterBuilder::new().from_writer(file);
        if !append {
            let mut header = vec![
                "iteration".to_string(),
                "theta_sq".to_string(),
                "delta1_sq".to_string(),
                "delta2_sq".to_string(),
                "phi_frac".to_string(),
                "n_large".to_string(),
            ];
            for j in 1..=p {
                header.push(format!("beta{j}"));
            }
            writer
                .write_record(&header)
                .map_err(|e| Error::parse(path, e.to_string()))?;
        }
        Ok(TraceLog {
            writer,
            path: path.to_path_buf(),
        })
    }

    fn record(&mut self, iteration: usize, state: &GibbsState) -> Result<()> {
        let mut row = Vec::with_capacity(6 + state.p());
        row.push(iteration.to_string());
        row.push(state.theta_sq.to_string());
        row.push(state.delta_sq[0].to_string());
        row.push(state.delta_sq[1].to_string());
        row.push(state.phi_frac.to_string());
        row.push(state.group_count(Component::Large).to_string());
        for b in &state.beta {
            row.push(b.to_string());
        }
        self.writer
            .write_record(&row)
            .map_err(|e| Error::parse(&self.path, e.to_string()))?;
        self.writer
            .flush()
            .map_err(|e| Error::io(&self.path, e))?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::RngStream;
    use approx::assert_relative_eq;

    #[test]
    fn theta_conditional_reduces_to_prior_without_data() {
        // no observations: Gamma(1, theta_rate) is the Exp(theta_rate) prior
        let (shape, rate) = theta_sq_conditional(0, 0.0, 1.0, ThetaShapeMode::Derived);
        assert_eq!((shape, rate), (1.0, 1.0));
        let mut rng = RngStream::new(1, 0).rng();
        let n = 50_000;
        let mean = (0..n)
            .map(|_| sample_gamma(shape, rate, &mut rng).unwrap())
            .sum::<f64>()
            / n as f64;
        // Exp(1): mean 1, sd 1
        assert!((mean - 1.0).abs() < 3.0 / (n as f64).sqrt());
    }

    #[test]
    fn theta_conditional_shapes() {
        let (s, r) = theta_sq_conditional(10, 20.0, 1.0, ThetaShapeMode::Derived);
        assert_eq!((s, r), (11.0, 11.0));
        let (s, _) = theta_sq_conditional(10, 20.0, 1.0, ThetaShapeMode::PaperLiteral);
        assert_eq!(s, 6.0);
    }

    #[test]
    fn sigma_conditional_parameters_and_clamp() {
        let p = sigma_inv_sq_conditional(4.0, 0.5);
        assert_relative_eq!(p.shape, 4.0);
        assert_relative_eq!(p.mean, 4.0); // theta/|r| = 2/0.5
        let clamped = sigma_inv_sq_conditional(1.0, 0.0);
        assert!(clamped.mean.is_finite());
        assert_relative_eq!(clamped.mean, 1.0 / RESIDUAL_CLAMP);
        let mut rng = RngStream::new(2, 0).rng();
        let draw = sample_inverse_gaussian(clamped, &mut rng);
        assert!(draw.is_finite() && draw > 0.0);
    }

    #[test]
    fn label_probability_hand_case() {
        // beta=0, delta1=2 (variance 4), delta2=1, phi=1/2:
        // weights (1/2)(1/2)phi(0) and (1/2)(1)phi(0)  =>  P(large) = 1/3
        let p = large_component_probability(0.0, 0.5, [4.0, 1.0]);
        assert_relative_eq!(p, 1.0 / 3.0, epsilon = 1e-12);
    }

    #[test]
    fn label_probability_identical_components_and_tail() {
        for beta in [-3.0, 0.0, 0.7, 42.0] {
            let p = large_component_probability(beta, 0.3, [0.5, 0.5]);
            assert_relative_eq!(p, 0.3, epsilon = 1e-12);
        }
        // a coefficient far out in the tail must land in the wide component
        let p = large_component_probability(50.0, 0.1, [4.0, 1.0]);
        assert!(p > 1.0 - 1e-9);
    }

    #[test]
    fn label_probability_log_space_stability() {
        // extreme ratios: |beta| up to 1e3 with delta2^2 down to 1e-10
        let p = large_component_probability(1e3, 0.5, [1.0, 1e-10]);
        assert!(p.is_finite());
        assert!(p > 1.0 - 1e-12);
        let q = large_component_probability(1e3, 1e-9, [1e-10, 1.0]);
        assert!(q.is_finite());
        assert!(q < 1e-12);
        let r = large_component_probability(0.0, 0.5, [1e-10, 1e-10]);
        assert_relative_eq!(r, 0.5, epsilon = 1e-12);
    }

    #[test]
    fn delta_conditional_parameters() {
        // one member with beta^2 = 2 under (alpha, gamma) = (2, 1):
        // InvGamma(2.5, 2), mean 2/1.5 = 4/3
        let (shape, scale) = delta_sq_conditional(2.0, 1.0, 1, 2.0);
        assert_eq!((shape, scale), (2.5, 2.0));
        assert_relative_eq!(scale / (shape - 1.0), 4.0 / 3.0, epsilon = 1e-12);
        // empty group: the prior
        let (shape, scale) = delta_sq_conditional(2.0, 0.25, 0, 0.0);
        assert_eq!((shape, scale), (2.0, 0.25));
    }

    #[test]
    fn phi_conditional_parameters() {
        let hyper = PriorHyperparams::new(2.0, 1.0, 2.0, 1.0, 1.0, 1.0, 1.0).unwrap();
        assert_eq!(phi_conditional(&hyper, 3, 1), (4.0, 2.0));
        // p = 0 kernel case: the prior itself (here uniform)
        assert_eq!(phi_conditional(&hyper, 0, 0), (1.0, 1.0));
    }

    #[test]
    fn initial_state_satisfies_invariants() {
        let mut rng = RngStream::new(3, 1).rng();
        let x = DMatrix::from_fn(30, 4, |_, _| {
            rand_distr::Distribution::sample(&rand_distr::StandardNormal, &mut rng)
        });
        let y = DVector::from_fn(30, |i, _| (i as f64 * 0.1).sin());
        let hyper = PriorHyperparams::scaled(30, 0.2).unwrap();
        let kernel = GibbsKernel::new(&x, hyper, ThetaShapeMode::Derived);
        let state = kernel.initial_state(&y).unwrap();
        state.validate().unwrap();
        let expected_large = (4.0 * hyper.mean_phi_frac()).ceil() as usize;
        assert_eq!(state.group_count(Component::Large), expected_large);
        assert_eq!(state.theta_sq, 1.0);
    }
}
