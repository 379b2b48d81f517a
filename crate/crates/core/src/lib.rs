//! Hierarchical Bayesian estimation for robust linear regression when the
//! predictor count grows in proportion to the sample size, together with
//! the classical M-estimation baselines and a simulation benchmark
//! harness.
//!
//! The centerpiece is a blocked Gibbs sampler ([`gibbs`]) for a
//! two-component normal-mixture prior on the coefficients with Laplace
//! errors handled through their scale-mixture-of-normals representation.
//! [`baselines`] provides least squares, least absolute deviations, and
//! their l1/l2-penalized variants with cross-validated tuning; [`sim`]
//! generates data from the model; [`bench`] orchestrates paired
//! benchmark runs; [`geweke`] validates the sampler against the
//! joint-distribution ("getting it right") test.

pub mod baselines;
pub mod bench;
pub mod diagnostics;
pub mod dist;
pub mod error;
pub mod geweke;
pub mod gibbs;
pub mod io;
pub mod model;
pub mod rng;
pub mod sim;

pub use error::{Error, Result};
pub use model::{Dataset, GibbsConfig, GibbsState, PosteriorDraws, PriorHyperparams};
pub use rng::RngStream;
