//! Bayesian estimation of the individual rate of aging (the Gompertz slope)
//! from cohort death counts.
//!
//! Deaths are Poisson with a gamma-Gompertz marginal hazard per cohort, and the
//! log slope of each cohort follows a random walk with drift and Laplace
//! innovations. The crate provides the model densities, an adaptive
//! Metropolis-within-Gibbs sampler with convergence diagnostics, posterior
//! summaries (modes, HPD intervals, direction and MAP indices, minimum
//! detectable drift), posterior predictive QQ checks, ADF/KPSS pre-tests,
//! Human Mortality Database readers and a data simulator.

pub mod error;
pub mod gg_model;
pub mod hmd;
pub mod latent;
pub mod mcmc;
pub mod posterior;
pub mod ppc;
pub mod simulate;
pub mod stationarity;
pub mod summary;

pub use error::{Error, Result};
pub use gg_model::{cohort_hazard, expected_deaths, individual_hazard, AgeGrid, GompertzCohortParams};
pub use latent::{laplace_logpdf, reconstruct, walk_logprior, LatentWalk, SlopeSeries};
pub use mcmc::{effective_sample_size, run_chains, split_rhat, PosteriorDraws, SamplerConfig};
pub use posterior::{log_likelihood, log_posterior, log_prior, CohortDataset, ModelParameters, PriorConfig, Sex};
pub use simulate::{generate_dataset, TruthScenario};
