//! Adaptive Metropolis-within-Gibbs sampling of the cohort model and
//! convergence diagnostics.

pub mod adapt;
pub mod diagnostics;
mod draws;
pub mod generic;
mod kernel;

pub use diagnostics::{effective_sample_size, split_rhat, Diagnostic};
pub use draws::{ChainAcceptance, PosteriorDraws};
pub use kernel::run_chains;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SamplerConfig {
    pub n_chains: usize,
    pub n_iter: usize,
    pub n_warmup: usize,
    pub seed: u64,
    /// Acceptance target for scalar random-walk updates.
    pub target_accept: f64,
    /// Acceptance target for the multivariate block updates.
    pub block_target_accept: f64,
    /// Sweeps over the per-cohort blocks within one iteration, proposing on
    /// the natural scale of frailty variance and slope.
    pub cohort_sweeps_per_iter: usize,
    /// Extra sweeps proposing on the log scale, frailty and slope separately.
    pub log_cohort_sweeps_per_iter: usize,
    /// `(log_b, beta)` moves that shift every slope, per iteration.
    pub trend_moves_per_iter: usize,
    /// Repetitions per iteration of the cheap (log_b, beta) and sigma_rw updates.
    pub walk_moves_per_iter: usize,
    /// Jittered restarts tried before giving up on initialisation.
    pub init_retries: usize,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        Self {
            n_chains: 4,
            n_iter: 6000,
            n_warmup: 4000,
            seed: 2026,
            target_accept: 0.44,
            block_target_accept: 0.3,
            cohort_sweeps_per_iter: 3,
            log_cohort_sweeps_per_iter: 1,
            trend_moves_per_iter: 1,
            walk_moves_per_iter: 4,
            init_retries: 100,
        }
    }
}

impl SamplerConfig {
    pub fn validate(&self) -> Result<(), String> {
        if self.n_chains < 2 {
            return Err(format!("sampler.n_chains must be >= 2, got {}", self.n_chains));
        }
        if self.n_warmup >= self.n_iter {
            return Err(format!(
                "sampler.n_warmup ({}) must be smaller than sampler.n_iter ({})",
                self.n_warmup, self.n_iter
            ));
        }
        if self.n_iter - self.n_warmup < 4 {
            return Err("sampler must retain at least 4 draws per chain".into());
        }
        for (name, v) in [("target_accept", self.target_accept), ("block_target_accept", self.block_target_accept)] {
            if !(v > 0.0 && v < 1.0) {
                return Err(format!("sampler.{name} must lie in (0, 1), got {v}"));
            }
        }
        if self.cohort_sweeps_per_iter == 0 {
            return Err("sampler.cohort_sweeps_per_iter must be >= 1".into());
        }
        if self.walk_moves_per_iter == 0 {
            return Err("sampler.walk_moves_per_iter must be >= 1".into());
        }
        Ok(())
    }

    pub fn retained_per_chain(&self) -> usize {
        self.n_iter - self.n_warmup
    }
}
