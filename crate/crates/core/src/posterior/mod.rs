//! Poisson likelihood of the death counts and the prior stack.

mod dataset;
mod priors;

pub use dataset::{CohortDataset, Sex};
pub(crate) use dataset::ObservedCell;
pub use priors::{half_normal_logpdf, normal_logpdf, GammaReading, NormalReading, PriorConfig};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gg_model::hazard_midpoints;
use crate::latent::{walk_logprior, LatentWalk};

/// One point of the parameter space on the constrained scale.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelParameters {
    pub a: Vec<f64>,
    pub gamma: Vec<f64>,
    pub walk: LatentWalk,
}

impl ModelParameters {
    pub fn n_cohorts(&self) -> usize {
        self.a.len()
    }

    pub fn validate(&self) -> Result<()> {
        let t = self.a.len();
        if self.gamma.len() != t || self.walk.w.len() != t {
            return Err(Error::Argument(format!(
                "parameter lengths differ: a={}, gamma={}, w={}",
                t,
                self.gamma.len(),
                self.walk.w.len()
            )));
        }
        if self.a.iter().chain(&self.gamma).any(|v| !(*v > 0.0) || !v.is_finite()) {
            return Err(Error::Domain("a_t and gamma_t must be finite and > 0".into()));
        }
        self.walk.validate()?;
        if self.walk.log_slopes().iter().any(|l| !l.exp().is_finite()) {
            return Err(Error::Domain("slope b_t overflowed".into()));
        }
        Ok(())
    }

    /// Per-cohort slopes `b_t`.
    pub fn slopes(&self) -> Vec<f64> {
        self.walk.log_slopes().into_iter().map(f64::exp).collect()
    }
}

/// Poisson log-pmf summed over the observed cells of one cohort.
///
/// `scratch` must hold exactly `2 * n_ages` values.
#[inline]
pub(crate) fn cohort_cells_loglik(
    cells: &[ObservedCell],
    a: f64,
    b: f64,
    gamma: f64,
    scratch: &mut [f64],
) -> f64 {
    let (h, ln_h) = scratch.split_at_mut(scratch.len() / 2);
    hazard_midpoints(a, b, gamma, h, ln_h);
    let mut ll = 0.0;
    for c in cells {
        let mu = h[c.age] * c.exposure;
        if c.deaths == 0.0 {
            ll -= mu;
        } else {
            ll += c.deaths * (ln_h[c.age] + c.ln_exposure) - mu - c.ln_factorial;
        }
    }
    if ll.is_nan() {
        f64::NEG_INFINITY
    } else {
        ll
    }
}

fn check_shapes(params: &ModelParameters, data: &CohortDataset) -> Result<()> {
    params.validate()?;
    if params.n_cohorts() != data.n_cohorts() {
        return Err(Error::Argument(format!(
            "{} cohorts in parameters, {} in data",
            params.n_cohorts(),
            data.n_cohorts()
        )));
    }
    Ok(())
}

/// Log-likelihood contribution of cohort `t`.
pub fn cohort_log_likelihood(params: &ModelParameters, data: &CohortDataset, t: usize) -> Result<f64> {
    check_shapes(params, data)?;
    if t >= data.n_cohorts() {
        return Err(Error::Argument(format!("cohort index {t} out of range")));
    }
    let ln_b = params.walk.log_slopes()[t];
    let mut scratch = vec![0.0; 2 * data.n_ages()];
    Ok(cohort_cells_loglik(
        data.cohort_cells(t),
        params.a[t],
        ln_b.exp(),
        params.gamma[t],
        &mut scratch,
    ))
}

/// Sum of Poisson log-pmfs (including `-log D!`) over every observed cell.
pub fn log_likelihood(params: &ModelParameters, data: &CohortDataset) -> Result<f64> {
    check_shapes(params, data)?;
    let mut scratch = vec![0.0; 2 * data.n_ages()];
    let ll = params
        .walk
        .log_slopes()
        .iter()
        .enumerate()
        .map(|(t, ln_b)| {
            cohort_cells_loglik(
                data.cohort_cells(t),
                params.a[t],
                ln_b.exp(),
                params.gamma[t],
                &mut scratch,
            )
        })
        .sum();
    Ok(ll)
}

/// Log prior density over the constrained parameters; `-inf` outside the support.
pub fn log_prior(params: &ModelParameters, priors: &PriorConfig) -> f64 {
    let walk = &params.walk;
    if !(walk.sigma_rw > 0.0) || params.a.iter().any(|a| !(*a > 0.0)) || params.gamma.iter().any(|g| !(*g > 0.0))
    {
        return f64::NEG_INFINITY;
    }
    let a: f64 = params.a.iter().map(|&a| priors.ln_a(a)).sum();
    let g: f64 = params.gamma.iter().map(|&g| priors.ln_gamma_t(g)).sum();
    a + g
        + priors.ln_log_b(walk.log_b)
        + priors.ln_beta(walk.beta)
        + priors.ln_sigma_rw(walk.sigma_rw)
        + walk_logprior(walk)
}

pub fn log_posterior(params: &ModelParameters, data: &CohortDataset, priors: &PriorConfig) -> Result<f64> {
    let lp = log_prior(params, priors);
    if lp == f64::NEG_INFINITY || lp.is_nan() {
        return Ok(f64::NEG_INFINITY);
    }
    Ok(lp + log_likelihood(params, data)?)
}
