//! Random walk with drift on the log Gompertz slope, parameterised by its increments.
//!
//! `X_0 = 0`, `X_t = X_{t-1} + beta + w_t` and `log b_t = log_b + X_t` for the
//! observed cohorts `t = 1..=T`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const LN_2: f64 = std::f64::consts::LN_2;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LatentWalk {
    pub log_b: f64,
    pub beta: f64,
    /// Laplace scale of the innovations.
    pub sigma_rw: f64,
    /// One innovation per observed cohort.
    pub w: Vec<f64>,
}

impl LatentWalk {
    pub fn new(log_b: f64, beta: f64, sigma_rw: f64, w: Vec<f64>) -> Result<Self> {
        let walk = Self { log_b, beta, sigma_rw, w };
        walk.validate()?;
        Ok(walk)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.sigma_rw > 0.0) || !self.sigma_rw.is_finite() {
            return Err(Error::Domain(format!("sigma_rw must be > 0, got {}", self.sigma_rw)));
        }
        if !self.log_b.is_finite() || !self.beta.is_finite() || self.w.iter().any(|w| !w.is_finite()) {
            return Err(Error::Domain("latent walk has non-finite entries".into()));
        }
        Ok(())
    }

    pub fn n_cohorts(&self) -> usize {
        self.w.len()
    }

    /// Accumulated period effects `X_1..X_T`.
    pub fn states(&self) -> Vec<f64> {
        self.w
            .iter()
            .scan(0.0, |x, w| {
                *x += self.beta + w;
                Some(*x)
            })
            .collect()
    }

    /// `log b_t` for every cohort.
    pub fn log_slopes(&self) -> Vec<f64> {
        self.states().into_iter().map(|x| self.log_b + x).collect()
    }
}

/// Per-cohort slopes and the period effects behind them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlopeSeries {
    pub cohorts: Vec<i32>,
    pub x: Vec<f64>,
    pub b: Vec<f64>,
}

pub fn reconstruct(lw: &LatentWalk, cohorts: &[i32]) -> Result<SlopeSeries> {
    if cohorts.len() != lw.w.len() {
        return Err(Error::Argument(format!(
            "{} cohort labels for {} innovations",
            cohorts.len(),
            lw.w.len()
        )));
    }
    let x = lw.states();
    let b = x.iter().map(|x| (lw.log_b + x).exp()).collect();
    Ok(SlopeSeries { cohorts: cohorts.to_vec(), x, b })
}

pub fn laplace_logpdf(x: f64, mu: f64, scale: f64) -> Result<f64> {
    if !(scale > 0.0) {
        return Err(Error::Domain(format!("Laplace scale must be > 0, got {scale}")));
    }
    Ok(laplace_logpdf_unchecked(x, mu, scale))
}

#[inline]
pub(crate) fn laplace_logpdf_unchecked(x: f64, mu: f64, scale: f64) -> f64 {
    -(LN_2 + scale.ln()) - (x - mu).abs() / scale
}

/// Log density of the innovations given `sigma_rw`.
pub fn walk_logprior(lw: &LatentWalk) -> f64 {
    if !(lw.sigma_rw > 0.0) {
        return f64::NEG_INFINITY;
    }
    innovations_logprior(&lw.w, lw.sigma_rw)
}

#[inline]
pub(crate) fn innovations_logprior(w: &[f64], sigma: f64) -> f64 {
    let n = w.len() as f64;
    let abs_sum: f64 = w.iter().map(|w| w.abs()).sum();
    -n * (LN_2 + sigma.ln()) - abs_sum / sigma
}
