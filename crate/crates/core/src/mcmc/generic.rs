//! Component-wise adaptive Metropolis for an arbitrary log density on R^d.
//!
//! Used for small targets with known answers (conjugate models, quadrature
//! checks); the cohort model has its own structured kernel.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::adapt::ScaleAdapter;
use super::SamplerConfig;
use crate::error::{Error, Result};

/// Draws after warm-up, indexed `[chain][draw][coordinate]`.
pub type GenericDraws = Vec<Vec<Vec<f64>>>;

pub fn sample_componentwise<F>(log_density: F, init: &[f64], cfg: &SamplerConfig) -> Result<GenericDraws>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    cfg.validate().map_err(Error::Argument)?;
    if !log_density(init).is_finite() {
        return Err(Error::Initialization("log density is not finite at the initial point".into()));
    }
    let run = |chain: usize| -> GenericDraws {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        rng.set_stream(chain as u64);
        let mut x = init.to_vec();
        let mut lp = log_density(&x);
        let mut adapters: Vec<ScaleAdapter> = init.iter().map(|_| ScaleAdapter::new(0.5, cfg.target_accept)).collect();
        let mut out = Vec::with_capacity(cfg.n_iter - cfg.n_warmup);
        for iter in 0..cfg.n_iter {
            for (j, adapter) in adapters.iter_mut().enumerate() {
                let old = x[j];
                x[j] = old + adapter.propose(&mut rng);
                let lp_new = log_density(&x);
                let accept = lp_new.is_finite() && rng.random::<f64>().ln() < lp_new - lp;
                if accept {
                    lp = lp_new;
                } else {
                    x[j] = old;
                }
                if iter < cfg.n_warmup {
                    adapter.adapt(accept);
                }
            }
            if iter + 1 == cfg.n_warmup {
                adapters.iter_mut().for_each(ScaleAdapter::freeze);
            }
            if iter >= cfg.n_warmup {
                out.push(x.clone());
            }
        }
        vec![out]
    };
    Ok((0..cfg.n_chains).flat_map(run).collect())
}
