//! Posterior predictive QQ checks on death counts.

use std::io::Write;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gg_model::hazard_midpoints;
use crate::mcmc::PosteriorDraws;
use crate::posterior::CohortDataset;
use crate::simulate::poisson_draw;

/// How the replicated order statistics are collapsed into one curve.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum QqCurve {
    #[default]
    Mean,
    Median,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct QqConfig {
    /// Replicated datasets, each from its own posterior draw.
    pub n_rep: usize,
    pub curve: QqCurve,
    /// Pointwise mass of the replicate envelope.
    pub envelope_mass: f64,
    pub seed: u64,
}

impl Default for QqConfig {
    fn default() -> Self {
        Self { n_rep: 500, curve: QqCurve::Mean, envelope_mass: 0.95, seed: 2026 }
    }
}

/// Observed and predicted quantiles of the death counts at plotting positions
/// `(k - 0.5) / n`, with a pointwise envelope from the replicate spread.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QqSeries {
    pub label: String,
    pub levels: Vec<f64>,
    pub observed: Vec<f64>,
    pub predicted: Vec<f64>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl QqSeries {
    /// Share of levels whose observed quantile lies inside the envelope.
    pub fn envelope_coverage(&self) -> f64 {
        let inside = self
            .observed
            .iter()
            .zip(self.lower.iter().zip(&self.upper))
            .filter(|(o, (l, u))| *l <= *o && *o <= *u)
            .count();
        inside as f64 / self.levels.len() as f64
    }

    pub fn max_abs_gap(&self) -> f64 {
        self.observed.iter().zip(&self.predicted).map(|(o, p)| (o - p).abs()).fold(0.0, f64::max)
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["label", "level", "observed", "predicted", "lower", "upper"])?;
        for i in 0..self.levels.len() {
            w.write_record([
                self.label.clone(),
                format!("{:.6}", self.levels[i]),
                self.observed[i].to_string(),
                format!("{:.4}", self.predicted[i]),
                self.lower[i].to_string(),
                self.upper[i].to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

fn order_stat(sorted: &[f64], q: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * q;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Replicates the observed cells under `n_rep` evenly spaced posterior draws
/// and compares sorted observed counts with the replicated order statistics.
pub fn posterior_predictive_qq(draws: &PosteriorDraws, data: &CohortDataset, cfg: &QqConfig) -> Result<QqSeries> {
    if cfg.n_rep < 100 {
        return Err(Error::Argument(format!("n_rep must be >= 100, got {}", cfg.n_rep)));
    }
    if !(cfg.envelope_mass > 0.0 && cfg.envelope_mass < 1.0) {
        return Err(Error::Argument(format!("envelope_mass must lie in (0, 1), got {}", cfg.envelope_mass)));
    }
    if data.n_observed() == 0 {
        return Err(Error::Argument("dataset has no observed cells".into()));
    }
    if draws.n_cohorts() != data.n_cohorts() {
        return Err(Error::Argument(format!(
            "draws cover {} cohorts, data {}",
            draws.n_cohorts(),
            data.n_cohorts()
        )));
    }
    let n_ages = data.n_ages();
    let cells: Vec<(usize, usize)> = (0..data.n_cohorts())
        .flat_map(|t| (0..n_ages).map(move |x| (t, x)))
        .filter(|&(t, x)| data.is_observed(t, x))
        .collect();
    let n = cells.len();

    let mut observed: Vec<f64> = cells.iter().map(|&(t, x)| data.deaths(t, x) as f64).collect();
    observed.sort_by(f64::total_cmp);

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let total = draws.total_draws();
    let (mut h, mut ln_h) = (vec![0.0; n_ages], vec![0.0; n_ages]);
    // reps[i] holds the i-th order statistic of every replicate
    let mut reps: Vec<Vec<f64>> = vec![Vec::with_capacity(cfg.n_rep); n];
    let mut rep = vec![0.0; n];
    for r in 0..cfg.n_rep {
        let k = (((r as f64 + 0.5) * total as f64 / cfg.n_rep as f64) as usize).min(total - 1);
        let p = draws.pooled_parameters(k);
        let slopes = p.slopes();
        let mut last_t = usize::MAX;
        for (slot, &(t, x)) in rep.iter_mut().zip(&cells) {
            if t != last_t {
                hazard_midpoints(p.a[t], slopes[t], p.gamma[t], &mut h, &mut ln_h);
                last_t = t;
            }
            *slot = poisson_draw(h[x] * data.exposure(t, x), &mut rng)? as f64;
        }
        rep.sort_by(f64::total_cmp);
        for (col, v) in reps.iter_mut().zip(&rep) {
            col.push(*v);
        }
    }

    let tail = 0.5 * (1.0 - cfg.envelope_mass);
    let mut predicted = Vec::with_capacity(n);
    let (mut lower, mut upper) = (Vec::with_capacity(n), Vec::with_capacity(n));
    for col in &mut reps {
        col.sort_by(f64::total_cmp);
        predicted.push(match cfg.curve {
            QqCurve::Mean => col.iter().sum::<f64>() / col.len() as f64,
            QqCurve::Median => order_stat(col, 0.5),
        });
        lower.push(order_stat(col, tail));
        upper.push(order_stat(col, 1.0 - tail));
    }
    let label = match data.sex() {
        Some(s) => format!("{} {s}", data.country()),
        None => data.country().to_string(),
    };
    Ok(QqSeries {
        label,
        levels: (0..n).map(|i| (i as f64 + 0.5) / n as f64).collect(),
        observed,
        predicted,
        lower,
        upper,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gg_model::AgeGrid;
    use crate::latent::LatentWalk;
    use crate::posterior::ModelParameters;
    use crate::simulate::{generate_dataset, TruthScenario};

    fn fixed_draws(truth: &ModelParameters, cohorts: Vec<i32>, n: usize) -> PosteriorDraws {
        PosteriorDraws::from_parameters(cohorts, &[vec![truth.clone(); n], vec![truth.clone(); n]]).unwrap()
    }

    #[test]
    fn truth_as_posterior_is_calibrated() {
        let s = TruthScenario { n_cohorts: 10, ..TruthScenario::default() };
        let sim = generate_dataset(&s).unwrap();
        let draws = fixed_draws(&sim.truth, sim.dataset.cohorts().to_vec(), 100);
        let qq = posterior_predictive_qq(&draws, &sim.dataset, &QqConfig { n_rep: 300, ..QqConfig::default() }).unwrap();
        assert_eq!(qq.levels.len(), 250);
        assert!(qq.levels.windows(2).all(|w| w[0] < w[1]));
        assert!(qq.envelope_coverage() >= 0.9, "{}", qq.envelope_coverage());
    }

    #[test]
    fn zero_exposure_gives_zero_quantiles() {
        let grid = AgeGrid::new(80, 5).unwrap();
        let data = CohortDataset::new(grid, vec![1, 2], vec![0; 10], vec![0.0; 10], vec![true; 10]).unwrap();
        let p = ModelParameters {
            a: vec![0.05; 2],
            gamma: vec![0.1; 2],
            walk: LatentWalk::new(0.1f64.ln(), 0.0, 0.05, vec![0.0; 2]).unwrap(),
        };
        let draws = fixed_draws(&p, vec![1, 2], 60);
        let qq = posterior_predictive_qq(&draws, &data, &QqConfig { n_rep: 100, ..QqConfig::default() }).unwrap();
        assert!(qq.predicted.iter().chain(&qq.lower).chain(&qq.upper).all(|v| *v == 0.0));
        assert_eq!(qq.max_abs_gap(), 0.0);
    }

    #[test]
    fn preconditions() {
        let sim = generate_dataset(&TruthScenario { n_cohorts: 2, ..TruthScenario::default() }).unwrap();
        let draws = fixed_draws(&sim.truth, sim.dataset.cohorts().to_vec(), 60);
        let one = QqConfig { n_rep: 1, ..QqConfig::default() };
        assert!(matches!(posterior_predictive_qq(&draws, &sim.dataset, &one), Err(Error::Argument(_))));
        let empty = sim.dataset.without_observations();
        assert!(matches!(posterior_predictive_qq(&draws, &empty, &QqConfig::default()), Err(Error::Argument(_))));
    }

    #[test]
    fn median_curve_and_csv() {
        let sim = generate_dataset(&TruthScenario { n_cohorts: 3, ..TruthScenario::default() }).unwrap();
        let draws = fixed_draws(&sim.truth, sim.dataset.cohorts().to_vec(), 60);
        let cfg = QqConfig { n_rep: 100, curve: QqCurve::Median, ..QqConfig::default() };
        let qq = posterior_predictive_qq(&draws, &sim.dataset, &cfg).unwrap();
        assert!(qq.predicted.iter().zip(&qq.lower).all(|(p, l)| p >= l));
        let mut out = Vec::new();
        qq.write_csv(&mut out).unwrap();
        let text = String::from_utf8(out).unwrap();
        assert_eq!(text.lines().next().unwrap(), "label,level,observed,predicted,lower,upper");
        assert_eq!(text.lines().count(), 1 + qq.levels.len());
    }
}
