//! Synthetic cohort datasets drawn from known parameters.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gg_model::{expected_deaths, AgeGrid, GompertzCohortParams};
use crate::latent::LatentWalk;
use crate::posterior::{CohortDataset, ModelParameters};

/// Frailty variance per cohort: a single value or one per cohort.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GammaPath {
    Constant(f64),
    PerCohort(Vec<f64>),
}

/// Exposures `initial * (1 - decline_per_age)^x` for every cohort, unless an
/// explicit cohort-major grid is given.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExposureSchedule {
    pub initial: f64,
    pub decline_per_age: f64,
    pub grid: Option<Vec<f64>>,
}

impl Default for ExposureSchedule {
    fn default() -> Self {
        Self { initial: 1e5, decline_per_age: 0.02, grid: None }
    }
}

/// Ground truth for a simulated dataset. The default is the desk-scale case:
/// 60 cohorts, ages 80-104, b = 0.105, no drift, sigma_rw = 0.04, gamma = 0.15.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TruthScenario {
    pub n_cohorts: usize,
    pub n_ages: usize,
    pub start_age: u32,
    pub first_cohort: i32,
    pub log_b: f64,
    pub beta: f64,
    pub sigma_rw: f64,
    pub a_first: f64,
    pub a_last: f64,
    pub gamma: GammaPath,
    pub exposure: ExposureSchedule,
    pub seed: u64,
}

impl Default for TruthScenario {
    fn default() -> Self {
        Self {
            n_cohorts: 60,
            n_ages: 25,
            start_age: 80,
            first_cohort: 1850,
            log_b: 0.105f64.ln(),
            beta: 0.0,
            sigma_rw: 0.04,
            a_first: 0.06,
            a_last: 0.04,
            gamma: GammaPath::Constant(0.15),
            exposure: ExposureSchedule::default(),
            seed: 1,
        }
    }
}

impl TruthScenario {
    /// Checks every field, naming the first offending one.
    pub fn validate(&self) -> Result<(), String> {
        if self.n_cohorts == 0 {
            return Err("scenario.n_cohorts must be >= 1".into());
        }
        if self.n_ages == 0 {
            return Err("scenario.n_ages must be >= 1".into());
        }
        if !self.log_b.is_finite() || !self.beta.is_finite() {
            return Err("scenario.log_b and scenario.beta must be finite".into());
        }
        if !(self.sigma_rw >= 0.0) || !self.sigma_rw.is_finite() {
            return Err(format!("scenario.sigma_rw must be >= 0, got {}", self.sigma_rw));
        }
        for (name, v) in [("a_first", self.a_first), ("a_last", self.a_last)] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(format!("scenario.{name} must be > 0, got {v}"));
            }
        }
        match &self.gamma {
            GammaPath::Constant(g) if !(*g > 0.0) => return Err(format!("scenario.gamma must be > 0, got {g}")),
            GammaPath::PerCohort(g) if g.len() != self.n_cohorts => {
                return Err(format!("scenario.gamma has {} values for {} cohorts", g.len(), self.n_cohorts))
            }
            GammaPath::PerCohort(g) if g.iter().any(|v| !(*v > 0.0)) => {
                return Err("scenario.gamma values must be > 0".into())
            }
            _ => {}
        }
        let e = &self.exposure;
        match &e.grid {
            Some(grid) => {
                if grid.len() != self.n_cohorts * self.n_ages {
                    return Err(format!(
                        "scenario.exposure.grid has {} cells, expected {}",
                        grid.len(),
                        self.n_cohorts * self.n_ages
                    ));
                }
                if grid.iter().any(|v| !(*v >= 0.0) || !v.is_finite()) {
                    return Err("scenario.exposure.grid values must be >= 0".into());
                }
            }
            None => {
                if !(e.initial >= 0.0) || !e.initial.is_finite() {
                    return Err(format!("scenario.exposure.initial must be >= 0, got {}", e.initial));
                }
                if !(0.0..1.0).contains(&e.decline_per_age) {
                    return Err(format!(
                        "scenario.exposure.decline_per_age must lie in [0, 1), got {}",
                        e.decline_per_age
                    ));
                }
            }
        }
        Ok(())
    }

    pub fn grid(&self) -> AgeGrid {
        AgeGrid { start_age: self.start_age, n_ages: self.n_ages }
    }

    pub fn cohort_labels(&self) -> Vec<i32> {
        (0..self.n_cohorts as i32).map(|t| self.first_cohort + t).collect()
    }

    /// Baselines `a_t`, log-linear from `a_first` to `a_last`.
    pub fn a_path(&self) -> Vec<f64> {
        let (lo, hi) = (self.a_first.ln(), self.a_last.ln());
        let span = (self.n_cohorts.max(2) - 1) as f64;
        (0..self.n_cohorts).map(|t| (lo + (hi - lo) * t as f64 / span).exp()).collect()
    }

    pub fn gamma_path(&self) -> Vec<f64> {
        match &self.gamma {
            GammaPath::Constant(g) => vec![*g; self.n_cohorts],
            GammaPath::PerCohort(g) => g.clone(),
        }
    }

    /// Cohort-major exposure grid.
    pub fn exposures(&self) -> Vec<f64> {
        match &self.exposure.grid {
            Some(grid) => grid.clone(),
            None => {
                let per_cohort: Vec<f64> = (0..self.n_ages)
                    .map(|x| self.exposure.initial * (1.0 - self.exposure.decline_per_age).powi(x as i32))
                    .collect();
                (0..self.n_cohorts).flat_map(|_| per_cohort.iter().copied()).collect()
            }
        }
    }
}

/// One Laplace(0, scale) draw by inverting the CDF.
pub fn laplace_sample<R: Rng + ?Sized>(rng: &mut R, scale: f64) -> f64 {
    let u: f64 = rng.random::<f64>() - 0.5;
    -scale * u.signum() * (1.0 - 2.0 * u.abs()).ln()
}

/// Innovations iid Laplace(0, sigma_rw); all zero when sigma_rw is 0.
pub fn draw_walk<R: Rng + ?Sized>(scenario: &TruthScenario, rng: &mut R) -> LatentWalk {
    let w = (0..scenario.n_cohorts)
        .map(|_| if scenario.sigma_rw == 0.0 { 0.0 } else { laplace_sample(rng, scenario.sigma_rw) })
        .collect();
    LatentWalk { log_b: scenario.log_b, beta: scenario.beta, sigma_rw: scenario.sigma_rw, w }
}

/// A generated dataset together with the parameters it was drawn from.
#[derive(Debug, Clone)]
pub struct SimulatedData {
    pub dataset: CohortDataset,
    pub truth: ModelParameters,
}

pub fn generate_dataset(scenario: &TruthScenario) -> Result<SimulatedData> {
    scenario.validate().map_err(Error::Argument)?;
    let mut rng = ChaCha8Rng::seed_from_u64(scenario.seed);
    let walk = draw_walk(scenario, &mut rng);
    let a = scenario.a_path();
    let gamma = scenario.gamma_path();
    let exposures = scenario.exposures();
    let grid = scenario.grid();
    let n_ages = scenario.n_ages;

    let mut deaths = Vec::with_capacity(exposures.len());
    for (t, ln_b) in walk.log_slopes().into_iter().enumerate() {
        let p = GompertzCohortParams::new(a[t], ln_b.exp(), gamma[t])?;
        let mu = expected_deaths(&p, &grid, &exposures[t * n_ages..(t + 1) * n_ages])?;
        for m in mu {
            deaths.push(poisson_draw(m, &mut rng)?);
        }
    }
    let dataset = CohortDataset::new(
        grid,
        scenario.cohort_labels(),
        deaths,
        exposures.clone(),
        vec![true; exposures.len()],
    )?
    .with_metadata("simulated", None);
    Ok(SimulatedData { dataset, truth: ModelParameters { a, gamma, walk } })
}

pub(crate) fn poisson_draw<R: Rng + ?Sized>(mean: f64, rng: &mut R) -> Result<u64> {
    if mean == 0.0 {
        return Ok(0);
    }
    let dist = Poisson::new(mean).map_err(|e| Error::Domain(format!("Poisson mean {mean}: {e}")))?;
    Ok(dist.sample(rng) as u64)
}

#[cfg(test)]
#[allow(clippy::needless_range_loop)]
mod tests {
    use super::*;
    use crate::gg_model::cohort_hazard;

    #[test]
    fn zero_sigma_gives_zero_innovations() {
        let s = TruthScenario { sigma_rw: 0.0, ..TruthScenario::default() };
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert!(draw_walk(&s, &mut rng).w.iter().all(|w| *w == 0.0));
    }

    #[test]
    fn laplace_moments() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let s = 0.04;
        let n = 1_000_000;
        let draws: Vec<f64> = (0..n).map(|_| laplace_sample(&mut rng, s)).collect();
        let mean_abs = draws.iter().map(|w| w.abs()).sum::<f64>() / n as f64;
        let mean = draws.iter().sum::<f64>() / n as f64;
        let var = draws.iter().map(|w| (w - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        assert!((mean_abs / s - 1.0).abs() < 0.005, "{mean_abs}");
        assert!((var / (2.0 * s * s) - 1.0).abs() < 0.01, "{var}");
    }

    #[test]
    fn large_exposure_recovers_hazard() {
        let s = TruthScenario {
            n_cohorts: 3,
            exposure: ExposureSchedule { initial: 1e8, decline_per_age: 0.0, grid: None },
            ..TruthScenario::default()
        };
        let sim = generate_dataset(&s).unwrap();
        let slopes = sim.truth.slopes();
        for t in 0..3 {
            let p = GompertzCohortParams::new(sim.truth.a[t], slopes[t], sim.truth.gamma[t]).unwrap();
            for x in 0..s.n_ages {
                let m = sim.dataset.deaths(t, x) as f64 / sim.dataset.exposure(t, x);
                let h = cohort_hazard(&p, x as f64 + 0.5).unwrap();
                assert!((m / h - 1.0).abs() < 1e-3, "t={t} x={x} m={m} h={h}");
            }
        }
    }

    #[test]
    fn zero_exposure_gives_zero_deaths() {
        let s = TruthScenario {
            exposure: ExposureSchedule { initial: 0.0, ..ExposureSchedule::default() },
            ..TruthScenario::default()
        };
        let sim = generate_dataset(&s).unwrap();
        for t in 0..s.n_cohorts {
            for x in 0..s.n_ages {
                assert_eq!(sim.dataset.deaths(t, x), 0);
            }
        }
    }

    #[test]
    fn fixed_seed_is_reproducible() {
        let s = TruthScenario::default();
        let a = generate_dataset(&s).unwrap();
        let b = generate_dataset(&s).unwrap();
        assert_eq!(a.truth, b.truth);
        for t in 0..s.n_cohorts {
            for x in 0..s.n_ages {
                assert_eq!(a.dataset.deaths(t, x), b.dataset.deaths(t, x));
            }
        }
        let c = generate_dataset(&TruthScenario { seed: 2, ..s }).unwrap();
        assert_ne!(a.truth.walk.w, c.truth.walk.w);
    }

    #[test]
    fn mean_deaths_converge_to_expectation() {
        let base = TruthScenario { n_cohorts: 2, n_ages: 5, ..TruthScenario::default() };
        let reps = 400;
        let truth = generate_dataset(&base).unwrap().truth;
        let slopes = truth.slopes();
        // same walk across seeds: fix sigma_rw at 0 and put the drawn slopes into log_b
        let mut sums = [0.0; 10];
        for seed in 0..reps {
            let s = TruthScenario { seed, sigma_rw: 0.0, log_b: slopes[0].ln(), beta: 0.0, n_cohorts: 1, ..base.clone() };
            let sim = generate_dataset(&s).unwrap();
            for x in 0..5 {
                sums[x] += sim.dataset.deaths(0, x) as f64;
            }
        }
        let p = GompertzCohortParams::new(truth.a[0], slopes[0], truth.gamma[0]).unwrap();
        let exp = expected_deaths(&p, &base.grid(), &base.exposures()[..5]).unwrap();
        for x in 0..5 {
            let mean = sums[x] / reps as f64;
            let se = (exp[x] / reps as f64).sqrt();
            assert!((mean - exp[x]).abs() < 3.0 * se, "x={x} mean={mean} exp={}", exp[x]);
        }
    }

    #[test]
    fn validation_names_the_field() {
        let s = TruthScenario { sigma_rw: -0.1, ..TruthScenario::default() };
        assert!(s.validate().unwrap_err().contains("scenario.sigma_rw"));
        let s = TruthScenario { gamma: GammaPath::PerCohort(vec![0.1; 3]), ..TruthScenario::default() };
        assert!(s.validate().unwrap_err().contains("scenario.gamma"));
    }
}
