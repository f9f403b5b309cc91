use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gg_model::AgeGrid;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sex {
    Female,
    Male,
}

impl std::fmt::Display for Sex {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Sex::Female => "female",
            Sex::Male => "male",
        })
    }
}

impl std::str::FromStr for Sex {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "female" | "f" => Ok(Sex::Female),
            "male" | "m" => Ok(Sex::Male),
            other => Err(Error::Argument(format!("unknown sex {other:?}"))),
        }
    }
}

/// An observed cell with the pieces of its Poisson log-pmf that do not depend on parameters.
#[derive(Debug, Clone, Copy)]
pub(crate) struct ObservedCell {
    pub age: usize,
    pub deaths: f64,
    pub exposure: f64,
    pub ln_exposure: f64,
    pub ln_factorial: f64,
}

/// Deaths and exposures on a cohort-by-age grid, stored cohort-major.
#[derive(Debug, Clone)]
pub struct CohortDataset {
    country: String,
    sex: Option<Sex>,
    grid: AgeGrid,
    cohorts: Vec<i32>,
    deaths: Vec<u64>,
    exposures: Vec<f64>,
    observed: Vec<bool>,
    cells: Vec<ObservedCell>,
    cell_offsets: Vec<usize>,
}

impl CohortDataset {
    /// `deaths`, `exposures` and `observed` are cohort-major with `grid.n_ages` entries per cohort.
    pub fn new(
        grid: AgeGrid,
        cohorts: Vec<i32>,
        deaths: Vec<u64>,
        exposures: Vec<f64>,
        observed: Vec<bool>,
    ) -> Result<Self> {
        let n = cohorts.len() * grid.n_ages;
        if cohorts.is_empty() {
            return Err(Error::Argument("dataset needs at least one cohort".into()));
        }
        if deaths.len() != n || exposures.len() != n || observed.len() != n {
            return Err(Error::Argument(format!(
                "expected {n} cells ({} cohorts x {} ages), got deaths={}, exposures={}, mask={}",
                cohorts.len(),
                grid.n_ages,
                deaths.len(),
                exposures.len(),
                observed.len()
            )));
        }
        for (i, (&d, &e)) in deaths.iter().zip(&exposures).enumerate() {
            if !e.is_finite() || e < 0.0 {
                return Err(Error::Argument(format!("cell {i}: exposure {e} is not >= 0")));
            }
            if e == 0.0 && d > 0 && observed[i] {
                return Err(Error::Argument(format!(
                    "cell {i}: {d} deaths recorded with zero exposure"
                )));
            }
        }

        let mut cells = Vec::new();
        let mut cell_offsets = Vec::with_capacity(cohorts.len() + 1);
        cell_offsets.push(0);
        for t in 0..cohorts.len() {
            for x in 0..grid.n_ages {
                let i = t * grid.n_ages + x;
                // zero exposure with zero deaths has log-pmf 0
                if observed[i] && exposures[i] > 0.0 {
                    let d = deaths[i] as f64;
                    cells.push(ObservedCell {
                        age: x,
                        deaths: d,
                        exposure: exposures[i],
                        ln_exposure: exposures[i].ln(),
                        ln_factorial: statrs::function::gamma::ln_gamma(d + 1.0),
                    });
                }
            }
            cell_offsets.push(cells.len());
        }

        Ok(Self {
            country: String::new(),
            sex: None,
            grid,
            cohorts,
            deaths,
            exposures,
            observed,
            cells,
            cell_offsets,
        })
    }

    pub fn with_metadata(mut self, country: impl Into<String>, sex: Option<Sex>) -> Self {
        self.country = country.into();
        self.sex = sex;
        self
    }

    pub fn country(&self) -> &str {
        &self.country
    }

    pub fn sex(&self) -> Option<Sex> {
        self.sex
    }

    pub fn grid(&self) -> AgeGrid {
        self.grid
    }

    pub fn cohorts(&self) -> &[i32] {
        &self.cohorts
    }

    pub fn n_cohorts(&self) -> usize {
        self.cohorts.len()
    }

    pub fn n_ages(&self) -> usize {
        self.grid.n_ages
    }

    fn index(&self, t: usize, x: usize) -> usize {
        t * self.grid.n_ages + x
    }

    pub fn deaths(&self, t: usize, x: usize) -> u64 {
        self.deaths[self.index(t, x)]
    }

    pub fn exposure(&self, t: usize, x: usize) -> f64 {
        self.exposures[self.index(t, x)]
    }

    pub fn is_observed(&self, t: usize, x: usize) -> bool {
        self.observed[self.index(t, x)]
    }

    /// Number of cells that enter the likelihood.
    pub fn n_observed(&self) -> usize {
        self.observed.iter().filter(|o| **o).count()
    }

    pub(crate) fn cohort_cells(&self, t: usize) -> &[ObservedCell] {
        &self.cells[self.cell_offsets[t]..self.cell_offsets[t + 1]]
    }

    /// Crude death rate `D / E` at the first observed age of cohort `t`.
    pub fn crude_rate_first_age(&self, t: usize) -> Option<f64> {
        (0..self.grid.n_ages)
            .find(|&x| self.is_observed(t, x) && self.exposure(t, x) > 0.0)
            .map(|x| self.deaths(t, x) as f64 / self.exposure(t, x))
    }

    /// The same grid with every cell unobserved; its posterior is the prior.
    pub fn without_observations(&self) -> Self {
        let n = self.observed.len();
        Self::new(
            self.grid,
            self.cohorts.clone(),
            vec![0; n],
            vec![0.0; n],
            vec![false; n],
        )
        .expect("shape already validated")
        .with_metadata(self.country.clone(), self.sex)
    }

    /// Restrict to a contiguous range of cohorts.
    pub fn slice_cohorts(&self, range: std::ops::Range<usize>) -> Result<Self> {
        if range.start >= range.end || range.end > self.n_cohorts() {
            return Err(Error::Argument(format!("bad cohort range {range:?}")));
        }
        let a = self.grid.n_ages;
        let cells = range.start * a..range.end * a;
        Ok(Self::new(
            self.grid,
            self.cohorts[range.clone()].to_vec(),
            self.deaths[cells.clone()].to_vec(),
            self.exposures[cells.clone()].to_vec(),
            self.observed[cells].to_vec(),
        )?
        .with_metadata(self.country.clone(), self.sex))
    }
}
