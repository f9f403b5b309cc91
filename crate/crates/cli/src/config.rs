//! The JSON run configuration and its validation.

use std::path::{Path, PathBuf};

use aging_rate::hmd::SelectionRule;
use aging_rate::ppc::QqConfig;
use aging_rate::stationarity::KpssBandwidth;
use aging_rate::summary::SummarySettings;
use aging_rate::{PriorConfig, SamplerConfig, Sex, TruthScenario};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

/// Where the cohort data comes from when no scenario is given.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", deny_unknown_fields)]
pub enum DataSource {
    /// A dataset in the normalized cohort/age CSV layout.
    Csv(PathBuf),
    /// A pair of HMD cohort tables (`cDeaths_1x1`, `cExposures_1x1`).
    Hmd { deaths: PathBuf, exposures: PathBuf },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Selection {
    pub start_age: u32,
    /// Overrides the standard `100 - start_age` threshold.
    pub min_age_groups: Option<usize>,
}

impl Default for Selection {
    fn default() -> Self {
        Self { start_age: 80, min_age_groups: None }
    }
}

impl Selection {
    pub fn rule(&self) -> Result<SelectionRule, CliError> {
        let r = match self.min_age_groups {
            Some(m) => SelectionRule::custom(self.start_age, m),
            None => SelectionRule::standard(self.start_age),
        };
        r.map_err(|e| CliError::Config(format!("selection: {e}")))
    }
}

/// Everything a run needs. Exactly one of `data` and `scenario` is set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FitConfig {
    pub data: Option<DataSource>,
    pub scenario: Option<TruthScenario>,
    pub sex: Sex,
    pub selection: Selection,
    pub sampler: SamplerConfig,
    pub priors: PriorConfig,
    pub summary: SummarySettings,
    pub qq: QqConfig,
    pub kpss_bandwidth: KpssBandwidth,
    pub output_dir: Option<PathBuf>,
}

impl Default for FitConfig {
    fn default() -> Self {
        Self {
            data: None,
            scenario: None,
            sex: Sex::Female,
            selection: Selection::default(),
            sampler: SamplerConfig::default(),
            priors: PriorConfig::default(),
            summary: SummarySettings::default(),
            qq: QqConfig::default(),
            kpss_bandwidth: KpssBandwidth::default(),
            output_dir: None,
        }
    }
}

impl FitConfig {
    /// Parses a config document; errors name the offending field path.
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let de = &mut serde_json::Deserializer::from_str(text);
        serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            let inner = e.into_inner();
            if path == "." {
                CliError::Config(format!("config: {inner}"))
            } else {
                CliError::Config(format!("{path}: {inner}"))
            }
        })
    }

    /// Reads a config file and resolves data paths against its directory.
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read config {}: {e}", path.display())))?;
        let mut cfg = Self::from_json(&text)?;
        let base = path.parent().unwrap_or(Path::new("."));
        let resolve = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        match &mut cfg.data {
            Some(DataSource::Csv(p)) => resolve(p),
            Some(DataSource::Hmd { deaths, exposures }) => {
                resolve(deaths);
                resolve(exposures);
            }
            None => {}
        }
        if let Some(out) = &mut cfg.output_dir {
            resolve(out);
        }
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let cfg = |m: String| CliError::Config(m);
        match (&self.data, &self.scenario) {
            (Some(_), Some(_)) => return Err(cfg("config: set either data or scenario, not both".into())),
            (None, None) => return Err(cfg("config: one of data or scenario is required".into())),
            _ => {}
        }
        if let Some(s) = &self.scenario {
            s.validate().map_err(cfg)?;
        }
        match &self.data {
            Some(DataSource::Csv(p)) => exists("data.csv", p)?,
            Some(DataSource::Hmd { deaths, exposures }) => {
                exists("data.hmd.deaths", deaths)?;
                exists("data.hmd.exposures", exposures)?;
            }
            None => {}
        }
        self.selection.rule()?;
        self.sampler.validate().map_err(cfg)?;
        self.priors.validate().map_err(cfg)?;
        let s = &self.summary;
        if !(s.hpd_mass > 0.0 && s.hpd_mass < 1.0) {
            return Err(cfg(format!("summary.hpd_mass must lie in (0, 1), got {}", s.hpd_mass)));
        }
        if s.kde.grid_points < 2 {
            return Err(cfg(format!("summary.kde.grid_points must be >= 2, got {}", s.kde.grid_points)));
        }
        if !(s.kde.bandwidth_adjust > 0.0 && s.kde.bandwidth_adjust.is_finite()) {
            return Err(cfg(format!("summary.kde.bandwidth_adjust must be > 0, got {}", s.kde.bandwidth_adjust)));
        }
        if self.qq.n_rep < 100 {
            return Err(cfg(format!("qq.n_rep must be >= 100, got {}", self.qq.n_rep)));
        }
        if !(self.qq.envelope_mass > 0.0 && self.qq.envelope_mass < 1.0) {
            return Err(cfg(format!("qq.envelope_mass must lie in (0, 1), got {}", self.qq.envelope_mass)));
        }
        Ok(())
    }
}

fn exists(field: &str, p: &Path) -> Result<(), CliError> {
    if p.is_file() {
        Ok(())
    } else {
        Err(CliError::Config(format!("{field}: file {} does not exist", p.display())))
    }
}
