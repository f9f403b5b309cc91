//! One function per subcommand. Each writes its artifacts under the output
//! directory and returns an error carrying the exit code.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use aging_rate::hmd::{build_dataset, read_hmd_file, read_normalized_csv, write_normalized_csv, BuildReport};
use aging_rate::ppc::posterior_predictive_qq;
use aging_rate::stationarity::{adf_test, difference, kpss_test, write_results_csv, StationarityResult};
use aging_rate::summary::{mdd, mdd_plugin, summarize, KdeSettings};
use aging_rate::{
    effective_sample_size, generate_dataset, reconstruct, run_chains, split_rhat, CohortDataset, PosteriorDraws,
};
use serde::Serialize;

use crate::config::{DataSource, FitConfig};
use crate::error::CliError;

pub const RHAT_THRESHOLD: f64 = 1.02;

fn create(path: &Path) -> Result<BufWriter<File>, CliError> {
    File::create(path).map(BufWriter::new).map_err(|source| CliError::Io { path: path.display().to_string(), source })
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut w = create(path)?;
    serde_json::to_writer_pretty(&mut w, value).map_err(aging_rate::Error::from)?;
    writeln!(w).and_then(|_| w.flush()).map_err(|source| CliError::Io { path: path.display().to_string(), source })
}

fn ensure_dir(dir: &Path) -> Result<(), CliError> {
    std::fs::create_dir_all(dir)
        .map_err(|e| CliError::Config(format!("output directory {} is not writable: {e}", dir.display())))
}

/// The dataset a config points at, plus the HMD build report if any.
pub fn load_dataset(cfg: &FitConfig) -> Result<(CohortDataset, Option<BuildReport>), CliError> {
    if let Some(s) = &cfg.scenario {
        return Ok((generate_dataset(s).map_err(CliError::input)?.dataset, None));
    }
    match &cfg.data {
        Some(DataSource::Csv(p)) => {
            let f = File::open(p).map_err(|e| CliError::Config(format!("data.csv: {}: {e}", p.display())))?;
            Ok((read_normalized_csv(f).map_err(CliError::input)?, None))
        }
        Some(DataSource::Hmd { deaths, exposures }) => {
            let d = read_hmd_file(deaths).map_err(|e| CliError::Config(format!("data.hmd.deaths: {e}")))?;
            let e = read_hmd_file(exposures).map_err(|e| CliError::Config(format!("data.hmd.exposures: {e}")))?;
            let build = build_dataset(&d, &e, cfg.sex, cfg.selection.rule()?).map_err(CliError::input)?;
            Ok((build.dataset, Some(build.report)))
        }
        None => Err(CliError::Config("config: one of data or scenario is required".into())),
    }
}

#[derive(Serialize)]
struct TruthFile<'a> {
    scenario: &'a aging_rate::TruthScenario,
    cohorts: &'a [i32],
    b: Vec<f64>,
    parameters: &'a aging_rate::ModelParameters,
}

pub fn simulate(cfg: &FitConfig, out: &Path) -> Result<(), CliError> {
    let scenario = cfg
        .scenario
        .as_ref()
        .ok_or_else(|| CliError::Config("scenario: simulate needs a scenario section".into()))?;
    scenario.validate().map_err(CliError::Config)?;
    ensure_dir(out)?;
    let sim = generate_dataset(scenario).map_err(CliError::input)?;
    write_normalized_csv(&sim.dataset, create(&out.join("dataset.csv"))?)?;
    let slopes = reconstruct(&sim.truth.walk, sim.dataset.cohorts())?;
    write_json(
        &out.join("truth.json"),
        &TruthFile { scenario, cohorts: sim.dataset.cohorts(), b: slopes.b, parameters: &sim.truth },
    )
}

#[derive(Debug, Clone, Serialize)]
pub struct ParamDiagnostic {
    pub parameter: String,
    pub rhat: f64,
    pub ess: f64,
}

/// Split R-hat and ESS for every sampled quantity; NaN marks constant columns.
pub fn parameter_diagnostics(draws: &PosteriorDraws) -> Result<Vec<ParamDiagnostic>, CliError> {
    draws
        .param_names()
        .into_iter()
        .enumerate()
        .map(|(j, name)| {
            let col = draws.column(j);
            Ok(ParamDiagnostic {
                parameter: name,
                rhat: split_rhat(&col)?.value,
                ess: effective_sample_size(&col)?.value,
            })
        })
        .collect()
}

fn worst(diags: &[ParamDiagnostic]) -> (f64, String) {
    diags
        .iter()
        .filter(|d| d.rhat.is_finite())
        .fold((f64::NAN, String::new()), |acc, d| if acc.0.is_nan() || d.rhat > acc.0 { (d.rhat, d.parameter.clone()) } else { acc })
}

fn write_diagnostics(path: &Path, diags: &[ParamDiagnostic]) -> Result<(), CliError> {
    let mut w = create(path)?;
    let io = |source| CliError::Io { path: path.display().to_string(), source };
    writeln!(w, "parameter,rhat,ess").map_err(io)?;
    for d in diags {
        writeln!(w, "{},{:.5},{:.1}", d.parameter, d.rhat, d.ess).map_err(io)?;
    }
    w.flush().map_err(io)
}

/// ADF and KPSS on the posterior-mean log slope series and its differences.
pub fn slope_stationarity(draws: &PosteriorDraws, cfg: &FitConfig) -> Result<Vec<(String, StationarityResult)>, CliError> {
    let level: Vec<f64> = (0..draws.n_cohorts())
        .map(|t| {
            let c = draws.log_slope_column(t).concat();
            c.iter().sum::<f64>() / c.len() as f64
        })
        .collect();
    let diff = difference(&level);
    Ok(vec![
        ("log_b_level".into(), adf_test(&level, None)?),
        ("log_b_level".into(), kpss_test(&level, cfg.kpss_bandwidth)?),
        ("log_b_diff".into(), adf_test(&diff, None)?),
        ("log_b_diff".into(), kpss_test(&diff, cfg.kpss_bandwidth)?),
    ])
}

/// Convergence table, QQ check and slope stationarity; fails with
/// `NotConverged` after writing everything.
fn diagnostics_artifacts(draws: &PosteriorDraws, data: &CohortDataset, cfg: &FitConfig, out: &Path) -> Result<(), CliError> {
    let diags = parameter_diagnostics(draws)?;
    write_diagnostics(&out.join("diagnostics.csv"), &diags)?;
    if data.n_observed() > 0 {
        posterior_predictive_qq(draws, data, &cfg.qq)?.write_csv(create(&out.join("qq.csv"))?)?;
    }
    if draws.n_cohorts() >= 10 {
        write_results_csv(create(&out.join("stationarity.csv"))?, &slope_stationarity(draws, cfg)?)?;
    }
    let (max_rhat, name) = worst(&diags);
    if !(max_rhat < RHAT_THRESHOLD) {
        return Err(CliError::NotConverged { max_rhat, threshold: RHAT_THRESHOLD, worst: name });
    }
    Ok(())
}

fn summary_artifacts(draws: &PosteriorDraws, cfg: &FitConfig, out: &Path) -> Result<(), CliError> {
    let report = summarize(draws, &cfg.summary)?;
    report.write_csv(create(&out.join("summary.csv"))?)?;
    report.write_json(create(&out.join("summary.json"))?)?;
    write_json(&out.join("mdd.json"), &report.mdd)
}

#[derive(Serialize)]
struct FitRecord<'a> {
    n_cohorts: usize,
    first_cohort: i32,
    last_cohort: i32,
    n_observed: usize,
    sampler: &'a aging_rate::SamplerConfig,
    chain_seeds: &'a [u64],
    acceptance: &'a [aging_rate::mcmc::ChainAcceptance],
    build_report: Option<BuildReport>,
}

pub fn fit(cfg: &FitConfig, out: &Path) -> Result<(), CliError> {
    cfg.validate()?;
    ensure_dir(out)?;
    let (data, report) = load_dataset(cfg)?;
    if data.n_cohorts() < 2 {
        return Err(CliError::Config(format!("only {} cohort(s) selected; need at least 2", data.n_cohorts())));
    }
    write_normalized_csv(&data, create(&out.join("dataset.csv"))?)?;
    let draws = run_chains(&data, &cfg.sampler, &cfg.priors)?;
    draws.write_csv(create(&out.join("draws.csv"))?)?;
    write_json(
        &out.join("fit.json"),
        &FitRecord {
            n_cohorts: data.n_cohorts(),
            first_cohort: data.cohorts()[0],
            last_cohort: *data.cohorts().last().unwrap(),
            n_observed: data.n_observed(),
            sampler: &cfg.sampler,
            chain_seeds: draws.seeds(),
            acceptance: draws.acceptance(),
            build_report: report,
        },
    )?;
    summary_artifacts(&draws, cfg, out)?;
    diagnostics_artifacts(&draws, &data, cfg, out)
}

pub fn read_draws(path: &Path) -> Result<PosteriorDraws, CliError> {
    let f = File::open(path).map_err(|e| CliError::Config(format!("draws file {}: {e}", path.display())))?;
    PosteriorDraws::read_csv(f).map_err(CliError::input)
}

pub fn summarize_cmd(cfg: &FitConfig, draws_path: &Path, out: &Path) -> Result<(), CliError> {
    ensure_dir(out)?;
    let draws = read_draws(draws_path)?;
    summary_artifacts(&draws, cfg, out)
}

pub fn diagnose(cfg: &FitConfig, draws_path: &Path, out: &Path) -> Result<(), CliError> {
    ensure_dir(out)?;
    let draws = read_draws(draws_path)?;
    let (data, _) = load_dataset(cfg)?;
    if data.cohorts() != draws.cohorts() {
        return Err(CliError::Config("draws and dataset cover different cohorts".into()));
    }
    diagnostics_artifacts(&draws, &data, cfg, out)
}

pub enum SigmaInput {
    Scalar(f64),
    Draws(PathBuf),
}

pub fn mdd_cmd(sigma: SigmaInput, n_cohorts: Option<usize>, kde: &KdeSettings, mass: f64, out: &Path) -> Result<(), CliError> {
    let check_t = |t: usize| {
        if t < 2 {
            Err(CliError::Config(format!("cohorts: T must be >= 2, got {t}")))
        } else {
            Ok(t)
        }
    };
    match sigma {
        SigmaInput::Scalar(s) => {
            let t = check_t(n_cohorts.ok_or_else(|| CliError::Config("cohorts: --cohorts is required with --sigma".into()))?)?;
            if !(s >= 0.0 && s.is_finite()) {
                return Err(CliError::Config(format!("sigma: must be >= 0, got {s}")));
            }
            let pct = mdd_plugin(s, t)?;
            println!("{pct:.4}");
            Ok(())
        }
        SigmaInput::Draws(path) => {
            let draws = read_draws(&path)?;
            let t = check_t(n_cohorts.unwrap_or(draws.n_cohorts()))?;
            let sig = draws.column(draws.sigma_index()).concat();
            let report = mdd(&sig, t, kde, mass)?;
            ensure_dir(out)?;
            write_json(&out.join("mdd.json"), &report)?;
            println!("{:.4}", report.mdd_percent);
            Ok(())
        }
    }
}
