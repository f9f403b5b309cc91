//! `aging-rate`: simulate cohort data, fit the gamma-Gompertz random-walk
//! model, and summarise or diagnose the draws.
//!
//! Exit codes: 0 ok, 1 runtime failure, 2 configuration or input error,
//! 3 fit finished but not converged (artifacts still written), 4 no valid
//! starting point.

mod commands;
mod config;
mod error;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crate::commands::SigmaInput;
use crate::config::FitConfig;
use crate::error::CliError;

#[derive(Parser)]
#[command(name = "aging-rate", version, about = "Individual rate of aging from cohort mortality data")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct Common {
    /// JSON run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Sampler seed (scenario seed for `simulate`).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory [default: config output_dir, else ./out].
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true)]
    chains: Option<usize>,
    /// Total iterations per chain, warm-up included.
    #[arg(long, global = true)]
    iter: Option<usize>,
    #[arg(long, global = true)]
    warmup: Option<usize>,
    /// First age of the cohort window.
    #[arg(long, global = true)]
    start_age: Option<u32>,
}

#[derive(Subcommand)]
enum Command {
    /// Draw a synthetic dataset; writes dataset.csv and truth.json.
    Simulate,
    /// Run the sampler; writes draws, summary, diagnostics, QQ and MDD files.
    ///
    /// Without a config the dataset in the output directory is used if one
    /// exists, the default scenario otherwise.
    Fit,
    /// Summary table and MDD report from an existing draws file.
    Summarize {
        /// [default: <out>/draws.csv]
        #[arg(long)]
        draws: Option<PathBuf>,
    },
    /// R-hat/ESS table, posterior-predictive QQ and slope stationarity tests.
    Diagnose {
        /// [default: <out>/draws.csv]
        #[arg(long)]
        draws: Option<PathBuf>,
    },
    /// Minimum detectable drift, from a sigma_rw value or a draws file.
    Mdd {
        #[arg(long, conflicts_with = "draws", required_unless_present = "draws")]
        sigma: Option<f64>,
        #[arg(long)]
        draws: Option<PathBuf>,
        /// Number of cohorts T [default with --draws: cohorts in the file].
        #[arg(long)]
        cohorts: Option<usize>,
    },
}

fn load_config(c: &Common, out_hint: Option<&PathBuf>) -> Result<FitConfig, CliError> {
    match &c.config {
        Some(p) => FitConfig::load(p),
        None => {
            let mut cfg = FitConfig::default();
            let existing = out_hint.map(|o| o.join("dataset.csv")).filter(|p| p.is_file());
            match existing {
                Some(p) => cfg.data = Some(config::DataSource::Csv(p)),
                None => cfg.scenario = Some(Default::default()),
            }
            Ok(cfg)
        }
    }
}

fn apply_overrides(cfg: &mut FitConfig, c: &Common, simulate: bool) {
    if let Some(s) = c.seed {
        if simulate {
            if let Some(sc) = &mut cfg.scenario {
                sc.seed = s;
            }
        } else {
            cfg.sampler.seed = s;
        }
    }
    if let Some(n) = c.chains {
        cfg.sampler.n_chains = n;
    }
    if let Some(n) = c.iter {
        cfg.sampler.n_iter = n;
    }
    if let Some(n) = c.warmup {
        cfg.sampler.n_warmup = n;
    }
    if let Some(a) = c.start_age {
        cfg.selection.start_age = a;
        if let Some(sc) = &mut cfg.scenario {
            sc.start_age = a;
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    let c = &cli.common;
    // only the flag and the config can name the output directory; the
    // dataset fallback needs it before the config is known
    let out_flag = c.out.clone();
    let mut cfg = load_config(c, out_flag.as_ref().or(Some(&PathBuf::from("out"))))?;
    let is_sim = matches!(cli.command, Command::Simulate);
    apply_overrides(&mut cfg, c, is_sim);
    let out = out_flag.or_else(|| cfg.output_dir.clone()).unwrap_or_else(|| PathBuf::from("out"));
    let draws_default = |d: &Option<PathBuf>| d.clone().unwrap_or_else(|| out.join("draws.csv"));
    match &cli.command {
        Command::Simulate => commands::simulate(&cfg, &out),
        Command::Fit => commands::fit(&cfg, &out),
        Command::Summarize { draws } => {
            cfg.validate()?;
            commands::summarize_cmd(&cfg, &draws_default(draws), &out)
        }
        Command::Diagnose { draws } => {
            cfg.validate()?;
            commands::diagnose(&cfg, &draws_default(draws), &out)
        }
        Command::Mdd { sigma, draws, cohorts } => {
            let input = match (sigma, draws) {
                (Some(s), _) => SigmaInput::Scalar(*s),
                (None, Some(d)) => SigmaInput::Draws(d.clone()),
                (None, None) => unreachable!("clap requires one of --sigma/--draws"),
            };
            commands::mdd_cmd(input, *cohorts, &cfg.summary.kde, cfg.summary.hpd_mass, &out)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
