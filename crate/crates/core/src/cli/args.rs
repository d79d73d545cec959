use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use super::commands::*;
use super::config::HarnessConfig;
use crate::checks::Variant;
use crate::error::{Error, Result};

#[derive(Debug, Parser)]
#[command(name = "pcs-sanity", version, about = "Null-versus-alternative sanity checks for agentic data analysis")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    /// Harness configuration (JSON).
    #[arg(long)]
    pub config: PathBuf,
    /// Override the master seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Override the output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write the run plan.
    Plan {
        #[command(flatten)]
        common: Common,
    },
    /// Execute pending plan conditions.
    Run {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        plan: Option<PathBuf>,
        #[arg(long)]
        jobs: Option<u32>,
        #[arg(long)]
        resume: bool,
        /// Execute at most this many conditions.
        #[arg(long)]
        limit: Option<usize>,
    },
    /// Classify each dataset and write reports.
    Analyze {
        #[command(flatten)]
        common: Common,
        /// Ledger files to read (default: the output ledger).
        #[arg(long = "ledger")]
        ledgers: Vec<PathBuf>,
        #[arg(long)]
        alpha: Option<f64>,
        #[arg(long)]
        tau: Option<f64>,
        /// `standard` or `precise-null`.
        #[arg(long, default_value = "standard")]
        variant: Variant,
    },
    /// Write PVE-controlled synthetic datasets and their plan.
    SimulatePve {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_delimiter = ',')]
        pve: Option<Vec<f64>>,
    },
    /// Null calibration of the Yes check.
    Calibrate {
        #[command(flatten)]
        common: Common,
        #[arg(long = "ledger")]
        ledgers: Vec<PathBuf>,
        #[arg(long)]
        replicates: Option<usize>,
        #[arg(long)]
        resamples: Option<usize>,
    },
    /// Subsampling convergence curves.
    Converge {
        #[command(flatten)]
        common: Common,
        #[arg(long = "ledger")]
        ledgers: Vec<PathBuf>,
    },
    /// Supervisor confidence pass and its calibration.
    Confidence {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        jobs: Option<u32>,
    },
}

impl Command {
    fn common(&self) -> &Common {
        match self {
            Command::Plan { common }
            | Command::Run { common, .. }
            | Command::Analyze { common, .. }
            | Command::SimulatePve { common, .. }
            | Command::Calibrate { common, .. }
            | Command::Converge { common, .. }
            | Command::Confidence { common, .. } => common,
        }
    }
}

fn load(common: &Common) -> Result<HarnessConfig> {
    let mut cfg = HarnessConfig::load(&common.config)?;
    if let Some(s) = common.seed {
        cfg.master_seed = s;
    }
    if let Some(out) = &common.out {
        let cwd = std::env::current_dir().map_err(|e| Error::io(".", e))?;
        cfg.out_dir = cwd.join(out);
    }
    Ok(cfg)
}

fn json_line<T: serde::Serialize>(v: &T) -> String {
    serde_json::to_string(v).unwrap_or_default()
}

/// Run one command and return the line to print.
pub fn execute(cli: &Cli) -> Result<String> {
    let cfg = load(cli.command.common())?;
    Ok(match &cli.command {
        Command::Plan { .. } => {
            let (path, plan) = cmd_plan(&cfg)?;
            format!("wrote {} ({} conditions)", path.display(), plan.conditions.len())
        }
        Command::Run {
            plan,
            jobs,
            resume,
            limit,
            ..
        } => {
            let s = cmd_run(
                &cfg,
                &RunOptions {
                    plan: plan.clone(),
                    jobs: *jobs,
                    resume: *resume,
                    limit: *limit,
                },
            )?;
            json_line(&s)
        }
        Command::Analyze {
            ledgers,
            alpha,
            tau,
            variant,
            ..
        } => {
            let r = cmd_analyze(
                &cfg,
                &AnalyzeOptions {
                    ledgers: ledgers.clone(),
                    alpha: *alpha,
                    tau: *tau,
                    variant: *variant,
                },
            )?;
            super::report::summary_markdown(&r)
        }
        Command::SimulatePve { pve, .. } => {
            let s = cmd_simulate_pve(&cfg, pve.as_deref())?;
            format!("wrote {} datasets; run with --config {}", s.datasets.len(), s.config.display())
        }
        Command::Calibrate {
            ledgers,
            replicates,
            resamples,
            ..
        } => {
            let r = cmd_calibrate(
                &cfg,
                &CalibrateOptions {
                    ledgers: ledgers.clone(),
                    replicates: *replicates,
                    resamples: *resamples,
                },
            )?;
            r.datasets
                .iter()
                .map(|d| {
                    format!(
                        "{}: blocked {:.3}, unblocked {:.3}",
                        d.dataset_id, d.result.rejection_rate_blocked, d.result.rejection_rate_unblocked
                    )
                })
                .collect::<Vec<_>>()
                .join("\n")
        }
        Command::Converge { ledgers, .. } => {
            let r = cmd_converge(&cfg, &ConvergeOptions { ledgers: ledgers.clone() })?;
            format!("wrote {} convergence analyses", r.analyses.len())
        }
        Command::Confidence { jobs, .. } => {
            let r = cmd_confidence(&cfg, &ConfidenceOptions { jobs: *jobs })?;
            json_line(&r.calibration.correlations)
        }
    })
}

/// Parse arguments, run, print, and return the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match execute(&cli) {
        Ok(line) => {
            println!("{line}");
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
