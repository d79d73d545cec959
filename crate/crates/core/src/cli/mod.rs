//! Configuration, run ledger, subcommands and report files.

mod args;
mod commands;
pub mod config;
pub mod ledger;
pub mod report;

pub use args::{main_with_args, Cli, Command};
pub use commands::{
    analysis_dir, build_plan, cmd_analyze, cmd_calibrate, cmd_confidence, cmd_converge, cmd_plan, cmd_run,
    cmd_simulate_pve, pve_dataset_id, AnalyzeOptions, CalibrateOptions, ConfidenceOptions, ConvergeOptions,
    PveDataset, PveSummary, RunOptions, RunSummary, ANALYSIS_INSTRUCTIONS_FILE, LEDGER_FILE, PLAN_FILE,
    WORKSPACES_DIR,
};
pub use config::{DatasetEntry, HarnessConfig, PreciseNullPair};
pub use ledger::{LedgerEntry, RunLedger};
