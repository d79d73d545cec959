//! The subcommands, as library functions over a loaded [`HarnessConfig`].

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{DatasetEntry, HarnessConfig};
use super::ledger::{LedgerEntry, RunLedger};
use super::report::{
    confidence_pairs_csv, convergence_csv, kde_csv, overlap_scatter_csv, qq_csv, summary_markdown, write_json, write_text,
    AnalysisReport, CalibrationReport, ConfidenceReport, ConvergenceReport, DatasetCalibration, DatasetReport,
    REPORT_SCHEMA_VERSION,
};
use crate::agent::{
    attempt_seed, parse_conclusion, prepare_workspace, render_confidence_prompt, run_with_retries, Attempted,
    ConfidenceRecord, ResponseRecord, RunStatus, Task, WorkspaceSpec, WorkspaceState, INSTRUCTIONS_FILE,
};
use crate::checks::{
    calibration_simulation, classify_with, confidence_calibration, convergence_analysis, ConvergenceConfig,
    DistributionPair, Thresholds, Variant,
};
use crate::error::{Error, Result};
use crate::perturb::{apply_condition, build_run_plan, Arm, RunCondition, RunPlan};
use crate::signal::{fit_signal_model, synthesize_outcome, synthetic_dataset, PveConfig};
use crate::stats::ScoreSample;
use crate::tabular::{one_hot_encode, read_metadata, write_dataset, DatasetMetadata, TabularDataset};

pub const PLAN_FILE: &str = "plan.json";
pub const LEDGER_FILE: &str = "ledger.jsonl";
pub const WORKSPACES_DIR: &str = "workspaces";
/// The analysis prompt is moved here before the supervisor prompt takes its place.
pub const ANALYSIS_INSTRUCTIONS_FILE: &str = "AGENTS.analysis.md";

fn read_plan(path: &Path) -> Result<RunPlan> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let plan: RunPlan = serde_json::from_str(&text).map_err(|e| Error::json(path.display().to_string(), e))?;
    plan.verify()?;
    Ok(plan)
}

fn check_columns(entry: &DatasetEntry, ds: &TabularDataset) -> Vec<String> {
    entry
        .dependent
        .iter()
        .chain(&entry.independents)
        .filter(|c| !ds.has_column(c))
        .map(|c| format!("dataset {:?}: unknown column {c:?}", entry.id))
        .collect()
}

/// Build the plan for every configured dataset.
pub fn build_plan(config: &HarnessConfig) -> Result<RunPlan> {
    config.validate()?;
    let mut errs = Vec::new();
    let mut plan: Option<RunPlan> = None;
    for entry in &config.datasets {
        match config.load_dataset(entry) {
            Ok((ds, _)) => errs.extend(check_columns(entry, &ds)),
            Err(e) => {
                errs.push(format!("dataset {:?}: {e}", entry.id));
                continue;
            }
        }
        let p = build_run_plan(
            &entry.id,
            &config.pcs_kinds,
            config.replicates,
            config.master_seed,
            config.include_null_arm,
            &config.perturbation,
        )?;
        match &mut plan {
            Some(acc) => acc.merge(p)?,
            None => plan = Some(p),
        }
    }
    if !errs.is_empty() {
        return Err(Error::Validation(errs));
    }
    let mut plan = plan.expect("validated config has datasets");
    plan.config = serde_json::to_value(config).map_err(|e| Error::json("config snapshot", e))?;
    Ok(plan)
}

/// Write `plan.json` under the output directory.
pub fn cmd_plan(config: &HarnessConfig) -> Result<(PathBuf, RunPlan)> {
    let plan = build_plan(config)?;
    let path = config.out_path().join(PLAN_FILE);
    write_json(&path, &plan)?;
    Ok((path, plan))
}

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub plan: Option<PathBuf>,
    pub jobs: Option<u32>,
    pub resume: bool,
    /// Stop after this many executions; the rest stay pending.
    pub limit: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub executed: usize,
    pub skipped: usize,
    pub pending: usize,
    pub status_counts: BTreeMap<String, usize>,
}

fn thread_pool(jobs: u32) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(jobs as usize)
        .build()
        .map_err(|e| Error::InvalidArgument(format!("cannot start worker pool: {e}")))
}

fn load_datasets<'a>(
    config: &HarnessConfig,
    ids: impl IntoIterator<Item = &'a str>,
) -> Result<HashMap<String, (TabularDataset, DatasetMetadata)>> {
    let mut out = HashMap::new();
    for id in ids {
        if !out.contains_key(id) {
            out.insert(id.to_owned(), config.load_dataset(config.dataset(id)?)?);
        }
    }
    Ok(out)
}

/// Execute every pending condition of the plan and append one record each.
pub fn cmd_run(config: &HarnessConfig, opts: &RunOptions) -> Result<RunSummary> {
    let out = config.out_path();
    let plan = read_plan(&opts.plan.clone().unwrap_or_else(|| out.join(PLAN_FILE)))?;
    let ledger = RunLedger::open(&out.join(LEDGER_FILE))?;
    match ledger.plans().next() {
        None => ledger.append(&LedgerEntry::Plan { plan: plan.clone() })?,
        Some(p) if p.conditions != plan.conditions => {
            return Err(Error::Validation(vec!["ledger was written for a different plan".into()]));
        }
        Some(_) => {}
    }
    let done = plan.conditions.iter().filter(|c| ledger.has_response(&c.run_id())).count();
    if done > 0 && !opts.resume {
        return Err(Error::Validation(vec![format!(
            "ledger already holds {done} records for this plan; pass --resume to continue"
        )]));
    }
    let mut pending: Vec<&RunCondition> = plan.conditions.iter().filter(|c| !ledger.has_response(&c.run_id())).collect();
    let total_pending = pending.len();
    if let Some(limit) = opts.limit {
        pending.truncate(limit);
    }
    let datasets = load_datasets(config, pending.iter().map(|c| c.dataset_id.as_str()))?;
    let templates = config.prompt_templates();
    let spec = WorkspaceSpec {
        templates: &templates,
        packages: &config.packages,
        resume: opts.resume,
    };
    let root = out.join(WORKSPACES_DIR);
    fs::create_dir_all(&root).map_err(|e| Error::io(&root, e))?;

    let run_one = |c: &RunCondition| -> Result<()> {
        let (ds, meta) = &datasets[&c.dataset_id];
        let perturbed = apply_condition(ds, meta, c, &plan.settings)?;
        let name = perturbed.dataset.name().to_owned();
        let state = prepare_workspace(&perturbed.dataset, &perturbed.metadata, c, &root, &spec)?;
        let attempted = match state {
            WorkspaceState::Prepared(dir) => {
                run_with_retries(&config.backend, &dir, &name, c, Task::Analysis, config.max_retries)?
            }
            WorkspaceState::AlreadyComplete(dir) => recovered(&dir, c),
        };
        let record = response_record(c, attempted, perturbed.descriptions_removed);
        ledger.append(&LedgerEntry::Response { record })
    };
    thread_pool(opts.jobs.unwrap_or(config.jobs))?.install(|| pending.par_iter().try_for_each(|c| run_one(c)))?;

    let ledger = RunLedger::read(ledger.path())?;
    Ok(RunSummary {
        executed: pending.len(),
        skipped: done,
        pending: total_pending - pending.len(),
        status_counts: ledger.status_counts(),
    })
}

/// An interrupted run whose agent finished but whose record was never written.
fn recovered(dir: &Path, c: &RunCondition) -> Attempted {
    let (status, output, error, raw_output) = match parse_conclusion(dir) {
        Ok(o) => (RunStatus::Ok, Some(o), None, None),
        Err(f) => (RunStatus::ParseError, None, Some(f.reason), f.content),
    };
    Attempted {
        status,
        output,
        error,
        raw_output,
        wall_time: 0.0,
        attempts: 1,
        attempt_seeds: vec![attempt_seed(c.seed, 0)],
    }
}

fn response_record(c: &RunCondition, a: Attempted, descriptions_removed: bool) -> ResponseRecord {
    let run_id = c.run_id();
    ResponseRecord {
        workspace: format!("{WORKSPACES_DIR}/{run_id}"),
        run_id,
        condition: c.clone(),
        status: a.status,
        score: a.output.as_ref().map(|o| o.value),
        explanation: a.output.map(|o| o.explanation),
        wall_time: a.wall_time,
        attempts: a.attempts,
        attempt_seeds: a.attempt_seeds,
        error: a.error,
        raw_output: a.raw_output,
        descriptions_removed,
    }
}

/// Responses from every ledger, sorted by run id; run ids must not repeat.
fn load_responses(paths: &[PathBuf]) -> Result<Vec<ResponseRecord>> {
    let mut all = Vec::new();
    let mut seen = HashSet::new();
    for p in paths {
        for r in RunLedger::read(p)?.responses() {
            if !seen.insert(r.run_id.clone()) {
                return Err(Error::Validation(vec![format!("run id {} appears in more than one ledger", r.run_id)]));
            }
            all.push(r.clone());
        }
    }
    all.sort_by(|a, b| a.run_id.cmp(&b.run_id));
    Ok(all)
}

fn ledger_paths(config: &HarnessConfig, given: &[PathBuf]) -> Vec<PathBuf> {
    if given.is_empty() {
        vec![config.out_path().join(LEDGER_FILE)]
    } else {
        given.to_vec()
    }
}

/// Usable scores of one arm, blocked by perturbation kind.
fn arm_sample(responses: &[ResponseRecord], dataset: &str, arm: Arm) -> Result<(ScoreSample, Vec<String>)> {
    let mut by_kind: BTreeMap<_, Vec<&ResponseRecord>> = BTreeMap::new();
    for r in responses {
        if r.condition.dataset_id == dataset && r.condition.arm == arm && r.status == RunStatus::Ok && r.score.is_some() {
            by_kind.entry(r.condition.kind).or_default().push(r);
        }
    }
    let n: usize = by_kind.values().map(Vec::len).sum();
    if n < 2 {
        return Err(Error::InsufficientData(format!(
            "dataset {dataset:?}: {} arm has {n} usable records, need at least 2",
            arm.tag()
        )));
    }
    let mut groups = Vec::new();
    let mut runs = Vec::new();
    for records in by_kind.values() {
        groups.push(records.iter().map(|r| f64::from(r.score.unwrap_or_default())).collect::<Vec<_>>());
        runs.extend(records.iter().map(|r| r.run_id.clone()));
    }
    Ok((ScoreSample::from_groups(&groups)?, runs))
}

struct SourcedPair {
    pair: DistributionPair,
    null_source: String,
}

fn build_pairs(config: &HarnessConfig, responses: &[ResponseRecord], variant: Variant) -> Result<Vec<SourcedPair>> {
    let specs: Vec<(String, String, Arm)> = match variant {
        Variant::Standard => {
            let ids: std::collections::BTreeSet<&str> = responses.iter().map(|r| r.condition.dataset_id.as_str()).collect();
            ids.into_iter().map(|d| (d.to_owned(), d.to_owned(), Arm::Null)).collect()
        }
        Variant::PreciseNull => {
            if config.precise_null.is_empty() {
                return Err(Error::Validation(vec!["precise-null variant needs config.precise_null pairs".into()]));
            }
            config
                .precise_null
                .iter()
                .map(|p| (p.dataset.clone(), p.null_dataset.clone(), Arm::Alternative))
                .collect()
        }
    };
    if specs.is_empty() {
        return Err(Error::InsufficientData("ledger holds no responses".into()));
    }
    specs
        .into_iter()
        .map(|(dataset, null_dataset, null_arm)| {
            let (alt, alt_runs) = arm_sample(responses, &dataset, Arm::Alternative)?;
            let (null, null_runs) = arm_sample(responses, &null_dataset, null_arm)?;
            let pair = DistributionPair::new(dataset, alt, null).with_provenance(alt_runs, null_runs)?;
            let null_source = if null_arm == Arm::Null { "shuffle".to_owned() } else { null_dataset };
            Ok(SourcedPair { pair, null_source })
        })
        .collect()
}

#[derive(Debug, Clone, Default)]
pub struct AnalyzeOptions {
    pub ledgers: Vec<PathBuf>,
    pub alpha: Option<f64>,
    pub tau: Option<f64>,
    pub variant: Variant,
}

pub fn analysis_dir(config: &HarnessConfig, variant: Variant) -> PathBuf {
    config.out_path().join(match variant {
        Variant::Standard => "analysis",
        Variant::PreciseNull => "analysis-precise-null",
    })
}

/// Classify every dataset in the ledger and write the report files.
pub fn cmd_analyze(config: &HarnessConfig, opts: &AnalyzeOptions) -> Result<AnalysisReport> {
    let thresholds = Thresholds {
        alpha: opts.alpha.unwrap_or(config.thresholds.alpha),
        tau: opts.tau.unwrap_or(config.thresholds.tau),
        ..config.thresholds
    };
    thresholds.validate()?;
    let responses = load_responses(&ledger_paths(config, &opts.ledgers))?;
    let pairs = build_pairs(config, &responses, opts.variant)?;
    let mut datasets = Vec::new();
    for sp in pairs {
        let id = sp.pair.dataset_id.clone();
        let check = classify_with(&sp.pair, &thresholds, opts.variant, crate::seed!(config.master_seed, "analyze", &id))?;
        let mut status_counts = BTreeMap::new();
        for r in responses.iter().filter(|r| r.condition.dataset_id == id) {
            let tag = serde_json::to_value(r.status).ok().and_then(|v| v.as_str().map(str::to_owned)).unwrap_or_default();
            *status_counts.entry(tag).or_insert(0) += 1;
        }
        datasets.push(DatasetReport {
            check,
            null_source: sp.null_source,
            alt_runs: sp.pair.alt_runs,
            null_runs: sp.pair.null_runs,
            status_counts,
        });
    }
    let report = AnalysisReport {
        schema_version: REPORT_SCHEMA_VERSION,
        variant: opts.variant,
        thresholds,
        master_seed: config.master_seed,
        datasets,
    };
    let dir = analysis_dir(config, opts.variant);
    write_json(&dir.join("report.json"), &report)?;
    write_text(&dir.join("summary.md"), &summary_markdown(&report))?;
    write_text(&dir.join("ovl_scatter.csv"), &overlap_scatter_csv(&report)?)?;
    for d in &report.datasets {
        write_text(&dir.join("kde").join(format!("{}.csv", d.check.dataset_id)), &kde_csv(&d.check)?)?;
    }
    Ok(report)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PveDataset {
    pub id: String,
    pub source: String,
    pub pve: f64,
    pub seed: u64,
    pub rows: usize,
    /// R² of the OLS fit on the original outcome.
    pub source_r_squared: f64,
    pub noise_sd: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PveSummary {
    pub schema_version: u32,
    pub config: PathBuf,
    pub plan: PathBuf,
    pub conditions: usize,
    pub datasets: Vec<PveDataset>,
}

pub fn pve_dataset_id(source: &str, pve: f64) -> String {
    format!("{source}-pve-{pve}")
}

/// Synthesize outcomes at each PVE level and write the datasets, a derived
/// config (alternative arm only, `pve_replicates` per kind) and its plan
/// under `<out>/pve`.
pub fn cmd_simulate_pve(config: &HarnessConfig, levels: Option<&[f64]>) -> Result<PveSummary> {
    config.validate()?;
    let levels = levels.unwrap_or(&config.pve_levels);
    if levels.is_empty() {
        return Err(Error::Validation(vec!["no PVE levels given".into()]));
    }
    let bad: Vec<String> = levels
        .iter()
        .filter(|p| !(0.0..=1.0).contains(*p))
        .map(|p| format!("pve level {p} outside [0, 1]"))
        .collect();
    if !bad.is_empty() {
        return Err(Error::Validation(bad));
    }
    let dir = config.out_path().join("pve");
    let mut entries = Vec::new();
    let mut made = Vec::new();
    let sources: Vec<&DatasetEntry> = config.datasets.iter().filter(|d| d.dependent.is_some()).collect();
    if sources.is_empty() {
        return Err(Error::Validation(vec!["simulate-pve needs a dataset with a dependent column".into()]));
    }
    for entry in sources {
        let dependent = entry.dependent.as_deref().expect("filtered");
        if entry.independents.is_empty() {
            return Err(Error::Validation(vec![format!("dataset {:?} names no independent columns", entry.id)]));
        }
        let (ds, meta) = config.load_dataset(entry)?;
        let indep: Vec<&str> = entry.independents.iter().map(String::as_str).collect();
        let design = one_hot_encode(&ds, dependent, &indep)?;
        let fit = fit_signal_model(&design)?;
        for &pve in levels {
            let id = pve_dataset_id(&entry.id, pve);
            let cfg = PveConfig::new(pve, crate::seed!(config.master_seed, "pve", &entry.id, &id))?;
            let z = synthesize_outcome(&fit, &cfg)?;
            let (sds, mut smeta) = synthetic_dataset(&ds, &meta, dependent, &design, &z, &cfg)?;
            let sds = sds.with_name(&id)?;
            smeta.dataset_name = id.clone();
            write_dataset(&sds, &smeta, &dir.join(&id))?;
            entries.push(DatasetEntry {
                id: id.clone(),
                csv: PathBuf::from(&id).join(format!("{id}.csv")),
                metadata: PathBuf::from(&id).join("info.json"),
                dependent: Some(dependent.to_owned()),
                independents: entry.independents.clone(),
            });
            let noise_sd = if pve > 0.0 {
                crate::signal::noise_scale_for_pve(fit.var_yhat, pve)?
            } else {
                fit.sigma_y
            };
            made.push(PveDataset {
                id,
                source: entry.id.clone(),
                pve,
                seed: cfg.seed,
                rows: design.used_rows.len(),
                source_r_squared: fit.r_squared(),
                noise_sd,
            });
        }
    }
    let mut derived = config.clone();
    derived.datasets = entries;
    derived.replicates = config.pve_replicates;
    derived.include_null_arm = false;
    derived.out_dir = PathBuf::from(".");
    derived.precise_null.clear();
    derived.base_dir = dir.clone();
    let config_path = dir.join("config.json");
    derived.save(&config_path)?;
    let (plan_path, plan) = cmd_plan(&derived)?;
    let summary = PveSummary {
        schema_version: REPORT_SCHEMA_VERSION,
        config: config_path,
        plan: plan_path,
        conditions: plan.conditions.len(),
        datasets: made,
    };
    write_json(&dir.join("summary.json"), &summary)?;
    Ok(summary)
}

#[derive(Debug, Clone, Default)]
pub struct CalibrateOptions {
    pub ledgers: Vec<PathBuf>,
    pub replicates: Option<usize>,
    pub resamples: Option<usize>,
}

/// Null calibration of the Yes check on each dataset's alternative arm.
pub fn cmd_calibrate(config: &HarnessConfig, opts: &CalibrateOptions) -> Result<CalibrationReport> {
    let mut cal = config.calibration;
    cal.replicates = opts.replicates.unwrap_or(cal.replicates);
    cal.resamples = opts.resamples.unwrap_or(cal.resamples);
    let responses = load_responses(&ledger_paths(config, &opts.ledgers))?;
    let ids: std::collections::BTreeSet<&str> = responses
        .iter()
        .filter(|r| r.condition.arm == Arm::Alternative)
        .map(|r| r.condition.dataset_id.as_str())
        .collect();
    if ids.is_empty() {
        return Err(Error::InsufficientData("no alternative-arm responses".into()));
    }
    let mut datasets = Vec::new();
    for id in ids {
        let (sample, _) = arm_sample(&responses, id, Arm::Alternative)?;
        let result = calibration_simulation(&sample, &cal, crate::seed!(config.master_seed, "calibrate", id))?;
        datasets.push(DatasetCalibration {
            dataset_id: id.to_owned(),
            result,
        });
    }
    let report = CalibrationReport {
        schema_version: REPORT_SCHEMA_VERSION,
        master_seed: config.master_seed,
        datasets,
    };
    let dir = config.out_path().join("calibration");
    write_json(&dir.join("calibration.json"), &report)?;
    for d in &report.datasets {
        write_text(&dir.join("qq").join(format!("{}.csv", d.dataset_id)), &qq_csv(&d.result)?)?;
    }
    Ok(report)
}

#[derive(Debug, Clone, Default)]
pub struct ConvergeOptions {
    pub ledgers: Vec<PathBuf>,
}

/// Subsampling agreement curves for every dataset and configured mode.
pub fn cmd_converge(config: &HarnessConfig, opts: &ConvergeOptions) -> Result<ConvergenceReport> {
    config.thresholds.validate()?;
    let responses = load_responses(&ledger_paths(config, &opts.ledgers))?;
    let mut analyses = Vec::new();
    for sp in build_pairs(config, &responses, Variant::Standard)? {
        for &mode in &config.convergence.modes {
            let cc = ConvergenceConfig {
                sizes: config.convergence.sizes.clone(),
                mode,
                schedule: config.convergence.schedule,
                thresholds: config.thresholds,
                resamples_small: config.convergence.resamples_small,
            }
            .fit_to(&sp.pair);
            let seed = crate::seed!(config.master_seed, "converge", &sp.pair.dataset_id, mode.tag());
            analyses.push(convergence_analysis(&sp.pair, &cc, seed)?);
        }
    }
    let report = ConvergenceReport {
        schema_version: REPORT_SCHEMA_VERSION,
        master_seed: config.master_seed,
        analyses,
    };
    let dir = config.out_path().join("convergence");
    write_json(&dir.join("convergence.json"), &report)?;
    write_text(&dir.join("curves.csv"), &convergence_csv(&report)?)?;
    Ok(report)
}

#[derive(Debug, Clone, Default)]
pub struct ConfidenceOptions {
    pub jobs: Option<u32>,
}

fn dataset_csv_name(dir: &Path) -> Result<String> {
    let mut names: Vec<String> = fs::read_dir(dir)
        .map_err(|e| Error::io(dir, e))?
        .filter_map(|e| e.ok())
        .filter_map(|e| e.file_name().into_string().ok())
        .filter_map(|n| n.strip_suffix(".csv").map(str::to_owned))
        .collect();
    names.sort();
    names
        .into_iter()
        .next()
        .ok_or_else(|| Error::InvalidArgument(format!("no dataset CSV in {}", dir.display())))
}

/// Supervisor pass over every usable response lacking a confidence record,
/// then the calibration of stated confidence against peer exceedance.
pub fn cmd_confidence(config: &HarnessConfig, opts: &ConfidenceOptions) -> Result<ConfidenceReport> {
    let out = config.out_path();
    let ledger = RunLedger::open(&out.join(LEDGER_FILE))?;
    let templates = config.prompt_templates();
    let pending: Vec<ResponseRecord> = ledger
        .responses()
        .into_iter()
        .filter(|r| r.status == RunStatus::Ok && !ledger.has_confidence(&r.run_id))
        .cloned()
        .collect();
    let run_one = |r: &ResponseRecord| -> Result<()> {
        let dir = out.join(&r.workspace);
        let meta = read_metadata(&dir.join("info.json"))?;
        let name = dataset_csv_name(&dir)?;
        let prompt = render_confidence_prompt(&templates.confidence, &meta, &name, &dir.display().to_string())?;
        let instructions = dir.join(INSTRUCTIONS_FILE);
        let saved = dir.join(ANALYSIS_INSTRUCTIONS_FILE);
        if !saved.exists() {
            fs::rename(&instructions, &saved).map_err(|e| Error::io(&instructions, e))?;
        }
        fs::write(&instructions, prompt).map_err(|e| Error::io(&instructions, e))?;
        let a = run_with_retries(&config.backend, &dir, &name, &r.condition, Task::Confidence, config.max_retries)?;
        let record = ConfidenceRecord {
            run_id: r.run_id.clone(),
            status: a.status,
            confidence: a.output.as_ref().map(|o| o.value),
            explanation: a.output.map(|o| o.explanation),
            wall_time: a.wall_time,
            attempts: a.attempts,
            error: a.error,
            raw_output: a.raw_output,
        };
        ledger.append(&LedgerEntry::Confidence { record })
    };
    thread_pool(opts.jobs.unwrap_or(config.jobs))?.install(|| pending.par_iter().try_for_each(run_one))?;

    let ledger = RunLedger::read(ledger.path())?;
    let responses: Vec<ResponseRecord> = ledger.responses().into_iter().cloned().collect();
    let confidences: Vec<ConfidenceRecord> = ledger.confidences().into_iter().cloned().collect();
    let report = ConfidenceReport {
        schema_version: REPORT_SCHEMA_VERSION,
        calibration: confidence_calibration(&responses, &confidences),
    };
    let dir = out.join("confidence");
    write_json(&dir.join("confidence.json"), &report)?;
    write_text(&dir.join("pairs.csv"), &confidence_pairs_csv(&report.calibration)?)?;
    Ok(report)
}
