//! Per-run workspaces, prompt rendering, backend execution and output parsing.

mod backend;
mod output;
mod prompt;

pub use backend::{
    attempt_seed, execute_agent, AgentBackend, CommandBackend, ExitKind, MockBackend, MockConfidence, MockOverride,
    RawOutcome, ScoreModel, Task, DEFAULT_COMMAND, DEFAULT_TIMEOUT_SECS,
};
pub use output::{
    format_output, parse_conclusion, parse_confidence, parse_output_text, AgentOutput, ParseFailure,
    CONCLUSION_FILE, CONFIDENCE_FILE,
};
pub use prompt::{
    placeholders, render_analysis_prompt, render_confidence_prompt, render_template, PromptTemplates,
    DEFAULT_ANALYSIS_TEMPLATE, DEFAULT_CONFIDENCE_TEMPLATE, PROMPT_PLACEHOLDERS,
};

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::perturb::RunCondition;
use crate::tabular::{write_dataset, DatasetMetadata, TabularDataset};

pub const INSTRUCTIONS_FILE: &str = "AGENTS.md";
pub const PACKAGES_FILE: &str = "packages.txt";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunStatus {
    Ok,
    AgentError,
    ParseError,
    Timeout,
}

/// Result of one analysis run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResponseRecord {
    pub run_id: String,
    pub condition: RunCondition,
    pub status: RunStatus,
    #[serde(default)]
    pub score: Option<u8>,
    #[serde(default)]
    pub explanation: Option<String>,
    pub wall_time: f64,
    /// Workspace path relative to the output root.
    pub workspace: String,
    pub attempts: u32,
    pub attempt_seeds: Vec<u64>,
    #[serde(default)]
    pub error: Option<String>,
    /// Unparseable output kept for audit.
    #[serde(default)]
    pub raw_output: Option<String>,
    #[serde(default)]
    pub descriptions_removed: bool,
}

/// Result of one supervisor (confidence) run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfidenceRecord {
    pub run_id: String,
    pub status: RunStatus,
    #[serde(default)]
    pub confidence: Option<u8>,
    #[serde(default)]
    pub explanation: Option<String>,
    pub wall_time: f64,
    pub attempts: u32,
    #[serde(default)]
    pub error: Option<String>,
    #[serde(default)]
    pub raw_output: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum WorkspaceState {
    Prepared(PathBuf),
    /// Resume found a completed run; nothing was touched.
    AlreadyComplete(PathBuf),
}

impl WorkspaceState {
    pub fn path(&self) -> &Path {
        match self {
            WorkspaceState::Prepared(p) | WorkspaceState::AlreadyComplete(p) => p,
        }
    }
}

/// Inputs that are the same for every workspace of a plan.
#[derive(Debug, Clone)]
pub struct WorkspaceSpec<'a> {
    pub templates: &'a PromptTemplates,
    pub packages: &'a [String],
    pub resume: bool,
}

/// Create `root/<run_id>/` holding the (already perturbed) dataset CSV,
/// `info.json`, the rendered `AGENTS.md` and `packages.txt`.
pub fn prepare_workspace(
    dataset: &TabularDataset,
    metadata: &DatasetMetadata,
    condition: &RunCondition,
    root: &Path,
    spec: &WorkspaceSpec<'_>,
) -> Result<WorkspaceState> {
    let run_id = condition.run_id();
    let dir = root.join(&run_id);
    if dir.exists() {
        if !spec.resume {
            return Err(Error::WorkspaceCollision(run_id));
        }
        if dir.join(CONCLUSION_FILE).exists() {
            return Ok(WorkspaceState::AlreadyComplete(dir));
        }
        fs::remove_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
    }
    fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
    write_dataset(dataset, metadata, &dir)?;
    let packages_note = spec.packages.join("\n");
    let prompt = render_analysis_prompt(
        &spec.templates.analysis,
        metadata,
        dataset.name(),
        &dir.display().to_string(),
        &packages_note,
    )?;
    let agents = dir.join(INSTRUCTIONS_FILE);
    fs::write(&agents, prompt).map_err(|e| Error::io(&agents, e))?;
    let packages = dir.join(PACKAGES_FILE);
    let mut text = packages_note;
    if !text.is_empty() {
        text.push('\n');
    }
    fs::write(&packages, text).map_err(|e| Error::io(&packages, e))?;
    Ok(WorkspaceState::Prepared(dir))
}

/// Outcome of running a task with retries.
#[derive(Debug, Clone)]
pub struct Attempted {
    pub status: RunStatus,
    pub output: Option<AgentOutput>,
    pub error: Option<String>,
    pub raw_output: Option<String>,
    pub wall_time: f64,
    pub attempts: u32,
    pub attempt_seeds: Vec<u64>,
}

/// Execute and parse, re-running up to `max_retries` times on failure. Each
/// retry uses a seed derived from the condition seed and the attempt number.
pub fn run_with_retries(
    backend: &AgentBackend,
    workspace: &Path,
    dataset_name: &str,
    condition: &RunCondition,
    task: Task,
    max_retries: u32,
) -> Result<Attempted> {
    let output_file = match task {
        Task::Analysis => CONCLUSION_FILE,
        Task::Confidence => CONFIDENCE_FILE,
    };
    let mut wall_time = 0.0;
    let mut seeds = Vec::new();
    let mut last = None;
    for attempt in 0..=max_retries {
        let out_path = workspace.join(output_file);
        if out_path.exists() {
            fs::remove_file(&out_path).map_err(|e| Error::io(&out_path, e))?;
        }
        seeds.push(attempt_seed(condition.seed, attempt));
        let raw = execute_agent(backend, workspace, dataset_name, condition, task, attempt)?;
        wall_time += raw.duration_secs;
        let (status, output, error, raw_output) = match raw.exit {
            ExitKind::Timeout => (RunStatus::Timeout, None, Some("agent timed out".to_owned()), None),
            ExitKind::Failed { code } => (
                RunStatus::AgentError,
                None,
                Some(format!("agent exited with status {code:?}")),
                None,
            ),
            ExitKind::SpawnError { message } => (RunStatus::AgentError, None, Some(message), None),
            ExitKind::Success => {
                let parsed = match task {
                    Task::Analysis => parse_conclusion(workspace),
                    Task::Confidence => parse_confidence(workspace),
                };
                match parsed {
                    Ok(o) => (RunStatus::Ok, Some(o), None, None),
                    Err(f) => (RunStatus::ParseError, None, Some(f.reason), f.content),
                }
            }
        };
        let done = status == RunStatus::Ok;
        last = Some(Attempted {
            status,
            output,
            error,
            raw_output,
            wall_time,
            attempts: attempt + 1,
            attempt_seeds: seeds.clone(),
        });
        if done {
            break;
        }
    }
    Ok(last.expect("at least one attempt"))
}
