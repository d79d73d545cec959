//! Agent backends: an external command, or a seeded mock.

use std::fs;
use std::path::Path;
use std::process::{Command, Stdio};
use std::thread;
use std::time::{Duration, Instant};

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::output::{format_output, parse_conclusion, CONCLUSION_FILE, CONFIDENCE_FILE};
use crate::error::{Error, Result};
use crate::perturb::{Arm, PerturbationKind, RunCondition};
use crate::seed;

pub const DEFAULT_TIMEOUT_SECS: u64 = 1800;

/// Mirrors the invocation used for Codex-style coding agents.
pub const DEFAULT_COMMAND: &str = "cd {workspace} && npx codex exec --config model_reasoning_effort=\"high\" --sandbox workspace-write \"Follow the instructions given in 'AGENTS.md'\"";

/// Which pass an execution belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Task {
    Analysis,
    Confidence,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum AgentBackend {
    Command(CommandBackend),
    Mock(MockBackend),
}

impl AgentBackend {
    pub fn validate(&self) -> Result<()> {
        match self {
            AgentBackend::Command(c) => c.validate(),
            AgentBackend::Mock(m) => m.validate(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CommandBackend {
    /// Shell command; `{workspace}` and `{dataset_name}` are substituted
    /// (shell-quoted) before running under `sh -c`.
    pub command: String,
    #[serde(default = "default_timeout")]
    pub timeout_secs: u64,
    /// Environment variables passed through to the agent. Everything else is
    /// cleared.
    #[serde(default = "default_env_allowlist")]
    pub env_allowlist: Vec<String>,
}

fn default_timeout() -> u64 {
    DEFAULT_TIMEOUT_SECS
}

fn default_env_allowlist() -> Vec<String> {
    vec!["PATH".into(), "HOME".into()]
}

impl Default for CommandBackend {
    fn default() -> Self {
        CommandBackend {
            command: DEFAULT_COMMAND.into(),
            timeout_secs: DEFAULT_TIMEOUT_SECS,
            env_allowlist: default_env_allowlist(),
        }
    }
}

impl CommandBackend {
    pub fn new(command: impl Into<String>) -> Self {
        CommandBackend {
            command: command.into(),
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !self.command.contains("{workspace}") {
            return Err(Error::InvalidArgument(
                "command template must contain the {workspace} placeholder".into(),
            ));
        }
        if self.timeout_secs == 0 {
            return Err(Error::InvalidArgument("timeout must be positive".into()));
        }
        Ok(())
    }

    fn render(&self, workspace: &Path, dataset_name: &str) -> String {
        self.command
            .replace("{workspace}", &shell_quote(&workspace.display().to_string()))
            .replace("{dataset_name}", &shell_quote(dataset_name))
    }
}

fn shell_quote(s: &str) -> String {
    format!("'{}'", s.replace('\'', r"'\''"))
}

/// Normal score model for one arm; draws are rounded and clamped to [0, 100].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScoreModel {
    pub mean: f64,
    pub sd: f64,
}

impl ScoreModel {
    pub fn new(mean: f64, sd: f64) -> Self {
        ScoreModel { mean, sd }
    }

    pub fn draw(&self, rng: &mut impl Rng) -> u8 {
        let z: f64 = if self.sd > 0.0 { rng.sample(StandardNormal) } else { 0.0 };
        (self.mean + self.sd * z).round().clamp(0.0, 100.0) as u8
    }
}

/// Replaces the arm model for matching conditions. `None` fields match anything.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MockOverride {
    #[serde(default)]
    pub dataset: Option<String>,
    #[serde(default)]
    pub arm: Option<Arm>,
    #[serde(default)]
    pub kind: Option<PerturbationKind>,
    pub mean: f64,
    pub sd: f64,
}

/// Supervisor-pass model: `confidence = intercept + slope·(score − 50) + N(0, sd)`,
/// rounded and clamped.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MockConfidence {
    pub intercept: f64,
    pub slope: f64,
    pub sd: f64,
}

impl Default for MockConfidence {
    fn default() -> Self {
        MockConfidence {
            intercept: 50.0,
            slope: -0.5,
            sd: 10.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MockBackend {
    pub alternative: ScoreModel,
    pub null: ScoreModel,
    #[serde(default)]
    pub overrides: Vec<MockOverride>,
    #[serde(default)]
    pub confidence: MockConfidence,
}

impl Default for MockBackend {
    fn default() -> Self {
        MockBackend {
            alternative: ScoreModel::new(70.0, 8.0),
            null: ScoreModel::new(25.0, 8.0),
            overrides: Vec::new(),
            confidence: MockConfidence::default(),
        }
    }
}

impl MockBackend {
    pub fn new(alternative: ScoreModel, null: ScoreModel) -> Self {
        MockBackend {
            alternative,
            null,
            ..Default::default()
        }
    }

    pub fn with_override(mut self, o: MockOverride) -> Self {
        self.overrides.push(o);
        self
    }

    pub fn validate(&self) -> Result<()> {
        let models = [self.alternative, self.null]
            .into_iter()
            .chain(self.overrides.iter().map(|o| ScoreModel::new(o.mean, o.sd)));
        for m in models {
            if !m.mean.is_finite() || !m.sd.is_finite() || m.sd < 0.0 {
                return Err(Error::InvalidArgument(format!(
                    "mock model needs a finite mean and non-negative SD, got ({}, {})",
                    m.mean, m.sd
                )));
            }
        }
        let c = self.confidence;
        if !(c.intercept.is_finite() && c.slope.is_finite() && c.sd.is_finite() && c.sd >= 0.0) {
            return Err(Error::InvalidArgument("invalid mock confidence model".into()));
        }
        Ok(())
    }

    /// The model in force for a condition: last matching override, else the arm default.
    pub fn model_for(&self, condition: &RunCondition) -> ScoreModel {
        self.overrides
            .iter()
            .rev()
            .find(|o| {
                o.dataset.as_deref().is_none_or(|d| d == condition.dataset_id)
                    && o.arm.is_none_or(|a| a == condition.arm)
                    && o.kind.is_none_or(|k| k == condition.kind)
            })
            .map(|o| ScoreModel::new(o.mean, o.sd))
            .unwrap_or(match condition.arm {
                Arm::Alternative => self.alternative,
                Arm::Null => self.null,
            })
    }

    /// Score the mock analyst reports for `condition` on a given attempt.
    pub fn draw_score(&self, condition: &RunCondition, attempt: u32) -> u8 {
        let mut rng = seed::rng(seed!(attempt_seed(condition.seed, attempt), "mock-score"));
        self.model_for(condition).draw(&mut rng)
    }

    pub fn draw_confidence(&self, condition: &RunCondition, score: Option<u8>, attempt: u32) -> u8 {
        let mut rng = seed::rng(seed!(attempt_seed(condition.seed, attempt), "mock-confidence"));
        let c = self.confidence;
        let centre = c.intercept + c.slope * (f64::from(score.unwrap_or(50)) - 50.0);
        ScoreModel::new(centre, c.sd).draw(&mut rng)
    }
}

/// Seed for a retry: the condition seed itself on the first attempt.
pub fn attempt_seed(seed: u64, attempt: u32) -> u64 {
    if attempt == 0 {
        seed
    } else {
        seed!(seed, "retry", attempt)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum ExitKind {
    Success,
    Failed { code: Option<i32> },
    Timeout,
    SpawnError { message: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RawOutcome {
    pub exit: ExitKind,
    pub duration_secs: f64,
}

/// Run the backend for one condition inside `workspace`.
pub fn execute_agent(
    backend: &AgentBackend,
    workspace: &Path,
    dataset_name: &str,
    condition: &RunCondition,
    task: Task,
    attempt: u32,
) -> Result<RawOutcome> {
    let start = Instant::now();
    let exit = match backend {
        AgentBackend::Mock(mock) => {
            let (file, text) = match task {
                Task::Analysis => {
                    let score = mock.draw_score(condition, attempt);
                    let explanation = format!(
                        "Mock analysis of {} ({} arm, {}, replicate {}).",
                        condition.dataset_id, condition.arm, condition.kind, condition.replicate
                    );
                    (CONCLUSION_FILE, format_output("response", score, &explanation))
                }
                Task::Confidence => {
                    let score = parse_conclusion(workspace).ok().map(|o| o.value);
                    let conf = mock.draw_confidence(condition, score, attempt);
                    let explanation = format!("Mock review of {}.", condition.run_id());
                    (CONFIDENCE_FILE, format_output("confidence", conf, &explanation))
                }
            };
            let path = workspace.join(file);
            fs::write(&path, text + "\n").map_err(|e| Error::io(&path, e))?;
            ExitKind::Success
        }
        AgentBackend::Command(cmd) => run_command(cmd, workspace, dataset_name, task)?,
    };
    Ok(RawOutcome {
        exit,
        duration_secs: start.elapsed().as_secs_f64(),
    })
}

fn run_command(cmd: &CommandBackend, workspace: &Path, dataset_name: &str, task: Task) -> Result<ExitKind> {
    let tag = match task {
        Task::Analysis => "analysis",
        Task::Confidence => "confidence",
    };
    let stdout_path = workspace.join(format!("agent_{tag}.stdout.log"));
    let stderr_path = workspace.join(format!("agent_{tag}.stderr.log"));
    let stdout = fs::File::create(&stdout_path).map_err(|e| Error::io(&stdout_path, e))?;
    let stderr = fs::File::create(&stderr_path).map_err(|e| Error::io(&stderr_path, e))?;
    let mut command = Command::new("sh");
    command
        .arg("-c")
        .arg(cmd.render(workspace, dataset_name))
        .current_dir(workspace)
        .env_clear()
        .stdin(Stdio::null())
        .stdout(stdout)
        .stderr(stderr);
    for key in &cmd.env_allowlist {
        if let Ok(value) = std::env::var(key) {
            command.env(key, value);
        }
    }
    let mut child = match command.spawn() {
        Ok(c) => c,
        Err(e) => return Ok(ExitKind::SpawnError { message: e.to_string() }),
    };
    let deadline = Instant::now() + Duration::from_secs(cmd.timeout_secs);
    loop {
        match child.try_wait() {
            Ok(Some(status)) if status.success() => return Ok(ExitKind::Success),
            Ok(Some(status)) => return Ok(ExitKind::Failed { code: status.code() }),
            Ok(None) if Instant::now() >= deadline => {
                let _ = child.kill();
                let _ = child.wait();
                return Ok(ExitKind::Timeout);
            }
            Ok(None) => thread::sleep(Duration::from_millis(10)),
            Err(e) => return Err(Error::io(workspace, e)),
        }
    }
}
