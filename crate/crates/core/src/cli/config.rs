//! Harness configuration file.

use std::collections::HashSet;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::agent::{AgentBackend, MockBackend, PromptTemplates};
use crate::checks::{CalibrationConfig, RepetitionSchedule, SubsampleMode, Thresholds, DEFAULT_CONVERGENCE_SIZES, DEFAULT_SMALL_RESAMPLES};
use crate::error::{Error, Result};
use crate::perturb::{PerturbationKind, PerturbationSettings};
use crate::tabular::{load_dataset, DatasetMetadata, TabularDataset};

pub const CONFIG_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetEntry {
    pub id: String,
    pub csv: PathBuf,
    pub metadata: PathBuf,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dependent: Option<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub independents: Vec<String>,
}

/// Use the alternative-arm scores of `null_dataset` (typically a PVE 0
/// synthesis) as the null distribution for `dataset`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PreciseNullPair {
    pub dataset: String,
    pub null_dataset: String,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TemplateOverrides {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub analysis: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub confidence: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConvergenceSettings {
    #[serde(default = "default_sizes")]
    pub sizes: Vec<usize>,
    #[serde(default = "default_modes")]
    pub modes: Vec<SubsampleMode>,
    #[serde(default)]
    pub schedule: RepetitionSchedule,
    #[serde(default = "default_small")]
    pub resamples_small: usize,
}

fn default_sizes() -> Vec<usize> {
    DEFAULT_CONVERGENCE_SIZES.to_vec()
}
fn default_modes() -> Vec<SubsampleMode> {
    vec![SubsampleMode::Random, SubsampleMode::AltOnly]
}
fn default_small() -> usize {
    DEFAULT_SMALL_RESAMPLES
}

impl Default for ConvergenceSettings {
    fn default() -> Self {
        ConvergenceSettings {
            sizes: default_sizes(),
            modes: default_modes(),
            schedule: RepetitionSchedule::default(),
            resamples_small: DEFAULT_SMALL_RESAMPLES,
        }
    }
}

fn default_schema() -> u32 {
    CONFIG_SCHEMA_VERSION
}
fn default_out() -> PathBuf {
    PathBuf::from("out")
}
fn default_backend() -> AgentBackend {
    AgentBackend::Mock(MockBackend::default())
}
fn default_kinds() -> Vec<PerturbationKind> {
    PerturbationKind::DEFAULT_PCS.to_vec()
}
fn default_replicates() -> u32 {
    20
}
fn default_true() -> bool {
    true
}
fn default_pve() -> Vec<f64> {
    vec![0.0, 0.01, 0.1]
}
fn default_pve_replicates() -> u32 {
    5
}
fn default_one() -> u32 {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HarnessConfig {
    #[serde(default = "default_schema")]
    pub schema_version: u32,
    #[serde(default)]
    pub master_seed: u64,
    /// Relative paths resolve against the config file's directory.
    #[serde(default = "default_out")]
    pub out_dir: PathBuf,
    pub datasets: Vec<DatasetEntry>,
    #[serde(default = "default_backend")]
    pub backend: AgentBackend,
    #[serde(default = "default_kinds")]
    pub pcs_kinds: Vec<PerturbationKind>,
    #[serde(default = "default_replicates")]
    pub replicates: u32,
    #[serde(default = "default_true")]
    pub include_null_arm: bool,
    #[serde(default)]
    pub perturbation: PerturbationSettings,
    #[serde(default)]
    pub thresholds: Thresholds,
    #[serde(default = "default_pve")]
    pub pve_levels: Vec<f64>,
    #[serde(default = "default_pve_replicates")]
    pub pve_replicates: u32,
    #[serde(default = "default_one")]
    pub jobs: u32,
    #[serde(default = "default_one")]
    pub max_retries: u32,
    #[serde(default)]
    pub packages: Vec<String>,
    #[serde(default)]
    pub templates: TemplateOverrides,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub precise_null: Vec<PreciseNullPair>,
    #[serde(default)]
    pub convergence: ConvergenceSettings,
    #[serde(default)]
    pub calibration: CalibrationConfig,
    #[serde(skip)]
    pub base_dir: PathBuf,
}

impl HarnessConfig {
    /// Config with defaults for everything but the datasets.
    pub fn new(datasets: Vec<DatasetEntry>) -> Self {
        HarnessConfig {
            schema_version: CONFIG_SCHEMA_VERSION,
            master_seed: 0,
            out_dir: default_out(),
            datasets,
            backend: default_backend(),
            pcs_kinds: default_kinds(),
            replicates: default_replicates(),
            include_null_arm: true,
            perturbation: PerturbationSettings::default(),
            thresholds: Thresholds::default(),
            pve_levels: default_pve(),
            pve_replicates: default_pve_replicates(),
            jobs: 1,
            max_retries: 1,
            packages: Vec::new(),
            templates: TemplateOverrides::default(),
            precise_null: Vec::new(),
            convergence: ConvergenceSettings::default(),
            calibration: CalibrationConfig::default(),
            base_dir: PathBuf::new(),
        }
    }

    pub fn from_json(text: &str, base_dir: impl Into<PathBuf>) -> Result<Self> {
        let mut cfg: HarnessConfig = serde_json::from_str(text).map_err(|e| Error::Validation(vec![format!("config: {e}")]))?;
        cfg.base_dir = base_dir.into();
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Self::from_json(&text, base)
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_json_pretty() + "\n").map_err(|e| Error::io(path, e))
    }

    pub fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base_dir.join(p)
        }
    }

    pub fn out_path(&self) -> PathBuf {
        self.resolve(&self.out_dir)
    }

    pub fn dataset(&self, id: &str) -> Result<&DatasetEntry> {
        self.datasets
            .iter()
            .find(|d| d.id == id)
            .ok_or_else(|| Error::InvalidArgument(format!("dataset {id:?} not in config")))
    }

    pub fn load_dataset(&self, entry: &DatasetEntry) -> Result<(TabularDataset, DatasetMetadata)> {
        load_dataset(&self.resolve(&entry.csv), &self.resolve(&entry.metadata))
    }

    pub fn prompt_templates(&self) -> PromptTemplates {
        let mut t = PromptTemplates::default();
        if let Some(a) = &self.templates.analysis {
            t.analysis = a.clone();
        }
        if let Some(c) = &self.templates.confidence {
            t.confidence = c.clone();
        }
        t
    }

    /// Every problem with the config, not just the first.
    pub fn validation_errors(&self) -> Vec<String> {
        let mut errs = self.thresholds.validation_errors();
        if self.schema_version != CONFIG_SCHEMA_VERSION {
            errs.push(format!("unsupported schema_version {}", self.schema_version));
        }
        if self.datasets.is_empty() {
            errs.push("at least one dataset required".into());
        }
        let mut ids = HashSet::new();
        for d in &self.datasets {
            if d.id.is_empty() || d.id.contains("__") || !d.id.chars().all(|c| c.is_ascii_alphanumeric() || "-_.".contains(c)) {
                errs.push(format!("dataset id {:?} must be non-empty ASCII [A-Za-z0-9._-] without \"__\"", d.id));
            }
            if !ids.insert(&d.id) {
                errs.push(format!("duplicate dataset id {:?}", d.id));
            }
            if d.dependent.is_none() && !d.independents.is_empty() {
                errs.push(format!("dataset {:?} lists independents without a dependent", d.id));
            }
        }
        if self.replicates == 0 {
            errs.push("replicates must be at least 1".into());
        }
        if self.pve_replicates == 0 {
            errs.push("pve_replicates must be at least 1".into());
        }
        if self.jobs == 0 {
            errs.push("jobs must be at least 1".into());
        }
        if self.pcs_kinds.is_empty() {
            errs.push("pcs_kinds must not be empty".into());
        }
        if self.pcs_kinds.iter().any(|k| k.is_null_defining()) {
            errs.push("shuffle_feature_values defines the null arm and cannot be a PCS kind".into());
        }
        if self.pcs_kinds.iter().collect::<HashSet<_>>().len() != self.pcs_kinds.len() {
            errs.push("pcs_kinds contains duplicates".into());
        }
        for &p in &self.pve_levels {
            if !(0.0..=1.0).contains(&p) {
                errs.push(format!("pve level {p} outside [0, 1]"));
            }
        }
        if let Err(e) = self.backend.validate() {
            errs.push(format!("backend: {e}"));
        }
        let c = &self.convergence;
        if c.sizes.iter().any(|&n| n < 2) {
            errs.push("convergence sizes must be at least 2".into());
        }
        if c.modes.is_empty() {
            errs.push("convergence modes must not be empty".into());
        }
        if c.resamples_small == 0 {
            errs.push("convergence resamples_small must be at least 1".into());
        }
        let cal = &self.calibration;
        if cal.replicates == 0 || cal.resamples == 0 {
            errs.push("calibration replicates and resamples must be at least 1".into());
        }
        if !(cal.alpha > 0.0 && cal.alpha < 1.0) {
            errs.push(format!("calibration alpha {} outside (0, 1)", cal.alpha));
        }
        errs
    }

    pub fn validate(&self) -> Result<()> {
        let errs = self.validation_errors();
        if errs.is_empty() {
            Ok(())
        } else {
            Err(Error::Validation(errs))
        }
    }
}
