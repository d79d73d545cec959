//! Yes check, Overlap check and the regime they jointly determine.

mod calibration;
mod confidence;
mod convergence;

pub use calibration::{calibration_simulation, CalibrationConfig, CalibrationResult, QqPoint};
pub use confidence::{confidence_calibration, ArmCorrelation, ConfidenceCalibration, ConfidencePair, Unjoined};
pub use convergence::{
    convergence_analysis, Component, ConvergenceAnalysis, ConvergenceConfig, ConvergenceCurve, RepetitionSchedule,
    SubsampleMode, DEFAULT_CONVERGENCE_SIZES, DEFAULT_SMALL_RESAMPLES,
};

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::stats::{
    eta_squared, overlap_on_grid, BootstrapResult, BootstrapTest, OverlapResult, ScoreSample, DEFAULT_GRID_POINTS,
    LIKERT_MIDPOINT,
};

pub const DEFAULT_ALPHA: f64 = 0.05;
pub const DEFAULT_TAU: f64 = 0.2;
pub const DEFAULT_RESAMPLES: usize = 10_000;

/// Alternative and null score samples for one dataset and question.
#[derive(Debug, Clone, PartialEq)]
pub struct DistributionPair {
    pub dataset_id: String,
    pub alt: ScoreSample,
    pub null: ScoreSample,
    /// Run ids of the records each sample was built from, in sample order.
    pub alt_runs: Vec<String>,
    pub null_runs: Vec<String>,
}

impl DistributionPair {
    pub fn new(dataset_id: impl Into<String>, alt: ScoreSample, null: ScoreSample) -> Self {
        DistributionPair {
            dataset_id: dataset_id.into(),
            alt,
            null,
            alt_runs: Vec::new(),
            null_runs: Vec::new(),
        }
    }

    pub fn from_scores(dataset_id: impl Into<String>, alt: Vec<f64>, null: Vec<f64>) -> Result<Self> {
        Ok(Self::new(dataset_id, ScoreSample::new(alt)?, ScoreSample::new(null)?))
    }

    pub fn with_provenance(mut self, alt_runs: Vec<String>, null_runs: Vec<String>) -> Result<Self> {
        if alt_runs.len() != self.alt.len() || null_runs.len() != self.null.len() {
            return Err(Error::InvalidArgument("provenance length does not match sample size".into()));
        }
        self.alt_runs = alt_runs;
        self.null_runs = null_runs;
        Ok(self)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    PassedBoth,
    YesOnly,
    OverlapOnly,
    Neither,
}

impl Regime {
    /// Standard rule: strict `p < alpha` passes the Yes check and strict
    /// `ovl < tau` passes the Overlap check.
    pub fn from_checks(p_value: f64, ovl: f64, alpha: f64, tau: f64) -> Regime {
        match (p_value < alpha, ovl < tau) {
            (true, true) => Regime::PassedBoth,
            (true, false) => Regime::YesOnly,
            (false, true) => Regime::OverlapOnly,
            (false, false) => Regime::Neither,
        }
    }

    pub fn passed_yes(self) -> bool {
        matches!(self, Regime::PassedBoth | Regime::YesOnly)
    }

    pub fn passed_overlap(self) -> bool {
        matches!(self, Regime::PassedBoth | Regime::OverlapOnly)
    }

    pub fn label(self) -> &'static str {
        match self {
            Regime::PassedBoth => "Passed both",
            Regime::YesOnly => "Yes check only",
            Regime::OverlapOnly => "Overlap check only",
            Regime::Neither => "Neither",
        }
    }
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

pub const FAILED_YES_LABEL: &str = "Failed the Yes check";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    #[default]
    Standard,
    PreciseNull,
}

impl FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "standard" => Ok(Variant::Standard),
            "precise-null" | "precise_null" => Ok(Variant::PreciseNull),
            other => Err(Error::InvalidArgument(format!("unknown variant {other:?}"))),
        }
    }
}

/// Thresholds and resolution shared by every classification.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Thresholds {
    pub alpha: f64,
    pub tau: f64,
    pub resamples: usize,
    #[serde(default = "default_grid")]
    pub grid_points: usize,
}

fn default_grid() -> usize {
    DEFAULT_GRID_POINTS
}

impl Default for Thresholds {
    fn default() -> Self {
        Thresholds {
            alpha: DEFAULT_ALPHA,
            tau: DEFAULT_TAU,
            resamples: DEFAULT_RESAMPLES,
            grid_points: DEFAULT_GRID_POINTS,
        }
    }
}

impl Thresholds {
    pub fn validation_errors(&self) -> Vec<String> {
        let mut errs = Vec::new();
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            errs.push(format!("alpha must lie in (0, 1), got {}", self.alpha));
        }
        if !(self.tau > 0.0 && self.tau <= 1.0) {
            errs.push(format!("tau must lie in (0, 1], got {}", self.tau));
        }
        if self.resamples == 0 {
            errs.push("resamples must be at least 1".into());
        }
        if self.grid_points < 2 {
            errs.push("grid_points must be at least 2".into());
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

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SampleSummary {
    pub n: usize,
    pub mean: f64,
    pub sd: f64,
}

impl SampleSummary {
    pub fn of(scores: &[f64]) -> Self {
        SampleSummary {
            n: scores.len(),
            mean: crate::stats::mean(scores),
            sd: crate::stats::sample_sd(scores),
        }
    }
}

/// Share of alternative-arm variance explained by perturbation kind.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EtaDiagnostic {
    pub eta_squared: Option<f64>,
    pub group_sizes: Vec<usize>,
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub dataset_id: String,
    pub variant: Variant,
    pub alpha: f64,
    pub tau: f64,
    pub regime: Regime,
    /// Regime label, or [`FAILED_YES_LABEL`] when the precise-null rule fired.
    pub label: String,
    pub precise_null_override: bool,
    pub alt: SampleSummary,
    pub null: SampleSummary,
    pub bootstrap: BootstrapResult,
    pub overlap: OverlapResult,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eta_squared: Option<EtaDiagnostic>,
}

impl CheckReport {
    pub fn passed_yes(&self) -> bool {
        self.bootstrap.p_value < self.alpha && !self.precise_null_override
    }

    pub fn passed_overlap(&self) -> bool {
        self.overlap.ovl < self.tau
    }
}

/// Per-component outcome without the report bookkeeping; the convergence
/// loop calls this thousands of times.
pub(crate) fn check_slices(
    alt: &[f64],
    null: &[f64],
    thresholds: &Thresholds,
    seed: u64,
) -> Result<(BootstrapResult, OverlapResult)> {
    let boot = BootstrapTest::new(crate::seed!(seed, "yes-check"))
        .mu0(LIKERT_MIDPOINT)
        .resamples(thresholds.resamples)
        .run_slice(alt, None)?;
    let overlap = overlap_on_grid(alt, null, thresholds.grid_points)?;
    Ok((boot, overlap))
}

fn eta_diagnostic(sample: &ScoreSample) -> Option<EtaDiagnostic> {
    let groups = sample.groups()?;
    let group_sizes = groups.iter().map(Vec::len).collect();
    Some(match eta_squared(&groups) {
        Ok(e) => EtaDiagnostic {
            eta_squared: Some(e.eta_squared),
            group_sizes,
            note: None,
        },
        Err(e) => EtaDiagnostic {
            eta_squared: None,
            group_sizes,
            note: Some(e.to_string()),
        },
    })
}

/// Run both checks and classify under the chosen variant.
pub fn classify_with(pair: &DistributionPair, thresholds: &Thresholds, variant: Variant, seed: u64) -> Result<CheckReport> {
    thresholds.validate()?;
    let (bootstrap, overlap) = check_slices(pair.alt.scores(), pair.null.scores(), thresholds, seed)?;
    let null = SampleSummary::of(pair.null.scores());
    let standard = Regime::from_checks(bootstrap.p_value, overlap.ovl, thresholds.alpha, thresholds.tau);
    let fire = variant == Variant::PreciseNull && overlap.ovl >= thresholds.tau && null.mean > LIKERT_MIDPOINT;
    let (regime, label) = if fire {
        (Regime::OverlapOnly, FAILED_YES_LABEL.to_owned())
    } else {
        (standard, standard.label().to_owned())
    };
    Ok(CheckReport {
        dataset_id: pair.dataset_id.clone(),
        variant,
        alpha: thresholds.alpha,
        tau: thresholds.tau,
        regime,
        label,
        precise_null_override: fire,
        alt: SampleSummary::of(pair.alt.scores()),
        null,
        bootstrap,
        overlap,
        eta_squared: eta_diagnostic(&pair.alt),
    })
}

pub fn classify(pair: &DistributionPair, thresholds: &Thresholds, seed: u64) -> Result<CheckReport> {
    classify_with(pair, thresholds, Variant::Standard, seed)
}

/// Null arm built from a low-PVE synthesis. High overlap with a null mean
/// above the midpoint is reported as a Yes-check failure regardless of `p`.
pub fn classify_precise_null(pair: &DistributionPair, thresholds: &Thresholds, seed: u64) -> Result<CheckReport> {
    classify_with(pair, thresholds, Variant::PreciseNull, seed)
}
