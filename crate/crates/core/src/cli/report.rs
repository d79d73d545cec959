//! Report files: JSON, a Markdown summary table and plot-data CSVs.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::checks::{CalibrationResult, CheckReport, ConfidenceCalibration, ConvergenceAnalysis, Thresholds, Variant};
use crate::error::{Error, Result};

pub const REPORT_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetReport {
    #[serde(flatten)]
    pub check: CheckReport,
    /// `"shuffle"` for the standard null arm, otherwise the dataset whose
    /// alternative-arm scores served as the null.
    pub null_source: String,
    pub alt_runs: Vec<String>,
    pub null_runs: Vec<String>,
    pub status_counts: BTreeMap<String, usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisReport {
    pub schema_version: u32,
    pub variant: Variant,
    pub thresholds: Thresholds,
    pub master_seed: u64,
    pub datasets: Vec<DatasetReport>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub schema_version: u32,
    pub master_seed: u64,
    pub analyses: Vec<ConvergenceAnalysis>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetCalibration {
    pub dataset_id: String,
    #[serde(flatten)]
    pub result: CalibrationResult,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationReport {
    pub schema_version: u32,
    pub master_seed: u64,
    pub datasets: Vec<DatasetCalibration>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfidenceReport {
    pub schema_version: u32,
    #[serde(flatten)]
    pub calibration: ConfidenceCalibration,
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value).map_err(|e| Error::json(path.display().to_string(), e))?;
    write_text(path, &(text + "\n"))
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn csv_table(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<String> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    w.write_record(header).map_err(|e| Error::Csv(e.to_string()))?;
    for r in rows {
        w.write_record(&r).map_err(|e| Error::Csv(e.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Csv(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

/// One row per dataset in the layout of a results table.
pub fn summary_markdown(report: &AnalysisReport) -> String {
    let mut out = String::from("| Dataset | Null mean (SD) | Alt mean (SD) | p-value | OVL | Regime |\n|---|---|---|---|---|---|\n");
    for d in &report.datasets {
        let c = &d.check;
        out.push_str(&format!(
            "| {} | {:.2} ({:.2}) | {:.2} ({:.2}) | {:.4} | {:.3} | {} |\n",
            c.dataset_id, c.null.mean, c.null.sd, c.alt.mean, c.alt.sd, c.bootstrap.p_value, c.overlap.ovl, c.label
        ));
    }
    out.push_str(&format!(
        "\nalpha = {}, tau = {}, B = {}, variant = {}\n",
        report.thresholds.alpha,
        report.thresholds.tau,
        report.thresholds.resamples,
        match report.variant {
            Variant::Standard => "standard",
            Variant::PreciseNull => "precise-null",
        }
    ));
    out
}

/// KDE curves of both arms on the overlap grid.
pub fn kde_csv(check: &CheckReport) -> Result<String> {
    let o = &check.overlap;
    csv_table(
        &["x", "density_alt", "density_null"],
        o.grid
            .iter()
            .zip(&o.density_alt)
            .zip(&o.density_null)
            .map(|((x, a), n)| vec![x.to_string(), a.to_string(), n.to_string()]),
    )
}

pub fn overlap_scatter_csv(report: &AnalysisReport) -> Result<String> {
    csv_table(
        &["dataset", "alt_mean", "null_mean", "ovl", "p_value", "regime"],
        report.datasets.iter().map(|d| {
            let c = &d.check;
            vec![
                c.dataset_id.clone(),
                c.alt.mean.to_string(),
                c.null.mean.to_string(),
                c.overlap.ovl.to_string(),
                c.bootstrap.p_value.to_string(),
                c.label.clone(),
            ]
        }),
    )
}

pub fn convergence_csv(report: &ConvergenceReport) -> Result<String> {
    let mut rows = Vec::new();
    for a in &report.analyses {
        for c in &a.curves {
            for ((n, agree), reps) in c.sizes.iter().zip(&c.agreement).zip(&c.repetitions) {
                rows.push(vec![
                    a.dataset_id.clone(),
                    c.mode.tag().to_owned(),
                    c.component.tag().to_owned(),
                    n.to_string(),
                    agree.to_string(),
                    reps.to_string(),
                ]);
            }
        }
    }
    csv_table(&["dataset", "mode", "component", "n", "agreement", "repetitions"], rows)
}

pub fn qq_csv(result: &CalibrationResult) -> Result<String> {
    csv_table(
        &["uniform", "p_blocked", "p_unblocked"],
        result
            .qq
            .iter()
            .map(|q| vec![q.uniform.to_string(), q.blocked.to_string(), q.unblocked.to_string()]),
    )
}

pub fn confidence_pairs_csv(c: &ConfidenceCalibration) -> Result<String> {
    csv_table(
        &["run_id", "dataset", "arm", "score", "confidence", "exceedance"],
        c.pairs.iter().map(|p| {
            vec![
                p.run_id.clone(),
                p.dataset_id.clone(),
                p.arm.tag().to_owned(),
                p.score.to_string(),
                p.confidence.to_string(),
                p.exceedance.to_string(),
            ]
        }),
    )
}
