//! Statistical kernel: bootstrap mean tests, Gaussian KDE and the overlap
//! coefficient, eta-squared, Spearman correlation and empirical exceedance.

mod bootstrap;
mod eta;
mod kde;
mod rank;

pub use bootstrap::{blocked_bootstrap_mean_test, bootstrap_mean_test, BootstrapResult, BootstrapTest};
pub use eta::{eta_squared, EtaSquaredResult};
pub use kde::{
    kde_density, overlap_coefficient, overlap_on_grid, scott_bandwidth, uniform_grid, KdeEstimate, OverlapResult,
    DEFAULT_GRID_POINTS, MIN_BANDWIDTH,
};
pub use rank::{average_ranks, empirical_exceedance, pearson, spearman_rho};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const SCORE_MIN: f64 = 0.0;
pub const SCORE_MAX: f64 = 100.0;
pub const LIKERT_MIDPOINT: f64 = 50.0;

/// Agent scores on the 0–100 scale, optionally partitioned into blocks (one
/// per perturbation kind).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreSample {
    scores: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    blocks: Option<Vec<Vec<usize>>>,
}

impl ScoreSample {
    pub fn new(scores: Vec<f64>) -> Result<Self> {
        if scores.is_empty() {
            return Err(Error::InvalidSample("score sample is empty".into()));
        }
        if let Some(bad) = scores.iter().find(|s| !(SCORE_MIN..=SCORE_MAX).contains(*s)) {
            return Err(Error::InvalidSample(format!("score {bad} outside [0, 100]")));
        }
        Ok(ScoreSample { scores, blocks: None })
    }

    /// Attach a block partition. Every index must appear in exactly one block.
    pub fn with_blocks(mut self, blocks: Vec<Vec<usize>>) -> Result<Self> {
        let n = self.scores.len();
        let mut seen = vec![false; n];
        for block in &blocks {
            if block.is_empty() {
                return Err(Error::InvalidSample("empty block".into()));
            }
            for &i in block {
                if i >= n || seen[i] {
                    return Err(Error::InvalidSample("blocks do not partition the sample".into()));
                }
                seen[i] = true;
            }
        }
        if seen.iter().any(|s| !s) {
            return Err(Error::InvalidSample("blocks do not cover every index".into()));
        }
        self.blocks = Some(blocks);
        Ok(self)
    }

    /// Concatenate groups, recording each group as a block.
    pub fn from_groups<G: AsRef<[f64]>>(groups: &[G]) -> Result<Self> {
        let mut scores = Vec::new();
        let mut blocks = Vec::with_capacity(groups.len());
        for g in groups {
            let start = scores.len();
            scores.extend_from_slice(g.as_ref());
            blocks.push((start..scores.len()).collect());
        }
        ScoreSample::new(scores)?.with_blocks(blocks)
    }

    pub fn scores(&self) -> &[f64] {
        &self.scores
    }

    pub fn blocks(&self) -> Option<&[Vec<usize>]> {
        self.blocks.as_deref()
    }

    pub fn len(&self) -> usize {
        self.scores.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scores.is_empty()
    }

    pub fn mean(&self) -> f64 {
        mean(&self.scores)
    }

    /// Sample standard deviation (denominator n − 1); 0 for a single score.
    pub fn sd(&self) -> f64 {
        sample_sd(&self.scores)
    }

    /// Score groups in block order.
    pub fn groups(&self) -> Option<Vec<Vec<f64>>> {
        self.blocks
            .as_ref()
            .map(|bs| bs.iter().map(|b| b.iter().map(|&i| self.scores[i]).collect()).collect())
    }
}

impl AsRef<[f64]> for ScoreSample {
    fn as_ref(&self) -> &[f64] {
        &self.scores
    }
}

pub(crate) fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

pub(crate) fn sample_sd(v: &[f64]) -> f64 {
    if v.len() < 2 {
        return 0.0;
    }
    let m = mean(v);
    (v.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (v.len() - 1) as f64).sqrt()
}

/// Linear-interpolation quantile of sorted data.
pub(crate) fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * q;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}
