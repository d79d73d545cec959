use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{quantile_sorted, ScoreSample, LIKERT_MIDPOINT};
use crate::error::{Error, Result};
use crate::seed::{self, SeedRng};

/// Outcome of a one-sided bootstrap test of `H0: mu = mu0` against `mu > mu0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BootstrapResult {
    /// `(b + 1) / (B + 1)` where `b` counts resample means at or below `mu0`.
    pub p_value: f64,
    pub at_or_below: usize,
    pub ci_low: f64,
    pub ci_high: f64,
    pub ci_level: f64,
    pub resamples: usize,
    pub mu0: f64,
    pub blocked: bool,
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bootstrap_means: Option<Vec<f64>>,
}

/// Builder for bootstrap mean tests.
#[derive(Debug, Clone, Copy)]
pub struct BootstrapTest {
    mu0: f64,
    resamples: usize,
    seed: u64,
    ci_level: f64,
    retain_means: bool,
}

impl BootstrapTest {
    pub fn new(seed: u64) -> Self {
        BootstrapTest {
            mu0: LIKERT_MIDPOINT,
            resamples: 10_000,
            seed,
            ci_level: 0.95,
            retain_means: false,
        }
    }

    pub fn mu0(mut self, mu0: f64) -> Self {
        self.mu0 = mu0;
        self
    }

    pub fn resamples(mut self, b: usize) -> Self {
        self.resamples = b;
        self
    }

    pub fn ci_level(mut self, level: f64) -> Self {
        self.ci_level = level;
        self
    }

    pub fn retain_means(mut self, retain: bool) -> Self {
        self.retain_means = retain;
        self
    }

    /// Pooled test: resample `n` scores with replacement from the whole sample.
    pub fn run(&self, sample: &ScoreSample) -> Result<BootstrapResult> {
        self.run_slice(sample.scores(), None)
    }

    /// Blocked test: resample within each block, preserving block sizes.
    pub fn run_blocked(&self, sample: &ScoreSample) -> Result<BootstrapResult> {
        let blocks = sample
            .blocks()
            .ok_or_else(|| Error::InvalidSample("blocked bootstrap needs block labels".into()))?;
        self.run_slice(sample.scores(), Some(blocks))
    }

    /// Core routine on raw values. Values are not range-checked so that
    /// recentred samples can be tested.
    pub(crate) fn run_slice(&self, scores: &[f64], blocks: Option<&[Vec<usize>]>) -> Result<BootstrapResult> {
        if scores.len() < 2 {
            return Err(Error::InvalidSample(format!(
                "bootstrap needs at least 2 scores, got {}",
                scores.len()
            )));
        }
        if self.resamples == 0 {
            return Err(Error::InvalidArgument("number of resamples must be at least 1".into()));
        }
        if !(self.ci_level > 0.0 && self.ci_level < 1.0) {
            return Err(Error::InvalidArgument(format!("ci level {} outside (0, 1)", self.ci_level)));
        }
        let mut rng = seed::rng(self.seed);
        let n = scores.len() as f64;
        let mut means = Vec::with_capacity(self.resamples);
        match blocks {
            None => {
                for _ in 0..self.resamples {
                    means.push(resample_sum(scores, &mut rng) / n);
                }
            }
            Some(blocks) => {
                let grouped: Vec<Vec<f64>> = blocks
                    .iter()
                    .map(|b| b.iter().map(|&i| scores[i]).collect())
                    .collect();
                for _ in 0..self.resamples {
                    let sum: f64 = grouped.iter().map(|g| resample_sum(g, &mut rng)).sum();
                    means.push(sum / n);
                }
            }
        }
        let at_or_below = means.iter().filter(|&&m| m <= self.mu0).count();
        let p_value = (at_or_below + 1) as f64 / (self.resamples + 1) as f64;
        let mut sorted = means.clone();
        sorted.sort_by(f64::total_cmp);
        let tail = (1.0 - self.ci_level) / 2.0;
        Ok(BootstrapResult {
            p_value,
            at_or_below,
            ci_low: quantile_sorted(&sorted, tail),
            ci_high: quantile_sorted(&sorted, 1.0 - tail),
            ci_level: self.ci_level,
            resamples: self.resamples,
            mu0: self.mu0,
            blocked: blocks.is_some(),
            seed: self.seed,
            bootstrap_means: self.retain_means.then_some(means),
        })
    }
}

#[inline]
fn resample_sum(values: &[f64], rng: &mut SeedRng) -> f64 {
    let len = values.len();
    (0..len).map(|_| values[rng.random_range(0..len)]).sum()
}

pub fn bootstrap_mean_test(
    sample: &ScoreSample,
    mu0: f64,
    resamples: usize,
    seed: u64,
    ci_level: f64,
) -> Result<BootstrapResult> {
    BootstrapTest::new(seed)
        .mu0(mu0)
        .resamples(resamples)
        .ci_level(ci_level)
        .run(sample)
}

pub fn blocked_bootstrap_mean_test(
    sample: &ScoreSample,
    mu0: f64,
    resamples: usize,
    seed: u64,
    ci_level: f64,
) -> Result<BootstrapResult> {
    BootstrapTest::new(seed)
        .mu0(mu0)
        .resamples(resamples)
        .ci_level(ci_level)
        .run_blocked(sample)
}
