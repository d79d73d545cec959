//! Type I error of the Yes check on data forced to satisfy the null.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{DEFAULT_ALPHA, DEFAULT_RESAMPLES};
use crate::error::{Error, Result};
use crate::seed;
use crate::stats::{BootstrapTest, ScoreSample, LIKERT_MIDPOINT};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CalibrationConfig {
    pub replicates: usize,
    pub resamples: usize,
    pub alpha: f64,
}

impl Default for CalibrationConfig {
    fn default() -> Self {
        CalibrationConfig {
            replicates: 1000,
            resamples: DEFAULT_RESAMPLES,
            alpha: DEFAULT_ALPHA,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QqPoint {
    /// `i / (R + 1)` for the i-th smallest p-value.
    pub uniform: f64,
    pub blocked: f64,
    pub unblocked: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationResult {
    pub replicates: usize,
    pub resamples: usize,
    pub alpha: f64,
    pub rejection_rate_blocked: f64,
    pub rejection_rate_unblocked: f64,
    pub p_values_blocked: Vec<f64>,
    pub p_values_unblocked: Vec<f64>,
    pub qq: Vec<QqPoint>,
}

/// Centre `sample` on the midpoint, then for each replicate draw a
/// within-block resample and run the unblocked and blocked tests on it.
pub fn calibration_simulation(sample: &ScoreSample, config: &CalibrationConfig, seed: u64) -> Result<CalibrationResult> {
    let blocks = sample
        .blocks()
        .ok_or_else(|| Error::InvalidSample("calibration needs block labels".into()))?;
    if config.replicates == 0 || config.resamples == 0 {
        return Err(Error::InvalidArgument("replicates and resamples must be positive".into()));
    }
    if !(config.alpha > 0.0 && config.alpha < 1.0) {
        return Err(Error::InvalidArgument(format!("alpha must lie in (0, 1), got {}", config.alpha)));
    }
    let shift = LIKERT_MIDPOINT - sample.mean();
    let centred: Vec<f64> = sample.scores().iter().map(|x| x + shift).collect();

    let p: Vec<(f64, f64)> = (0..config.replicates)
        .into_par_iter()
        .map(|r| -> Result<(f64, f64)> {
            let rep_seed = seed!(seed, "calibration", r);
            let mut rng = seed::rng(seed!(rep_seed, "resample"));
            let mut y = vec![0.0; centred.len()];
            for b in blocks {
                for &i in b {
                    y[i] = centred[b[rng.random_range(0..b.len())]];
                }
            }
            let test = |tag: &str| BootstrapTest::new(seed!(rep_seed, tag)).mu0(LIKERT_MIDPOINT).resamples(config.resamples);
            let unblocked = test("unblocked").run_slice(&y, None)?.p_value;
            let blocked = test("blocked").run_slice(&y, Some(blocks))?.p_value;
            Ok((blocked, unblocked))
        })
        .collect::<Result<_>>()?;
    let (p_blocked, p_unblocked): (Vec<f64>, Vec<f64>) = p.into_iter().unzip();

    let rate = |v: &[f64]| v.iter().filter(|&&x| x < config.alpha).count() as f64 / config.replicates as f64;
    let mut sb = p_blocked.clone();
    let mut su = p_unblocked.clone();
    sb.sort_by(f64::total_cmp);
    su.sort_by(f64::total_cmp);
    let denom = (config.replicates + 1) as f64;
    let qq = sb
        .iter()
        .zip(&su)
        .enumerate()
        .map(|(i, (&blocked, &unblocked))| QqPoint {
            uniform: (i + 1) as f64 / denom,
            blocked,
            unblocked,
        })
        .collect();
    Ok(CalibrationResult {
        replicates: config.replicates,
        resamples: config.resamples,
        alpha: config.alpha,
        rejection_rate_blocked: rate(&p_blocked),
        rejection_rate_unblocked: rate(&p_unblocked),
        p_values_blocked: p_blocked,
        p_values_unblocked: p_unblocked,
        qq,
    })
}
