use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::{ScoreSample, SCORE_MAX, SCORE_MIN};
use crate::error::{Error, Result};

pub const DEFAULT_GRID_POINTS: usize = 2048;

/// Bandwidth substituted for a zero-variance sample: half a Likert point.
pub const MIN_BANDWIDTH: f64 = 0.5;

/// Scott's rule in one dimension, `sd · n^(-1/5)` with the n − 1 sample SD.
/// A constant sample gets [`MIN_BANDWIDTH`].
pub fn scott_bandwidth(scores: &[f64]) -> f64 {
    let n = scores.len() as f64;
    let sd = super::sample_sd(scores);
    if sd > 0.0 {
        sd * n.powf(-0.2)
    } else {
        MIN_BANDWIDTH
    }
}

/// `points` equally spaced abscissae covering `[lo, hi]` inclusive.
pub fn uniform_grid(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    assert!(points >= 2, "a grid needs at least two points");
    let step = (hi - lo) / (points - 1) as f64;
    (0..points).map(|k| lo + step * k as f64).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct KdeEstimate {
    pub density: Vec<f64>,
    pub bandwidth: f64,
}

/// Gaussian KDE evaluated on `grid`.
pub fn kde_density(sample: &ScoreSample, grid: &[f64]) -> Result<KdeEstimate> {
    kde_on_slice(sample.scores(), grid)
}

pub(crate) fn kde_on_slice(scores: &[f64], grid: &[f64]) -> Result<KdeEstimate> {
    if scores.len() < 2 {
        return Err(Error::InvalidSample(format!(
            "density estimation needs at least 2 scores, got {}",
            scores.len()
        )));
    }
    let h = scott_bandwidth(scores);
    // Agent scores are integers, so collapsing ties to weighted centres is a
    // large saving on the summation.
    let mut sorted = scores.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mut centres: Vec<(f64, f64)> = Vec::new();
    for x in sorted {
        match centres.last_mut() {
            Some((c, w)) if *c == x => *w += 1.0,
            _ => centres.push((x, 1.0)),
        }
    }
    let norm = 1.0 / (scores.len() as f64 * h * (2.0 * PI).sqrt());
    let density = grid
        .iter()
        .map(|&x| {
            let s: f64 = centres
                .iter()
                .map(|&(c, w)| {
                    let z = (x - c) / h;
                    w * (-0.5 * z * z).exp()
                })
                .sum();
            s * norm
        })
        .collect();
    Ok(KdeEstimate { density, bandwidth: h })
}

/// Overlap coefficient between two KDEs on `[0, 100]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OverlapResult {
    /// Clamped to `[0, 1]`.
    pub ovl: f64,
    /// Trapezoid integral before clamping.
    pub ovl_raw: f64,
    pub grid_points: usize,
    pub bandwidth_alt: f64,
    pub bandwidth_null: f64,
    #[serde(skip)]
    pub grid: Vec<f64>,
    #[serde(skip)]
    pub density_alt: Vec<f64>,
    #[serde(skip)]
    pub density_null: Vec<f64>,
}

fn trapezoid(values: &[f64], step: f64) -> f64 {
    let inner: f64 = values.iter().sum();
    step * (inner - 0.5 * (values[0] + values[values.len() - 1]))
}

/// `∫ min(f_alt, f_null)` over `[0, 100]`, trapezoid rule on a uniform grid.
pub fn overlap_coefficient(alt: &ScoreSample, null: &ScoreSample, grid_points: usize) -> Result<OverlapResult> {
    overlap_on_grid(alt.scores(), null.scores(), grid_points)
}

/// Slice form of [`overlap_coefficient`].
pub fn overlap_on_grid(alt: &[f64], null: &[f64], grid_points: usize) -> Result<OverlapResult> {
    if grid_points < 2 {
        return Err(Error::InvalidArgument("overlap grid needs at least 2 points".into()));
    }
    let grid = uniform_grid(SCORE_MIN, SCORE_MAX, grid_points);
    let fa = kde_on_slice(alt, &grid)?;
    let fn_ = kde_on_slice(null, &grid)?;
    let mins: Vec<f64> = fa.density.iter().zip(&fn_.density).map(|(a, b)| a.min(*b)).collect();
    let step = (SCORE_MAX - SCORE_MIN) / (grid_points - 1) as f64;
    let raw = trapezoid(&mins, step);
    Ok(OverlapResult {
        ovl: raw.clamp(0.0, 1.0),
        ovl_raw: raw,
        grid_points,
        bandwidth_alt: fa.bandwidth,
        bandwidth_null: fn_.bandwidth,
        grid,
        density_alt: fa.density,
        density_null: fn_.density,
    })
}
