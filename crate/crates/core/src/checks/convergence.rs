//! How often subsampled pairs reproduce the full-sample regime.

use rand::seq::index;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{check_slices, DistributionPair, Regime, Thresholds};
use crate::error::{Error, Result};
use crate::seed;

pub const DEFAULT_CONVERGENCE_SIZES: [usize; 15] = [2, 3, 4, 5, 6, 7, 8, 9, 10, 15, 20, 25, 50, 75, 100];
pub const DEFAULT_SMALL_RESAMPLES: usize = 2000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SubsampleMode {
    /// Subsample both arms.
    Random,
    /// Subsample the alternative arm, keep the full null.
    AltOnly,
}

impl SubsampleMode {
    pub fn tag(self) -> &'static str {
        match self {
            SubsampleMode::Random => "random",
            SubsampleMode::AltOnly => "alt_only",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Component {
    Full,
    BootstrapOnly,
    OverlapOnly,
}

impl Component {
    pub const ALL: [Component; 3] = [Component::Full, Component::BootstrapOnly, Component::OverlapOnly];

    pub fn tag(self) -> &'static str {
        match self {
            Component::Full => "full",
            Component::BootstrapOnly => "bootstrap_only",
            Component::OverlapOnly => "overlap_only",
        }
    }
}

/// Repetitions per subsample size, stepped by size.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RepetitionSchedule {
    pub up_to_10: usize,
    pub up_to_25: usize,
    pub above_25: usize,
}

impl Default for RepetitionSchedule {
    fn default() -> Self {
        RepetitionSchedule {
            up_to_10: 1000,
            up_to_25: 500,
            above_25: 200,
        }
    }
}

impl RepetitionSchedule {
    pub fn uniform(r: usize) -> Self {
        RepetitionSchedule {
            up_to_10: r,
            up_to_25: r,
            above_25: r,
        }
    }

    pub fn for_size(&self, n: usize) -> usize {
        match n {
            0..=10 => self.up_to_10,
            11..=25 => self.up_to_25,
            _ => self.above_25,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceConfig {
    pub sizes: Vec<usize>,
    pub mode: SubsampleMode,
    pub schedule: RepetitionSchedule,
    /// Thresholds for the full-sample reference.
    pub thresholds: Thresholds,
    /// Bootstrap resamples inside each repetition.
    pub resamples_small: usize,
}

impl ConvergenceConfig {
    pub fn new(mode: SubsampleMode) -> Self {
        ConvergenceConfig {
            sizes: DEFAULT_CONVERGENCE_SIZES.to_vec(),
            mode,
            schedule: RepetitionSchedule::default(),
            thresholds: Thresholds::default(),
            resamples_small: DEFAULT_SMALL_RESAMPLES,
        }
    }

    /// Keep the sizes the pair can support and make sure the full size is last.
    pub fn fit_to(mut self, pair: &DistributionPair) -> Self {
        let full = full_size(pair, self.mode);
        self.sizes.retain(|&n| n >= 2 && n <= full);
        if self.sizes.last() != Some(&full) {
            self.sizes.push(full);
        }
        self
    }
}

fn full_size(pair: &DistributionPair, mode: SubsampleMode) -> usize {
    match mode {
        SubsampleMode::Random => pair.alt.len().min(pair.null.len()),
        SubsampleMode::AltOnly => pair.alt.len(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceCurve {
    pub mode: SubsampleMode,
    pub component: Component,
    pub sizes: Vec<usize>,
    pub agreement: Vec<f64>,
    pub repetitions: Vec<usize>,
    pub reference_regime: Regime,
    pub resamples_small: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceAnalysis {
    pub dataset_id: String,
    pub mode: SubsampleMode,
    pub reference_regime: Regime,
    pub reference_p_value: f64,
    pub reference_ovl: f64,
    pub curves: Vec<ConvergenceCurve>,
}

impl ConvergenceAnalysis {
    pub fn curve(&self, component: Component) -> &ConvergenceCurve {
        self.curves
            .iter()
            .find(|c| c.component == component)
            .expect("every component is emitted")
    }
}

fn subsample(pool: &[f64], n: usize, rng: &mut seed::SeedRng) -> Vec<f64> {
    index::sample(rng, pool.len(), n).into_iter().map(|i| pool[i]).collect()
}

/// Subsample `n` observations without replacement per repetition, reclassify,
/// and record agreement with the full-sample regime for the joint regime and
/// each check on its own. A size that covers the whole pool reuses the
/// reference, so its agreement is 1.
pub fn convergence_analysis(pair: &DistributionPair, config: &ConvergenceConfig, seed: u64) -> Result<ConvergenceAnalysis> {
    config.thresholds.validate()?;
    if config.resamples_small == 0 {
        return Err(Error::InvalidArgument("resamples_small must be at least 1".into()));
    }
    let full = full_size(pair, config.mode);
    for &n in &config.sizes {
        if n < 2 || n > full {
            return Err(Error::InvalidArgument(format!(
                "subsample size {n} outside [2, {full}] for {} mode",
                config.mode.tag()
            )));
        }
    }
    let t = &config.thresholds;
    let (p_ref, o_ref) = check_slices(pair.alt.scores(), pair.null.scores(), t, seed!(seed, "reference"))?;
    let reference = Regime::from_checks(p_ref.p_value, o_ref.ovl, t.alpha, t.tau);
    let small = Thresholds {
        resamples: config.resamples_small,
        ..*t
    };
    let alt = pair.alt.scores();
    let null = pair.null.scores();

    let mut sums = [Vec::new(), Vec::new(), Vec::new()];
    let mut reps = Vec::new();
    for &n in &config.sizes {
        let whole = n == alt.len() && (config.mode == SubsampleMode::AltOnly || n == null.len());
        if whole {
            for s in &mut sums {
                s.push(1.0);
            }
            reps.push(0);
            continue;
        }
        let r = config.schedule.for_size(n);
        if r == 0 {
            return Err(Error::InvalidArgument(format!("no repetitions scheduled for size {n}")));
        }
        let counts = (0..r)
            .into_par_iter()
            .map(|rep| -> Result<[usize; 3]> {
                let rep_seed = seed!(seed, "convergence", config.mode.tag(), n, rep);
                let mut rng = seed::rng(seed!(rep_seed, "subsample"));
                let a = subsample(alt, n, &mut rng);
                let (p, o) = match config.mode {
                    SubsampleMode::Random => {
                        let b = subsample(null, n, &mut rng);
                        check_slices(&a, &b, &small, rep_seed)?
                    }
                    SubsampleMode::AltOnly => check_slices(&a, null, &small, rep_seed)?,
                };
                let regime = Regime::from_checks(p.p_value, o.ovl, small.alpha, small.tau);
                Ok([
                    usize::from(regime == reference),
                    usize::from(regime.passed_yes() == reference.passed_yes()),
                    usize::from(regime.passed_overlap() == reference.passed_overlap()),
                ])
            })
            .try_reduce(|| [0; 3], |x, y| Ok([x[0] + y[0], x[1] + y[1], x[2] + y[2]]))?;
        for (s, c) in sums.iter_mut().zip(counts) {
            s.push(c as f64 / r as f64);
        }
        reps.push(r);
    }

    let curves = Component::ALL
        .iter()
        .zip(sums)
        .map(|(&component, agreement)| ConvergenceCurve {
            mode: config.mode,
            component,
            sizes: config.sizes.clone(),
            agreement,
            repetitions: reps.clone(),
            reference_regime: reference,
            resamples_small: config.resamples_small,
        })
        .collect();
    Ok(ConvergenceAnalysis {
        dataset_id: pair.dataset_id.clone(),
        mode: config.mode,
        reference_regime: reference,
        reference_p_value: p_ref.p_value,
        reference_ovl: o_ref.ovl,
        curves,
    })
}
