use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Share of total variance explained by group membership.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EtaSquaredResult {
    pub eta_squared: f64,
    pub ss_between: f64,
    pub ss_total: f64,
    pub group_means: Vec<f64>,
    pub group_sizes: Vec<usize>,
}

/// `η² = Σ_k n_k (ȳ_k − ȳ)² / Σ (y − ȳ)²`.
pub fn eta_squared<G: AsRef<[f64]>>(groups: &[G]) -> Result<EtaSquaredResult> {
    if groups.len() < 2 {
        return Err(Error::InvalidArgument("eta-squared needs at least 2 groups".into()));
    }
    if groups.iter().any(|g| g.as_ref().is_empty()) {
        return Err(Error::InvalidArgument("eta-squared groups must be non-empty".into()));
    }
    let total: usize = groups.iter().map(|g| g.as_ref().len()).sum();
    if total < 3 {
        return Err(Error::InvalidArgument("eta-squared needs at least 3 observations".into()));
    }
    let grand = groups.iter().flat_map(|g| g.as_ref()).sum::<f64>() / total as f64;
    let group_means: Vec<f64> = groups
        .iter()
        .map(|g| g.as_ref().iter().sum::<f64>() / g.as_ref().len() as f64)
        .collect();
    let group_sizes: Vec<usize> = groups.iter().map(|g| g.as_ref().len()).collect();
    let ss_between: f64 = group_means
        .iter()
        .zip(&group_sizes)
        .map(|(m, &n)| n as f64 * (m - grand) * (m - grand))
        .sum();
    let ss_total: f64 = groups
        .iter()
        .flat_map(|g| g.as_ref())
        .map(|y| (y - grand) * (y - grand))
        .sum();
    if ss_total <= 0.0 {
        return Err(Error::Degenerate("all scores identical".into()));
    }
    Ok(EtaSquaredResult {
        eta_squared: (ss_between / ss_total).clamp(0.0, 1.0),
        ss_between,
        ss_total,
        group_means,
        group_sizes,
    })
}
