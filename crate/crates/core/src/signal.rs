//! OLS signal model and synthetic outcomes with a controlled proportion of
//! variance explained (PVE).
//!
//! Variances use the population convention (denominator `n`) throughout.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::error::{Error, Result};
use crate::seed;
use crate::tabular::{Cell, Column, DatasetMetadata, DesignMatrix, TabularDataset};

/// Relative residual norm below which a design column is treated as a linear
/// combination of the columns before it.
const COLLINEAR_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignalFit {
    /// One coefficient per design column; dropped columns carry 0.
    pub beta: Vec<f64>,
    pub fitted: Vec<f64>,
    pub y_bar: f64,
    pub sigma_y: f64,
    pub var_yhat: f64,
    pub used_rows: Vec<usize>,
    /// Indices of design columns dropped as collinear.
    pub dropped_columns: Vec<usize>,
}

impl SignalFit {
    /// In-sample R² = Var(Ŷ) / Var(Y), or 0 for a constant outcome.
    pub fn r_squared(&self) -> f64 {
        let var_y = self.sigma_y * self.sigma_y;
        if var_y > 0.0 {
            self.var_yhat / var_y
        } else {
            0.0
        }
    }
}

pub(crate) fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

pub(crate) fn population_variance(v: &[f64]) -> f64 {
    let m = mean(v);
    v.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / v.len() as f64
}

/// Greedy column selection by modified Gram–Schmidt: a column is kept when its
/// component orthogonal to the already-kept columns is not negligible.
fn independent_columns(design: &DesignMatrix) -> Vec<usize> {
    let n = design.n_rows();
    let mut basis: Vec<Vec<f64>> = Vec::new();
    let mut kept = Vec::new();
    for j in 0..design.n_cols() {
        let mut v = design.column(j);
        let norm0 = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm0 == 0.0 {
            continue;
        }
        for q in &basis {
            let dot: f64 = (0..n).map(|i| q[i] * v[i]).sum();
            for i in 0..n {
                v[i] -= dot * q[i];
            }
        }
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > COLLINEAR_TOL * norm0 {
            basis.push(v.into_iter().map(|x| x / norm).collect());
            kept.push(j);
        }
    }
    kept
}

/// Least-squares fit of the outcome on the design via Householder QR.
pub fn fit_signal_model(design: &DesignMatrix) -> Result<SignalFit> {
    let n = design.n_rows();
    let kept = independent_columns(design);
    if kept.first() != Some(&0) {
        return Err(Error::RankDeficient("intercept column is degenerate".into()));
    }
    if n <= kept.len() {
        return Err(Error::RankDeficient(format!(
            "{n} rows for {} independent columns",
            kept.len()
        )));
    }
    let x = DMatrix::from_fn(n, kept.len(), |i, j| design.get(i, kept[j]));
    let y = DVector::from_column_slice(&design.outcome);
    let qr = x.clone().qr();
    let qty = qr.q().transpose() * &y;
    let coef = qr
        .r()
        .solve_upper_triangular(&qty)
        .ok_or_else(|| Error::RankDeficient("singular triangular factor".into()))?;

    let mut beta = vec![0.0; design.n_cols()];
    for (k, &j) in kept.iter().enumerate() {
        beta[j] = coef[k];
    }
    let fitted: Vec<f64> = (x * &coef).iter().copied().collect();
    let dropped_columns = (0..design.n_cols()).filter(|j| !kept.contains(j)).collect();
    Ok(SignalFit {
        beta,
        var_yhat: population_variance(&fitted),
        fitted,
        y_bar: mean(&design.outcome),
        sigma_y: population_variance(&design.outcome).sqrt(),
        used_rows: design.used_rows.clone(),
        dropped_columns,
    })
}

/// Noise standard deviation that makes the fitted signal explain `pve` of the
/// synthetic outcome's variance: `sqrt(var_yhat · (1 − pve) / pve)`.
pub fn noise_scale_for_pve(var_yhat: f64, pve: f64) -> Result<f64> {
    if !(pve > 0.0 && pve <= 1.0) {
        return Err(Error::InvalidArgument(format!("pve must lie in (0, 1], got {pve}")));
    }
    if var_yhat < 0.0 || !var_yhat.is_finite() {
        return Err(Error::InvalidArgument(format!("invalid signal variance {var_yhat}")));
    }
    Ok((var_yhat * (1.0 - pve) / pve).sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PveConfig {
    pub pve: f64,
    pub seed: u64,
}

impl PveConfig {
    pub fn new(pve: f64, seed: u64) -> Result<Self> {
        if !(0.0..=1.0).contains(&pve) {
            return Err(Error::InvalidArgument(format!("pve must lie in [0, 1], got {pve}")));
        }
        Ok(PveConfig { pve, seed })
    }
}

/// Draw `Z = Ŷ + ε`. At `pve = 0` the outcome is pure noise around the
/// observed mean and SD; at `pve = 1` it equals the fitted values.
pub fn synthesize_outcome(fit: &SignalFit, config: &PveConfig) -> Result<Vec<f64>> {
    let config = PveConfig::new(config.pve, config.seed)?;
    let mut rng = seed::rng(seed!(config.seed, "pve-noise"));
    let mut normal = || rng.sample::<f64, _>(StandardNormal);
    if config.pve == 0.0 {
        return Ok(fit.fitted.iter().map(|_| fit.y_bar + fit.sigma_y * normal()).collect());
    }
    if config.pve == 1.0 {
        return Ok(fit.fitted.clone());
    }
    let sigma = noise_scale_for_pve(fit.var_yhat, config.pve)?;
    Ok(fit.fitted.iter().map(|&m| m + sigma * normal()).collect())
}

/// Build the synthetic dataset: incomplete rows dropped, the dependent column
/// replaced by `z`, and a provenance block added under `extra.synthetic_outcome`.
pub fn synthetic_dataset(
    dataset: &TabularDataset,
    metadata: &DatasetMetadata,
    dependent: &str,
    design: &DesignMatrix,
    z: &[f64],
    config: &PveConfig,
) -> Result<(TabularDataset, DatasetMetadata)> {
    if z.len() != design.used_rows.len() {
        return Err(Error::InvalidArgument("synthetic outcome length does not match design".into()));
    }
    let subset = dataset.select_rows(&design.used_rows)?;
    let column = Column::new(dependent, z.iter().map(|&v| Cell::Numeric(v)).collect());
    let out = subset.replace_column(column)?;
    let mut meta = metadata.clone();
    let mut provenance = json!({
        "original_column": dependent,
        "pve": config.pve,
        "seed": config.seed,
        "variance_convention": "population",
        "rows_used": design.used_rows.len(),
        "rows_source": dataset.n_rows(),
    });
    if let Some((zero, one)) = &design.outcome_levels {
        provenance["binary_outcome_levels"] = json!({ "0": zero, "1": one });
        provenance["note"] = json!("binary outcome mapped to {0,1}; synthetic outcome is continuous");
    }
    meta.extra.insert("synthetic_outcome".into(), provenance);
    Ok((out, meta))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tabular::one_hot_encode;

    fn design(rows: Vec<Vec<f64>>, y: Vec<f64>) -> DesignMatrix {
        let names = (0..rows[0].len()).map(|j| format!("c{j}")).collect();
        DesignMatrix::from_rows(y, rows, names).unwrap()
    }

    #[test]
    fn exact_linear_outcome_has_zero_residuals() {
        let rows: Vec<Vec<f64>> = (0..10).map(|i| vec![1.0, i as f64, (i * i) as f64]).collect();
        let y: Vec<f64> = rows.iter().map(|r| 2.0 - 0.5 * r[1] + 0.25 * r[2]).collect();
        let fit = fit_signal_model(&design(rows, y.clone())).unwrap();
        for (f, o) in fit.fitted.iter().zip(&y) {
            assert!((f - o).abs() < 1e-10);
        }
        assert!((fit.var_yhat - population_variance(&y)).abs() < 1e-9);
        assert!((fit.beta[1] + 0.5).abs() < 1e-10);
    }

    #[test]
    fn intercept_only_fits_the_mean() {
        let y = vec![1.0, 4.0, 2.0, 7.0, 6.0];
        let rows = vec![vec![1.0]; 5];
        let fit = fit_signal_model(&design(rows, y)).unwrap();
        assert!((fit.beta[0] - 4.0).abs() < 1e-12);
        assert!(fit.var_yhat.abs() < 1e-20);
    }

    #[test]
    fn duplicate_columns_are_dropped() {
        let rows: Vec<Vec<f64>> = (0..8).map(|i| vec![1.0, i as f64, i as f64, (i % 3) as f64]).collect();
        let y: Vec<f64> = (0..8).map(|i| (i as f64).sin()).collect();
        let fit = fit_signal_model(&design(rows, y)).unwrap();
        assert_eq!(fit.dropped_columns, vec![2]);
        assert_eq!(fit.beta[2], 0.0);
    }

    #[test]
    fn too_few_rows_is_rank_deficient() {
        let rows = vec![vec![1.0, 0.0], vec![1.0, 1.0]];
        assert!(matches!(
            fit_signal_model(&design(rows, vec![0.0, 1.0])),
            Err(Error::RankDeficient(_))
        ));
    }

    #[test]
    fn noise_scale_values() {
        assert_eq!(noise_scale_for_pve(3.0, 1.0).unwrap(), 0.0);
        assert!((noise_scale_for_pve(3.0, 0.5).unwrap() - 3f64.sqrt()).abs() < 1e-15);
        assert!((noise_scale_for_pve(4.0, 0.1).unwrap() - 6.0).abs() < 1e-12);
        assert!(noise_scale_for_pve(4.0, 0.0).is_err());
        assert!(noise_scale_for_pve(4.0, 1.5).is_err());
    }

    #[test]
    fn noise_scale_decreases_in_pve() {
        let mut last = f64::INFINITY;
        for k in 1..=100 {
            let s = noise_scale_for_pve(2.5, k as f64 / 100.0).unwrap();
            assert!(s < last);
            last = s;
        }
    }

    fn random_fit(n: usize) -> SignalFit {
        let mut rng = seed::rng(11);
        let rows: Vec<Vec<f64>> = (0..n)
            .map(|_| vec![1.0, rng.sample(StandardNormal), rng.sample(StandardNormal)])
            .collect();
        let y: Vec<f64> = rows
            .iter()
            .map(|r| 3.0 + r[1] - 2.0 * r[2] + rng.sample::<f64, _>(StandardNormal))
            .collect();
        fit_signal_model(&design(rows, y)).unwrap()
    }

    #[test]
    fn pure_signal_and_pure_noise() {
        let fit = random_fit(400);
        let z1 = synthesize_outcome(&fit, &PveConfig::new(1.0, 3).unwrap()).unwrap();
        assert_eq!(z1, fit.fitted);

        let z0 = synthesize_outcome(&fit, &PveConfig::new(0.0, 3).unwrap()).unwrap();
        let n = z0.len() as f64;
        let m = mean(&z0);
        let sd = population_variance(&z0).sqrt();
        assert!((m - fit.y_bar).abs() < 3.0 * fit.sigma_y / n.sqrt());
        // SE of the SD of a normal sample is about sigma / sqrt(2n)
        assert!((sd - fit.sigma_y).abs() < 3.0 * fit.sigma_y / (2.0 * n).sqrt());
    }

    #[test]
    fn synthesis_is_deterministic() {
        let fit = random_fit(50);
        let cfg = PveConfig::new(0.3, 9).unwrap();
        assert_eq!(synthesize_outcome(&fit, &cfg).unwrap(), synthesize_outcome(&fit, &cfg).unwrap());
        assert!(PveConfig::new(-0.1, 0).is_err());
    }

    #[test]
    fn binary_outcome_fit_matches_direct_ols_on_mapped_values() {
        let ds = TabularDataset::new(
            "b",
            vec![
                Column::new(
                    "ans",
                    ["no", "yes", "no", "yes", "yes", "no", "yes", "no"]
                        .map(|s| Cell::Text(s.into()))
                        .to_vec(),
                ),
                Column::new("x", [1.0, 4.0, 2.0, 5.0, 3.0, 1.5, 6.0, 2.5].map(Cell::Numeric).to_vec()),
            ],
        )
        .unwrap();
        let dm = one_hot_encode(&ds, "ans", &["x"]).unwrap();
        let fit = fit_signal_model(&dm).unwrap();
        // simple-regression closed form on the 0/1 outcome
        let x = [1.0, 4.0, 2.0, 5.0, 3.0, 1.5, 6.0, 2.5];
        let y = [0.0, 1.0, 0.0, 1.0, 1.0, 0.0, 1.0, 0.0];
        let mx = x.iter().sum::<f64>() / 8.0;
        let my = y.iter().sum::<f64>() / 8.0;
        let sxy: f64 = x.iter().zip(&y).map(|(a, b)| (a - mx) * (b - my)).sum();
        let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
        let slope = sxy / sxx;
        assert!((fit.beta[1] - slope).abs() < 1e-12);
        assert!((fit.beta[0] - (my - slope * mx)).abs() < 1e-12);
    }
}
