use crate::error::{Error, Result};

/// 1-based ranks with ties sharing their mean rank.
pub fn average_ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; values.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        let rank = (i + j) as f64 / 2.0 + 1.0;
        for &k in &order[i..=j] {
            ranks[k] = rank;
        }
        i = j + 1;
    }
    ranks
}

pub fn pearson(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::InvalidArgument("vectors differ in length".into()));
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::Degenerate("zero variance".into()));
    }
    Ok((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

/// Spearman's ρ: Pearson correlation of average ranks.
pub fn spearman_rho(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::InvalidArgument("vectors differ in length".into()));
    }
    if x.len() < 3 {
        return Err(Error::InvalidArgument("Spearman correlation needs at least 3 pairs".into()));
    }
    pearson(&average_ranks(x), &average_ranks(y))
        .map_err(|_| Error::Degenerate("zero rank variance; Spearman correlation undefined".into()))
}

/// Fraction of the other runs whose score is strictly greater than run `index`.
pub fn empirical_exceedance(index: usize, scores: &[f64]) -> Result<f64> {
    if scores.len() < 2 {
        return Err(Error::InvalidSample("exceedance needs at least 2 scores".into()));
    }
    let own = *scores
        .get(index)
        .ok_or_else(|| Error::InvalidArgument(format!("index {index} out of range")))?;
    let above = scores
        .iter()
        .enumerate()
        .filter(|&(j, &s)| j != index && s > own)
        .count();
    Ok(above as f64 / (scores.len() - 1) as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn ranks_with_ties() {
        assert_eq!(average_ranks(&[10.0, 20.0, 20.0, 5.0]), vec![2.0, 3.5, 3.5, 1.0]);
    }

    #[test]
    fn spearman_examples() {
        let x = [1.0, 2.0, 3.0, 4.0, 5.0];
        assert!((spearman_rho(&x, &[2.0, 4.0, 8.0, 16.0, 32.0]).unwrap() - 1.0).abs() < 1e-15);
        assert!((spearman_rho(&x, &[9.0, 7.0, 5.0, 3.0, 1.0]).unwrap() + 1.0).abs() < 1e-15);
        // ranks (1,2,3,4) vs (1,3,2,4): Σd² = 2, ρ = 1 − 6·2/(4·15) = 0.8
        let r = spearman_rho(&[1.0, 2.0, 3.0, 4.0], &[10.0, 30.0, 20.0, 40.0]).unwrap();
        assert!((r - 0.8).abs() < 1e-12);
        assert!(matches!(spearman_rho(&x, &[1.0; 5]), Err(Error::Degenerate(_))));
        assert!(spearman_rho(&x[..2], &x[..2]).is_err());
    }

    #[test]
    fn exceedance_examples() {
        let s = [10.0, 20.0, 20.0, 30.0];
        assert_eq!(empirical_exceedance(3, &s).unwrap(), 0.0);
        assert_eq!(empirical_exceedance(0, &s).unwrap(), 1.0);
        assert!((empirical_exceedance(1, &s).unwrap() - 1.0 / 3.0).abs() < 1e-15);
        assert!(empirical_exceedance(9, &s).is_err());
        assert!(empirical_exceedance(0, &s[..1]).is_err());
    }

    proptest! {
        #[test]
        fn spearman_invariant_under_monotone_transform(
            pairs in prop::collection::vec((-100.0f64..100.0, -100.0f64..100.0), 3..40),
        ) {
            let x: Vec<f64> = pairs.iter().map(|p| p.0).collect();
            let y: Vec<f64> = pairs.iter().map(|p| p.1).collect();
            if let Ok(r) = spearman_rho(&x, &y) {
                let tx: Vec<f64> = x.iter().map(|v| (v / 50.0).exp() + 3.0 * v).collect();
                let r2 = spearman_rho(&tx, &y).unwrap();
                prop_assert!((r - r2).abs() < 1e-12);
                prop_assert!((-1.0..=1.0).contains(&r));
            }
        }
    }
}
