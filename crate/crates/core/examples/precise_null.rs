//! Classifying with a standard null versus one built from a low-PVE synthesis.
//!
//! Run with `cargo run --example precise_null`.

use pcs_sanity::agent::ScoreModel;
use pcs_sanity::checks::{classify, classify_precise_null, DistributionPair, Thresholds};
use pcs_sanity::seed;

fn draws(mean: f64, sd: f64, n: usize, s: u64) -> Vec<f64> {
    let mut rng = seed::rng(s);
    let model = ScoreModel::new(mean, sd);
    (0..n).map(|_| f64::from(model.draw(&mut rng))).collect()
}

fn main() -> pcs_sanity::Result<()> {
    let alt = draws(62.0, 14.0, 100, 1);
    let shuffled_null = draws(18.0, 8.0, 100, 2);
    // An agent that still sees an effect after the signal was removed.
    let synthetic_null = draws(58.0, 14.0, 100, 3);
    let thr = Thresholds::default();

    let standard = classify(&DistributionPair::from_scores("study", alt.clone(), shuffled_null)?, &thr, 5)?;
    let precise = classify_precise_null(&DistributionPair::from_scores("study", alt, synthetic_null)?, &thr, 5)?;
    for r in [&standard, &precise] {
        println!(
            "{:?}: p = {:.4}, OVL = {:.3}, null mean {:.1} -> {}",
            r.variant, r.bootstrap.p_value, r.overlap.ovl, r.null.mean, r.label
        );
    }
    Ok(())
}
