//! Type I error of the blocked and unblocked bootstrap under a centred null.
//!
//! Run with `cargo run --release --example calibration`.

use pcs_sanity::agent::ScoreModel;
use pcs_sanity::checks::{calibration_simulation, CalibrationConfig};
use pcs_sanity::seed;
use pcs_sanity::stats::ScoreSample;

fn main() -> pcs_sanity::Result<()> {
    let mut rng = seed::rng(1);
    let config = CalibrationConfig {
        replicates: 400,
        resamples: 2000,
        alpha: 0.05,
    };
    for spread in [0.0, 6.0, 12.0] {
        let groups: Vec<Vec<f64>> = (0..5)
            .map(|k| {
                let model = ScoreModel::new(60.0 + spread * (k as f64 - 2.0), 10.0);
                (0..20).map(|_| f64::from(model.draw(&mut rng))).collect()
            })
            .collect();
        let r = calibration_simulation(&ScoreSample::from_groups(&groups)?, &config, 9)?;
        println!(
            "block offsets ±{:<4}: rejection blocked {:.3}, unblocked {:.3}",
            2.0 * spread,
            r.rejection_rate_blocked,
            r.rejection_rate_unblocked
        );
    }
    Ok(())
}
