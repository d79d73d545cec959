//! Bootstrap test of whether mean agent support exceeds the Likert midpoint.
//!
//! Run with `cargo run --example yes_check`.

use pcs_sanity::agent::ScoreModel;
use pcs_sanity::seed;
use pcs_sanity::stats::{BootstrapTest, ScoreSample};

fn draws(model: ScoreModel, n: usize, s: u64) -> Vec<f64> {
    let mut rng = seed::rng(s);
    (0..n).map(|_| f64::from(model.draw(&mut rng))).collect()
}

fn main() -> pcs_sanity::Result<()> {
    let test = BootstrapTest::new(7).resamples(10_000);
    for (label, mean) in [("clear support", 68.0), ("weak support", 53.0), ("no support", 45.0)] {
        let sample = ScoreSample::new(draws(ScoreModel::new(mean, 15.0), 100, 1))?;
        let r = test.run(&sample)?;
        println!(
            "{label:>14}: mean {:5.1}  p = {:.4}  95% CI [{:.1}, {:.1}]",
            sample.mean(),
            r.p_value,
            r.ci_low,
            r.ci_high
        );
    }

    // Five perturbation blocks with different offsets; the blocked test
    // resamples within each block.
    let groups: Vec<Vec<f64>> = (0..5)
        .map(|k| draws(ScoreModel::new(50.0 + 3.0 * (k as f64 - 2.0), 12.0), 20, 10 + k))
        .collect();
    let sample = ScoreSample::from_groups(&groups)?;
    let plain = test.run(&sample)?;
    let blocked = test.run_blocked(&sample)?;
    println!("blocks offset around 50: unblocked p = {:.4}, blocked p = {:.4}", plain.p_value, blocked.p_value);
    Ok(())
}
