//! Overlap coefficient between alternative and null score distributions.
//!
//! Run with `cargo run --example overlap_check`.

use pcs_sanity::agent::ScoreModel;
use pcs_sanity::seed;
use pcs_sanity::stats::{kde_density, overlap_on_grid, scott_bandwidth, uniform_grid, ScoreSample};

fn draws(mean: f64, sd: f64, n: usize, s: u64) -> Vec<f64> {
    let mut rng = seed::rng(s);
    let model = ScoreModel::new(mean, sd);
    (0..n).map(|_| f64::from(model.draw(&mut rng))).collect()
}

fn main() -> pcs_sanity::Result<()> {
    let null = draws(20.0, 10.0, 100, 1);
    println!("null bandwidth (Scott): {:.3}", scott_bandwidth(&null));
    for alt_mean in [25.0, 40.0, 55.0, 75.0] {
        let alt = draws(alt_mean, 10.0, 100, 2);
        let r = overlap_on_grid(&alt, &null, 2048)?;
        let verdict = if r.ovl < 0.2 { "separated" } else { "overlapping" };
        println!("alt mean {alt_mean:>4}: OVL = {:.3} ({verdict})", r.ovl);
    }

    // A constant sample falls back to a fixed bandwidth instead of collapsing.
    let grid = uniform_grid(0.0, 100.0, 11);
    let flat = kde_density(&ScoreSample::new(vec![50.0; 10])?, &grid)?;
    println!("constant sample bandwidth: {}", flat.bandwidth);
    Ok(())
}
