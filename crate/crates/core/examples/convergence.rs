//! How often a subsample of agent runs reaches the full-sample regime.
//!
//! Run with `cargo run --release --example convergence`.

use pcs_sanity::agent::ScoreModel;
use pcs_sanity::checks::*;
use pcs_sanity::seed;

fn draws(mean: f64, sd: f64, n: usize, s: u64) -> Vec<f64> {
    let mut rng = seed::rng(s);
    let model = ScoreModel::new(mean, sd);
    (0..n).map(|_| f64::from(model.draw(&mut rng))).collect()
}

fn main() -> pcs_sanity::Result<()> {
    let cases = [("separated", 78.0, 8.0), ("borderline", 56.0, 16.0)];
    for (label, mean, sd) in cases {
        let pair = DistributionPair::from_scores(label, draws(mean, sd, 100, 1), draws(20.0, 9.0, 100, 2))?;
        let mut config = ConvergenceConfig::new(SubsampleMode::Random);
        config.schedule = RepetitionSchedule::uniform(100);
        config.resamples_small = 1000;
        let a = convergence_analysis(&pair, &config.fit_to(&pair), 3)?;
        println!("{label}: reference regime {}", a.reference_regime.label());
        for component in Component::ALL {
            let c = a.curve(component);
            let row: Vec<String> = c.sizes.iter().zip(&c.agreement).map(|(n, g)| format!("{n}:{g:.2}")).collect();
            println!("  {:<14} {}", component.tag(), row.join(" "));
        }
    }
    Ok(())
}
