//! Synthetic outcomes with a controlled share of explained variance.
//!
//! Run with `cargo run --example pve_synthesis`.

use pcs_sanity::seed;
use pcs_sanity::signal::{fit_signal_model, synthesize_outcome, synthetic_dataset, PveConfig};
use pcs_sanity::tabular::{one_hot_encode, Cell, Column, DatasetMetadata, TabularDataset};
use rand::Rng;
use rand_distr::StandardNormal;

fn main() -> pcs_sanity::Result<()> {
    let mut rng = seed::rng(3);
    let n = 400;
    let x: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
    let group: Vec<&str> = (0..n).map(|i| ["north", "south", "east"][i % 3]).collect();
    let y: Vec<f64> = x
        .iter()
        .zip(&group)
        .map(|(&x, &g)| 2.0 * x + if g == "south" { 1.0 } else { 0.0 } + 3.0 * rng.sample::<f64, _>(StandardNormal))
        .collect();
    let ds = TabularDataset::new(
        "regional",
        vec![
            Column::new("x", x.into_iter().map(Cell::Numeric).collect()),
            Column::new("region", group.into_iter().map(|g| Cell::Text(g.into())).collect()),
            Column::new("y", y.into_iter().map(Cell::Numeric).collect()),
        ],
    )?;
    let meta = DatasetMetadata::new("regional", "Is x associated with y?");

    let design = one_hot_encode(&ds, "y", &["x", "region"])?;
    let fit = fit_signal_model(&design)?;
    println!("encoded columns: {:?}", design.encoded_names);
    println!("observed R^2: {:.3}", fit.r_squared());

    for pve in [0.0, 0.01, 0.1, 0.5, 1.0] {
        let config = PveConfig::new(pve, 11)?;
        let z = synthesize_outcome(&fit, &config)?;
        let refit = fit_signal_model(&design.with_outcome(z.clone())?)?;
        let (_, m) = synthetic_dataset(&ds, &meta, "y", &design, &z, &config)?;
        println!(
            "target PVE {pve:>4}: refit R^2 {:.3}  provenance pve {}",
            refit.r_squared(),
            m.extra["synthetic_outcome"]["pve"]
        );
    }
    Ok(())
}
