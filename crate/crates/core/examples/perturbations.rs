//! Every perturbation applied to a toy dataset, plus the default run plan.
//!
//! Run with `cargo run --example perturbations`.

use pcs_sanity::perturb::*;
use pcs_sanity::tabular::{parse_csv, DatasetMetadata};

const CSV: &str = "\
hours,sector,income
10,retail,21000
35,tech,64000
40,tech,71000
20,retail,30000
45,health,58000
";

fn main() -> pcs_sanity::Result<()> {
    let ds = parse_csv("wages", CSV)?;
    let meta = DatasetMetadata::new("wages", "Do hours worked predict income?")
        .describe("hours", "weekly hours")
        .describe("sector", "employment sector")
        .describe("income", "annual income in dollars");
    let settings = PerturbationSettings::default();
    let plan = build_run_plan("wages", &PerturbationKind::all()[1..], 1, 42, true, &settings)?;
    println!("plan: {} conditions for {} kinds", plan.conditions.len(), plan.pcs_kinds.len());

    for c in plan.by_arm(Arm::Alternative).chain(plan.by_arm(Arm::Null).take(1)) {
        let p = apply_condition(&ds, &meta, c, &settings)?;
        println!("\n{} (seed {:016x})", c.run_id(), c.seed);
        println!("  columns: {}", p.dataset.column_names().join(", "));
        println!("  question: {}", p.metadata.question);
        let first: Vec<String> = p.dataset.columns().iter().map(|col| col.values[0].to_field()).collect();
        println!("  row 1: {}", first.join(", "));
        if let Some(map) = &p.name_map {
            println!("  renamed: {map:?}");
        }
    }
    Ok(())
}
