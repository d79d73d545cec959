//! The full plan, run and analyze loop with the mock agent, in a temp dir.
//!
//! Run with `cargo run --example mock_pipeline`.

use pcs_sanity::agent::{AgentBackend, MockBackend, ScoreModel};
use pcs_sanity::checks::Variant;
use pcs_sanity::cli::*;
use pcs_sanity::tabular::{parse_csv, write_dataset, DatasetMetadata};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = tempfile::tempdir()?;
    let mut csv = String::from("dose,site,response\n");
    for i in 0..60 {
        csv.push_str(&format!("{},{},{}\n", i % 6, ["a", "b"][i % 2], 10 + 3 * (i % 6) + i % 5));
    }
    let ds = parse_csv("trial", &csv)?;
    let meta = DatasetMetadata::new("trial", "Does a higher dose raise the response?");
    let written = write_dataset(&ds, &meta, &dir.path().join("data"))?;

    let mut config = HarnessConfig::new(vec![DatasetEntry {
        id: "trial".into(),
        csv: written.csv,
        metadata: written.metadata,
        dependent: Some("response".into()),
        independents: vec!["dose".into(), "site".into()],
    }]);
    config.out_dir = dir.path().join("out");
    config.backend = AgentBackend::Mock(MockBackend::new(ScoreModel::new(72.0, 9.0), ScoreModel::new(12.0, 8.0)));

    let (plan_path, plan) = cmd_plan(&config)?;
    println!("{} conditions written to {}", plan.conditions.len(), plan_path.display());
    let run = cmd_run(&config, &RunOptions::default())?;
    println!("executed {} runs: {:?}", run.executed, run.status_counts);
    cmd_analyze(&config, &AnalyzeOptions::default())?;
    let summary = std::fs::read_to_string(analysis_dir(&config, Variant::Standard).join("summary.md"))?;
    println!("\n{summary}");
    Ok(())
}
