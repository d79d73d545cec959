//! Driving an external agent command. A one-line shell script stands in for
//! a real coding agent and writes its conclusion into the workspace.
//!
//! Run with `cargo run --example command_backend` (Unix only).

use pcs_sanity::agent::{AgentBackend, CommandBackend};
use pcs_sanity::cli::*;
use pcs_sanity::perturb::PerturbationKind;
use pcs_sanity::tabular::{parse_csv, write_dataset, DatasetMetadata};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = tempfile::tempdir()?;
    let ds = parse_csv("toy", "a,b,y\n1,x,2\n2,y,4\n3,x,6\n4,y,9\n")?;
    let written = write_dataset(&ds, &DatasetMetadata::new("toy", "Does a drive y?"), &dir.path().join("data"))?;
    let mut config = HarnessConfig::new(vec![DatasetEntry {
        id: "toy".into(),
        csv: written.csv,
        metadata: written.metadata,
        dependent: Some("y".into()),
        independents: vec!["a".into(), "b".into()],
    }]);
    config.out_dir = dir.path().join("out");
    config.replicates = 2;
    config.pcs_kinds = vec![PerturbationKind::Identity];
    let script = r#"cd {workspace} && test -f AGENTS.md && printf '{"response": 64, "explanation": "fit a line to %s"}' {dataset_name} > conclusion.txt"#;
    config.backend = AgentBackend::Command(CommandBackend::new(script));

    cmd_plan(&config)?;
    let summary = cmd_run(&config, &RunOptions::default())?;
    println!("statuses: {:?}", summary.status_counts);
    let ledger = RunLedger::read(&config.out_path().join(LEDGER_FILE))?;
    for r in ledger.responses() {
        println!("{}: {:?} {:?} (attempts: {})", r.run_id, r.status, r.score, r.attempts);
    }
    Ok(())
}
