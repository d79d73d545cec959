//! A supervisor pass asking each run how sure it was, correlated with how
//! unusual its score is among its peers.
//!
//! Run with `cargo run --example confidence_calibration`.

use pcs_sanity::agent::{AgentBackend, MockBackend, ScoreModel};
use pcs_sanity::cli::*;
use pcs_sanity::perturb::{Arm, PerturbationKind};
use pcs_sanity::tabular::{parse_csv, write_dataset, DatasetMetadata};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = tempfile::tempdir()?;
    let ds = parse_csv("ads", "spend,region,sales\n1,n,5\n2,s,7\n3,n,8\n4,s,11\n5,n,12\n")?;
    let meta = DatasetMetadata::new("ads", "Does ad spend increase sales?");
    let written = write_dataset(&ds, &meta, &dir.path().join("data"))?;
    let mut config = HarnessConfig::new(vec![DatasetEntry {
        id: "ads".into(),
        csv: written.csv,
        metadata: written.metadata,
        dependent: Some("sales".into()),
        independents: vec!["spend".into(), "region".into()],
    }]);
    config.out_dir = dir.path().join("out");
    config.replicates = 10;
    config.pcs_kinds = vec![PerturbationKind::Identity, PerturbationKind::AnonymizeFeatureNames];
    config.backend = AgentBackend::Mock(MockBackend::new(ScoreModel::new(60.0, 15.0), ScoreModel::new(25.0, 12.0)));

    cmd_plan(&config)?;
    cmd_run(&config, &RunOptions::default())?;
    let report = cmd_confidence(&config, &ConfidenceOptions::default())?;
    for arm in [Arm::Alternative, Arm::Null] {
        match report.calibration.rho(arm) {
            Some(rho) => println!("{}: Spearman rho = {rho:.3}", arm.tag()),
            None => println!("{}: not enough variation", arm.tag()),
        }
    }
    for p in report.calibration.pairs.iter().take(5) {
        println!("{}  score {:>3}  confidence {:.2}  exceedance {:.2}", p.run_id, p.score, p.confidence, p.exceedance);
    }
    Ok(())
}
