//! Stated supervisor confidence against realised rank among peer runs.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use crate::agent::{ConfidenceRecord, ResponseRecord, RunStatus};
use crate::perturb::Arm;
use crate::stats::{empirical_exceedance, spearman_rho};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfidencePair {
    pub run_id: String,
    pub dataset_id: String,
    pub arm: Arm,
    pub score: u8,
    /// Stated confidence divided by 100.
    pub confidence: f64,
    pub exceedance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArmCorrelation {
    pub arm: Arm,
    pub n: usize,
    /// `None` when fewer than 3 pairs or either side has no rank variance.
    pub rho: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Unjoined {
    pub run_id: String,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfidenceCalibration {
    pub pairs: Vec<ConfidencePair>,
    pub correlations: Vec<ArmCorrelation>,
    pub unjoined: Vec<Unjoined>,
}

impl ConfidenceCalibration {
    pub fn rho(&self, arm: Arm) -> Option<f64> {
        self.correlations.iter().find(|c| c.arm == arm).and_then(|c| c.rho)
    }
}

/// Join confidences to responses by run id, compute each run's exceedance
/// within its (dataset, arm) peers, and correlate per arm. Records that fail
/// to join are listed, not dropped silently.
pub fn confidence_calibration(responses: &[ResponseRecord], confidences: &[ConfidenceRecord]) -> ConfidenceCalibration {
    let mut unjoined = Vec::new();
    let mut peers: BTreeMap<(String, Arm), Vec<(&str, u8)>> = BTreeMap::new();
    for r in responses {
        if let (RunStatus::Ok, Some(score)) = (r.status, r.score) {
            peers
                .entry((r.condition.dataset_id.clone(), r.condition.arm))
                .or_default()
                .push((r.run_id.as_str(), score));
        }
    }
    let mut exceed: HashMap<&str, (String, Arm, u8, f64)> = HashMap::new();
    for ((dataset, arm), runs) in &peers {
        let scores: Vec<f64> = runs.iter().map(|&(_, s)| f64::from(s)).collect();
        for (i, &(id, s)) in runs.iter().enumerate() {
            if let Ok(e) = empirical_exceedance(i, &scores) {
                exceed.insert(id, (dataset.clone(), *arm, s, e));
            }
        }
    }

    let mut pairs = Vec::new();
    for c in confidences {
        let reason = match (c.status, c.confidence) {
            (RunStatus::Ok, Some(conf)) => match exceed.get(c.run_id.as_str()) {
                Some((dataset, arm, score, e)) => {
                    pairs.push(ConfidencePair {
                        run_id: c.run_id.clone(),
                        dataset_id: dataset.clone(),
                        arm: *arm,
                        score: *score,
                        confidence: f64::from(conf) / 100.0,
                        exceedance: *e,
                    });
                    continue;
                }
                None if responses.iter().any(|r| r.run_id == c.run_id) => {
                    "response has no usable score or too few peers".to_owned()
                }
                None => "no response with this run id".to_owned(),
            },
            (status, _) => format!("confidence status {status:?}"),
        };
        unjoined.push(Unjoined {
            run_id: c.run_id.clone(),
            reason,
        });
    }
    pairs.sort_by(|a, b| a.run_id.cmp(&b.run_id));
    unjoined.sort_by(|a, b| a.run_id.cmp(&b.run_id));

    let correlations = [Arm::Alternative, Arm::Null]
        .into_iter()
        .map(|arm| {
            let (x, y): (Vec<f64>, Vec<f64>) = pairs
                .iter()
                .filter(|p| p.arm == arm)
                .map(|p| (p.confidence, p.exceedance))
                .unzip();
            let (rho, note) = match spearman_rho(&x, &y) {
                Ok(r) => (Some(r), None),
                Err(e) => (None, Some(e.to_string())),
            };
            ArmCorrelation { arm, n: x.len(), rho, note }
        })
        .collect();
    ConfidenceCalibration {
        pairs,
        correlations,
        unjoined,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::perturb::{build_run_plan, PerturbationKind, PerturbationSettings, RunCondition};

    fn conditions() -> Vec<RunCondition> {
        build_run_plan("d", &[PerturbationKind::Identity], 10, 3, true, &PerturbationSettings::default())
            .unwrap()
            .conditions
    }

    fn response(c: &RunCondition, score: u8) -> ResponseRecord {
        ResponseRecord {
            run_id: c.run_id(),
            condition: c.clone(),
            status: RunStatus::Ok,
            score: Some(score),
            explanation: Some("e".into()),
            wall_time: 0.0,
            workspace: c.run_id(),
            attempts: 1,
            attempt_seeds: vec![c.seed],
            error: None,
            raw_output: None,
            descriptions_removed: false,
        }
    }

    fn confidence(run_id: String, value: u8) -> ConfidenceRecord {
        ConfidenceRecord {
            run_id,
            status: RunStatus::Ok,
            confidence: Some(value),
            explanation: Some("e".into()),
            wall_time: 0.0,
            attempts: 1,
            error: None,
            raw_output: None,
        }
    }

    #[test]
    fn perfect_calibration_gives_rho_one() {
        let conds = conditions();
        let responses: Vec<_> = conds.iter().enumerate().map(|(i, c)| response(c, (i * 7 % 10 * 10) as u8)).collect();
        let scores_alt: Vec<f64> = responses.iter().filter(|r| r.condition.arm == Arm::Alternative).map(|r| f64::from(r.score.unwrap())).collect();
        let mut confs = Vec::new();
        let mut k = 0;
        for r in &responses {
            if r.condition.arm == Arm::Alternative {
                let e = empirical_exceedance(k, &scores_alt).unwrap();
                k += 1;
                confs.push(confidence(r.run_id.clone(), (e * 100.0).round() as u8));
            }
        }
        let out = confidence_calibration(&responses, &confs);
        assert_eq!(out.pairs.len(), 10);
        assert!((out.rho(Arm::Alternative).unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(out.rho(Arm::Null), None);
    }

    #[test]
    fn identical_confidences_are_degenerate() {
        let conds = conditions();
        let responses: Vec<_> = conds.iter().enumerate().map(|(i, c)| response(c, i as u8)).collect();
        let confs: Vec<_> = responses.iter().map(|r| confidence(r.run_id.clone(), 40)).collect();
        let out = confidence_calibration(&responses, &confs);
        for c in &out.correlations {
            assert_eq!(c.rho, None);
            assert!(c.note.as_deref().unwrap().contains("rank variance"));
        }
    }

    #[test]
    fn unjoinable_records_are_listed() {
        let conds = conditions();
        let mut responses: Vec<_> = conds.iter().map(|c| response(c, 50)).collect();
        responses[0].status = RunStatus::ParseError;
        responses[0].score = None;
        let mut confs = vec![confidence("nope".into(), 10), confidence(responses[0].run_id.clone(), 10)];
        let mut failed = confidence(responses[1].run_id.clone(), 10);
        failed.status = RunStatus::Timeout;
        failed.confidence = None;
        confs.push(failed);
        let out = confidence_calibration(&responses, &confs);
        assert!(out.pairs.is_empty());
        assert_eq!(out.unjoined.len(), 3);
    }
}
