//! Null-defining and PCS perturbations, and run-plan construction.

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seed;
use crate::tabular::{Cell, Column, DatasetMetadata, TabularDataset};

pub const PLAN_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PerturbationKind {
    /// Null-defining: permute every column independently.
    ShuffleFeatureValues,
    #[serde(rename = "add_nonsignal_features")]
    AddNonSignalFeatures,
    AnonymizeFeatureNames,
    ShuffleFeatureNames,
    PositiveLeadingStatement,
    NegativeLeadingStatement,
    Identity,
}

impl PerturbationKind {
    /// The five signal-preserving perturbations used by default.
    pub const DEFAULT_PCS: [PerturbationKind; 5] = [
        PerturbationKind::AddNonSignalFeatures,
        PerturbationKind::AnonymizeFeatureNames,
        PerturbationKind::ShuffleFeatureNames,
        PerturbationKind::PositiveLeadingStatement,
        PerturbationKind::NegativeLeadingStatement,
    ];

    pub fn tag(self) -> &'static str {
        match self {
            PerturbationKind::ShuffleFeatureValues => "shuffle_feature_values",
            PerturbationKind::AddNonSignalFeatures => "add_nonsignal_features",
            PerturbationKind::AnonymizeFeatureNames => "anonymize_feature_names",
            PerturbationKind::ShuffleFeatureNames => "shuffle_feature_names",
            PerturbationKind::PositiveLeadingStatement => "positive_leading_statement",
            PerturbationKind::NegativeLeadingStatement => "negative_leading_statement",
            PerturbationKind::Identity => "identity",
        }
    }

    pub fn is_null_defining(self) -> bool {
        self == PerturbationKind::ShuffleFeatureValues
    }

    pub fn all() -> [PerturbationKind; 7] {
        use PerturbationKind::*;
        [
            ShuffleFeatureValues,
            AddNonSignalFeatures,
            AnonymizeFeatureNames,
            ShuffleFeatureNames,
            PositiveLeadingStatement,
            NegativeLeadingStatement,
            Identity,
        ]
    }
}

impl fmt::Display for PerturbationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for PerturbationKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        PerturbationKind::all()
            .into_iter()
            .find(|k| k.tag() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown perturbation kind {s:?}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Arm {
    Alternative,
    Null,
}

impl Arm {
    pub fn tag(self) -> &'static str {
        match self {
            Arm::Alternative => "alternative",
            Arm::Null => "null",
        }
    }
}

impl fmt::Display for Arm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Polarity {
    Positive,
    Negative,
}

/// One planned agent execution.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunCondition {
    pub dataset_id: String,
    pub kind: PerturbationKind,
    pub arm: Arm,
    pub replicate: u32,
    pub seed: u64,
}

impl RunCondition {
    pub fn run_id(&self) -> String {
        format!(
            "{}__{}__{}__r{:03}",
            self.dataset_id,
            self.arm.tag(),
            self.kind.tag(),
            self.replicate
        )
    }

    pub fn expected_seed(&self, master_seed: u64) -> u64 {
        condition_seed(master_seed, &self.dataset_id, self.kind, self.arm, self.replicate)
    }
}

pub fn condition_seed(master_seed: u64, dataset_id: &str, kind: PerturbationKind, arm: Arm, replicate: u32) -> u64 {
    seed!(master_seed, "condition", dataset_id, kind.tag(), arm.tag(), replicate)
}

/// Knobs for the individual perturbations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PerturbationSettings {
    pub nonsignal_count: usize,
    pub positive_statement: String,
    pub negative_statement: String,
}

impl Default for PerturbationSettings {
    fn default() -> Self {
        PerturbationSettings {
            nonsignal_count: 5,
            positive_statement: "Before you begin: I am highly confident, based on prior experience, that the answer to this question is Yes.".into(),
            negative_statement: "Before you begin: I am highly confident, based on prior experience, that the answer to this question is No.".into(),
        }
    }
}

impl PerturbationSettings {
    pub fn statement(&self, polarity: Polarity) -> &str {
        match polarity {
            Polarity::Positive => &self.positive_statement,
            Polarity::Negative => &self.negative_statement,
        }
    }
}

/// Permute each column independently. Column `i` uses its own derived stream.
pub fn shuffle_feature_values(dataset: &TabularDataset, seed: u64) -> TabularDataset {
    let columns = dataset
        .columns()
        .iter()
        .enumerate()
        .map(|(i, col)| {
            let mut values = col.values.clone();
            let mut rng = seed::rng(seed!(seed, "shuffle-values", i));
            values.shuffle(&mut rng);
            Column::new(col.name.clone(), values)
        })
        .collect();
    TabularDataset::new(dataset.name(), columns).expect("shuffling preserves validity")
}

fn fresh_name(base: &str, taken: &HashSet<String>) -> String {
    if !taken.contains(base) {
        return base.to_owned();
    }
    (1..)
        .map(|k| format!("{base}_{k}"))
        .find(|n| !taken.contains(n))
        .expect("unbounded suffix search")
}

/// Append `count` columns drawn independently of the data. Odd-numbered
/// columns are standard normal; even-numbered ones are uniform over three
/// levels.
pub fn add_nonsignal_features(dataset: &TabularDataset, count: usize, seed: u64) -> Result<TabularDataset> {
    if count == 0 {
        return Err(Error::InvalidArgument("count must be at least 1".into()));
    }
    const LEVELS: [&str; 3] = ["level_a", "level_b", "level_c"];
    let n = dataset.n_rows();
    let mut taken: HashSet<String> = dataset.column_names().into_iter().map(str::to_owned).collect();
    let mut columns = dataset.columns().to_vec();
    for k in 1..=count {
        let name = fresh_name(&format!("noise_{k}"), &taken);
        taken.insert(name.clone());
        let mut rng = seed::rng(seed!(seed, "nonsignal", k));
        let values = if k % 2 == 1 {
            (0..n)
                .map(|_| Cell::Numeric(rng.sample::<f64, _>(StandardNormal)))
                .collect()
        } else {
            (0..n)
                .map(|_| Cell::Text(LEVELS[rng.random_range(0..LEVELS.len())].to_owned()))
                .collect()
        };
        columns.push(Column::new(name, values));
    }
    TabularDataset::new(dataset.name(), columns)
}

/// Original and generic column names, in column order.
pub type NameMap = Vec<(String, String)>;

/// Rename column `i` to `feature{i+1}` and drop per-column descriptions.
pub fn anonymize_feature_names(
    dataset: &TabularDataset,
    metadata: &DatasetMetadata,
) -> (TabularDataset, DatasetMetadata, NameMap) {
    let mut map = Vec::with_capacity(dataset.n_cols());
    let columns = dataset
        .columns()
        .iter()
        .enumerate()
        .map(|(i, col)| {
            let generic = format!("feature{}", i + 1);
            map.push((col.name.clone(), generic.clone()));
            Column::new(generic, col.values.clone())
        })
        .collect();
    let mut meta = metadata.clone();
    meta.column_descriptions.clear();
    let ds = TabularDataset::new(dataset.name(), columns).expect("generic names are unique");
    (ds, meta, map)
}

/// Apply a uniformly random permutation to the header. Values and metadata
/// are untouched.
pub fn shuffle_feature_names(
    dataset: &TabularDataset,
    metadata: &DatasetMetadata,
    seed: u64,
) -> Result<(TabularDataset, DatasetMetadata)> {
    if dataset.n_cols() < 2 {
        return Err(Error::InvalidArgument("shuffling names needs at least 2 columns".into()));
    }
    let mut names: Vec<String> = dataset.column_names().into_iter().map(str::to_owned).collect();
    let mut rng = seed::rng(seed!(seed, "shuffle-names"));
    names.shuffle(&mut rng);
    let columns = dataset
        .columns()
        .iter()
        .zip(names)
        .map(|(col, name)| Column::new(name, col.values.clone()))
        .collect();
    Ok((TabularDataset::new(dataset.name(), columns)?, metadata.clone()))
}

/// Prepend the leading statement for `polarity` to the question.
pub fn apply_leading_statement(
    metadata: &DatasetMetadata,
    polarity: Polarity,
    settings: &PerturbationSettings,
) -> DatasetMetadata {
    let mut meta = metadata.clone();
    meta.question = format!("{} {}", settings.statement(polarity), metadata.question);
    meta
}

/// Result of applying a condition's perturbations to a source dataset.
#[derive(Debug, Clone)]
pub struct PerturbedDataset {
    pub dataset: TabularDataset,
    pub metadata: DatasetMetadata,
    pub name_map: Option<NameMap>,
    pub descriptions_removed: bool,
}

/// Apply the PCS perturbation for `condition`, then the value shuffle if the
/// condition belongs to the null arm.
pub fn apply_condition(
    dataset: &TabularDataset,
    metadata: &DatasetMetadata,
    condition: &RunCondition,
    settings: &PerturbationSettings,
) -> Result<PerturbedDataset> {
    let pcs_seed = seed!(condition.seed, "pcs");
    let mut name_map = None;
    let mut descriptions_removed = false;
    let (ds, meta) = match condition.kind {
        PerturbationKind::Identity => (dataset.clone(), metadata.clone()),
        PerturbationKind::ShuffleFeatureValues => (shuffle_feature_values(dataset, pcs_seed), metadata.clone()),
        PerturbationKind::AddNonSignalFeatures => (
            add_nonsignal_features(dataset, settings.nonsignal_count, pcs_seed)?,
            metadata.clone(),
        ),
        PerturbationKind::AnonymizeFeatureNames => {
            let (ds, meta, map) = anonymize_feature_names(dataset, metadata);
            descriptions_removed = !metadata.column_descriptions.is_empty();
            name_map = Some(map);
            (ds, meta)
        }
        PerturbationKind::ShuffleFeatureNames => shuffle_feature_names(dataset, metadata, pcs_seed)?,
        PerturbationKind::PositiveLeadingStatement => (
            dataset.clone(),
            apply_leading_statement(metadata, Polarity::Positive, settings),
        ),
        PerturbationKind::NegativeLeadingStatement => (
            dataset.clone(),
            apply_leading_statement(metadata, Polarity::Negative, settings),
        ),
    };
    let ds = match condition.arm {
        Arm::Null => shuffle_feature_values(&ds, seed!(condition.seed, "null")),
        Arm::Alternative => ds,
    };
    Ok(PerturbedDataset {
        dataset: ds,
        metadata: meta,
        name_map,
        descriptions_removed,
    })
}

/// A reproducible list of run conditions plus the settings that produced it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunPlan {
    pub schema_version: u32,
    pub master_seed: u64,
    pub replicates: u32,
    pub pcs_kinds: Vec<PerturbationKind>,
    pub include_null_arm: bool,
    pub settings: PerturbationSettings,
    pub conditions: Vec<RunCondition>,
    /// Snapshot of the harness configuration that produced the plan.
    #[serde(default)]
    pub config: serde_json::Value,
}

impl RunPlan {
    pub fn by_arm(&self, arm: Arm) -> impl Iterator<Item = &RunCondition> {
        self.conditions.iter().filter(move |c| c.arm == arm)
    }

    /// Merge another dataset's plan. Both must share master seed and kinds.
    pub fn merge(&mut self, other: RunPlan) -> Result<()> {
        if other.master_seed != self.master_seed {
            return Err(Error::InvalidArgument("cannot merge plans with different master seeds".into()));
        }
        let ids: HashSet<String> = self.conditions.iter().map(RunCondition::run_id).collect();
        if other.conditions.iter().any(|c| ids.contains(&c.run_id())) {
            return Err(Error::InvalidArgument("merged plans share run ids".into()));
        }
        self.conditions.extend(other.conditions);
        Ok(())
    }

    /// Every stored seed matches its re-derivation and run ids are unique.
    pub fn verify(&self) -> Result<()> {
        let mut ids = HashSet::new();
        for c in &self.conditions {
            if c.expected_seed(self.master_seed) != c.seed {
                return Err(Error::Validation(vec![format!("seed mismatch for {}", c.run_id())]));
            }
            if !ids.insert(c.run_id()) {
                return Err(Error::Validation(vec![format!("duplicate run id {}", c.run_id())]));
            }
        }
        Ok(())
    }
}

/// Build the conditions for one dataset: `pcs_kinds × replicates` per arm.
pub fn build_run_plan(
    dataset_id: &str,
    pcs_kinds: &[PerturbationKind],
    replicates: u32,
    master_seed: u64,
    include_null_arm: bool,
    settings: &PerturbationSettings,
) -> Result<RunPlan> {
    if replicates == 0 {
        return Err(Error::InvalidArgument("replicates must be at least 1".into()));
    }
    if pcs_kinds.is_empty() {
        return Err(Error::InvalidArgument("at least one PCS perturbation kind required".into()));
    }
    if pcs_kinds.iter().any(|k| k.is_null_defining()) {
        return Err(Error::InvalidArgument(
            "shuffle_feature_values is null-defining and cannot be a PCS kind".into(),
        ));
    }
    let unique: HashSet<_> = pcs_kinds.iter().collect();
    if unique.len() != pcs_kinds.len() {
        return Err(Error::InvalidArgument("duplicate PCS perturbation kinds".into()));
    }
    if dataset_id.is_empty() {
        return Err(Error::InvalidArgument("dataset id is empty".into()));
    }
    let arms: &[Arm] = if include_null_arm {
        &[Arm::Alternative, Arm::Null]
    } else {
        &[Arm::Alternative]
    };
    let mut conditions = Vec::with_capacity(arms.len() * pcs_kinds.len() * replicates as usize);
    for &arm in arms {
        for &kind in pcs_kinds {
            for replicate in 0..replicates {
                conditions.push(RunCondition {
                    dataset_id: dataset_id.to_owned(),
                    kind,
                    arm,
                    replicate,
                    seed: condition_seed(master_seed, dataset_id, kind, arm, replicate),
                });
            }
        }
    }
    Ok(RunPlan {
        schema_version: PLAN_SCHEMA_VERSION,
        master_seed,
        replicates,
        pcs_kinds: pcs_kinds.to_vec(),
        include_null_arm,
        settings: settings.clone(),
        conditions,
        config: serde_json::Value::Null,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fixture() -> (TabularDataset, DatasetMetadata) {
        let ds = TabularDataset::new(
            "fx",
            vec![
                Column::new("age", [30.0, 41.0, 25.0].map(Cell::Numeric).to_vec()),
                Column::new("group", ["a", "b", "c"].map(|s| Cell::Text(s.into())).to_vec()),
                Column::new("score", [1.5, 2.5, 3.5].map(Cell::Numeric).to_vec()),
            ],
        )
        .unwrap();
        let meta = DatasetMetadata::new("fx", "Does age predict score?")
            .describe("age", "years")
            .describe("score", "test score");
        (ds, meta)
    }

    fn sorted(col: &Column) -> Vec<Cell> {
        let mut v = col.values.clone();
        v.sort_by(Cell::total_cmp);
        v
    }

    #[test]
    fn value_shuffle_on_single_row_is_identity() {
        let ds = TabularDataset::new(
            "one",
            vec![
                Column::new("a", vec![Cell::Numeric(1.0)]),
                Column::new("b", vec![Cell::Text("x".into())]),
            ],
        )
        .unwrap();
        assert_eq!(shuffle_feature_values(&ds, 99), ds);
    }

    #[test]
    fn value_shuffle_is_seeded_and_preserves_multisets() {
        let (ds, _) = fixture();
        let a = shuffle_feature_values(&ds, 17);
        let b = shuffle_feature_values(&ds, 17);
        assert_eq!(a, b);
        assert_eq!(a.column_names(), ds.column_names());
        for (x, y) in a.columns().iter().zip(ds.columns()) {
            assert_eq!(sorted(x), sorted(y));
        }
    }

    #[test]
    fn nonsignal_columns_append_only() {
        let (ds, _) = fixture();
        let out = add_nonsignal_features(&ds, 1, 3).unwrap();
        assert_eq!(out.n_cols(), ds.n_cols() + 1);
        assert_eq!(&out.columns()[..3], ds.columns());
        assert_eq!(out.columns()[3].name, "noise_1");
        assert_eq!(out, add_nonsignal_features(&ds, 1, 3).unwrap());
        assert!(add_nonsignal_features(&ds, 0, 3).is_err());
    }

    #[test]
    fn nonsignal_names_avoid_collisions() {
        let ds = TabularDataset::new(
            "c",
            vec![
                Column::new("noise_1", vec![Cell::Numeric(0.0)]),
                Column::new("noise_1_1", vec![Cell::Numeric(0.0)]),
            ],
        )
        .unwrap();
        let out = add_nonsignal_features(&ds, 2, 0).unwrap();
        assert_eq!(out.column_names(), vec!["noise_1", "noise_1_1", "noise_1_2", "noise_2"]);
    }

    #[test]
    fn nonsignal_numeric_noise_is_uncorrelated() {
        let n = 200;
        let ds = TabularDataset::new(
            "lin",
            vec![
                Column::new("x", (0..n).map(|i| Cell::Numeric(i as f64)).collect()),
                Column::new("y", (0..n).map(|i| Cell::Numeric((i * i % 37) as f64)).collect()),
            ],
        )
        .unwrap();
        let out = add_nonsignal_features(&ds, 5, 2024).unwrap();
        let pearson = |a: &[f64], b: &[f64]| {
            let ma = a.iter().sum::<f64>() / a.len() as f64;
            let mb = b.iter().sum::<f64>() / b.len() as f64;
            let cov: f64 = a.iter().zip(b).map(|(x, y)| (x - ma) * (y - mb)).sum();
            let va: f64 = a.iter().map(|x| (x - ma).powi(2)).sum();
            let vb: f64 = b.iter().map(|y| (y - mb).powi(2)).sum();
            cov / (va * vb).sqrt()
        };
        let values = |c: &Column| c.values.iter().map(|v| v.as_f64().unwrap()).collect::<Vec<_>>();
        for noise in ["noise_1", "noise_3", "noise_5"] {
            let z = values(out.column(noise).unwrap());
            for orig in ["x", "y"] {
                let r = pearson(&z, &values(out.column(orig).unwrap()));
                assert!(r.abs() < 0.3, "{noise} vs {orig}: r = {r}");
            }
        }
        assert_eq!(out.column("noise_2").unwrap().levels().len(), 3);
    }

    #[test]
    fn anonymize_names_in_order_and_idempotent() {
        let (ds, meta) = fixture();
        let (a, am, map) = anonymize_feature_names(&ds, &meta);
        assert_eq!(a.column_names(), vec!["feature1", "feature2", "feature3"]);
        assert!(am.column_descriptions.is_empty());
        assert_eq!(map[1], ("group".to_owned(), "feature2".to_owned()));
        for (x, y) in a.columns().iter().zip(ds.columns()) {
            assert_eq!(x.values, y.values);
        }
        let (b, bm, _) = anonymize_feature_names(&a, &am);
        assert_eq!(b, a);
        assert_eq!(bm, am);
    }

    #[test]
    fn name_shuffle_touches_header_only() {
        let (ds, meta) = fixture();
        for seed in 0..20 {
            let (out, out_meta) = shuffle_feature_names(&ds, &meta, seed).unwrap();
            assert_eq!(out_meta, meta);
            let mut names = out.column_names();
            names.sort();
            let mut orig = ds.column_names();
            orig.sort();
            assert_eq!(names, orig);
            for (x, y) in out.columns().iter().zip(ds.columns()) {
                assert_eq!(x.values, y.values);
            }
        }
    }

    #[test]
    fn name_shuffle_two_columns_swaps_for_some_seed() {
        let ds = TabularDataset::new(
            "two",
            vec![
                Column::new("a", vec![Cell::Numeric(1.0), Cell::Numeric(2.0)]),
                Column::new("b", vec![Cell::Numeric(3.0), Cell::Numeric(4.0)]),
            ],
        )
        .unwrap();
        let meta = DatasetMetadata::new("two", "q?");
        let seed = (0..64)
            .find(|&s| shuffle_feature_names(&ds, &meta, s).unwrap().0.column_names() == vec!["b", "a"])
            .expect("some seed swaps");
        let (out, _) = shuffle_feature_names(&ds, &meta, seed).unwrap();
        assert_eq!(out.columns()[0].values, ds.columns()[0].values);
        assert_eq!(out.columns()[1].values, ds.columns()[1].values);
    }

    #[test]
    fn leading_statements_stack() {
        let (_, meta) = fixture();
        let s = PerturbationSettings::default();
        let pos = apply_leading_statement(&meta, Polarity::Positive, &s);
        assert!(pos.question.starts_with(&s.positive_statement));
        assert!(pos.question.ends_with(&meta.question));
        let both = apply_leading_statement(&pos, Polarity::Negative, &s);
        assert!(both.question.starts_with(&s.negative_statement));
        let pos_at = both.question.find(&s.positive_statement).unwrap();
        assert!(pos_at > 0);
        assert!(both.question.ends_with(&meta.question));
        assert_eq!(both.column_descriptions, meta.column_descriptions);
    }

    #[test]
    fn plan_sizes_and_determinism() {
        let s = PerturbationSettings::default();
        let plan = build_run_plan("d", &PerturbationKind::DEFAULT_PCS, 20, 42, true, &s).unwrap();
        assert_eq!(plan.conditions.len(), 200);
        assert_eq!(plan.by_arm(Arm::Null).count(), 100);
        assert_eq!(plan.by_arm(Arm::Alternative).count(), 100);
        plan.verify().unwrap();
        assert_eq!(plan, build_run_plan("d", &PerturbationKind::DEFAULT_PCS, 20, 42, true, &s).unwrap());

        let tiny = build_run_plan("d", &[PerturbationKind::Identity], 1, 42, false, &s).unwrap();
        assert_eq!(tiny.conditions.len(), 1);
    }

    #[test]
    fn plan_rejects_invalid_kinds() {
        let s = PerturbationSettings::default();
        assert!(build_run_plan("d", &[], 1, 0, true, &s).is_err());
        assert!(build_run_plan("d", &[PerturbationKind::ShuffleFeatureValues], 1, 0, true, &s).is_err());
        assert!(build_run_plan("d", &[PerturbationKind::Identity], 0, 0, true, &s).is_err());
    }

    #[test]
    fn null_arm_composes_value_shuffle() {
        let (ds, meta) = fixture();
        let s = PerturbationSettings::default();
        let plan = build_run_plan("fx", &[PerturbationKind::AddNonSignalFeatures], 3, 5, true, &s).unwrap();
        for c in plan.by_arm(Arm::Null) {
            let out = apply_condition(&ds, &meta, c, &s).unwrap();
            assert_eq!(out.dataset.n_cols(), ds.n_cols() + 5);
            for col in ds.columns() {
                assert_eq!(sorted(out.dataset.column(&col.name).unwrap()), sorted(col));
            }
        }
        for c in plan.by_arm(Arm::Alternative) {
            let out = apply_condition(&ds, &meta, c, &s).unwrap();
            assert_eq!(&out.dataset.columns()[..3], ds.columns());
        }
    }

    #[test]
    fn kind_tags_round_trip() {
        for k in PerturbationKind::all() {
            assert_eq!(k.tag().parse::<PerturbationKind>().unwrap(), k);
            let json = serde_json::to_string(&k).unwrap();
            assert_eq!(json, format!("\"{}\"", k.tag()));
        }
    }
}
