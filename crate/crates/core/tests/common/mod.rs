#![allow(dead_code)]

use std::f64::consts::{PI, SQRT_2};
use std::path::{Path, PathBuf};

use pcs_sanity::agent::{AgentBackend, MockBackend, ScoreModel};
use pcs_sanity::cli::{DatasetEntry, HarnessConfig};
use pcs_sanity::seed;
use pcs_sanity::tabular::{write_dataset, Cell, Column, DatasetMetadata, TabularDataset};
use rand::Rng;
use rand_distr::StandardNormal;

/// A small teaching-evaluation style dataset with a real effect of `beauty`.
pub fn teaching_dataset(rows: usize, seed: u64) -> (TabularDataset, DatasetMetadata) {
    let mut rng = seed::rng(seed);
    let mut beauty = Vec::new();
    let mut gender = Vec::new();
    let mut age = Vec::new();
    let mut eval = Vec::new();
    for i in 0..rows {
        let b: f64 = rng.sample(StandardNormal);
        let g = if rng.random_bool(0.5) { "female" } else { "male" };
        let a = 30.0 + f64::from(rng.random_range(0..35u32));
        let e: f64 = 4.0 + 0.3 * b - if g == "female" { 0.2 } else { 0.0 } + 0.4 * rng.sample::<f64, _>(StandardNormal);
        beauty.push(Cell::Numeric((b * 1000.0).round() / 1000.0));
        gender.push(Cell::Text(g.into()));
        age.push(if i % 37 == 5 { Cell::Missing } else { Cell::Numeric(a) });
        eval.push(Cell::Numeric((e * 100.0).round() / 100.0));
    }
    let ds = TabularDataset::new(
        "teaching",
        vec![
            Column::new("beauty", beauty),
            Column::new("gender", gender),
            Column::new("age", age),
            Column::new("eval", eval),
        ],
    )
    .unwrap();
    let meta = DatasetMetadata::new("teaching", "Does instructor beauty affect teaching evaluations?")
        .describe("beauty", "standardized rating of physical appearance")
        .describe("gender", "instructor gender")
        .describe("age", "instructor age in years")
        .describe("eval", "average course evaluation score, 1 to 5");
    (ds, meta)
}

/// Write the fixture under `dir` and return a config entry for it.
pub fn write_fixture(dir: &Path, id: &str, rows: usize, seed: u64) -> DatasetEntry {
    let (ds, meta) = teaching_dataset(rows, seed);
    let sub = dir.join(id);
    let written = write_dataset(&ds, &meta, &sub).unwrap();
    DatasetEntry {
        id: id.into(),
        csv: written.csv,
        metadata: written.metadata,
        dependent: Some("eval".into()),
        independents: vec!["beauty".into(), "gender".into(), "age".into()],
    }
}

pub fn mock_config(entries: Vec<DatasetEntry>, out: PathBuf, alt: (f64, f64), null: (f64, f64)) -> HarnessConfig {
    let mut cfg = HarnessConfig::new(entries);
    cfg.out_dir = out;
    cfg.backend = AgentBackend::Mock(MockBackend::new(ScoreModel::new(alt.0, alt.1), ScoreModel::new(null.0, null.1)));
    cfg
}

/// Complementary error function, Chebyshev fit with fractional error below 1.2e-7.
pub fn erfc(x: f64) -> f64 {
    let z = x.abs();
    let t = 1.0 / (1.0 + 0.5 * z);
    let poly = -z * z - 1.265_512_23
        + t * (1.000_023_68
            + t * (0.374_091_96
                + t * (0.096_784_18
                    + t * (-0.186_288_06
                        + t * (0.278_868_07
                            + t * (-1.135_203_98 + t * (1.488_515_87 + t * (-0.822_152_23 + t * 0.170_872_77))))))));
    let r = t * poly.exp();
    if x >= 0.0 {
        r
    } else {
        2.0 - r
    }
}

pub fn normal_cdf(x: f64, m: f64, s: f64) -> f64 {
    0.5 * erfc(-(x - m) / (s * SQRT_2))
}

pub fn normal_pdf(x: f64, m: f64, s: f64) -> f64 {
    (-(x - m).powi(2) / (2.0 * s * s)).exp() / (s * (2.0 * PI).sqrt())
}

/// Overlap of two normal densities on the real line, from their crossing points.
pub fn normal_overlap(m1: f64, s1: f64, m2: f64, s2: f64) -> f64 {
    // log f1 = log f2  <=>  a x^2 + b x + c = 0
    let a = 1.0 / (2.0 * s2 * s2) - 1.0 / (2.0 * s1 * s1);
    let b = m1 / (s1 * s1) - m2 / (s2 * s2);
    let c = m2 * m2 / (2.0 * s2 * s2) - m1 * m1 / (2.0 * s1 * s1) + (s2 / s1).ln();
    if a.abs() < 1e-15 && b.abs() < 1e-15 {
        return 1.0;
    }
    let mut cuts = if a.abs() < 1e-15 {
        vec![-c / b]
    } else {
        let d = (b * b - 4.0 * a * c).max(0.0).sqrt();
        vec![(-b - d) / (2.0 * a), (-b + d) / (2.0 * a)]
    };
    cuts.sort_by(f64::total_cmp);
    let mut edges = vec![f64::NEG_INFINITY];
    edges.extend(cuts);
    edges.push(f64::INFINITY);
    edges
        .windows(2)
        .map(|w| {
            let probe = match (w[0].is_finite(), w[1].is_finite()) {
                (true, true) => 0.5 * (w[0] + w[1]),
                (false, true) => w[1] - 1.0,
                (true, false) => w[0] + 1.0,
                (false, false) => m1,
            };
            let (m, s) = if normal_pdf(probe, m1, s1) <= normal_pdf(probe, m2, s2) { (m1, s1) } else { (m2, s2) };
            let hi = if w[1].is_finite() { normal_cdf(w[1], m, s) } else { 1.0 };
            let lo = if w[0].is_finite() { normal_cdf(w[0], m, s) } else { 0.0 };
            hi - lo
        })
        .sum()
}

/// Scores drawn like the mock backend's: rounded, clamped normal draws.
pub fn likert_draws(mean: f64, sd: f64, n: usize, seed: u64) -> Vec<f64> {
    let mut rng = seed::rng(seed);
    let model = ScoreModel::new(mean, sd);
    (0..n).map(|_| f64::from(model.draw(&mut rng))).collect()
}
