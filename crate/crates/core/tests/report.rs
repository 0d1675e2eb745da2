// SPDX-License-Identifier: MIT OR Apache-2.0

use proptest::prelude::*;
use virtue_core::report::{self, map_rubric, Cell, ComparisonTable, RubricThresholds, RunConfig};
use virtue_core::virtues::{Level, VirtueScorecard};

fn run_grid(grid: &str) -> (Vec<VirtueScorecard>, ComparisonTable) {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = RunConfig::from_json(&format!(
        r#"{{"task": "majority8", "seeds": [5], "grid": {grid},
            "sampler": {{"num_datasets": 8, "dataset_size": 32, "seed": 1}},
            "hv": {{"radius": 1, "cap": 20000, "samples": 200, "seed": 2}},
            "output_dir": "unused"}}"#
    ))
    .unwrap();
    cfg.output_dir = dir.path().to_path_buf();
    report::run_score(&cfg).unwrap()
}

fn level(sc: &VirtueScorecard, virtue: &str) -> Level {
    sc.rubric_levels[virtue]
}

#[test]
fn straightforward_only_grid() {
    let (cards, table) = run_grid(r#"{"straightforward": true}"#);
    assert_eq!(cards.len(), 1);
    let sc = &cards[0];
    for v in ["accuracy", "descriptiveness", "precision", "power"] {
        assert_eq!(level(sc, v), Level::High, "{v}");
    }
    // A verbatim copy of the parameters costs more than one bit per
    // parameter bit once the header is counted.
    assert_eq!(level(sc, "conciseness"), Level::None);
    assert_eq!(level(sc, "consistency"), Level::High);
    assert_eq!(table.columns, vec![sc.id.clone()]);
    assert_eq!(table.cell("accuracy", &sc.id).unwrap().level, Level::High);
}

#[test]
fn one_cluster_is_less_accurate_than_the_net_itself() {
    let (cards, _) = run_grid(r#"{"clustering_k": [1], "straightforward": true}"#);
    let k1 = cards.iter().find(|c| c.id.ends_with("clustering-k1")).unwrap();
    let sf = cards.iter().find(|c| c.id.ends_with("straightforward")).unwrap();
    assert!(level(k1, "accuracy") < level(sf, "accuracy"));
    assert!(k1.accuracy_log2 < sf.accuracy_log2);
}

#[test]
fn rubric_reads_normalized_values() {
    let (cards, _) = run_grid(r#"{"straightforward": true}"#);
    let t = RubricThresholds::default();
    assert_eq!(t.get("accuracy").unwrap().high, -0.1);

    let mut sc = cards[0].clone();
    sc.accuracy_log2 = 0.0;
    sc.consistency = false;
    let levels = map_rubric(&sc, &t).unwrap();
    assert_eq!(levels["accuracy"], Level::High);
    assert_eq!(levels["consistency"], Level::None);

    // Halfway between the cutoffs, per observation.
    sc.accuracy_log2 = -0.3 * sc.train_size as f64;
    assert_eq!(map_rubric(&sc, &t).unwrap()["accuracy"], Level::Weak);
    sc.accuracy_log2 = -0.6 * sc.train_size as f64;
    assert_eq!(map_rubric(&sc, &t).unwrap()["accuracy"], Level::None);
}

fn level_strategy() -> impl Strategy<Value = Level> {
    prop::sample::select(vec![Level::High, Level::Weak, Level::None])
}

proptest! {
    #[test]
    fn csv_round_trips(
        rows in 1usize..6,
        cols in 1usize..5,
        seed_cells in prop::collection::vec((level_strategy(), prop::option::of(-1e6f64..1e6)), 30),
    ) {
        let mut it = seed_cells.into_iter().cycle();
        let table = ComparisonTable {
            rows: (0..rows).map(|r| format!("virtue_{r}")).collect(),
            columns: (0..cols).map(|c| format!("e-{c}")).collect(),
            cells: (0..rows)
                .map(|_| (0..cols).map(|_| { let (level, raw) = it.next().unwrap(); Cell { level, raw } }).collect())
                .collect(),
        };
        let back = ComparisonTable::from_csv(&table.to_csv().unwrap()).unwrap();
        prop_assert_eq!(back, table);
    }
}
