// SPDX-License-Identifier: MIT OR Apache-2.0

//! Mapping raw scorecard values to high, weak, and none levels.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::virtues::{Level, VirtueScorecard};

pub const DEFAULT_THRESHOLDS_JSON: &str = include_str!("../../data/rubric_thresholds.json");

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    HigherIsBetter,
    LowerIsBetter,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Measure {
    Numeric(Direction),
    Boolean,
}

/// Table rows in order, one per implemented virtue.
pub const VIRTUES: [(&str, Measure); 15] = [
    ("accuracy", Measure::Numeric(Direction::HigherIsBetter)),
    ("descriptiveness", Measure::Numeric(Direction::HigherIsBetter)),
    ("co_explanation", Measure::Numeric(Direction::HigherIsBetter)),
    ("precision", Measure::Numeric(Direction::HigherIsBetter)),
    ("power", Measure::Numeric(Direction::HigherIsBetter)),
    ("unification", Measure::Numeric(Direction::HigherIsBetter)),
    ("prior", Measure::Numeric(Direction::HigherIsBetter)),
    ("fruitfulness", Measure::Numeric(Direction::HigherIsBetter)),
    ("consistency", Measure::Boolean),
    ("parsimony", Measure::Numeric(Direction::LowerIsBetter)),
    ("conciseness", Measure::Numeric(Direction::LowerIsBetter)),
    ("k_complexity", Measure::Numeric(Direction::LowerIsBetter)),
    ("hard_to_vary", Measure::Boolean),
    ("adhocness", Measure::Numeric(Direction::LowerIsBetter)),
    ("nomological", Measure::Boolean),
];

pub fn measure(virtue: &str) -> Option<Measure> {
    VIRTUES.iter().find(|(name, _)| *name == virtue).map(|&(_, m)| m)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Cutoffs {
    pub high: f64,
    pub weak: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RubricThresholds {
    pub version: String,
    #[serde(default)]
    pub note: String,
    pub thresholds: BTreeMap<String, Cutoffs>,
}

impl Default for RubricThresholds {
    fn default() -> Self {
        serde_json::from_str(DEFAULT_THRESHOLDS_JSON).expect("shipped thresholds parse")
    }
}

impl RubricThresholds {
    /// Cutoffs must name known numeric virtues and be finite, with the high
    /// cutoff at least as strict as the weak one.
    pub fn validate(&self) -> Result<()> {
        for (name, c) in &self.thresholds {
            let dir = match measure(name) {
                Some(Measure::Numeric(d)) => d,
                Some(Measure::Boolean) => {
                    return Err(Error::Config(format!("`{name}` is boolean and takes no thresholds")))
                }
                None => return Err(Error::Config(format!("unknown virtue `{name}` in thresholds"))),
            };
            if !c.high.is_finite() || !c.weak.is_finite() {
                return Err(Error::Config(format!("thresholds for `{name}` must be finite")));
            }
            let ordered = match dir {
                Direction::HigherIsBetter => c.high >= c.weak,
                Direction::LowerIsBetter => c.high <= c.weak,
            };
            if !ordered {
                return Err(Error::Config(format!(
                    "high cutoff for `{name}` is looser than the weak one"
                )));
            }
        }
        Ok(())
    }

    pub fn get(&self, virtue: &str) -> Result<Cutoffs> {
        self.thresholds
            .get(virtue)
            .copied()
            .ok_or_else(|| Error::MissingThreshold(virtue.to_string()))
    }
}

fn per(value: f64, count: u64) -> Option<f64> {
    (count > 0).then(|| value / count as f64)
}

/// The number a row is judged on. Likelihoods are per observation, code
/// lengths per model parameter bit, and entity counts per model parameter.
/// `None` when the virtue does not apply.
pub fn normalized_value(sc: &VirtueScorecard, virtue: &str) -> Option<f64> {
    let bool_raw = |b: bool| Some(if b { 1.0 } else { 0.0 });
    let train = sc.train_size as u64;
    let sample = sc.sampler_dataset_size as u64;
    match virtue {
        "accuracy" => per(sc.accuracy_log2, train),
        "descriptiveness" => per(sc.descriptiveness, train),
        "co_explanation" => per(sc.co_explanation, train),
        "precision" => per(sc.precision_est, sample),
        "power" => per(sc.power_est, sample),
        "unification" => per(sc.unification_est, sample),
        "prior" => per(sc.prior_log2, sc.model_parameter_bits),
        "fruitfulness" if sc.fruitfulness_empty => None,
        "fruitfulness" => per(sc.fruitfulness_log2, sc.heldout_size as u64),
        "consistency" => bool_raw(sc.consistency),
        "parsimony" => per(sc.parsimony as f64, sc.model_parameter_count),
        "conciseness" => per(sc.conciseness_bits as f64, sc.model_parameter_bits),
        "k_complexity" => per(sc.k_complexity_bits as f64, sc.model_parameter_bits),
        "hard_to_vary" => bool_raw(sc.hard_to_vary),
        "adhocness" => sc.adhocness,
        "nomological" => bool_raw(sc.nomological_flag),
        _ => None,
    }
}

pub fn level_for(value: f64, dir: Direction, c: Cutoffs) -> Level {
    let at_least = |cut: f64| match dir {
        Direction::HigherIsBetter => value >= cut,
        Direction::LowerIsBetter => value <= cut,
    };
    if at_least(c.high) {
        Level::High
    } else if at_least(c.weak) {
        Level::Weak
    } else {
        Level::None
    }
}

/// Levels for every virtue. Booleans map true to high and false to none;
/// a virtue that does not apply gets none.
pub fn map_rubric(sc: &VirtueScorecard, t: &RubricThresholds) -> Result<BTreeMap<String, Level>> {
    let mut out = BTreeMap::new();
    for (name, m) in VIRTUES {
        let level = match (m, normalized_value(sc, name)) {
            (Measure::Boolean, v) => {
                if v == Some(1.0) {
                    Level::High
                } else {
                    Level::None
                }
            }
            (Measure::Numeric(dir), v) => {
                let cut = t.get(name)?;
                match v {
                    Some(v) => level_for(v, dir, cut),
                    None => Level::None,
                }
            }
        };
        out.insert(name.to_string(), level);
    }
    Ok(out)
}
