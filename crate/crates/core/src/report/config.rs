// SPDX-License-Identifier: MIT OR Apache-2.0

//! Run configuration.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::explainers::{Ablation, FcmOptions, Space};
use crate::toy::{TaskName, TaskSpec};
use crate::virtues::{HvOptions, SamplerConfig};

use super::rubric::RubricThresholds;

fn default_train_fraction() -> f64 {
    0.5
}

fn default_dictionary_layer() -> usize {
    1
}

fn default_max_l0() -> usize {
    2
}

fn default_true() -> bool {
    true
}

fn default_ablation() -> Ablation {
    Ablation::Mean
}

/// Which explainers to fit, and with which settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExplainerGrid {
    #[serde(default)]
    pub clustering_k: Vec<usize>,
    #[serde(default = "default_space")]
    pub clustering_space: Space,
    #[serde(default)]
    pub dictionary_atoms: Vec<usize>,
    #[serde(default = "default_dictionary_layer")]
    pub dictionary_layer: usize,
    #[serde(default = "default_max_l0")]
    pub dictionary_max_l0: usize,
    #[serde(default)]
    pub circuit_tau: Vec<f64>,
    #[serde(default = "default_ablation")]
    pub circuit_ablation: Ablation,
    /// Hypothesis counts for fitted mixtures.
    #[serde(default)]
    pub mixture_hypotheses: Vec<usize>,
    #[serde(default = "default_true")]
    pub straightforward: bool,
}

fn default_space() -> Space {
    Space::Input
}

impl ExplainerGrid {
    pub fn len(&self) -> usize {
        self.clustering_k.len()
            + self.dictionary_atoms.len()
            + self.circuit_tau.len()
            + self.mixture_hypotheses.len()
            + self.straightforward as usize
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub task: TaskName,
    /// One trained network per seed.
    pub seeds: Vec<u64>,
    /// Share of the enumerated inputs used as training data; the rest is
    /// held out.
    #[serde(default = "default_train_fraction")]
    pub train_fraction: f64,
    pub grid: ExplainerGrid,
    pub sampler: SamplerConfig,
    #[serde(default)]
    pub hv: HvOptions,
    #[serde(default)]
    pub fcm: FcmOptions,
    /// Falls back to the shipped thresholds.
    #[serde(default)]
    pub rubric_thresholds: Option<RubricThresholds>,
    pub output_dir: PathBuf,
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text =
            std::fs::read_to_string(path).map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn thresholds(&self) -> RubricThresholds {
        self.rubric_thresholds.clone().unwrap_or_default()
    }

    pub fn task_spec(&self) -> TaskSpec {
        TaskSpec::get(self.task)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        let task = self.task_spec();
        let sizes = task.layer_sizes();
        let g = &self.grid;
        if self.seeds.is_empty() {
            return bad("at least one seed is required".into());
        }
        if g.is_empty() {
            return bad("the explainer grid is empty".into());
        }
        if !(self.train_fraction > 0.0 && self.train_fraction <= 1.0) {
            return bad(format!("train_fraction {} is outside (0, 1]", self.train_fraction));
        }
        for &k in &g.clustering_k {
            if k == 0 || k > 1 << task.n {
                return bad(format!("clustering k={k} is outside 1..={}", 1 << task.n));
            }
        }
        if let Space::Layer(l) = g.clustering_space {
            if l == 0 || l >= sizes.len() - 1 {
                return bad(format!("clustering layer {l} is not a hidden layer"));
            }
        }
        if g.dictionary_layer == 0 || g.dictionary_layer >= sizes.len() - 1 {
            return bad(format!("dictionary layer {} is not a hidden layer", g.dictionary_layer));
        }
        for &a in &g.dictionary_atoms {
            if a == 0 || a > 255 {
                return bad(format!("dictionary atom count {a} is outside 1..=255"));
            }
            if g.dictionary_max_l0 > a {
                return bad(format!("max_l0 {} exceeds atom count {a}", g.dictionary_max_l0));
            }
        }
        for &tau in &g.circuit_tau {
            if !(0.0..=1.0).contains(&tau) {
                return bad(format!("circuit tau {tau} is outside [0, 1]"));
            }
        }
        for &h in &g.mixture_hypotheses {
            if h == 0 || h > 255 {
                return bad(format!("mixture hypothesis count {h} is outside 1..=255"));
            }
        }
        self.sampler.validate()?;
        if !(1..=2).contains(&self.hv.radius) {
            return bad(format!("hv radius {} must be 1 or 2", self.hv.radius));
        }
        if self.fcm.subset_budget == 0 {
            return bad("fcm subset_budget must be at least 1".into());
        }
        self.thresholds().validate()
    }
}
