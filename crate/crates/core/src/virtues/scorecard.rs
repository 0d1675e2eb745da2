// SPDX-License-Identifier: MIT OR Apache-2.0

//! The full virtue vector for one explanation.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::codec::BackgroundTheory;
use crate::data::Observation;
use crate::edit::EditOp;
use crate::error::Result;
use crate::explanation::{Explanation, Family};
use crate::toy::ToyNet;

use super::{
    accuracy, accuracy_probability, adhoc, consistency_check, fruitfulness, hard_to_vary, k_complexity, monte_carlo,
    parsimony, prior, HvOptions, SamplerConfig,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Level {
    None,
    Weak,
    High,
}

impl Level {
    pub fn glyph(self) -> char {
        match self {
            Level::High => '✓',
            Level::Weak => '○',
            Level::None => '✗',
        }
    }

    pub fn from_glyph(c: char) -> Option<Level> {
        [Level::High, Level::Weak, Level::None]
            .into_iter()
            .find(|l| l.glyph() == c)
    }
}

/// Scorecards serialize as one flat JSON object; standard errors use the
/// `_stderr` suffix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VirtueScorecard {
    pub id: String,
    pub family: Family,
    pub accuracy_log2: f64,
    pub accuracy_probability: Option<f64>,
    pub accuracy_clamped: bool,
    pub descriptiveness: f64,
    pub co_explanation: f64,
    pub precision_est: f64,
    pub precision_est_stderr: f64,
    pub power_est: f64,
    pub power_est_stderr: f64,
    pub unification_est: f64,
    pub unification_est_stderr: f64,
    pub prior_log2: f64,
    pub fruitfulness_log2: f64,
    pub fruitfulness_empty: bool,
    pub consistency: bool,
    pub parsimony: u64,
    /// Entity counts are declared per family, so comparing them across
    /// families is not meaningful.
    pub parsimony_cross_family_canonical: bool,
    pub conciseness_bits: u64,
    pub k_complexity_bits: u64,
    pub hv_value: f64,
    pub hard_to_vary: bool,
    pub hard_to_vary_tie: bool,
    pub hard_to_vary_sampled: bool,
    pub hard_to_vary_neighbors: u64,
    pub hard_to_vary_witness: Option<Vec<EditOp>>,
    /// Adhocness of the last mixture hypothesis; absent for other families.
    pub adhocness: Option<f64>,
    pub adhocness_conditioning: String,
    pub nomological_flag: bool,
    pub train_size: usize,
    pub heldout_size: usize,
    /// Size of each Monte Carlo dataset.
    pub sampler_dataset_size: usize,
    pub model_parameter_count: u64,
    pub model_parameter_bits: u64,
    pub rubric_levels: BTreeMap<String, Level>,
    /// Family-specific diagnostics.
    #[serde(flatten)]
    pub extra: BTreeMap<String, f64>,
}

/// Everything a scorecard depends on besides the explanation.
#[derive(Debug, Clone, Copy)]
pub struct ScoreContext<'a> {
    pub train: &'a [Observation],
    pub heldout: &'a [Observation],
    pub theory: &'a BackgroundTheory,
    pub sampler: SamplerConfig,
    /// The network whose outputs label sampled datasets.
    pub generator: &'a ToyNet,
    pub hv: HvOptions,
}

pub fn score(id: &str, e: &Explanation, ctx: &ScoreContext) -> Result<VirtueScorecard> {
    let b = ctx.theory;
    let joint = e.joint_log_likelihood(ctx.train)?;
    let acc = accuracy(e, ctx.train)?;
    let desc = e.pointwise_log_likelihood(ctx.train)?;
    let mc = monte_carlo(e, &ctx.sampler, ctx.generator)?;
    let fruit = fruitfulness(e, ctx.heldout)?;
    let k = k_complexity(e, b)?;
    let verdict = hard_to_vary::is_hard_to_vary(e, ctx.train, b, &ctx.hv)?;
    let mut extra = BTreeMap::new();
    match e {
        Explanation::Dictionary(d) => {
            extra.insert("dictionary_code_bits".into(), d.code_bits() as f64);
            extra.insert("dictionary_matrix_bits".into(), d.dictionary_bits() as f64);
            let n = d.subject().input_count();
            let err: f64 = crate::data::Input::enumerate(d.subject().input_width())
                .map(|x| d.reconstruction_error(x))
                .sum();
            extra.insert("dictionary_mean_reconstruction_error".into(), err / n as f64);
        }
        Explanation::Circuit(c) => {
            extra.insert("circuit_faithfulness".into(), c.faithfulness());
        }
        _ => {}
    }
    Ok(VirtueScorecard {
        id: id.to_string(),
        family: e.family(),
        accuracy_log2: acc,
        accuracy_probability: accuracy_probability(acc),
        accuracy_clamped: joint.clamped,
        descriptiveness: desc,
        co_explanation: acc - desc,
        precision_est: mc.precision.mean,
        precision_est_stderr: mc.precision.stderr,
        power_est: mc.power.mean,
        power_est_stderr: mc.power.stderr,
        unification_est: mc.unification.mean,
        unification_est_stderr: mc.unification.stderr,
        prior_log2: prior(e, b)?,
        fruitfulness_log2: fruit.bits,
        fruitfulness_empty: fruit.empty,
        consistency: consistency_check(e),
        parsimony: parsimony(e),
        parsimony_cross_family_canonical: false,
        conciseness_bits: e.conciseness(b)?,
        k_complexity_bits: k,
        hv_value: acc - k as f64,
        hard_to_vary: verdict.hard_to_vary,
        hard_to_vary_tie: verdict.tie,
        hard_to_vary_sampled: verdict.sampled,
        hard_to_vary_neighbors: verdict.examined,
        hard_to_vary_witness: if verdict.hard_to_vary { None } else { verdict.witness },
        adhocness: adhoc::mixture_adhocness(e, b)?,
        adhocness_conditioning: "codebook mixed with the explanation's tag frequencies".into(),
        nomological_flag: e.nomological(),
        train_size: ctx.train.len(),
        heldout_size: ctx.heldout.len(),
        sampler_dataset_size: ctx.sampler.dataset_size,
        model_parameter_count: ctx.generator.parameter_count() as u64,
        model_parameter_bits: ctx.generator.parameter_count() as u64 * b.quantization_bits() as u64,
        rubric_levels: BTreeMap::new(),
        extra,
    })
}
