// SPDX-License-Identifier: MIT OR Apache-2.0

//! Virtue metrics. All likelihoods and lengths are in bits.

pub mod adhoc;
pub mod hard_to_vary;
pub mod scorecard;

use std::io::Write;

use flate2::write::DeflateEncoder;
use flate2::Compression;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::codec::BackgroundTheory;
use crate::data::{Input, Observation};
use crate::error::{Error, Result};
use crate::explanation::Explanation;
use crate::toy::ToyNet;

pub use adhoc::{adhocness, hypothesis_bits, hypothesis_bits_given, mixture_adhocness};
pub use hard_to_vary::{is_hard_to_vary, HvOptions, HvVerdict};
pub use scorecard::{score, Level, ScoreContext, VirtueScorecard};

/// Bits charged for a decompressor on top of the compressed payload.
pub const DECOMPRESSOR_STUB_BITS: u64 = 256;

/// `log2 P(x_T | E)`.
pub fn accuracy(e: &Explanation, train: &[Observation]) -> Result<f64> {
    if train.is_empty() {
        return Err(Error::InvalidArgument("accuracy needs at least one observation".into()));
    }
    e.log_likelihood(train)
}

/// `2^accuracy`, when it is representable without underflow.
pub fn accuracy_probability(accuracy_log2: f64) -> Option<f64> {
    (accuracy_log2 > -1020.0).then(|| accuracy_log2.exp2())
}

/// `Σ_i log2 P(x_i | E)`, each point on its own.
pub fn descriptiveness(e: &Explanation, train: &[Observation]) -> Result<f64> {
    e.pointwise_log_likelihood(train)
}

/// Accuracy minus descriptiveness; zero for an empty dataset.
pub fn co_explanation(e: &Explanation, train: &[Observation]) -> Result<f64> {
    if train.is_empty() {
        return Ok(0.0);
    }
    Ok(accuracy(e, train)? - descriptiveness(e, train)?)
}

/// Log-prior under the coding prior `2^-|E|`.
pub fn prior(e: &Explanation, b: &BackgroundTheory) -> Result<f64> {
    Ok(-(e.conciseness(b)? as f64))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Fruitfulness {
    pub bits: f64,
    /// Set when there was no held-out data to score.
    pub empty: bool,
}

/// `log2 P(x_I | E)` on held-out data.
pub fn fruitfulness(e: &Explanation, heldout: &[Observation]) -> Result<Fruitfulness> {
    Ok(Fruitfulness {
        bits: e.log_likelihood(heldout)?,
        empty: heldout.is_empty(),
    })
}

pub fn consistency_check(e: &Explanation) -> bool {
    e.is_consistent()
}

pub fn parsimony(e: &Explanation) -> u64 {
    e.entity_count()
}

pub fn conciseness(e: &Explanation, b: &BackgroundTheory) -> Result<u64> {
    e.conciseness(b)
}

/// Bits of the raw deflate stream of `bytes` at the highest level.
pub fn deflate_bits(bytes: &[u8]) -> u64 {
    let mut enc = DeflateEncoder::new(Vec::new(), Compression::best());
    enc.write_all(bytes).expect("writing to a Vec cannot fail");
    8 * enc.finish().expect("writing to a Vec cannot fail").len() as u64
}

/// Upper bound on the Kolmogorov complexity: the code itself, or its deflate
/// compression plus a fixed decompressor stub, whichever is shorter.
pub fn k_complexity(e: &Explanation, b: &BackgroundTheory) -> Result<u64> {
    let bits = e.serialize(b)?;
    Ok(bits.len().min(deflate_bits(bits.as_bytes()) + DECOMPRESSOR_STUB_BITS))
}

/// `hv(E) = accuracy - k(E)`.
pub fn hard_to_varyness(e: &Explanation, train: &[Observation], b: &BackgroundTheory) -> Result<f64> {
    Ok(accuracy(e, train)? - k_complexity(e, b)? as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SamplerConfig {
    pub num_datasets: usize,
    pub dataset_size: usize,
    pub seed: u64,
}

impl SamplerConfig {
    pub fn validate(&self) -> Result<()> {
        if self.num_datasets == 0 || self.dataset_size == 0 {
            return Err(Error::Config(
                "sampler needs num_datasets >= 1 and dataset_size >= 1".into(),
            ));
        }
        Ok(())
    }
}

/// Dataset `j` of a sampler: uniform inputs with replacement, labeled by the
/// network. Each dataset has its own ChaCha stream, so the draw does not
/// depend on which worker computes it.
pub fn sampled_dataset(net: &ToyNet, cfg: &SamplerConfig, j: u64) -> Vec<Observation> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(j);
    let n = net.input_width();
    (0..cfg.dataset_size)
        .map(|_| {
            let x = Input::new(rng.gen_range(0..1u32 << n) as u16, n).expect("drawn below 2^n");
            Observation::new(x, net.label(x))
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub mean: f64,
    pub stderr: f64,
}

fn estimate(values: &[f64]) -> Estimate {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let stderr = if values.len() < 2 {
        0.0
    } else {
        let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
        (var / n).sqrt()
    };
    Estimate { mean, stderr }
}

/// Precision, power, and unification from one shared set of datasets.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MonteCarlo {
    pub precision: Estimate,
    pub power: Estimate,
    /// `precision.mean - power.mean`; the stderr is that of the per-dataset
    /// differences.
    pub unification: Estimate,
}

/// Expected joint and pointwise log-likelihood over sampled datasets.
pub fn monte_carlo(e: &Explanation, cfg: &SamplerConfig, generator: &ToyNet) -> Result<MonteCarlo> {
    cfg.validate()?;
    let pairs: Vec<(f64, f64)> = (0..cfg.num_datasets as u64)
        .into_par_iter()
        .map(|j| {
            let data = sampled_dataset(generator, cfg, j);
            Ok((e.log_likelihood(&data)?, e.pointwise_log_likelihood(&data)?))
        })
        .collect::<Result<_>>()?;
    let joint: Vec<f64> = pairs.iter().map(|p| p.0).collect();
    let point: Vec<f64> = pairs.iter().map(|p| p.1).collect();
    let diff: Vec<f64> = pairs.iter().map(|p| p.0 - p.1).collect();
    let precision = estimate(&joint);
    let power = estimate(&point);
    Ok(MonteCarlo {
        precision,
        power,
        unification: Estimate {
            mean: precision.mean - power.mean,
            stderr: estimate(&diff).stderr,
        },
    })
}

pub fn precision(e: &Explanation, cfg: &SamplerConfig, generator: &ToyNet) -> Result<Estimate> {
    Ok(monte_carlo(e, cfg, generator)?.precision)
}

pub fn power(e: &Explanation, cfg: &SamplerConfig, generator: &ToyNet) -> Result<Estimate> {
    Ok(monte_carlo(e, cfg, generator)?.power)
}

pub fn unification(e: &Explanation, cfg: &SamplerConfig, generator: &ToyNet) -> Result<Estimate> {
    Ok(monte_carlo(e, cfg, generator)?.unification)
}
