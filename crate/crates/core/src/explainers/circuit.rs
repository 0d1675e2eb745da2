// SPDX-License-Identifier: MIT OR Apache-2.0

//! Circuits: a subset of the network's edge blocks, with everything outside
//! the subset ablated.
//!
//! A block is the fan of outgoing weights of one neuron in the input layer or
//! a hidden layer, so a `[8, 4, 2]` net has twelve blocks. Ablating a block
//! replaces that neuron's output, as seen by the next layer, with zero or
//! with its mean over all inputs.

use std::collections::HashMap;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::codec::{Field, FieldSource, Tag};
use crate::data::Input;
use crate::error::{Error, Result};
use crate::explanation::smoothed_point_mass;
use crate::toy::ToyNet;

/// Largest number of blocks a circuit can address.
pub const MAX_BLOCKS: usize = 64;

/// Largest subset family evaluated exhaustively by [`fcm_scores`].
pub const EXHAUSTIVE_SUBSETS: u64 = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Ablation {
    Zero,
    Mean,
}

impl Ablation {
    fn tag(self) -> Tag {
        match self {
            Ablation::Zero => Tag::AblateZero,
            Ablation::Mean => Tag::AblateMean,
        }
    }
}

/// Position of a block in the network: activation layer and neuron.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Block {
    pub layer: usize,
    pub neuron: usize,
}

/// Blocks of `net` in order: input neurons first, then each hidden layer.
pub fn blocks(net: &ToyNet) -> Vec<Block> {
    let sizes = net.layer_sizes();
    sizes[..sizes.len() - 1]
        .iter()
        .enumerate()
        .flat_map(|(layer, &n)| (0..n).map(move |neuron| Block { layer, neuron }))
        .collect()
}

/// Evaluates ablated copies of one network.
#[derive(Debug, Clone)]
pub struct Ablator {
    net: Arc<ToyNet>,
    ablation: Ablation,
    blocks: Vec<Block>,
    /// Replacement value per block.
    values: Vec<i64>,
    clean: Vec<u16>,
}

impl Ablator {
    pub fn new(net: Arc<ToyNet>, ablation: Ablation) -> Result<Self> {
        let blocks = blocks(&net);
        if blocks.len() > MAX_BLOCKS {
            return Err(Error::InvalidArgument(format!(
                "{} blocks exceed the supported {MAX_BLOCKS}",
                blocks.len()
            )));
        }
        let values = match ablation {
            Ablation::Zero => vec![0; blocks.len()],
            Ablation::Mean => {
                let mut sums = vec![0i64; blocks.len()];
                for x in Input::enumerate(net.input_width()) {
                    let acts = net.activations(x);
                    for (s, b) in sums.iter_mut().zip(&blocks) {
                        *s += acts[b.layer][b.neuron];
                    }
                }
                let n = net.input_count() as i64;
                sums.into_iter().map(|s| s.div_euclid(n)).collect()
            }
        };
        let clean = Input::enumerate(net.input_width()).map(|x| net.label(x)).collect();
        Ok(Ablator {
            net,
            ablation,
            blocks,
            values,
            clean,
        })
    }

    pub fn net(&self) -> &Arc<ToyNet> {
        &self.net
    }

    pub fn ablation(&self) -> Ablation {
        self.ablation
    }

    pub fn blocks(&self) -> &[Block] {
        &self.blocks
    }

    /// The value an ablated block's neuron is replaced with.
    pub fn value(&self, block: usize) -> i64 {
        self.values[block]
    }

    pub fn full_mask(&self) -> u64 {
        if self.blocks.len() == 64 {
            u64::MAX
        } else {
            (1u64 << self.blocks.len()) - 1
        }
    }

    /// Logits with every block outside `active` ablated.
    pub fn logits(&self, active: u64, x: Input) -> Vec<i64> {
        let blocks = &self.blocks;
        let values = &self.values;
        self.net.forward_hooked(x, &mut |layer, acts| {
            for (b, blk) in blocks.iter().enumerate() {
                if blk.layer == layer && active >> b & 1 == 0 {
                    acts[blk.neuron] = values[b];
                }
            }
        })
    }

    pub fn label(&self, active: u64, x: Input) -> u16 {
        crate::fixed::argmax_lowest(&self.logits(active, x)) as u16
    }

    /// Number of inputs on which the ablated net agrees with the clean net.
    pub fn agreement(&self, active: u64) -> u64 {
        Input::enumerate(self.net.input_width())
            .zip(&self.clean)
            .filter(|(x, &y)| self.label(active, *x) == y)
            .count() as u64
    }

    /// Agreement as a fraction of all inputs.
    pub fn faithfulness(&self, active: u64) -> f64 {
        self.agreement(active) as f64 / self.net.input_count() as f64
    }
}

#[derive(Debug, Clone)]
pub struct Circuit {
    ablator: Arc<Ablator>,
    /// One bit per addressed block; may be shorter or longer than the
    /// network's block list.
    mask: Vec<bool>,
}

impl Circuit {
    pub fn new(ablator: Arc<Ablator>, mask: Vec<bool>) -> Result<Self> {
        if mask.len() > 255 {
            return Err(Error::InvalidArgument("a circuit mask has at most 255 bits".into()));
        }
        Ok(Circuit { ablator, mask })
    }

    pub fn full(ablator: Arc<Ablator>) -> Self {
        let n = ablator.blocks().len();
        Circuit {
            ablator,
            mask: vec![true; n],
        }
    }

    pub fn empty(ablator: Arc<Ablator>) -> Self {
        let n = ablator.blocks().len();
        Circuit {
            ablator,
            mask: vec![false; n],
        }
    }

    pub fn from_active(ablator: Arc<Ablator>, active: u64) -> Self {
        let n = ablator.blocks().len();
        let mask = (0..n).map(|b| active >> b & 1 == 1).collect();
        Circuit { ablator, mask }
    }

    pub fn subject(&self) -> &Arc<ToyNet> {
        self.ablator.net()
    }

    pub fn ablator(&self) -> &Arc<Ablator> {
        &self.ablator
    }

    pub fn mask(&self) -> &[bool] {
        &self.mask
    }

    /// In-range blocks of the circuit as a bit set.
    pub fn active(&self) -> u64 {
        let n = self.ablator.blocks().len();
        self.mask
            .iter()
            .take(n)
            .enumerate()
            .filter(|(_, &on)| on)
            .fold(0u64, |acc, (b, _)| acc | 1 << b)
    }

    pub fn node_count(&self) -> usize {
        self.active().count_ones() as usize
    }

    pub fn faithfulness(&self) -> f64 {
        self.ablator.faithfulness(self.active())
    }

    pub fn distribution(&self, x: Input) -> Vec<f64> {
        let net = self.subject();
        smoothed_point_mass(self.ablator.label(self.active(), x) as usize, net.label_count())
    }

    /// False when the mask switches on a block the network does not have.
    pub fn is_consistent(&self) -> bool {
        self.mask.iter().skip(self.ablator.blocks().len()).all(|&on| !on)
    }

    pub(crate) fn encode(&self, out: &mut Vec<Field>) {
        out.push(Field::Tag(self.ablator.ablation().tag()));
        out.push(Field::uint(self.mask.len() as u64, 8));
        out.extend(self.mask.iter().map(|&on| Field::uint(on as u64, 1)));
    }

    pub(crate) fn decode(src: &mut dyn FieldSource, subject: &Arc<ToyNet>) -> Result<Self> {
        let pos = src.position();
        let ablation = match src.tag()? {
            Tag::AblateZero => Ablation::Zero,
            Tag::AblateMean => Ablation::Mean,
            t => return Err(Error::decode(pos, format!("expected an ablation tag, found {t}"))),
        };
        let count = src.uint(8)? as usize;
        let mask = (0..count).map(|_| src.uint(1).map(|b| b == 1)).collect::<Result<_>>()?;
        let ablator = Arc::new(Ablator::new(Arc::clone(subject), ablation)?);
        Ok(Circuit { ablator, mask })
    }
}

/// Greedy pruning: remove the block whose removal keeps faithfulness
/// highest, lowest index first on ties, while faithfulness stays at least
/// `1 - tau`.
pub fn discover_circuit(ablator: Arc<Ablator>, tau: f64) -> Circuit {
    let mut active = ablator.full_mask();
    let floor = 1.0 - tau;
    while active != 0 {
        let mut best: Option<(u64, usize)> = None;
        for b in 0..ablator.blocks().len() {
            if active >> b & 1 == 0 {
                continue;
            }
            let a = ablator.agreement(active & !(1 << b));
            if best.is_none_or(|(ba, _)| a > ba) {
                best = Some((a, b));
            }
        }
        let (a, b) = best.expect("active set is non-empty");
        if (a as f64 / ablator.net().input_count() as f64) < floor {
            break;
        }
        active &= !(1 << b);
    }
    Circuit::from_active(ablator, active)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct FcmOptions {
    /// Subsets drawn per score when exhaustive enumeration is too large.
    pub subset_budget: usize,
    pub seed: u64,
}

impl Default for FcmOptions {
    fn default() -> Self {
        FcmOptions {
            subset_budget: 512,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FcmScores {
    pub faithfulness: f64,
    pub incompleteness_max: f64,
    /// Block index and minimality score, for every block in the circuit.
    pub minimality: Vec<(usize, f64)>,
    pub exhaustive: bool,
}

/// Subsets of the bit set `of`: all of them when there are at most
/// [`EXHAUSTIVE_SUBSETS`], otherwise the empty set plus `budget` random ones.
fn subsets(of: u64, budget: usize, rng: &mut ChaCha8Rng) -> (Vec<u64>, bool) {
    let members: Vec<u32> = (0..64).filter(|b| of >> b & 1 == 1).collect();
    if (1u64 << members.len().min(63)) <= EXHAUSTIVE_SUBSETS {
        let all = (0..1u64 << members.len())
            .map(|code| {
                members
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| code >> i & 1 == 1)
                    .fold(0u64, |acc, (_, &b)| acc | 1 << b)
            })
            .collect();
        return (all, true);
    }
    let mut out = vec![0u64];
    for _ in 0..budget {
        let k = members
            .iter()
            .fold(0u64, |acc, &b| if rng.gen::<bool>() { acc | 1 << b } else { acc });
        out.push(k);
    }
    (out, false)
}

/// Faithfulness, incompleteness, and per-block minimality of a circuit.
pub fn fcm_scores(circuit: &Circuit, opts: &FcmOptions) -> Result<FcmScores> {
    if opts.subset_budget == 0 {
        return Err(Error::InvalidArgument("subset_budget must be at least 1".into()));
    }
    let ab = circuit.ablator();
    let total = ab.net().input_count() as f64;
    let full = ab.full_mask();
    let c = circuit.active();
    let mut cache: HashMap<u64, u64> = HashMap::new();
    let mut f = |active: u64| *cache.entry(active).or_insert_with(|| ab.agreement(active)) as f64 / total;
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);

    let (ks, exhaustive) = subsets(c, opts.subset_budget, &mut rng);
    let mut incompleteness_max = 0.0f64;
    for &k in &ks {
        incompleteness_max = incompleteness_max.max((f(c & !k) - f(full & !k)).abs());
    }

    let mut minimality = Vec::new();
    for v in (0..64).filter(|b| c >> b & 1 == 1) {
        let rest = c & !(1u64 << v);
        let (ks, _) = subsets(rest, opts.subset_budget, &mut rng);
        let mut best = 0.0f64;
        for &k in &ks {
            best = best.max((f(c & !(k | 1 << v)) - f(c & !k)).abs());
        }
        minimality.push((v as usize, best));
    }
    Ok(FcmScores {
        faithfulness: f(c),
        incompleteness_max,
        minimality,
        exhaustive,
    })
}
