// SPDX-License-Identifier: MIT OR Apache-2.0

//! Verifiers that certify lower bounds on a network's task accuracy, with
//! their cost in FLOPs.
//!
//! Cost model: a multiply-add is 2 FLOPs, an interval multiply-add 8, an
//! interval addition 2, comparisons are free.

pub mod pareto;
pub mod svg;

use serde::{Deserialize, Serialize};

use crate::data::Input;
use crate::explainers::{Circuit, Clustering};
use crate::fixed::{param_to_act, shr_ceil, shr_floor, Interval, ACT_ONE, PARAM_FRAC_BITS};
use crate::toy::{Activation, TaskSpec, ToyNet};

pub use pareto::{pareto, ParetoPoint};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Strategy {
    BruteForce,
    ClusterGuided,
    CircuitGuided,
}

impl Strategy {
    pub fn as_str(self) -> &'static str {
        match self {
            Strategy::BruteForce => "brute_force",
            Strategy::ClusterGuided => "cluster_guided",
            Strategy::CircuitGuided => "circuit_guided",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProofCertificate {
    pub id: String,
    pub strategy: Strategy,
    /// `credited / total`.
    pub bound: f64,
    /// Inputs the verifier proved correct.
    pub credited: u64,
    pub total: u64,
    pub flops: u64,
    /// Set by [`audit`].
    pub sound: Option<bool>,
    /// Nothing could be certified.
    pub vacuous: bool,
}

impl ProofCertificate {
    fn new(id: &str, strategy: Strategy, credited: u64, total: u64, flops: u64) -> Self {
        ProofCertificate {
            id: id.to_string(),
            strategy,
            bound: credited as f64 / total as f64,
            credited,
            total,
            flops,
            sound: None,
            vacuous: credited == 0,
        }
    }

    pub fn pareto_point(&self) -> ParetoPoint {
        ParetoPoint {
            bound: self.bound,
            flops: self.flops,
            label: format!("{}:{}", self.strategy.as_str(), self.id),
        }
    }
}

/// Inputs on which the network agrees with the task.
pub fn correct_count(net: &ToyNet, task: &TaskSpec) -> u64 {
    Input::enumerate(net.input_width())
        .filter(|&x| net.label(x) == task.target(x))
        .count() as u64
}

/// Whether logit intervals force `label` under the lowest-index tie rule.
pub fn certifies(logits: &[Interval], label: usize) -> bool {
    let ly = logits[label].lo;
    logits.iter().enumerate().all(|(j, iv)| match j.cmp(&label) {
        std::cmp::Ordering::Less => ly > iv.hi,
        std::cmp::Ordering::Equal => true,
        std::cmp::Ordering::Greater => ly >= iv.hi,
    })
}

/// Runs the network on every input and counts agreement with the task.
pub fn brute_force_proof(net: &ToyNet, task: &TaskSpec) -> ProofCertificate {
    let total = net.input_count() as u64;
    ProofCertificate::new(
        "brute_force",
        Strategy::BruteForce,
        correct_count(net, task),
        total,
        total * net.forward_flops(),
    )
}

/// Smallest box containing a set of inputs.
pub fn bounding_box(cell: &[Input], n: usize) -> Vec<Interval> {
    (0..n)
        .map(|i| {
            let any1 = cell.iter().any(|x| x.bit(i));
            let all1 = cell.iter().all(|x| x.bit(i));
            Interval::new(if all1 { ACT_ONE } else { 0 }, if any1 { ACT_ONE } else { 0 })
        })
        .collect()
}

/// Proof over a partition of the inputs: a cell whose members share one
/// target label is credited in full when interval propagation over its
/// bounding box forces that label.
pub fn partition_proof(id: &str, net: &ToyNet, task: &TaskSpec, cells: &[Vec<Input>]) -> ProofCertificate {
    let n = net.input_width();
    let total = net.input_count() as u64;
    let mut credited = 0u64;
    let mut propagated = 0u64;
    for cell in cells {
        let Some(first) = cell.first() else { continue };
        let y = task.target(*first);
        if cell.iter().any(|&x| task.target(x) != y) {
            continue;
        }
        propagated += 1;
        let bounds = net.interval_forward(&bounding_box(cell, n));
        if certifies(bounds.last().expect("at least one layer"), y as usize) {
            credited += cell.len() as u64;
        }
    }
    // One bookkeeping step per input to check its cell and target.
    let flops = propagated * net.interval_forward_flops() + total;
    ProofCertificate::new(id, Strategy::ClusterGuided, credited, total, flops)
}

pub fn cluster_guided_proof(id: &str, net: &ToyNet, task: &TaskSpec, c: &Clustering) -> ProofCertificate {
    partition_proof(id, net, task, &c.cells())
}

fn act_interval(activation: Activation, iv: Interval) -> Interval {
    match activation {
        Activation::Relu => iv.relu(),
        Activation::Identity => iv,
    }
}

/// Proof guided by a circuit.
///
/// Neurons inside the circuit are propagated per input. A neuron outside it
/// is only known to lie in its interval over the whole input cube, so its
/// contribution to the next layer is an interval fixed once, up front. The
/// bound therefore concerns the real network, not the ablated one. With the
/// full circuit nothing is bounded loosely and the proof is brute force.
pub fn circuit_guided_proof(id: &str, net: &ToyNet, task: &TaskSpec, circuit: &Circuit) -> ProofCertificate {
    let layers = net.layers();
    let depth = layers.len();
    let sizes = net.layer_sizes();
    let blocks = circuit.ablator().blocks();
    let active_set = circuit.active();
    // active[l][i]: neuron i of activation layer l is in the circuit.
    let mut active: Vec<Vec<bool>> = sizes[..depth].iter().map(|&s| vec![false; s]).collect();
    for (b, blk) in blocks.iter().enumerate() {
        active[blk.layer][blk.neuron] = active_set >> b & 1 == 1;
    }
    // needed[l][k]: neuron k of layer l must be computed per input.
    let needed: Vec<Vec<bool>> = (0..=depth)
        .map(|l| {
            if l == depth {
                vec![true; sizes[depth]]
            } else {
                active[l].clone()
            }
        })
        .collect();

    let any_masked_hidden = (1..depth).any(|l| active[l].iter().any(|a| !a));
    let cube = vec![Interval::new(0, ACT_ONE); sizes[0]];
    let global = net.interval_forward(&cube);
    let mut flops_once = if any_masked_hidden {
        net.interval_forward_flops()
    } else {
        0
    };

    // Raw (pre-shift) interval offsets from masked neurons.
    let mut offsets: Vec<Vec<Option<(i64, i64)>>> = vec![Vec::new(); depth + 1];
    for l in 0..depth {
        let lay = &layers[l];
        offsets[l + 1] = (0..lay.outputs)
            .map(|k| {
                if !needed[l + 1][k] {
                    return None;
                }
                let mut acc: Option<(i64, i64)> = None;
                for i in 0..lay.inputs {
                    if active[l][i] {
                        continue;
                    }
                    let (lo, hi) = global[l][i].scale_raw(lay.weight(k, i));
                    let a = acc.get_or_insert((0, 0));
                    a.0 += lo;
                    a.1 += hi;
                    flops_once += 8;
                }
                acc
            })
            .collect();
    }

    // Per-input cost; activations stay points until an offset is added.
    let mut per_input = 0u64;
    let mut points = true;
    for l in 0..depth {
        let out_needed = needed[l + 1].iter().filter(|&&n| n).count() as u64;
        let in_active = active[l].iter().filter(|&&a| a).count() as u64;
        per_input += in_active * out_needed * if points { 2 } else { 8 };
        let with_offset = offsets[l + 1].iter().filter(|o| o.is_some()).count() as u64;
        per_input += with_offset * 2;
        points = points && with_offset == 0;
    }

    let total = net.input_count() as u64;
    let mut credited = 0u64;
    for x in Input::enumerate(sizes[0]) {
        let mut acts: Vec<Interval> = ToyNet::input_activations(x).into_iter().map(Interval::point).collect();
        for l in 0..depth {
            let lay = &layers[l];
            let mut next = vec![Interval::point(0); lay.outputs];
            for k in 0..lay.outputs {
                if !needed[l + 1][k] {
                    continue;
                }
                let (mut lo, mut hi) = offsets[l + 1][k].unwrap_or((0, 0));
                for i in 0..lay.inputs {
                    if active[l][i] {
                        let (a, b) = acts[i].scale_raw(lay.weight(k, i));
                        lo += a;
                        hi += b;
                    }
                }
                let bias = param_to_act(lay.biases[k]);
                let iv = Interval::new(
                    shr_floor(lo, PARAM_FRAC_BITS) + bias,
                    shr_ceil(hi, PARAM_FRAC_BITS) + bias,
                );
                next[k] = if l + 1 < depth {
                    act_interval(net.activation(), iv)
                } else {
                    iv
                };
            }
            acts = next;
        }
        if certifies(&acts, task.target(x) as usize) {
            credited += 1;
        }
    }
    ProofCertificate::new(
        id,
        Strategy::CircuitGuided,
        credited,
        total,
        flops_once + total * per_input,
    )
}

/// Checks a certificate against full enumeration: sound when the credited
/// count does not exceed the number of inputs the net gets right.
pub fn audit(cert: &mut ProofCertificate, net: &ToyNet, task: &TaskSpec) -> bool {
    let sound = cert.credited <= correct_count(net, task) && cert.total == net.input_count() as u64;
    cert.sound = Some(sound);
    sound
}
