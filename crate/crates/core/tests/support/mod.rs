// SPDX-License-Identifier: MIT OR Apache-2.0

//! Generators and reference implementations shared by the integration tests.
//! The references are written separately from the library so they can act
//! as oracles.

#![allow(dead_code)]

use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use virtue_core::codec::{BackgroundTheory, Symbol};
use virtue_core::data::{Input, Observation};
use virtue_core::edit::EditOp;
use virtue_core::explainers::{
    Ablation, Ablator, Circuit, Clustering, CodeEntry, Dictionary, Mixture, Program, Space, Straightforward, TieRule,
};
use virtue_core::explanation::{Explanation, Family};
use virtue_core::toy::{Activation, Layer, ToyNet};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// A random network that passes range analysis.
pub fn random_net(rng: &mut ChaCha8Rng, sizes: &[usize]) -> ToyNet {
    loop {
        let layers = sizes
            .windows(2)
            .map(|w| Layer {
                inputs: w[0],
                outputs: w[1],
                weights: (0..w[0] * w[1]).map(|_| rng.gen_range(-384..=384)).collect(),
                biases: (0..w[1]).map(|_| rng.gen_range(-256..=256)).collect(),
            })
            .collect();
        if let Ok(net) = ToyNet::new(layers, Activation::Relu, rng.gen()) {
            return net;
        }
    }
}

/// Logits computed with 128-bit integers and Euclidean division, optionally
/// overwriting some activations: `(layer, neuron, value)`.
pub fn reference_logits(net: &ToyNet, x: Input, overrides: &[(usize, usize, i64)]) -> Vec<i64> {
    let one: i128 = 1 << 24;
    let mut acts: Vec<i128> = (0..x.width()).map(|i| if x.bit(i) { one } else { 0 }).collect();
    let depth = net.layers().len();
    for (l, layer) in net.layers().iter().enumerate() {
        for &(ol, on, v) in overrides {
            if ol == l {
                acts[on] = v as i128;
            }
        }
        let mut next = Vec::with_capacity(layer.outputs);
        for j in 0..layer.outputs {
            let mut acc: i128 = 0;
            for i in 0..layer.inputs {
                acc += layer.weights[j * layer.inputs + i] as i128 * acts[i];
            }
            let mut v = acc.div_euclid(256) + (layer.biases[j] as i128) * 65536;
            if l + 1 < depth && net.activation() == Activation::Relu && v < 0 {
                v = 0;
            }
            next.push(v);
        }
        acts = next;
    }
    acts.into_iter().map(|v| v as i64).collect()
}

pub fn argmax_first(v: &[i64]) -> usize {
    let mut best = 0;
    for i in 1..v.len() {
        if v[i] > v[best] {
            best = i;
        }
    }
    best
}

pub fn reference_label(net: &ToyNet, x: Input) -> u16 {
    argmax_first(&reference_logits(net, x, &[])) as u16
}

pub fn all_inputs(n: usize) -> Vec<Input> {
    (0..1u32 << n).map(|b| Input::new(b as u16, n).unwrap()).collect()
}

/// Observations with uniformly drawn inputs and labels.
pub fn random_observations(rng: &mut ChaCha8Rng, n: usize, labels: usize, len: usize) -> Vec<Observation> {
    (0..len)
        .map(|_| {
            let x = Input::new(rng.gen_range(0..1u32 << n) as u16, n).unwrap();
            Observation::new(x, rng.gen_range(0..labels) as u16)
        })
        .collect()
}

pub fn random_clustering(rng: &mut ChaCha8Rng, n: usize, labels: usize) -> Clustering {
    let k = rng.gen_range(1..=6);
    let centroids = (0..k)
        .map(|_| (0..n).map(|_| rng.gen_range(-128..=384)).collect())
        .collect();
    let counts = (0..k)
        .map(|_| (0..labels).map(|_| rng.gen_range(0..5)).collect())
        .collect();
    Clustering::new(Space::Input, TieRule::Lowest, n, labels, centroids, counts, None).unwrap()
}

pub fn random_dictionary(rng: &mut ChaCha8Rng, net: &Arc<ToyNet>, theory: &BackgroundTheory) -> Dictionary {
    let width = net.layer_sizes()[1];
    let m = rng.gen_range(1..=4);
    let max_l0 = rng.gen_range(0..=m.min(2));
    let atoms = (0..m)
        .map(|_| (0..width).map(|_| rng.gen_range(-256..=256)).collect())
        .collect();
    let codes = (0..net.input_count())
        .map(|_| {
            let len = rng.gen_range(0..=max_l0);
            let mut ids: Vec<usize> = (0..m).collect();
            ids.shuffle(rng);
            ids.into_iter()
                .take(len)
                .map(|atom| CodeEntry {
                    atom,
                    magnitude: rng.gen_range(-512..=512),
                })
                .collect()
        })
        .collect();
    Dictionary::new(net.clone(), 1, atoms, max_l0, codes, theory).unwrap()
}

pub fn random_circuit(rng: &mut ChaCha8Rng, net: &Arc<ToyNet>) -> Circuit {
    let ablation = if rng.gen() { Ablation::Zero } else { Ablation::Mean };
    let ab = Arc::new(Ablator::new(net.clone(), ablation).unwrap());
    let active = rng.gen::<u64>() & ab.full_mask();
    Circuit::from_active(ab, active)
}

pub fn random_program(rng: &mut ChaCha8Rng, n: usize, labels: usize) -> Program {
    loop {
        let p = match rng.gen_range(0..5) {
            0 => Program::Const(rng.gen_range(0..labels) as u8),
            1 => Program::Parity,
            2 => Program::Majority,
            3 => Program::ModAdd7,
            _ => Program::Bit(rng.gen_range(0..n) as u8),
        };
        if p.valid_for(n, labels) {
            return p;
        }
    }
}

pub fn random_mixture(rng: &mut ChaCha8Rng, n: usize, labels: usize, theory: &BackgroundTheory) -> Mixture {
    let h = rng.gen_range(1..=4);
    let hs: Vec<(Program, u16, f64)> = (0..h)
        .map(|_| {
            (
                random_program(rng, n, labels),
                rng.gen_range(1..=100),
                rng.gen_range(0.0..0.45),
            )
        })
        .collect();
    Mixture::new(n, labels, &hs, theory).unwrap()
}

/// A random explanation of `family` for a random `[n, hidden, labels]` net.
pub fn random_explanation(
    rng: &mut ChaCha8Rng,
    family: Family,
    theory: &BackgroundTheory,
) -> (Explanation, Arc<ToyNet>) {
    let n = rng.gen_range(2..=5);
    let labels = rng.gen_range(2..=3);
    let hidden = rng.gen_range(1..=4);
    let net = Arc::new(random_net(rng, &[n, hidden, labels]));
    let e = match family {
        Family::Clustering => Explanation::Clustering(random_clustering(rng, n, labels)),
        Family::Dictionary => Explanation::Dictionary(random_dictionary(rng, &net, theory)),
        Family::Circuit => Explanation::Circuit(random_circuit(rng, &net)),
        Family::Mixture => Explanation::Mixture(random_mixture(rng, n, labels, theory)),
        Family::Straightforward => Explanation::Straightforward(Straightforward::new(&net, theory).unwrap()),
    };
    (e, net)
}

/// Edit application written independently of the library.
pub fn oracle_apply(stream: &[Symbol], ops: &[EditOp]) -> Option<Vec<Symbol>> {
    let mut s = stream.to_vec();
    for op in ops {
        match *op {
            EditOp::Insert { location, payload } if location <= s.len() => s.insert(location, payload),
            EditOp::Delete { location } if location < s.len() => {
                s.remove(location);
            }
            EditOp::Substitute { location, payload } if location < s.len() => s[location] = payload,
            EditOp::Transpose { location } if location + 1 < s.len() => s.swap(location, location + 1),
            _ => return None,
        }
    }
    Some(s)
}

/// Every stream reachable in `1..=radius` edits, by brute force over all
/// positions and symbols (including no-op substitutions, which the caller
/// filters out by comparing with the original).
pub fn oracle_neighbors(stream: &[Symbol], alphabet: &[Symbol], radius: usize) -> Vec<Vec<Symbol>> {
    let mut out = Vec::new();
    let mut frontier = vec![stream.to_vec()];
    for _ in 0..radius {
        let mut next = Vec::new();
        for s in &frontier {
            for i in 0..=s.len() {
                for &a in alphabet {
                    let mut t = s.clone();
                    t.insert(i, a);
                    next.push(t);
                }
            }
            for i in 0..s.len() {
                let mut t = s.clone();
                t.remove(i);
                next.push(t);
                for &a in alphabet {
                    let mut t = s.clone();
                    t[i] = a;
                    next.push(t);
                }
                if i + 1 < s.len() {
                    let mut t = s.clone();
                    t.swap(i, i + 1);
                    next.push(t);
                }
            }
        }
        out.extend(next.iter().cloned());
        frontier = next;
    }
    out
}

/// Hard-to-vary verdict by brute force: the best neighbor that differs from
/// the original must fall short of it by more than the tie tolerance.
pub fn oracle_hard_to_vary(
    stream: &[Symbol],
    alphabet: &[Symbol],
    radius: usize,
    hv: impl Fn(&[Symbol]) -> Option<f64>,
) -> bool {
    let base = hv(stream).expect("original decodes");
    oracle_neighbors(stream, alphabet, radius)
        .iter()
        .filter(|s| s.as_slice() != stream)
        .filter_map(|s| hv(s))
        .all(|v| v < base - 1e-9)
}

/// Dominance check in `O(n^2)`: a point survives when nothing is at least as
/// good on both axes and strictly better on one.
pub fn oracle_frontier(points: &[(f64, u64)]) -> Vec<usize> {
    (0..points.len())
        .filter(|&i| {
            !points.iter().any(|q| {
                let p = points[i];
                q.0 >= p.0 && q.1 <= p.1 && (q.0 > p.0 || q.1 < p.1)
            })
        })
        .collect()
}

/// Activations of layer `layer` (0 is the input) by the reference forward.
pub fn reference_activations(net: &ToyNet, x: Input, layer: usize) -> Vec<i64> {
    if layer == 0 {
        return (0..x.width()).map(|i| if x.bit(i) { 1 << 24 } else { 0 }).collect();
    }
    let mut trimmed = net.layers()[..layer].to_vec();
    // Reuse the forward on the prefix; the prefix's last layer is hidden, so
    // append an identity read-out to keep its activation applied.
    let width = trimmed.last().unwrap().outputs;
    let mut id = Layer::zeros(width, width);
    for j in 0..width {
        id.weights[j * width + j] = 256;
    }
    trimmed.push(id);
    let prefix = ToyNet::new(trimmed, net.activation(), 0).expect("prefix of a valid net");
    reference_logits(&prefix, x, &[])
}

/// `(layer, neuron)` of every ablatable neuron: inputs, then hidden layers.
pub fn reference_blocks(net: &ToyNet) -> Vec<(usize, usize)> {
    let sizes = net.layer_sizes();
    let mut out = Vec::new();
    for (l, &n) in sizes[..sizes.len() - 1].iter().enumerate() {
        for j in 0..n {
            out.push((l, j));
        }
    }
    out
}

/// Replacement values per block.
pub fn reference_ablation_values(net: &ToyNet, ablation: Ablation) -> Vec<i64> {
    let blocks = reference_blocks(net);
    match ablation {
        Ablation::Zero => vec![0; blocks.len()],
        Ablation::Mean => {
            let inputs = all_inputs(net.input_width());
            blocks
                .iter()
                .map(|&(l, j)| {
                    let s: i64 = inputs.iter().map(|&x| reference_activations(net, x, l)[j]).sum();
                    s.div_euclid(inputs.len() as i64)
                })
                .collect()
        }
    }
}

/// Fraction of inputs where the net with blocks outside `active` replaced
/// agrees with the clean net.
pub fn reference_faithfulness(net: &ToyNet, values: &[i64], active: &[bool]) -> f64 {
    let blocks = reference_blocks(net);
    let overrides: Vec<(usize, usize, i64)> = blocks
        .iter()
        .zip(values)
        .zip(active)
        .filter(|(_, &a)| !a)
        .map(|((&(l, j), &v), _)| (l, j, v))
        .collect();
    let inputs = all_inputs(net.input_width());
    let agree = inputs
        .iter()
        .filter(|&&x| argmax_first(&reference_logits(net, x, &overrides)) == reference_label(net, x) as usize)
        .count();
    agree as f64 / inputs.len() as f64
}

/// Exhaustive incompleteness and minimality over every subset of the circuit.
pub fn oracle_fcm(net: &ToyNet, ablation: Ablation, circuit: &[bool]) -> (f64, f64, Vec<(usize, f64)>) {
    let values = reference_ablation_values(net, ablation);
    let nb = circuit.len();
    let members: Vec<usize> = (0..nb).filter(|&b| circuit[b]).collect();
    let mut memo = std::collections::HashMap::new();
    let mut f = |set: Vec<bool>| {
        *memo
            .entry(set.clone())
            .or_insert_with(|| reference_faithfulness(net, &values, &set))
    };
    let subset = |of: &[usize], code: u64| -> Vec<usize> {
        of.iter()
            .enumerate()
            .filter(|(i, _)| code >> i & 1 == 1)
            .map(|(_, &b)| b)
            .collect()
    };
    let remove = |base: &[bool], k: &[usize]| -> Vec<bool> {
        let mut s = base.to_vec();
        for &b in k {
            s[b] = false;
        }
        s
    };
    let faith = f(circuit.to_vec());
    let all = vec![true; nb];
    let mut inc = 0.0f64;
    for code in 0..1u64 << members.len() {
        let k = subset(&members, code);
        inc = inc.max((f(remove(circuit, &k)) - f(remove(&all, &k))).abs());
    }
    let mut mins = Vec::new();
    for &v in &members {
        let rest: Vec<usize> = members.iter().copied().filter(|&b| b != v).collect();
        let mut best = 0.0f64;
        for code in 0..1u64 << rest.len() {
            let mut k = subset(&rest, code);
            let without = f(remove(circuit, &k));
            k.push(v);
            best = best.max((f(remove(circuit, &k)) - without).abs());
        }
        mins.push((v, best));
    }
    (faith, inc, mins)
}
