// SPDX-License-Identifier: MIT OR Apache-2.0

//! Exactly enumerable toy networks and the tasks they are trained on.
//!
//! A [`ToyNet`] is a small multilayer perceptron whose parameters are Q8.8
//! fixed-point numbers. All arithmetic is integer, so a forward pass gives the
//! same logits on every platform. Inputs are bit vectors of width at most 12,
//! which keeps the whole input space small enough to enumerate.

use std::fmt;
use std::io::{Read, Write};
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::data::{Dataset, Input, Observation, MAX_INPUT_WIDTH};
use crate::error::{Error, Result};
use crate::fixed::{argmax_lowest, param_to_act, shr_ceil, shr_floor, Interval, ACT_LIMIT, ACT_ONE, PARAM_FRAC_BITS};

pub const NET_MAGIC: &[u8; 4] = b"XTN1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    Relu,
    Identity,
}

impl Activation {
    #[inline]
    fn apply(self, x: i64) -> i64 {
        match self {
            Activation::Relu => x.max(0),
            Activation::Identity => x,
        }
    }

    fn apply_interval(self, iv: Interval) -> Interval {
        match self {
            Activation::Relu => iv.relu(),
            Activation::Identity => iv,
        }
    }
}

/// One affine layer. `weights` is row-major: `weights[j * inputs + i]` feeds
/// input `i` into output `j`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Layer {
    pub inputs: usize,
    pub outputs: usize,
    pub weights: Vec<i16>,
    pub biases: Vec<i16>,
}

impl Layer {
    pub fn zeros(inputs: usize, outputs: usize) -> Self {
        Layer {
            inputs,
            outputs,
            weights: vec![0; inputs * outputs],
            biases: vec![0; outputs],
        }
    }

    #[inline]
    pub fn weight(&self, out: usize, inp: usize) -> i16 {
        self.weights[out * self.inputs + inp]
    }

    #[inline]
    fn pre_activation(&self, acts: &[i64], out: usize) -> i64 {
        let row = &self.weights[out * self.inputs..(out + 1) * self.inputs];
        let acc: i64 = row.iter().zip(acts).map(|(&w, &a)| a * w as i64).sum();
        shr_floor(acc, PARAM_FRAC_BITS) + param_to_act(self.biases[out])
    }

    fn interval_pre_activation(&self, acts: &[Interval], out: usize) -> Interval {
        let (mut lo, mut hi) = (0i64, 0i64);
        for (i, a) in acts.iter().enumerate() {
            let (l, h) = a.scale_raw(self.weight(out, i));
            lo += l;
            hi += h;
        }
        let b = param_to_act(self.biases[out]);
        Interval::new(shr_floor(lo, PARAM_FRAC_BITS) + b, shr_ceil(hi, PARAM_FRAC_BITS) + b)
    }

    pub fn parameter_count(&self) -> usize {
        self.weights.len() + self.biases.len()
    }
}

/// Result of a forward pass.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Forward {
    pub label: u16,
    pub logits: Vec<i64>,
}

/// A fixed-point multilayer perceptron. The activation is applied after every
/// layer except the last, whose outputs are the label logits.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ToyNet {
    layers: Vec<Layer>,
    activation: Activation,
    seed: u64,
}

impl ToyNet {
    /// Builds a net after checking shapes and running the range analysis.
    pub fn new(layers: Vec<Layer>, activation: Activation, seed: u64) -> Result<Self> {
        if layers.is_empty() {
            return Err(Error::InvalidArgument("a net needs at least one layer".into()));
        }
        if layers[0].inputs == 0 || layers[0].inputs > MAX_INPUT_WIDTH {
            return Err(Error::InvalidArgument(format!(
                "input width must be in 1..={MAX_INPUT_WIDTH}, got {}",
                layers[0].inputs
            )));
        }
        for (l, layer) in layers.iter().enumerate() {
            if layer.outputs == 0 || layer.outputs > 255 || layer.inputs > 255 {
                return Err(Error::InvalidArgument(format!(
                    "layer {l} has unsupported size {}x{}",
                    layer.inputs, layer.outputs
                )));
            }
            if layer.weights.len() != layer.inputs * layer.outputs || layer.biases.len() != layer.outputs {
                return Err(Error::InvalidArgument(format!("layer {l} parameter shape mismatch")));
            }
            if l > 0 && layers[l - 1].outputs != layer.inputs {
                return Err(Error::InvalidArgument(format!(
                    "layer {l} expects {} inputs but previous layer has {} outputs",
                    layer.inputs,
                    layers[l - 1].outputs
                )));
            }
        }
        let net = ToyNet {
            layers,
            activation,
            seed,
        };
        net.check_range()?;
        Ok(net)
    }

    /// A net of the given sizes with every parameter zero.
    pub fn zeros(sizes: &[usize], activation: Activation) -> Result<Self> {
        if sizes.len() < 2 {
            return Err(Error::InvalidArgument("need at least two layer sizes".into()));
        }
        let layers = sizes.windows(2).map(|w| Layer::zeros(w[0], w[1])).collect();
        ToyNet::new(layers, activation, 0)
    }

    /// Interval bounds over the whole input cube must stay inside Q8.24.
    fn check_range(&self) -> Result<()> {
        let cube = vec![Interval::new(0, ACT_ONE); self.input_width()];
        let mut acts = cube;
        for (l, layer) in self.layers.iter().enumerate() {
            let pre: Vec<Interval> = (0..layer.outputs)
                .map(|j| layer.interval_pre_activation(&acts, j))
                .collect();
            let bound = pre.iter().map(Interval::magnitude).max().unwrap_or(0);
            if bound >= ACT_LIMIT {
                return Err(Error::FixedPointOverflow {
                    layer: l,
                    bound,
                    limit: ACT_LIMIT,
                });
            }
            acts = if l + 1 < self.layers.len() {
                pre.into_iter().map(|iv| self.activation.apply_interval(iv)).collect()
            } else {
                pre
            };
        }
        Ok(())
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    pub fn activation(&self) -> Activation {
        self.activation
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn depth(&self) -> usize {
        self.layers.len()
    }

    pub fn layer_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![self.layers[0].inputs];
        sizes.extend(self.layers.iter().map(|l| l.outputs));
        sizes
    }

    pub fn input_width(&self) -> usize {
        self.layers[0].inputs
    }

    pub fn label_count(&self) -> usize {
        self.layers[self.layers.len() - 1].outputs
    }

    pub fn input_count(&self) -> usize {
        1 << self.input_width()
    }

    pub fn parameter_count(&self) -> usize {
        self.layers.iter().map(Layer::parameter_count).sum()
    }

    /// Multiply-adds counted at two FLOPs each.
    pub fn forward_flops(&self) -> u64 {
        self.layers.iter().map(|l| 2 * (l.inputs * l.outputs) as u64).sum()
    }

    /// Interval multiply-adds counted at eight FLOPs each.
    pub fn interval_forward_flops(&self) -> u64 {
        self.layers.iter().map(|l| 8 * (l.inputs * l.outputs) as u64).sum()
    }

    fn check_width(&self, input: Input) -> Result<()> {
        if input.width() != self.input_width() {
            return Err(Error::WidthMismatch {
                expected: self.input_width(),
                got: input.width(),
            });
        }
        Ok(())
    }

    /// Layer-0 activations for an input: each bit becomes 0.0 or 1.0.
    pub fn input_activations(input: Input) -> Vec<i64> {
        (0..input.width())
            .map(|i| if input.bit(i) { ACT_ONE } else { 0 })
            .collect()
    }

    pub fn forward(&self, input: Input) -> Result<Forward> {
        self.check_width(input)?;
        let logits = self.forward_from(0, &Self::input_activations(input));
        Ok(Forward {
            label: argmax_lowest(&logits) as u16,
            logits,
        })
    }

    /// Label only; `input` must already have the right width.
    pub fn label(&self, input: Input) -> u16 {
        debug_assert_eq!(input.width(), self.input_width());
        argmax_lowest(&self.forward_from(0, &Self::input_activations(input))) as u16
    }

    /// Runs the layers after activation layer `layer` (0 = input) and returns
    /// the logits.
    pub fn forward_from(&self, layer: usize, acts: &[i64]) -> Vec<i64> {
        let mut cur = acts.to_vec();
        for (l, lay) in self.layers.iter().enumerate().skip(layer) {
            let mut next: Vec<i64> = (0..lay.outputs).map(|j| lay.pre_activation(&cur, j)).collect();
            if l + 1 < self.layers.len() {
                for v in &mut next {
                    *v = self.activation.apply(*v);
                }
            }
            cur = next;
        }
        cur
    }

    /// Forward pass that lets `hook` overwrite the activations of layer `l`
    /// before they feed layer `l + 1`.
    pub fn forward_hooked(&self, input: Input, hook: &mut dyn FnMut(usize, &mut [i64])) -> Vec<i64> {
        let mut cur = Self::input_activations(input);
        for (l, lay) in self.layers.iter().enumerate() {
            hook(l, &mut cur);
            let mut next: Vec<i64> = (0..lay.outputs).map(|j| lay.pre_activation(&cur, j)).collect();
            if l + 1 < self.layers.len() {
                for v in &mut next {
                    *v = self.activation.apply(*v);
                }
            }
            cur = next;
        }
        cur
    }

    /// Activations of every layer, from the input (index 0) to the logits.
    pub fn activations(&self, input: Input) -> Vec<Vec<i64>> {
        let mut all = vec![Self::input_activations(input)];
        for (l, lay) in self.layers.iter().enumerate() {
            let prev = &all[l];
            let mut next: Vec<i64> = (0..lay.outputs).map(|j| lay.pre_activation(prev, j)).collect();
            if l + 1 < self.layers.len() {
                for v in &mut next {
                    *v = self.activation.apply(*v);
                }
            }
            all.push(next);
        }
        all
    }

    /// Interval propagation with outward rounding. Returns the bounds of every
    /// layer, starting with `input_box`.
    pub fn interval_forward(&self, input_box: &[Interval]) -> Vec<Vec<Interval>> {
        let mut all = vec![input_box.to_vec()];
        for (l, lay) in self.layers.iter().enumerate() {
            let prev = &all[l];
            let mut next: Vec<Interval> = (0..lay.outputs).map(|j| lay.interval_pre_activation(prev, j)).collect();
            if l + 1 < self.layers.len() {
                for v in &mut next {
                    *v = self.activation.apply_interval(*v);
                }
            }
            all.push(next);
        }
        all
    }

    /// Every input with the label the net assigns to it, in lexicographic order.
    pub fn enumerate_io(&self) -> Vec<Observation> {
        Input::enumerate(self.input_width())
            .map(|x| Observation::new(x, self.label(x)))
            .collect()
    }

    pub fn to_blob(&self) -> Vec<u8> {
        let mut out = Vec::new();
        out.extend_from_slice(NET_MAGIC);
        out.push(match self.activation {
            Activation::Relu => 0,
            Activation::Identity => 1,
        });
        out.push(self.layers.len() as u8);
        for s in self.layer_sizes() {
            out.extend_from_slice(&(s as u16).to_le_bytes());
        }
        out.extend_from_slice(&self.seed.to_le_bytes());
        for layer in &self.layers {
            for w in layer.weights.iter().chain(&layer.biases) {
                out.extend_from_slice(&w.to_le_bytes());
            }
        }
        out
    }

    pub fn from_blob(mut bytes: &[u8]) -> Result<Self> {
        let bad = |what: &str| Error::decode(0, format!("net blob: {what}"));
        let mut magic = [0u8; 4];
        bytes.read_exact(&mut magic).map_err(|_| bad("truncated header"))?;
        if &magic != NET_MAGIC {
            return Err(bad("wrong magic"));
        }
        let mut head = [0u8; 2];
        bytes.read_exact(&mut head).map_err(|_| bad("truncated header"))?;
        let activation = match head[0] {
            0 => Activation::Relu,
            1 => Activation::Identity,
            _ => return Err(bad("unknown activation")),
        };
        let depth = head[1] as usize;
        let mut sizes = Vec::with_capacity(depth + 1);
        for _ in 0..=depth {
            let mut b = [0u8; 2];
            bytes.read_exact(&mut b).map_err(|_| bad("truncated sizes"))?;
            sizes.push(u16::from_le_bytes(b) as usize);
        }
        let mut s = [0u8; 8];
        bytes.read_exact(&mut s).map_err(|_| bad("truncated seed"))?;
        let seed = u64::from_le_bytes(s);
        let mut layers = Vec::with_capacity(depth);
        for w in sizes.windows(2) {
            let mut layer = Layer::zeros(w[0], w[1]);
            for p in layer.weights.iter_mut().chain(layer.biases.iter_mut()) {
                let mut b = [0u8; 2];
                bytes.read_exact(&mut b).map_err(|_| bad("truncated parameters"))?;
                *p = i16::from_le_bytes(b);
            }
            layers.push(layer);
        }
        if !bytes.is_empty() {
            return Err(bad("trailing bytes"));
        }
        ToyNet::new(layers, activation, seed)
    }

    pub fn write_blob(&self, mut w: impl Write) -> Result<()> {
        w.write_all(&self.to_blob())?;
        Ok(())
    }
}

/// Named tasks with a reference target function.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TaskName {
    Majority8,
    Parity8,
    Modadd7,
}

impl TaskName {
    pub const ALL: [TaskName; 3] = [TaskName::Majority8, TaskName::Parity8, TaskName::Modadd7];

    pub fn as_str(self) -> &'static str {
        match self {
            TaskName::Majority8 => "majority8",
            TaskName::Parity8 => "parity8",
            TaskName::Modadd7 => "modadd7",
        }
    }
}

impl fmt::Display for TaskName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for TaskName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        TaskName::ALL
            .into_iter()
            .find(|t| t.as_str() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown task `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TaskSpec {
    pub name: TaskName,
    /// Input width.
    pub n: usize,
    /// Size of the label set.
    pub labels: usize,
}

impl TaskSpec {
    pub fn get(name: TaskName) -> Self {
        match name {
            TaskName::Majority8 => TaskSpec { name, n: 8, labels: 2 },
            TaskName::Parity8 => TaskSpec { name, n: 8, labels: 2 },
            // Two 3-bit operands, so operand value 7 is reduced mod 7 as well.
            TaskName::Modadd7 => TaskSpec { name, n: 6, labels: 7 },
        }
    }

    /// Reference label. Majority breaks the 4-4 tie towards label 0.
    pub fn target(&self, x: Input) -> u16 {
        match self.name {
            TaskName::Majority8 => (2 * x.popcount() > x.width() as u32) as u16,
            TaskName::Parity8 => (x.popcount() % 2) as u16,
            TaskName::Modadd7 => {
                let half = x.width() / 2;
                let a = x.bits() >> half;
                let b = x.bits() & ((1 << half) - 1);
                ((a + b) % 7) as u16
            }
        }
    }

    /// Default architecture: input width, hidden sizes, label count.
    pub fn layer_sizes(&self) -> Vec<usize> {
        match self.name {
            TaskName::Majority8 => vec![8, 4, 2],
            TaskName::Parity8 => vec![8, 8, 2],
            TaskName::Modadd7 => vec![6, 16, 7],
        }
    }

    /// Fraction of all inputs on which `net` agrees with the target.
    pub fn accuracy(&self, net: &ToyNet) -> f64 {
        let correct = Input::enumerate(self.n)
            .filter(|&x| net.label(x) == self.target(x))
            .count();
        correct as f64 / (1usize << self.n) as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainOptions {
    pub step_cap: usize,
    pub target_accuracy: f64,
    /// Learning rate is `2^-lr_shift`.
    pub lr_shift: u32,
    pub eval_every: usize,
}

impl Default for TrainOptions {
    fn default() -> Self {
        TrainOptions {
            step_cap: 10_000,
            target_accuracy: 0.95,
            lr_shift: 2,
            eval_every: 5,
        }
    }
}

/// Outcome of training. When `converged` is false the net is the best one
/// seen before the step cap.
#[derive(Debug, Clone)]
pub struct TrainReport {
    pub net: ToyNet,
    pub accuracy: f64,
    pub steps: usize,
    pub converged: bool,
}

// Master weights stay inside these bounds so the rounded net passes the range
// analysis for every shipped architecture.
const WEIGHT_CLIP: i64 = 3 * ACT_ONE / 4;
const BIAS_CLIP: i64 = 2 * ACT_ONE;

struct MasterLayer {
    inputs: usize,
    outputs: usize,
    w: Vec<i64>,
    b: Vec<i64>,
}

impl MasterLayer {
    fn rounded(&self) -> Layer {
        let q = |v: i64| ((v + (1 << 15)) >> 16).clamp(i16::MIN as i64, i16::MAX as i64) as i16;
        Layer {
            inputs: self.inputs,
            outputs: self.outputs,
            weights: self.w.iter().map(|&v| q(v)).collect(),
            biases: self.b.iter().map(|&v| q(v)).collect(),
        }
    }
}

pub fn train_toy(task: &TaskSpec, seed: u64) -> Result<TrainReport> {
    train_toy_with(task, seed, &TrainOptions::default())
}

/// Full-batch training on every input with a multiclass hinge loss. All
/// arithmetic is Q8.24 integer arithmetic, so the result is a pure function
/// of `(task, seed, opts)`.
pub fn train_toy_with(task: &TaskSpec, seed: u64, opts: &TrainOptions) -> Result<TrainReport> {
    let sizes = task.layer_sizes();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut master: Vec<MasterLayer> = sizes
        .windows(2)
        .map(|w| MasterLayer {
            inputs: w[0],
            outputs: w[1],
            w: (0..w[0] * w[1])
                .map(|_| rng.gen_range(-(ACT_ONE / 2)..=ACT_ONE / 2))
                .collect(),
            b: vec![0; w[1]],
        })
        .collect();
    let depth = master.len();
    let inputs: Vec<Input> = Input::enumerate(task.n).collect();
    let targets: Vec<u16> = inputs.iter().map(|&x| task.target(x)).collect();
    let n_examples = inputs.len() as i64;

    let build = |master: &[MasterLayer]| {
        ToyNet::new(
            master.iter().map(MasterLayer::rounded).collect(),
            Activation::Relu,
            seed,
        )
    };

    let mut best = build(&master)?;
    let mut best_acc = task.accuracy(&best);
    let mut steps = 0;

    while steps < opts.step_cap && best_acc < opts.target_accuracy {
        let mut gw: Vec<Vec<i64>> = master.iter().map(|l| vec![0; l.w.len()]).collect();
        let mut gb: Vec<Vec<i64>> = master.iter().map(|l| vec![0; l.b.len()]).collect();

        for (x, &y) in inputs.iter().zip(&targets) {
            // Forward with master weights, keeping every layer's activations.
            let mut acts = vec![ToyNet::input_activations(*x)];
            for (l, lay) in master.iter().enumerate() {
                let prev = &acts[l];
                let next: Vec<i64> = (0..lay.outputs)
                    .map(|j| {
                        let row = &lay.w[j * lay.inputs..(j + 1) * lay.inputs];
                        let acc: i64 = row.iter().zip(prev).map(|(&w, &a)| w * a).sum();
                        let pre = shr_floor(acc, 24) + lay.b[j];
                        if l + 1 < depth {
                            pre.max(0)
                        } else {
                            pre
                        }
                    })
                    .collect();
                acts.push(next);
            }
            let logits = &acts[depth];
            let y = y as usize;
            let rival = (0..logits.len())
                .filter(|&j| j != y)
                .max_by_key(|&j| (logits[j], std::cmp::Reverse(j)));
            let Some(rival) = rival else { continue };
            if logits[y] - logits[rival] >= ACT_ONE {
                continue;
            }
            let mut g = vec![0i64; logits.len()];
            g[y] = -ACT_ONE;
            g[rival] = ACT_ONE;

            for l in (0..depth).rev() {
                let lay = &master[l];
                let prev = &acts[l];
                for j in 0..lay.outputs {
                    if g[j] == 0 {
                        continue;
                    }
                    gb[l][j] += g[j];
                    for i in 0..lay.inputs {
                        gw[l][j * lay.inputs + i] += shr_floor(g[j] * prev[i], 24);
                    }
                }
                if l == 0 {
                    break;
                }
                let mut gp = vec![0i64; lay.inputs];
                for (i, gpi) in gp.iter_mut().enumerate() {
                    if prev[i] <= 0 {
                        continue;
                    }
                    let acc: i64 = (0..lay.outputs).map(|j| lay.w[j * lay.inputs + i] * g[j]).sum();
                    *gpi = shr_floor(acc, 24);
                }
                g = gp;
            }
        }

        for (l, lay) in master.iter_mut().enumerate() {
            for (w, g) in lay.w.iter_mut().zip(&gw[l]) {
                *w = (*w - shr_floor(*g, opts.lr_shift) / n_examples).clamp(-WEIGHT_CLIP, WEIGHT_CLIP);
            }
            for (b, g) in lay.b.iter_mut().zip(&gb[l]) {
                *b = (*b - shr_floor(*g, opts.lr_shift) / n_examples).clamp(-BIAS_CLIP, BIAS_CLIP);
            }
        }
        steps += 1;

        if steps % opts.eval_every == 0 || steps == opts.step_cap {
            let net = build(&master)?;
            let acc = task.accuracy(&net);
            if acc > best_acc {
                best_acc = acc;
                best = net;
            }
        }
    }

    Ok(TrainReport {
        net: best,
        accuracy: best_acc,
        steps,
        converged: best_acc >= opts.target_accuracy,
    })
}

/// Manifest written next to a persisted net.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetManifest {
    pub format: String,
    pub task: TaskName,
    pub seed: u64,
    pub layer_sizes: Vec<usize>,
    pub accuracy: f64,
    pub steps: usize,
    pub converged: bool,
}

impl NetManifest {
    pub fn new(task: &TaskSpec, report: &TrainReport) -> Self {
        NetManifest {
            format: "XTN1".into(),
            task: task.name,
            seed: report.net.seed(),
            layer_sizes: report.net.layer_sizes(),
            accuracy: report.accuracy,
            steps: report.steps,
            converged: report.converged,
        }
    }
}

/// Uniform draws with replacement, labeled by the net, split 80/20.
pub fn sample_dataset(net: &ToyNet, task: &TaskSpec, size: usize, seed: u64) -> Dataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = net.input_width();
    let obs: Vec<Observation> = (0..size)
        .map(|_| {
            let x = Input::from_raw(rng.gen_range(0..1u32 << n), n);
            Observation::new(x, net.label(x))
        })
        .collect();
    let cut = size * 4 / 5;
    Dataset {
        train: obs[..cut].to_vec(),
        heldout: obs[cut..].to_vec(),
        generator_seed: seed,
        generator_spec: format!("uniform-with-replacement/{}", task.name),
    }
}

/// Splits the enumerated input space without replacement: a seeded shuffle,
/// with the first `train_fraction` of it used for training.
pub fn split_enumeration(net: &ToyNet, task: &TaskSpec, train_fraction: f64, seed: u64) -> Dataset {
    let mut obs = net.enumerate_io();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    obs.shuffle(&mut rng);
    let cut = ((obs.len() as f64) * train_fraction.clamp(0.0, 1.0)).round() as usize;
    let heldout = obs.split_off(cut);
    Dataset {
        train: obs,
        heldout,
        generator_seed: seed,
        generator_spec: format!("enumeration-without-replacement/{}", task.name),
    }
}
