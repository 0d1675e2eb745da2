// SPDX-License-Identifier: MIT OR Apache-2.0

//! Sparse dictionary codes for one hidden layer.
//!
//! Every input's activation vector is written as a short list of
//! (atom index, magnitude) pairs. Predictions patch the reconstruction back
//! into the network and read the label off the remaining layers.

use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::codec::{index_width, BackgroundTheory, Field, FieldSource};
use crate::data::Input;
use crate::error::{Error, Result};
use crate::explanation::smoothed_point_mass;
use crate::fixed::{argmax_lowest, ACT_FRAC_BITS, ACT_LIMIT, PARAM_FRAC_BITS};
use crate::toy::ToyNet;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CodeEntry {
    pub atom: usize,
    /// Q8.8 magnitude on the theory's grid.
    pub magnitude: i32,
}

#[derive(Debug, Clone)]
pub struct Dictionary {
    net: Arc<ToyNet>,
    layer: usize,
    width: usize,
    /// `m * width` Q8.8 atom coordinates.
    atoms: Vec<i32>,
    max_l0: usize,
    /// One code per input, in input order.
    codes: Vec<Vec<CodeEntry>>,
    quantization_bits: u8,
}

impl Dictionary {
    pub fn new(
        net: Arc<ToyNet>,
        layer: usize,
        atoms: Vec<Vec<i32>>,
        max_l0: usize,
        codes: Vec<Vec<CodeEntry>>,
        theory: &BackgroundTheory,
    ) -> Result<Self> {
        if layer == 0 || layer >= net.depth() {
            return Err(Error::InvalidArgument(format!("layer {layer} is not a hidden layer")));
        }
        let width = net.layer_sizes()[layer];
        let m = atoms.len();
        if m > 255 || max_l0 > 255 || atoms.iter().any(|a| a.len() != width) {
            return Err(Error::InvalidArgument("dictionary shape does not fit the layer".into()));
        }
        if codes.len() != net.input_count() {
            return Err(Error::InvalidArgument("one code per input is required".into()));
        }
        if codes.iter().any(|c| c.len() > max_l0 || c.iter().any(|e| e.atom >= m)) {
            return Err(Error::InvalidArgument(
                "code violates the sparsity limit or atom range".into(),
            ));
        }
        let round = |v: i32| theory.round_q88(v);
        Ok(Dictionary {
            net,
            layer,
            width,
            atoms: atoms.concat().into_iter().map(round).collect(),
            max_l0,
            codes: codes
                .into_iter()
                .map(|c| {
                    c.into_iter()
                        .map(|e| CodeEntry {
                            atom: e.atom,
                            magnitude: round(e.magnitude),
                        })
                        .collect()
                })
                .collect(),
            quantization_bits: theory.quantization_bits(),
        })
    }

    pub fn subject(&self) -> &Arc<ToyNet> {
        &self.net
    }

    pub fn layer(&self) -> usize {
        self.layer
    }

    pub fn atom_count(&self) -> usize {
        if self.width == 0 {
            0
        } else {
            self.atoms.len() / self.width
        }
    }

    pub fn atom(&self, j: usize) -> &[i32] {
        &self.atoms[j * self.width..(j + 1) * self.width]
    }

    pub fn max_l0(&self) -> usize {
        self.max_l0
    }

    pub fn code(&self, x: Input) -> &[CodeEntry] {
        &self.codes[x.bits() as usize]
    }

    pub fn codes(&self) -> &[Vec<CodeEntry>] {
        &self.codes
    }

    /// Atoms with a nonzero magnitude in at least one code.
    pub fn active_atoms(&self) -> usize {
        let mut seen = vec![false; self.atom_count()];
        for e in self.codes.iter().flatten() {
            if e.magnitude != 0 {
                seen[e.atom] = true;
            }
        }
        seen.into_iter().filter(|&s| s).count()
    }

    /// Reconstructed activations in Q8.24, saturated to the representable
    /// range.
    pub fn reconstruction(&self, x: Input) -> Vec<i64> {
        let mut r = vec![0i64; self.width];
        for e in self.code(x) {
            for (v, &a) in r.iter_mut().zip(self.atom(e.atom)) {
                *v += ((a as i64) * (e.magnitude as i64)) << (ACT_FRAC_BITS - 2 * PARAM_FRAC_BITS);
            }
        }
        for v in &mut r {
            *v = (*v).clamp(-(ACT_LIMIT - 1), ACT_LIMIT - 1);
        }
        r
    }

    pub fn label(&self, x: Input) -> u16 {
        argmax_lowest(&self.net.forward_from(self.layer, &self.reconstruction(x))) as u16
    }

    pub fn distribution(&self, x: Input) -> Vec<f64> {
        smoothed_point_mass(self.label(x) as usize, self.net.label_count())
    }

    /// Squared reconstruction error of one input, in activation units.
    pub fn reconstruction_error(&self, x: Input) -> f64 {
        let truth = &self.net.activations(x)[self.layer];
        let scale = (1u64 << ACT_FRAC_BITS) as f64;
        truth
            .iter()
            .zip(self.reconstruction(x))
            .map(|(&t, r)| {
                let d = (t - r) as f64 / scale;
                d * d
            })
            .sum()
    }

    pub fn index_bits(&self) -> u8 {
        index_width(self.atom_count() as u64)
    }

    fn count_bits(&self) -> u8 {
        index_width(self.max_l0 as u64 + 1)
    }

    /// Bits spent on the sparse codes: index plus magnitude per entry.
    pub fn code_bits(&self) -> u64 {
        let per = self.index_bits() as u64 + self.quantization_bits as u64;
        self.codes.iter().map(|c| c.len() as u64 * per).sum()
    }

    /// Bits spent on the atom matrix.
    pub fn dictionary_bits(&self) -> u64 {
        self.atoms.len() as u64 * self.quantization_bits as u64
    }

    pub fn is_consistent(&self) -> bool {
        self.codes
            .iter()
            .all(|c| c.len() <= self.max_l0 && c.iter().all(|e| e.atom < self.atom_count()))
    }

    pub(crate) fn encode(&self, theory: &BackgroundTheory, out: &mut Vec<Field>) {
        out.push(Field::uint(self.layer as u64, 8));
        out.push(Field::uint(self.width as u64, 8));
        out.push(Field::uint(self.atom_count() as u64, 8));
        out.push(Field::uint(self.max_l0 as u64, 8));
        for &a in &self.atoms {
            out.push(theory.param_field(a));
        }
        let (ib, cb) = (self.index_bits(), self.count_bits());
        for c in &self.codes {
            out.push(Field::uint(c.len() as u64, cb));
            for e in c {
                out.push(Field::uint(e.atom as u64, ib));
                out.push(theory.param_field(e.magnitude));
            }
        }
    }

    pub(crate) fn decode(src: &mut dyn FieldSource, theory: &BackgroundTheory, net: &Arc<ToyNet>) -> Result<Self> {
        let layer = src.uint(8)? as usize;
        if layer == 0 || layer >= net.depth() {
            return Err(src.decode_error(format!("layer {layer} is not a hidden layer")));
        }
        let width = src.uint(8)? as usize;
        if width != net.layer_sizes()[layer] {
            return Err(src.decode_error(format!("width {width} does not match layer {layer}")));
        }
        let m = src.uint(8)? as usize;
        let max_l0 = src.uint(8)? as usize;
        let q = theory.param_width();
        let atoms = (0..m * width)
            .map(|_| src.int(q).map(|g| theory.dequantize_q88(g)))
            .collect::<Result<Vec<_>>>()?;
        let (ib, cb) = (index_width(m as u64), index_width(max_l0 as u64 + 1));
        let mut codes = Vec::with_capacity(net.input_count());
        for _ in 0..net.input_count() {
            let len = src.uint(cb)? as usize;
            if len > max_l0 {
                return Err(src.decode_error(format!("code of length {len} exceeds max_l0 {max_l0}")));
            }
            let mut code = Vec::with_capacity(len);
            for _ in 0..len {
                let atom = src.uint(ib)? as usize;
                if atom >= m {
                    return Err(src.decode_error(format!("atom {atom} out of range")));
                }
                let magnitude = theory.dequantize_q88(src.int(q)?);
                code.push(CodeEntry { atom, magnitude });
            }
            codes.push(code);
        }
        Ok(Dictionary {
            net: Arc::clone(net),
            layer,
            width,
            atoms,
            max_l0,
            codes,
            quantization_bits: q,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DictionaryOptions {
    pub layer: usize,
    pub atoms: usize,
    pub max_l0: usize,
    pub seed: u64,
    /// Alternations of coding and atom updates.
    pub rounds: usize,
    /// Start from the standard basis instead of sampled activations.
    pub identity_init: bool,
}

impl DictionaryOptions {
    pub fn new(layer: usize, atoms: usize, max_l0: usize, seed: u64) -> Self {
        DictionaryOptions {
            layer,
            atoms,
            max_l0,
            seed,
            rounds: 50,
            identity_init: false,
        }
    }
}

struct Grid<'a> {
    theory: &'a BackgroundTheory,
}

impl Grid<'_> {
    fn round(&self, v: f64) -> f64 {
        let scale = (1u64 << PARAM_FRAC_BITS) as f64;
        let q88 = (v * scale).round().clamp(i16::MIN as f64, i16::MAX as f64) as i32;
        self.theory.round_q88(q88) as f64 / scale
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Greedy matching pursuit with magnitudes rounded to the grid as they are
/// chosen, so the stored code reproduces the residual exactly.
fn encode_point(x: &[f64], atoms: &[Vec<f64>], max_l0: usize, grid: &Grid) -> Vec<(usize, f64)> {
    let norms: Vec<f64> = atoms.iter().map(|a| dot(a, a)).collect();
    let mut r = x.to_vec();
    let mut code: Vec<(usize, f64)> = Vec::new();
    while code.len() < max_l0 {
        let mut best: Option<(usize, f64)> = None;
        for (j, a) in atoms.iter().enumerate() {
            if norms[j] == 0.0 || code.iter().any(|&(k, _)| k == j) {
                continue;
            }
            let gain = dot(&r, a).powi(2) / norms[j];
            if best.is_none_or(|(_, g)| gain > g) {
                best = Some((j, gain));
            }
        }
        let Some((j, gain)) = best else { break };
        if gain <= 1e-12 {
            break;
        }
        let c = grid.round(dot(&r, &atoms[j]) / norms[j]);
        if c == 0.0 {
            break;
        }
        for (v, a) in r.iter_mut().zip(&atoms[j]) {
            *v -= c * a;
        }
        code.push((j, c));
    }
    code
}

/// Alternating matching pursuit and per-atom least squares. Arithmetic is
/// `f64` in a fixed order; atoms and magnitudes are rounded to the grid after
/// every step, and the final codes are exactly what gets serialized.
pub fn fit_dictionary(net: &Arc<ToyNet>, opts: &DictionaryOptions, theory: &BackgroundTheory) -> Result<Dictionary> {
    let layer = opts.layer;
    if layer == 0 || layer >= net.depth() {
        return Err(Error::InvalidArgument(format!("layer {layer} is not a hidden layer")));
    }
    let width = net.layer_sizes()[layer];
    if opts.atoms == 0 || opts.atoms > 255 || opts.max_l0 > opts.atoms {
        return Err(Error::InvalidArgument("need 1..=255 atoms and max_l0 <= atoms".into()));
    }
    if opts.identity_init && opts.atoms != width {
        return Err(Error::InvalidArgument(
            "identity initialization needs one atom per unit".into(),
        ));
    }
    let grid = Grid { theory };
    let scale = (1u64 << ACT_FRAC_BITS) as f64;
    let xs: Vec<Vec<f64>> = Input::enumerate(net.input_width())
        .map(|x| net.activations(x)[layer].iter().map(|&v| v as f64 / scale).collect())
        .collect();

    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut atoms: Vec<Vec<f64>> = if opts.identity_init {
        (0..width)
            .map(|j| (0..width).map(|i| (i == j) as u8 as f64).collect())
            .collect()
    } else {
        let mut order: Vec<usize> = (0..xs.len()).collect();
        order.shuffle(&mut rng);
        let mut picked: Vec<Vec<f64>> = Vec::new();
        for &i in &order {
            if picked.len() == opts.atoms {
                break;
            }
            let a: Vec<f64> = xs[i].iter().map(|&v| grid.round(v)).collect();
            if dot(&a, &a) > 0.0 && !picked.contains(&a) {
                picked.push(a);
            }
        }
        // Fewer distinct nonzero activations than atoms: fill with basis
        // vectors, cycling.
        let mut e = 0;
        while picked.len() < opts.atoms {
            picked.push((0..width).map(|i| (i == e % width) as u8 as f64).collect());
            e += 1;
        }
        picked
    };

    let mut codes: Vec<Vec<(usize, f64)>> = xs.iter().map(|x| encode_point(x, &atoms, opts.max_l0, &grid)).collect();
    for _ in 0..opts.rounds {
        for j in 0..atoms.len() {
            let mut num = vec![0.0; width];
            let mut den = 0.0;
            for (x, code) in xs.iter().zip(&codes) {
                let Some(&(_, cj)) = code.iter().find(|&&(k, _)| k == j) else {
                    continue;
                };
                let mut r = x.clone();
                for &(k, c) in code {
                    if k != j {
                        for (v, a) in r.iter_mut().zip(&atoms[k]) {
                            *v -= c * a;
                        }
                    }
                }
                for (n, v) in num.iter_mut().zip(&r) {
                    *n += cj * v;
                }
                den += cj * cj;
            }
            let updated: Vec<f64> = if den > 0.0 {
                num.iter().map(|n| grid.round(n / den)).collect()
            } else {
                vec![0.0; width]
            };
            atoms[j] = if dot(&updated, &updated) > 0.0 {
                updated
            } else {
                reseed_from_residual(&xs, &codes, &atoms, &grid)
            };
        }
        codes = xs.iter().map(|x| encode_point(x, &atoms, opts.max_l0, &grid)).collect();
    }

    let to_q88 = |v: f64| (v * (1u64 << PARAM_FRAC_BITS) as f64).round() as i32;
    Dictionary::new(
        Arc::clone(net),
        layer,
        atoms.iter().map(|a| a.iter().map(|&v| to_q88(v)).collect()).collect(),
        opts.max_l0,
        codes
            .iter()
            .map(|c| {
                c.iter()
                    .map(|&(atom, m)| CodeEntry {
                        atom,
                        magnitude: to_q88(m),
                    })
                    .collect()
            })
            .collect(),
        theory,
    )
}

/// The residual with the largest norm, lowest input first; a basis vector
/// when every residual is zero.
fn reseed_from_residual(xs: &[Vec<f64>], codes: &[Vec<(usize, f64)>], atoms: &[Vec<f64>], grid: &Grid) -> Vec<f64> {
    let mut best: Option<(f64, Vec<f64>)> = None;
    for (x, code) in xs.iter().zip(codes) {
        let mut r = x.clone();
        for &(k, c) in code {
            for (v, a) in r.iter_mut().zip(&atoms[k]) {
                *v -= c * a;
            }
        }
        let r: Vec<f64> = r.iter().map(|&v| grid.round(v)).collect();
        let n = dot(&r, &r);
        if n > 0.0 && best.as_ref().is_none_or(|(bn, _)| n > *bn) {
            best = Some((n, r));
        }
    }
    best.map(|(_, r)| r).unwrap_or_else(|| {
        let w = xs.first().map_or(0, Vec::len);
        (0..w).map(|i| (i == 0) as u8 as f64).collect()
    })
}
