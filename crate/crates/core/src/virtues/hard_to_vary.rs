// SPDX-License-Identifier: MIT OR Apache-2.0

//! The local-maximum test for `hv` over edit neighborhoods.
//!
//! The engine works on any symbol stream with any scoring function, so the
//! same code serves explanations and the small synthetic instances used to
//! check it.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::codec::{BackgroundTheory, Symbol};
use crate::data::Observation;
use crate::edit::{apply_op, apply_ops, EditOp};
use crate::error::{Error, Result};
use crate::explanation::Explanation;

/// Neighbors within this much of `hv(E)` count as ties.
pub const TIE_TOLERANCE: f64 = 1e-9;

pub const DEFAULT_CAP: u64 = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct HvOptions {
    /// Largest edit-list length, 1 or 2.
    pub radius: usize,
    /// Largest neighborhood enumerated exhaustively.
    pub cap: u64,
    /// Neighbors drawn when the neighborhood exceeds the cap; 0 turns the
    /// fallback off and the cap becomes an error.
    pub samples: u64,
    pub seed: u64,
}

impl Default for HvOptions {
    fn default() -> Self {
        HvOptions {
            radius: 1,
            cap: DEFAULT_CAP,
            samples: 0,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HvVerdict {
    pub hard_to_vary: bool,
    pub hv: f64,
    /// The best-scoring neighbor, earliest in enumeration order.
    pub witness: Option<Vec<EditOp>>,
    pub witness_hv: Option<f64>,
    /// The best neighbor ties `hv` rather than beating it.
    pub tie: bool,
    /// Edit lists examined, including ones that failed to decode.
    pub examined: u64,
    /// Edit lists that produced a valid, different explanation.
    pub valid: u64,
    /// True when the verdict rests on a random sample of the neighborhood.
    pub sampled: bool,
}

fn single_edits(len: u128, alphabet: u128) -> u128 {
    // insert + delete + substitute (to a different symbol) + transpose
    (len + 1) * alphabet + len + len * alphabet.saturating_sub(1) + len.saturating_sub(1)
}

/// Number of edit lists of length `1..=radius` over a stream of `len`
/// symbols, assuming every symbol of the stream is in the alphabet.
pub fn neighborhood_size(len: usize, alphabet: usize, radius: usize) -> u128 {
    let (l, a) = (len as u128, alphabet as u128);
    match radius {
        0 => 0,
        1 => single_edits(l, a),
        _ => {
            // Count second edits by the length the first edit leaves.
            let grow = (l + 1) * a;
            let shrink = l;
            let same = l * a.saturating_sub(1) + l.saturating_sub(1);
            let mut total = single_edits(l, a);
            total += grow * neighborhood_size(len + 1, alphabet, radius - 1);
            if len > 0 {
                total += shrink * neighborhood_size(len - 1, alphabet, radius - 1);
            }
            total += same * neighborhood_size(len, alphabet, radius - 1);
            total
        }
    }
}

/// Every single edit valid on a stream, in a fixed order: inserts, deletes,
/// substitutions, transpositions, each by location and then alphabet order.
pub fn single_edit_ops(stream: &[Symbol], alphabet: &[Symbol]) -> Vec<EditOp> {
    let len = stream.len();
    let mut ops = Vec::new();
    for location in 0..=len {
        for &payload in alphabet {
            ops.push(EditOp::Insert { location, payload });
        }
    }
    for location in 0..len {
        ops.push(EditOp::Delete { location });
    }
    for location in 0..len {
        for &payload in alphabet {
            if payload != stream[location] {
                ops.push(EditOp::Substitute { location, payload });
            }
        }
    }
    for location in 0..len.saturating_sub(1) {
        ops.push(EditOp::Transpose { location });
    }
    ops
}

fn enumerate_lists(stream: &[Symbol], alphabet: &[Symbol], radius: usize) -> Vec<Vec<EditOp>> {
    let mut out = Vec::new();
    let mut frontier: Vec<(Vec<EditOp>, Vec<Symbol>)> = vec![(Vec::new(), stream.to_vec())];
    for _ in 0..radius {
        let mut next = Vec::new();
        for (ops, cur) in &frontier {
            for op in single_edit_ops(cur, alphabet) {
                let mut s = cur.clone();
                apply_op(&mut s, &op).expect("generated edits are in range");
                let mut list = ops.clone();
                list.push(op);
                out.push(list.clone());
                next.push((list, s));
            }
        }
        frontier = next;
    }
    out
}

fn random_list(stream: &[Symbol], alphabet: &[Symbol], radius: usize, rng: &mut ChaCha8Rng) -> Vec<EditOp> {
    let len = rng.gen_range(1..=radius);
    let mut cur = stream.to_vec();
    let mut ops = Vec::with_capacity(len);
    for _ in 0..len {
        let choices = single_edit_ops(&cur, alphabet);
        let op = choices[rng.gen_range(0..choices.len())];
        apply_op(&mut cur, &op).expect("generated edits are in range");
        ops.push(op);
    }
    ops
}

/// Local-maximum test for a scoring function over edit lists.
///
/// `hv_fn` returns `None` for streams that do not decode. Neighbors equal to
/// the original stream are skipped. The stream is hard to vary when every
/// valid neighbor scores below `hv_fn(stream) - TIE_TOLERANCE`.
pub fn local_maximum<F>(stream: &[Symbol], alphabet: &[Symbol], hv_fn: F, opts: &HvOptions) -> Result<HvVerdict>
where
    F: Fn(&[Symbol]) -> Option<f64> + Sync,
{
    if !(1..=2).contains(&opts.radius) {
        return Err(Error::InvalidArgument(format!(
            "radius must be 1 or 2, got {}",
            opts.radius
        )));
    }
    let hv = hv_fn(stream).ok_or_else(|| Error::InvalidArgument("the original stream does not decode".into()))?;
    let size = neighborhood_size(stream.len(), alphabet.len(), opts.radius);
    let (lists, sampled) = if size <= opts.cap as u128 {
        (enumerate_lists(stream, alphabet, opts.radius), false)
    } else if opts.samples > 0 {
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
        let lists = (0..opts.samples)
            .map(|_| random_list(stream, alphabet, opts.radius, &mut rng))
            .collect();
        (lists, true)
    } else {
        return Err(Error::NeighborhoodTooLarge { size, cap: opts.cap });
    };

    let scores: Vec<Option<f64>> = lists
        .par_iter()
        .map(|ops| {
            let s = apply_ops(stream, ops).ok()?;
            if s == stream {
                return None;
            }
            hv_fn(&s)
        })
        .collect();

    let mut best: Option<(usize, f64)> = None;
    let mut valid = 0u64;
    for (i, s) in scores.iter().enumerate() {
        if let Some(v) = *s {
            valid += 1;
            if best.is_none_or(|(_, b)| v > b) {
                best = Some((i, v));
            }
        }
    }
    let (hard_to_vary, tie) = match best {
        Some((_, b)) => (
            b < hv - TIE_TOLERANCE,
            b >= hv - TIE_TOLERANCE && b <= hv + TIE_TOLERANCE,
        ),
        None => (true, false),
    };
    Ok(HvVerdict {
        hard_to_vary,
        hv,
        witness: best.map(|(i, _)| lists[i].clone()),
        witness_hv: best.map(|(_, v)| v),
        tie,
        examined: lists.len() as u64,
        valid,
        sampled,
    })
}

/// `hv` of a decoded neighbor, or `None` when it does not decode or does not
/// fit the data.
pub fn explanation_hv(
    symbols: &[Symbol],
    template: &Explanation,
    train: &[Observation],
    b: &BackgroundTheory,
) -> Option<f64> {
    let e = Explanation::from_symbols(symbols, b, template.subject()).ok()?;
    super::hard_to_varyness(&e, train, b).ok()
}

/// Whether `e` is a strict local maximum of `hv` within `opts.radius` edits.
pub fn is_hard_to_vary(
    e: &Explanation,
    train: &[Observation],
    b: &BackgroundTheory,
    opts: &HvOptions,
) -> Result<HvVerdict> {
    let stream = e.symbols(b);
    let alphabet = e.family().alphabet();
    local_maximum(&stream, &alphabet, |s| explanation_hv(s, e, train, b), opts)
}
