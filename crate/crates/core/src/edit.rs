// SPDX-License-Identifier: MIT OR Apache-2.0

//! Edit operations on symbol streams.

use serde::{Deserialize, Serialize};

use crate::codec::Symbol;
use crate::error::{Error, Result};

/// One edit. Locations index the stream as it is when the edit is applied,
/// so a list of edits is applied left to right.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum EditOp {
    /// Insert `payload` before position `location` (`location == len` appends).
    Insert {
        location: usize,
        payload: Symbol,
    },
    Delete {
        location: usize,
    },
    Substitute {
        location: usize,
        payload: Symbol,
    },
    /// Swap the symbols at `location` and `location + 1`.
    Transpose {
        location: usize,
    },
}

impl EditOp {
    pub fn location(&self) -> usize {
        match *self {
            EditOp::Insert { location, .. }
            | EditOp::Delete { location }
            | EditOp::Substitute { location, .. }
            | EditOp::Transpose { location } => location,
        }
    }
}

fn out_of_range(op: &EditOp, len: usize) -> Error {
    Error::decode(
        op.location(),
        format!("edit {op:?} is out of range for a stream of {len} symbols"),
    )
}

/// Applies one edit in place.
pub fn apply_op(stream: &mut Vec<Symbol>, op: &EditOp) -> Result<()> {
    let len = stream.len();
    match *op {
        EditOp::Insert { location, payload } => {
            if location > len {
                return Err(out_of_range(op, len));
            }
            stream.insert(location, payload);
        }
        EditOp::Delete { location } => {
            if location >= len {
                return Err(out_of_range(op, len));
            }
            stream.remove(location);
        }
        EditOp::Substitute { location, payload } => {
            if location >= len {
                return Err(out_of_range(op, len));
            }
            stream[location] = payload;
        }
        EditOp::Transpose { location } => {
            if location + 1 >= len {
                return Err(out_of_range(op, len));
            }
            stream.swap(location, location + 1);
        }
    }
    Ok(())
}

/// Applies a list of edits to a copy of `stream`.
pub fn apply_ops(stream: &[Symbol], ops: &[EditOp]) -> Result<Vec<Symbol>> {
    let mut out = stream.to_vec();
    for op in ops {
        apply_op(&mut out, op)?;
    }
    Ok(out)
}

/// Edits that undo `ops` when applied to the edited stream.
pub fn invert_ops(stream: &[Symbol], ops: &[EditOp]) -> Result<Vec<EditOp>> {
    let mut cur = stream.to_vec();
    let mut inverse = Vec::with_capacity(ops.len());
    for op in ops {
        let inv = match *op {
            EditOp::Insert { location, .. } => EditOp::Delete { location },
            EditOp::Delete { location } => EditOp::Insert {
                location,
                payload: *cur.get(location).ok_or_else(|| out_of_range(op, cur.len()))?,
            },
            EditOp::Substitute { location, .. } => EditOp::Substitute {
                location,
                payload: *cur.get(location).ok_or_else(|| out_of_range(op, cur.len()))?,
            },
            EditOp::Transpose { location } => EditOp::Transpose { location },
        };
        apply_op(&mut cur, op)?;
        inverse.push(inv);
    }
    inverse.reverse();
    Ok(inverse)
}

/// A shortest edit list turning `a` into `b` under optimal string alignment
/// (adjacent transpositions allowed, each symbol edited at most once).
pub fn edit_script(a: &[Symbol], b: &[Symbol]) -> Vec<EditOp> {
    let (n, m) = (a.len(), b.len());
    let w = m + 1;
    let mut d = vec![0u32; (n + 1) * w];
    for i in 0..=n {
        d[i * w] = i as u32;
    }
    for j in 0..=m {
        d[j] = j as u32;
    }
    for i in 1..=n {
        for j in 1..=m {
            let cost = (a[i - 1] != b[j - 1]) as u32;
            let mut v = (d[(i - 1) * w + j] + 1)
                .min(d[i * w + j - 1] + 1)
                .min(d[(i - 1) * w + j - 1] + cost);
            if i > 1 && j > 1 && a[i - 1] == b[j - 2] && a[i - 2] == b[j - 1] {
                v = v.min(d[(i - 2) * w + j - 2] + 1);
            }
            d[i * w + j] = v;
        }
    }

    // Trace back from the end. Each step is recorded with its position in
    // `a`; emitting the steps right to left keeps earlier positions valid.
    let mut steps = Vec::new();
    let (mut i, mut j) = (n, m);
    while i > 0 || j > 0 {
        let here = d[i * w + j];
        if i > 0 && j > 0 && a[i - 1] == b[j - 1] && here == d[(i - 1) * w + j - 1] {
            i -= 1;
            j -= 1;
        } else if i > 0 && j > 0 && here == d[(i - 1) * w + j - 1] + 1 {
            steps.push(EditOp::Substitute {
                location: i - 1,
                payload: b[j - 1],
            });
            i -= 1;
            j -= 1;
        } else if i > 1 && j > 1 && a[i - 1] == b[j - 2] && a[i - 2] == b[j - 1] && here == d[(i - 2) * w + j - 2] + 1 {
            steps.push(EditOp::Transpose { location: i - 2 });
            i -= 2;
            j -= 2;
        } else if i > 0 && here == d[(i - 1) * w + j] + 1 {
            steps.push(EditOp::Delete { location: i - 1 });
            i -= 1;
        } else {
            steps.push(EditOp::Insert {
                location: i,
                payload: b[j - 1],
            });
            j -= 1;
        }
    }
    steps
}
