// SPDX-License-Identifier: MIT OR Apache-2.0

//! The (tightness, cost) Pareto frontier.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParetoPoint {
    pub bound: f64,
    pub flops: u64,
    pub label: String,
}

impl ParetoPoint {
    /// At least as good on both axes and strictly better on one.
    pub fn dominates(&self, other: &ParetoPoint) -> bool {
        self.bound >= other.bound && self.flops <= other.flops && (self.bound > other.bound || self.flops < other.flops)
    }
}

/// Non-dominated points, ordered by FLOPs ascending. Identical points do not
/// dominate each other, so duplicates are all kept. Among equal FLOPs the
/// higher bound comes first, then input order.
pub fn pareto(points: &[ParetoPoint]) -> Vec<ParetoPoint> {
    let mut order: Vec<usize> = (0..points.len()).collect();
    order.sort_by(|&a, &b| {
        points[a]
            .flops
            .cmp(&points[b].flops)
            .then(points[b].bound.total_cmp(&points[a].bound))
    });
    let mut out: Vec<ParetoPoint> = Vec::new();
    let mut best = f64::NEG_INFINITY;
    for i in order {
        let p = &points[i];
        // Everything before `p` has fewer or equal FLOPs. An equal bound
        // dominates only with strictly fewer FLOPs; otherwise it is a
        // duplicate.
        let dominated = p.bound < best || (p.bound == best && out.last().is_some_and(|q| q.flops < p.flops));
        if !dominated {
            out.push(p.clone());
        }
        best = best.max(p.bound);
    }
    out
}
