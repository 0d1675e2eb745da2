// SPDX-License-Identifier: MIT OR Apache-2.0

//! Nearest-centroid partitions of the input space or of one layer's
//! activations, with a label distribution per cell.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::codec::{BackgroundTheory, Field, FieldSource, Tag};
use crate::data::Input;
use crate::error::{Error, Result};
use crate::explanation::smooth;
use crate::fixed::{ACT_FRAC_BITS, PARAM_FRAC_BITS};
use crate::toy::ToyNet;

const LLOYD_ITERATIONS: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "kind", content = "layer")]
pub enum Space {
    Input,
    /// Activations after layer `l` of the network (`1..depth`).
    Layer(usize),
}

/// What to do when an input is equally close to several centroids.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TieRule {
    /// The lowest centroid index wins.
    Lowest,
    /// Ties are not resolved; an explanation with a tie is inconsistent.
    None,
}

#[derive(Debug, Clone)]
pub struct Clustering {
    space: Space,
    tie: TieRule,
    n: usize,
    dim: usize,
    labels: usize,
    /// `k * dim` Q8.8 coordinates on the theory's grid.
    centroids: Vec<i32>,
    /// `k * labels` label counts.
    counts: Vec<u16>,
    subject: Option<Arc<ToyNet>>,
}

impl Clustering {
    /// Builds a clustering from explicit parts. `subject` is required for a
    /// layer space.
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        space: Space,
        tie: TieRule,
        n: usize,
        labels: usize,
        centroids: Vec<Vec<i32>>,
        counts: Vec<Vec<u16>>,
        subject: Option<Arc<ToyNet>>,
    ) -> Result<Self> {
        let dim = match space {
            Space::Input => n,
            Space::Layer(l) => {
                let net = subject
                    .as_ref()
                    .ok_or_else(|| Error::InvalidArgument("a layer space needs the explained network".into()))?;
                if l == 0 || l >= net.depth() {
                    return Err(Error::InvalidArgument(format!("layer {l} is not a hidden layer")));
                }
                net.layer_sizes()[l]
            }
        };
        if centroids.len() != counts.len() || centroids.len() > u16::MAX as usize {
            return Err(Error::InvalidArgument(
                "centroids and counts must have one entry per cell".into(),
            ));
        }
        if n == 0 || n > crate::data::MAX_INPUT_WIDTH || labels == 0 || labels > 255 || dim > 255 {
            return Err(Error::InvalidArgument("unsupported clustering shape".into()));
        }
        if centroids.iter().any(|c| c.len() != dim) || counts.iter().any(|c| c.len() != labels) {
            return Err(Error::InvalidArgument(
                "centroid or count vector has the wrong length".into(),
            ));
        }
        Ok(Clustering {
            space,
            tie,
            n,
            dim,
            labels,
            centroids: centroids.concat(),
            counts: counts.concat(),
            subject,
        })
    }

    /// One cell that predicts the uniform distribution: the minimal guess.
    pub fn uniform(n: usize, labels: usize) -> Result<Self> {
        Self::new(
            Space::Input,
            TieRule::Lowest,
            n,
            labels,
            vec![vec![0; n]],
            vec![vec![1; labels]],
            None,
        )
    }

    pub fn subject(&self) -> Option<&Arc<ToyNet>> {
        self.subject.as_ref()
    }

    pub fn space(&self) -> Space {
        self.space
    }

    pub fn tie_rule(&self) -> TieRule {
        self.tie
    }

    pub fn k(&self) -> usize {
        self.counts.len() / self.labels
    }

    pub fn input_width(&self) -> usize {
        self.n
    }

    pub fn label_count(&self) -> usize {
        self.labels
    }

    pub fn centroid(&self, c: usize) -> &[i32] {
        &self.centroids[c * self.dim..(c + 1) * self.dim]
    }

    pub fn counts(&self, c: usize) -> &[u16] {
        &self.counts[c * self.labels..(c + 1) * self.labels]
    }

    /// Coordinates of an input in the clustering space, in Q8.24.
    pub fn point(&self, x: Input) -> Vec<i64> {
        match self.space {
            Space::Input => ToyNet::input_activations(x),
            Space::Layer(l) => self
                .subject
                .as_ref()
                .expect("checked at construction")
                .activations(x)
                .swap_remove(l),
        }
    }

    /// Nearest centroids of a point: the winner under the lowest-index rule
    /// and whether another centroid is equally close.
    pub fn nearest(&self, point: &[i64]) -> Option<(usize, bool)> {
        let mut best: Option<(usize, i128)> = None;
        let mut tied = false;
        for c in 0..self.k() {
            let d = squared_distance(point, self.centroid(c));
            match best {
                Some((_, bd)) if d > bd => {}
                Some((_, bd)) if d == bd => tied = true,
                _ => {
                    best = Some((c, d));
                    tied = false;
                }
            }
        }
        best.map(|(c, _)| (c, tied))
    }

    pub fn cell_of(&self, x: Input) -> Option<usize> {
        self.nearest(&self.point(x)).map(|(c, _)| c)
    }

    /// Label distribution of a cell: normalized counts, uniform when empty.
    pub fn cell_distribution(&self, c: usize) -> Vec<f64> {
        let counts = self.counts(c);
        let total: u64 = counts.iter().map(|&v| v as u64).sum();
        let mut p: Vec<f64> = if total == 0 {
            vec![1.0 / self.labels as f64; self.labels]
        } else {
            counts.iter().map(|&v| v as f64 / total as f64).collect()
        };
        smooth(&mut p);
        p
    }

    pub fn distribution(&self, x: Input) -> Vec<f64> {
        match self.cell_of(x) {
            Some(c) => self.cell_distribution(c),
            None => vec![1.0 / self.labels as f64; self.labels],
        }
    }

    /// Cells must cover every input, and with ties unresolved no input may
    /// sit on a cell boundary.
    pub fn is_consistent(&self) -> bool {
        if self.k() == 0 {
            return false;
        }
        if self.tie == TieRule::None {
            return Input::enumerate(self.n).all(|x| !self.nearest(&self.point(x)).is_some_and(|(_, t)| t));
        }
        true
    }

    /// Members of each cell, in input order.
    pub fn cells(&self) -> Vec<Vec<Input>> {
        let mut cells = vec![Vec::new(); self.k()];
        for x in Input::enumerate(self.n) {
            if let Some(c) = self.cell_of(x) {
                cells[c].push(x);
            }
        }
        cells
    }

    pub(crate) fn encode(&self, theory: &BackgroundTheory, out: &mut Vec<Field>) {
        match self.space {
            Space::Input => out.push(Field::Tag(Tag::SpaceInput)),
            Space::Layer(l) => {
                out.push(Field::Tag(Tag::SpaceLayer));
                out.push(Field::uint(l as u64, 8));
            }
        }
        out.push(Field::Tag(match self.tie {
            TieRule::Lowest => Tag::TieLowest,
            TieRule::None => Tag::TieNone,
        }));
        out.push(Field::uint(self.n as u64, 8));
        out.push(Field::uint(self.labels as u64, 8));
        out.push(Field::uint(self.k() as u64, 16));
        for &v in &self.centroids {
            out.push(theory.param_field(v));
        }
        for &c in &self.counts {
            out.push(Field::uint(c as u64, 16));
        }
    }

    pub(crate) fn decode(
        src: &mut dyn FieldSource,
        theory: &BackgroundTheory,
        subject: Option<&Arc<ToyNet>>,
    ) -> Result<Self> {
        let pos = src.position();
        let space = match src.tag()? {
            Tag::SpaceInput => Space::Input,
            Tag::SpaceLayer => Space::Layer(src.uint(8)? as usize),
            t => return Err(Error::decode(pos, format!("expected a space tag, found {t}"))),
        };
        let pos = src.position();
        let tie = match src.tag()? {
            Tag::TieLowest => TieRule::Lowest,
            Tag::TieNone => TieRule::None,
            t => return Err(Error::decode(pos, format!("expected a tie tag, found {t}"))),
        };
        let n = src.uint(8)? as usize;
        let labels = src.uint(8)? as usize;
        let k = src.uint(16)? as usize;
        let subject = match space {
            Space::Input => None,
            Space::Layer(_) => Some(Arc::clone(subject.ok_or_else(|| {
                Error::InvalidArgument("a layer-space clustering needs the explained network".into())
            })?)),
        };
        if let Some(net) = &subject {
            if net.input_width() != n {
                return Err(src.decode_error(format!("input width {n} does not match the network")));
            }
        }
        let dim = match space {
            Space::Input => n,
            Space::Layer(l) => match &subject {
                Some(net) if l >= 1 && l < net.depth() => net.layer_sizes()[l],
                _ => return Err(src.decode_error(format!("layer {l} is not a hidden layer"))),
            },
        };
        if n == 0 || n > crate::data::MAX_INPUT_WIDTH || labels == 0 {
            return Err(src.decode_error(format!("unsupported shape n={n}, labels={labels}")));
        }
        let q = theory.param_width();
        let mut centroids = Vec::with_capacity(k * dim);
        for _ in 0..k * dim {
            centroids.push(theory.dequantize_q88(src.int(q)?));
        }
        let mut counts = Vec::with_capacity(k * labels);
        for _ in 0..k * labels {
            counts.push(src.uint(16)? as u16);
        }
        Ok(Clustering {
            space,
            tie,
            n,
            dim,
            labels,
            centroids,
            counts,
            subject,
        })
    }
}

/// Squared distance between a Q8.24 point and a Q8.8 centroid, in Q8.24
/// units squared.
pub fn squared_distance(point: &[i64], centroid: &[i32]) -> i128 {
    point
        .iter()
        .zip(centroid)
        .map(|(&p, &c)| {
            let d = (p - ((c as i64) << (ACT_FRAC_BITS - PARAM_FRAC_BITS))) as i128;
            d * d
        })
        .sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClusteringOptions {
    pub space: Space,
    pub k: usize,
    pub seed: u64,
}

/// k-means++ seeding and Lloyd iterations over the enumerated points, then
/// centroids rounded to the theory's grid and cells relabeled with the net's
/// outputs.
pub fn fit_clustering(net: &Arc<ToyNet>, opts: &ClusteringOptions, theory: &BackgroundTheory) -> Result<Clustering> {
    let n = net.input_width();
    let total = net.input_count();
    if opts.k == 0 || opts.k > total {
        return Err(Error::InvalidArgument(format!(
            "k must be in 1..={total}, got {}",
            opts.k
        )));
    }
    let subject = match opts.space {
        Space::Input => None,
        Space::Layer(_) => Some(Arc::clone(net)),
    };
    // Shape checks happen here, before any work.
    let shell = Clustering::new(
        opts.space,
        TieRule::Lowest,
        n,
        net.label_count(),
        vec![],
        vec![],
        subject.clone(),
    )?;
    let points: Vec<Vec<f64>> = Input::enumerate(n)
        .map(|x| {
            shell
                .point(x)
                .iter()
                .map(|&v| v as f64 / (1u64 << ACT_FRAC_BITS) as f64)
                .collect()
        })
        .collect();

    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut centers = kmeans_pp(&points, opts.k, &mut rng);
    let mut assign = vec![usize::MAX; points.len()];
    for _ in 0..LLOYD_ITERATIONS {
        let mut changed = false;
        for (i, p) in points.iter().enumerate() {
            let c = nearest_f64(p, &centers);
            if assign[i] != c {
                assign[i] = c;
                changed = true;
            }
        }
        let mut sums = vec![vec![0.0; shell.dim]; opts.k];
        let mut sizes = vec![0usize; opts.k];
        for (i, p) in points.iter().enumerate() {
            sizes[assign[i]] += 1;
            for (s, v) in sums[assign[i]].iter_mut().zip(p) {
                *s += v;
            }
        }
        for c in 0..opts.k {
            if sizes[c] == 0 {
                // Empty cell: move the centroid onto the point farthest from
                // its own centroid, lowest index first.
                let far = farthest_point(&points, &centers, &assign);
                centers[c] = points[far].clone();
                assign[far] = c;
                changed = true;
            } else {
                centers[c] = sums[c].iter().map(|s| s / sizes[c] as f64).collect();
            }
        }
        if !changed {
            break;
        }
    }

    let scale = (1u64 << PARAM_FRAC_BITS) as f64;
    let centroids: Vec<Vec<i32>> = centers
        .iter()
        .map(|c| {
            c.iter()
                .map(|&v| theory.round_q88((v * scale).round().clamp(-32768.0, 32767.0) as i32))
                .collect()
        })
        .collect();
    let mut out = Clustering::new(
        opts.space,
        TieRule::Lowest,
        n,
        net.label_count(),
        centroids,
        vec![vec![0; net.label_count()]; opts.k],
        subject,
    )?;
    for x in Input::enumerate(n) {
        let c = out.cell_of(x).expect("k >= 1");
        let y = net.label(x) as usize;
        out.counts[c * out.labels + y] += 1;
    }
    Ok(out)
}

fn dist2(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn nearest_f64(p: &[f64], centers: &[Vec<f64>]) -> usize {
    let mut best = 0;
    let mut bd = f64::INFINITY;
    for (c, ctr) in centers.iter().enumerate() {
        let d = dist2(p, ctr);
        if d < bd {
            bd = d;
            best = c;
        }
    }
    best
}

fn farthest_point(points: &[Vec<f64>], centers: &[Vec<f64>], assign: &[usize]) -> usize {
    let mut best = 0;
    let mut bd = -1.0;
    for (i, p) in points.iter().enumerate() {
        let d = dist2(p, &centers[assign[i]]);
        if d > bd {
            bd = d;
            best = i;
        }
    }
    best
}

/// k-means++: the first centre uniformly, each next one with probability
/// proportional to squared distance from the nearest chosen centre. When all
/// remaining mass is zero the lowest-index unchosen point is used.
fn kmeans_pp(points: &[Vec<f64>], k: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    let mut chosen = vec![false; points.len()];
    let first = rng.gen_range(0..points.len());
    chosen[first] = true;
    let mut centers = vec![points[first].clone()];
    let mut d2: Vec<f64> = points.iter().map(|p| dist2(p, &points[first])).collect();
    while centers.len() < k {
        let total: f64 = d2.iter().sum();
        let pick = if total > 0.0 {
            let r = rng.gen::<f64>() * total;
            let mut acc = 0.0;
            let mut pick = None;
            for (i, &d) in d2.iter().enumerate() {
                acc += d;
                if d > 0.0 && r < acc {
                    pick = Some(i);
                    break;
                }
            }
            // Rounding can leave `r` past the last positive weight.
            pick.unwrap_or_else(|| d2.iter().rposition(|&d| d > 0.0).expect("positive total"))
        } else {
            chosen.iter().position(|&c| !c).expect("k <= number of points")
        };
        chosen[pick] = true;
        for (i, p) in points.iter().enumerate() {
            d2[i] = d2[i].min(dist2(p, &points[pick]));
        }
        centers.push(points[pick].clone());
    }
    centers
}
