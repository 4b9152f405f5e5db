//! Nearest-neighbor-chain construction of the exact Ward hierarchy.
//!
//! Only per-cluster centroids (f64) and sizes are kept, so auxiliary memory
//! is `O(N * D + N)`; no pairwise distance matrix is ever materialised.
//! Ward linkage is reducible, which makes the reciprocal-nearest-neighbor
//! merges found along the chain the same merges the greedy global-minimum
//! procedure performs.

use std::cmp::Ordering;

use rayon::prelude::*;

use super::{Dendrogram, MergeNode};
use crate::error::{Error, Result};
use crate::repr::LayerEmbeddings;

/// Below this many active clusters a sequential scan is faster than rayon.
const PARALLEL_SCAN_MIN: usize = 4096;

/// Increase in total SSE caused by merging two clusters.
#[inline]
pub fn ward_cost(centroid_a: &[f64], size_a: f64, centroid_b: &[f64], size_b: f64) -> f64 {
    let sq: f64 = centroid_a
        .iter()
        .zip(centroid_b)
        .map(|(x, y)| {
            let d = x - y;
            d * d
        })
        .sum();
    (size_a * size_b) / (size_a + size_b) * sq
}

/// Ordering used for every nearest-neighbor decision: by cost, then by slot.
/// A slot is always the smallest leaf id of the cluster stored in it.
#[inline]
fn closer(a: &(f64, usize), b: &(f64, usize)) -> Ordering {
    a.0.total_cmp(&b.0).then(a.1.cmp(&b.1))
}

struct Clusters {
    dim: usize,
    centroids: Vec<f64>,
    sizes: Vec<f64>,
    active: Vec<usize>,
    position: Vec<usize>,
}

impl Clusters {
    fn centroid(&self, slot: usize) -> &[f64] {
        &self.centroids[slot * self.dim..(slot + 1) * self.dim]
    }

    fn cost(&self, a: usize, b: usize) -> f64 {
        ward_cost(self.centroid(a), self.sizes[a], self.centroid(b), self.sizes[b])
    }

    fn nearest(&self, a: usize) -> (f64, usize) {
        let eval = |&c: &usize| (self.cost(a, c), c);
        let best = if self.active.len() >= PARALLEL_SCAN_MIN {
            self.active
                .par_iter()
                .filter(|&&c| c != a)
                .map(eval)
                .min_by(closer)
        } else {
            self.active.iter().filter(|&&c| c != a).map(eval).min_by(closer)
        };
        best.expect("at least two active clusters")
    }

    /// Merges `drop` into `keep` (weighted centroid) and deactivates `drop`.
    fn merge(&mut self, keep: usize, drop: usize) {
        let (sk, sd) = (self.sizes[keep], self.sizes[drop]);
        let total = sk + sd;
        let d = self.dim;
        let (lo, hi) = self.centroids.split_at_mut(drop.max(keep) * d);
        let (ck, cd) = if keep < drop {
            (&mut lo[keep * d..(keep + 1) * d], &hi[..d])
        } else {
            (&mut hi[..d], &lo[drop * d..(drop + 1) * d])
        };
        for (x, y) in ck.iter_mut().zip(cd) {
            *x = (sk * *x + sd * *y) / total;
        }
        self.sizes[keep] = total;

        let at = self.position[drop];
        self.active.swap_remove(at);
        if at < self.active.len() {
            self.position[self.active[at]] = at;
        }
    }
}

struct RawMerge {
    a: usize,
    b: usize,
    height: f64,
}

/// Builds the full Ward dendrogram over the rows of `embeddings`.
///
/// Within the scan, ties in cost go to the chain predecessor if it is among
/// the tied candidates, otherwise to the smallest slot. Merges are emitted in
/// nondecreasing height order; rounding can make a parent's cost a few ulps
/// smaller than its child's, in which case the parent's height is raised to
/// the child's so the hierarchy stays monotone.
pub fn build_dendrogram(embeddings: &LayerEmbeddings) -> Result<Dendrogram> {
    let n = embeddings.n_rows();
    let dim = embeddings.dim();
    if n < 2 {
        return Err(Error::TooFewPoints(n));
    }
    if dim < 1 {
        return Err(Error::Invalid("embedding dimension must be >= 1".into()));
    }
    if let Some(pos) = embeddings.data().iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFinite {
            row: pos / dim,
            col: pos % dim,
        });
    }

    let mut clusters = Clusters {
        dim,
        centroids: embeddings.data().iter().map(|&v| f64::from(v)).collect(),
        sizes: vec![1.0; n],
        active: (0..n).collect(),
        position: (0..n).collect(),
    };
    // clamped height of the merge that formed the cluster now in each slot
    let mut formed_at = vec![0.0f64; n];
    let mut raw = Vec::with_capacity(n - 1);
    let mut chain: Vec<usize> = Vec::with_capacity(n);

    while clusters.active.len() > 1 {
        if chain.is_empty() {
            let start = *clusters.active.iter().min().unwrap();
            chain.push(start);
        }
        let tip = *chain.last().unwrap();
        let prev = chain.len().checked_sub(2).map(|i| chain[i]);
        let (mut best_cost, mut best) = clusters.nearest(tip);
        if let Some(p) = prev {
            let to_prev = clusters.cost(tip, p);
            if to_prev <= best_cost {
                best_cost = to_prev;
                best = p;
            }
        }
        if Some(best) == prev {
            chain.truncate(chain.len() - 2);
            let (keep, drop) = (tip.min(best), tip.max(best));
            let height = best_cost.max(formed_at[keep]).max(formed_at[drop]);
            raw.push(RawMerge { a: keep, b: drop, height });
            clusters.merge(keep, drop);
            formed_at[keep] = height;
        } else {
            chain.push(best);
        }
    }
    drop(clusters);

    // stable: equal heights keep discovery order, so children precede parents
    raw.sort_by(|x, y| x.height.total_cmp(&y.height));

    let mut parent: Vec<usize> = (0..n).collect();
    let mut node_of: Vec<usize> = (0..n).collect();
    let mut size = vec![1usize; n];
    let mut merges = Vec::with_capacity(n - 1);
    for (i, m) in raw.iter().enumerate() {
        let ra = find(&mut parent, m.a);
        let rb = find(&mut parent, m.b);
        debug_assert_ne!(ra, rb);
        let (na, nb) = (node_of[ra], node_of[rb]);
        let merged = size[ra] + size[rb];
        let (root, child) = (ra.min(rb), ra.max(rb));
        parent[child] = root;
        size[root] = merged;
        node_of[root] = n + i;
        merges.push(MergeNode {
            id: n + i,
            left: na.min(nb),
            right: na.max(nb),
            height: m.height,
            size: merged,
        });
    }
    Dendrogram::new(n, merges)
}

fn find(parent: &mut [usize], mut x: usize) -> usize {
    while parent[x] != x {
        parent[x] = parent[parent[x]];
        x = parent[x];
    }
    x
}
