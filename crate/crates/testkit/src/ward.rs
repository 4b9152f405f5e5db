//! Greedy Ward agglomeration by brute force: every step scores every pair by
//! the direct SSE increase `SSE(a ∪ b) - SSE(a) - SSE(b)`, recomputed from
//! the member points.

pub fn sse(points: &[Vec<f64>], members: &[usize]) -> f64 {
    let d = points[members[0]].len();
    let mut mean = vec![0.0; d];
    for &m in members {
        for (a, v) in mean.iter_mut().zip(&points[m]) {
            *a += v;
        }
    }
    mean.iter_mut().for_each(|a| *a /= members.len() as f64);
    members
        .iter()
        .map(|&m| points[m].iter().zip(&mean).map(|(v, a)| (v - a).powi(2)).sum::<f64>())
        .sum()
}

#[derive(Debug, Clone)]
pub struct NaiveMerge {
    pub left: Vec<usize>,
    pub right: Vec<usize>,
    pub height: f64,
    /// Relative gap between the best and second-best pair at this step.
    pub gap: f64,
}

#[derive(Debug, Clone)]
pub struct NaiveWard {
    pub n: usize,
    pub merges: Vec<NaiveMerge>,
}

/// Ties are broken towards the pair with the smallest `(min leaf, other min
/// leaf)`; callers that need tie-free inputs check `gap`.
pub fn naive_ward(points: &[Vec<f64>]) -> NaiveWard {
    let n = points.len();
    let mut clusters: Vec<Vec<usize>> = (0..n).map(|i| vec![i]).collect();
    let mut within: Vec<f64> = vec![0.0; n];
    let mut merges = Vec::with_capacity(n.saturating_sub(1));
    while clusters.len() > 1 {
        let mut best = (f64::INFINITY, 0, 0);
        let mut second = f64::INFINITY;
        for i in 0..clusters.len() {
            for j in i + 1..clusters.len() {
                let union: Vec<usize> = clusters[i].iter().chain(&clusters[j]).copied().collect();
                let cost = (sse(points, &union) - within[i] - within[j]).max(0.0);
                if cost < best.0 {
                    second = best.0;
                    best = (cost, i, j);
                } else if cost < second {
                    second = cost;
                }
            }
        }
        let (height, i, j) = best;
        let scale = height.abs().max(second.abs()).max(f64::MIN_POSITIVE);
        let gap = if second.is_finite() { (second - height) / scale } else { f64::INFINITY };
        let right = clusters.remove(j);
        let wr = within.remove(j);
        let left = std::mem::take(&mut clusters[i]);
        let mut union: Vec<usize> = left.iter().chain(&right).copied().collect();
        union.sort_unstable();
        within[i] = within[i] + wr + height;
        clusters[i] = union;
        merges.push(NaiveMerge { left, right, height, gap });
    }
    NaiveWard { n, merges }
}

impl NaiveWard {
    /// Partition after applying the first `n - k` merges, each block sorted
    /// and blocks sorted by their first element.
    pub fn partition(&self, k: usize) -> Vec<Vec<usize>> {
        let mut blocks: Vec<Vec<usize>> = (0..self.n).map(|i| vec![i]).collect();
        let mut owner: Vec<usize> = (0..self.n).collect();
        for m in &self.merges[..self.n - k] {
            let a = owner[m.left[0]];
            let b = owner[m.right[0]];
            let moved = std::mem::take(&mut blocks[b]);
            for &x in &moved {
                owner[x] = a;
            }
            blocks[a].extend(moved);
        }
        canonical(blocks)
    }

    pub fn min_gap(&self) -> f64 {
        self.merges.iter().map(|m| m.gap).fold(f64::INFINITY, f64::min)
    }
}

pub fn canonical(blocks: Vec<Vec<usize>>) -> Vec<Vec<usize>> {
    let mut blocks: Vec<Vec<usize>> = blocks
        .into_iter()
        .filter(|b| !b.is_empty())
        .map(|mut b| {
            b.sort_unstable();
            b
        })
        .collect();
    blocks.sort();
    blocks
}

/// Partition from a flat assignment vector.
pub fn partition_of(assignment: &[usize]) -> Vec<Vec<usize>> {
    let k = assignment.iter().max().map_or(0, |m| m + 1);
    let mut blocks = vec![Vec::new(); k];
    for (i, &c) in assignment.iter().enumerate() {
        blocks[c].push(i);
    }
    canonical(blocks)
}
