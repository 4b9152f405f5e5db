use std::path::Path;

use serde::{Deserialize, Serialize};

use super::Dendrogram;
use crate::error::{Error, Result};
use crate::jsonl;

/// A flat partition of the leaves into `k` clusters.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClusterCut {
    k: usize,
    assignment: Vec<usize>,
    members: Vec<Vec<usize>>,
}

impl ClusterCut {
    /// Builds a cut from `assignment[occ_id] = cluster_id`. Cluster ids must
    /// be exactly `0..k` with no empty cluster.
    pub fn from_assignment(assignment: Vec<usize>) -> Result<Self> {
        let k = assignment.iter().max().map_or(0, |m| m + 1);
        let mut members = vec![Vec::new(); k];
        for (occ, &c) in assignment.iter().enumerate() {
            members[c].push(occ);
        }
        if let Some(empty) = members.iter().position(Vec::is_empty) {
            return Err(Error::Invalid(format!("cluster {empty} has no members")));
        }
        Ok(Self {
            k,
            assignment,
            members,
        })
    }

    /// Undoes the last `k - 1` merges. Cluster ids follow ascending minimum
    /// occurrence id.
    pub fn from_dendrogram(dendrogram: &Dendrogram, k: usize) -> Result<Self> {
        let n = dendrogram.n_leaves();
        if k < 1 || k > n {
            return Err(Error::KOutOfRange { k, n });
        }
        let mut parent: Vec<usize> = (0..n).collect();
        let mut rep: Vec<usize> = (0..n).collect();
        for m in &dendrogram.merges()[..n - k] {
            let (a, b) = (rep[m.left], rep[m.right]);
            let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
            parent[ra.max(rb)] = ra.min(rb);
            rep.push(ra.min(rb));
        }
        let mut label = vec![usize::MAX; n];
        let mut assignment = Vec::with_capacity(n);
        let mut next = 0;
        for leaf in 0..n {
            let r = find(&mut parent, leaf);
            if label[r] == usize::MAX {
                label[r] = next;
                next += 1;
            }
            assignment.push(label[r]);
        }
        debug_assert_eq!(next, k);
        Self::from_assignment(assignment)
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn n_leaves(&self) -> usize {
        self.assignment.len()
    }

    pub fn assignment(&self) -> &[usize] {
        &self.assignment
    }

    pub fn cluster_of(&self, occ: usize) -> usize {
        self.assignment[occ]
    }

    pub fn members(&self, cluster: usize) -> &[usize] {
        &self.members[cluster]
    }

    pub fn clusters(&self) -> impl Iterator<Item = (usize, &[usize])> {
        self.members.iter().enumerate().map(|(c, m)| (c, m.as_slice()))
    }
}

fn find(parent: &mut [usize], mut x: usize) -> usize {
    while parent[x] != x {
        parent[x] = parent[parent[x]];
        x = parent[x];
    }
    x
}

/// Pairs of cut clusters that are the two children of one merge node.
/// Returned as `(a, b)` with `a < b`, sorted.
pub fn siblings(dendrogram: &Dendrogram, cut: &ClusterCut) -> Result<Vec<(usize, usize)>> {
    let n = dendrogram.n_leaves();
    if cut.n_leaves() != n {
        return Err(Error::Mismatch(format!(
            "cut covers {} leaves, dendrogram {n}",
            cut.n_leaves()
        )));
    }
    let expected = ClusterCut::from_dendrogram(dendrogram, cut.k())
        .map_err(|e| Error::Mismatch(e.to_string()))?;
    if expected.assignment != cut.assignment {
        return Err(Error::Mismatch(format!(
            "cut at k={} is not the dendrogram's partition",
            cut.k()
        )));
    }
    let applied = n - cut.k();
    let is_cluster_root = |node: usize| node < n || node - n < applied;
    let mut rep: Vec<usize> = (0..n).collect();
    for m in dendrogram.merges() {
        rep.push(rep[m.left]);
    }
    let mut pairs: Vec<(usize, usize)> = dendrogram.merges()[applied..]
        .iter()
        .filter(|m| is_cluster_root(m.left) && is_cluster_root(m.right))
        .map(|m| {
            let (a, b) = (cut.cluster_of(rep[m.left]), cut.cluster_of(rep[m.right]));
            (a.min(b), a.max(b))
        })
        .collect();
    pairs.sort_unstable();
    Ok(pairs)
}

#[derive(Serialize, Deserialize)]
struct CutLine {
    occ_id: usize,
    cluster_id: usize,
}

pub fn write_cut(path: &Path, cut: &ClusterCut) -> Result<()> {
    let lines: Vec<CutLine> = cut
        .assignment
        .iter()
        .enumerate()
        .map(|(occ_id, &cluster_id)| CutLine { occ_id, cluster_id })
        .collect();
    jsonl::write(path, &lines)
}

pub fn load_cut(path: &Path) -> Result<ClusterCut> {
    let rows: Vec<(usize, CutLine)> = jsonl::read(path)?;
    let mut assignment = Vec::with_capacity(rows.len());
    for (line, r) in rows {
        if r.occ_id != assignment.len() {
            return Err(Error::parse(
                path,
                line,
                format!("occ_id {} out of sequence (expected {})", r.occ_id, assignment.len()),
            ));
        }
        assignment.push(r.cluster_id);
    }
    ClusterCut::from_assignment(assignment)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cluster::{build_dendrogram, MergeNode};
    use crate::repr::LayerEmbeddings;

    fn three_points() -> Dendrogram {
        let e = LayerEmbeddings::new(0, 3, 1, vec![0.0, 1.0, 5.0]).unwrap();
        build_dendrogram(&e).unwrap()
    }

    fn balanced_four() -> Dendrogram {
        let m = |id, left, right, height, size| MergeNode { id, left, right, height, size };
        Dendrogram::new(
            4,
            vec![m(4, 0, 1, 1.0, 2), m(5, 2, 3, 1.0, 2), m(6, 4, 5, 5.0, 4)],
        )
        .unwrap()
    }

    #[test]
    fn extremes_of_k() {
        let d = three_points();
        let all = ClusterCut::from_dendrogram(&d, 3).unwrap();
        assert_eq!(all.assignment(), &[0, 1, 2]);
        let one = ClusterCut::from_dendrogram(&d, 1).unwrap();
        assert_eq!(one.members(0), &[0, 1, 2]);
        assert!(matches!(ClusterCut::from_dendrogram(&d, 0), Err(Error::KOutOfRange { .. })));
        assert!(matches!(ClusterCut::from_dendrogram(&d, 4), Err(Error::KOutOfRange { .. })));
    }

    #[test]
    fn three_points_at_two() {
        let cut = ClusterCut::from_dendrogram(&three_points(), 2).unwrap();
        assert_eq!(cut.members(0), &[0, 1]);
        assert_eq!(cut.members(1), &[2]);
    }

    #[test]
    fn root_split_is_the_only_pair_at_two() {
        let d = balanced_four();
        let cut = ClusterCut::from_dendrogram(&d, 2).unwrap();
        assert_eq!(siblings(&d, &cut).unwrap(), vec![(0, 1)]);
    }

    #[test]
    fn three_points_siblings_at_three() {
        let d = three_points();
        let cut = ClusterCut::from_dendrogram(&d, 3).unwrap();
        assert_eq!(siblings(&d, &cut).unwrap(), vec![(0, 1)]);
    }

    #[test]
    fn balanced_tree_pairs_everyone() {
        let d = balanced_four();
        let cut = ClusterCut::from_dendrogram(&d, 4).unwrap();
        assert_eq!(siblings(&d, &cut).unwrap(), vec![(0, 1), (2, 3)]);
    }

    #[test]
    fn mismatched_cut_is_rejected() {
        let d = balanced_four();
        let wrong = ClusterCut::from_assignment(vec![0, 1, 0, 1]).unwrap();
        assert!(matches!(siblings(&d, &wrong), Err(Error::Mismatch(_))));
        let short = ClusterCut::from_assignment(vec![0, 1]).unwrap();
        assert!(matches!(siblings(&d, &short), Err(Error::Mismatch(_))));
    }

    #[test]
    fn cut_file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("cut.jsonl");
        let cut = ClusterCut::from_dendrogram(&balanced_four(), 2).unwrap();
        write_cut(&p, &cut).unwrap();
        assert_eq!(
            std::fs::read_to_string(&p).unwrap().lines().next().unwrap(),
            r#"{"occ_id":0,"cluster_id":0}"#
        );
        assert_eq!(load_cut(&p).unwrap(), cut);
    }

    #[test]
    fn empty_cluster_ids_rejected() {
        assert!(ClusterCut::from_assignment(vec![0, 2]).is_err());
    }
}
