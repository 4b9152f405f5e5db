use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::TagScheme;
use crate::cluster::ClusterCut;
use crate::error::{Error, Result};

/// Minimum number of the `n` members that must carry a tag at `theta`:
/// `ceil(theta * n)`, at least 1. A small slack absorbs representation
/// error so that e.g. `0.7 * 10` requires 7, not 8.
pub fn required_count(theta: f64, n: usize) -> usize {
    ((theta * n as f64) - 1e-9).ceil().max(1.0) as usize
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct AlignmentMatch {
    pub scheme: String,
    pub tag: String,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClusterAlignment {
    pub cluster_id: usize,
    pub n_occurrences: usize,
    pub matches: Vec<AlignmentMatch>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlignmentResult {
    pub theta: f64,
    /// Scheme names, sorted.
    pub schemes: Vec<String>,
    /// One entry per cluster, in cluster id order.
    pub clusters: Vec<ClusterAlignment>,
}

impl AlignmentResult {
    /// Number of clusters with at least one match, per scheme. Schemes with
    /// no matches are reported as 0.
    pub fn counts_per_scheme(&self) -> BTreeMap<String, usize> {
        let mut counts: BTreeMap<String, usize> = self.schemes.iter().map(|s| (s.clone(), 0)).collect();
        for c in &self.clusters {
            let matched: BTreeSet<&str> = c.matches.iter().map(|m| m.scheme.as_str()).collect();
            for s in matched {
                *counts.get_mut(s).expect("match scheme is listed") += 1;
            }
        }
        counts
    }

    pub fn matched_tags(&self, cluster: usize, scheme: &str) -> BTreeSet<&str> {
        self.clusters[cluster]
            .matches
            .iter()
            .filter(|m| m.scheme == scheme)
            .map(|m| m.tag.as_str())
            .collect()
    }

    pub fn n_clusters(&self) -> usize {
        self.clusters.len()
    }
}

/// Applies the alignment rule to every cluster of `cut` under every scheme.
///
/// Tags are counted over member occurrences; an occurrence carrying several
/// tags counts towards each of them.
pub fn align_all(cut: &ClusterCut, schemes: &[TagScheme], theta: f64) -> Result<AlignmentResult> {
    if !(theta > 0.0 && theta <= 1.0) {
        return Err(Error::Config(format!("theta must be in (0, 1], got {theta}")));
    }
    let mut names = BTreeSet::new();
    for s in schemes {
        if s.len() != cut.n_leaves() {
            return Err(Error::SizeMismatch {
                expected: cut.n_leaves(),
                found: s.len(),
            });
        }
        if !names.insert(s.name().to_string()) {
            return Err(Error::Config(format!("scheme {} given twice", s.name())));
        }
    }

    let clusters = cut
        .clusters()
        .map(|(cluster_id, members)| {
            let need = required_count(theta, members.len());
            let mut matches = Vec::new();
            for s in schemes {
                let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
                for &occ in members {
                    for t in s.tags_of(occ) {
                        *counts.entry(t).or_insert(0) += 1;
                    }
                }
                matches.extend(counts.into_iter().filter(|&(_, c)| c >= need).map(|(t, count)| AlignmentMatch {
                    scheme: s.name().to_string(),
                    tag: t.to_string(),
                    count,
                }));
            }
            matches.sort();
            ClusterAlignment {
                cluster_id,
                n_occurrences: members.len(),
                matches,
            }
        })
        .collect();

    Ok(AlignmentResult {
        theta,
        schemes: names.into_iter().collect(),
        clusters,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::align::{coarsen_scheme, Granularity, TagMapping};

    fn scheme(name: &str, tags: &[&str]) -> TagScheme {
        TagScheme::new(
            name,
            Granularity::Occurrence,
            tags.iter()
                .map(|t| if t.is_empty() { BTreeSet::new() } else { BTreeSet::from([t.to_string()]) })
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn ceiling_boundaries() {
        assert_eq!(required_count(0.9, 10), 9);
        assert_eq!(required_count(0.7, 10), 7);
        assert_eq!(required_count(0.95, 10), 10);
        assert_eq!(required_count(0.5, 3), 2);
        assert_eq!(required_count(1.0, 1), 1);
    }

    #[test]
    fn nine_of_ten_matches_eight_does_not() {
        let cut = ClusterCut::from_assignment(vec![0; 10]).unwrap();
        let nine = scheme("POS", &["CD", "CD", "CD", "CD", "CD", "CD", "CD", "CD", "CD", "NN"]);
        let r = align_all(&cut, &[nine], 0.9).unwrap();
        assert_eq!(r.matched_tags(0, "POS"), BTreeSet::from(["CD"]));
        let eight = scheme("POS", &["CD", "CD", "CD", "CD", "CD", "CD", "CD", "CD", "NN", "NN"]);
        let r = align_all(&cut, &[eight], 0.9).unwrap();
        assert!(r.clusters[0].matches.is_empty());
        assert_eq!(r.counts_per_scheme()["POS"], 0);
    }

    #[test]
    fn coarse_union_crosses_threshold() {
        let cut = ClusterCut::from_assignment(vec![0; 10]).unwrap();
        let fine = scheme("POS", &["NN", "NN", "NN", "NN", "NN", "NN", "NNS", "NNS", "NNS", "NNS"]);
        assert!(align_all(&cut, std::slice::from_ref(&fine), 0.9).unwrap().clusters[0].matches.is_empty());
        let coarse = coarsen_scheme(&fine, &TagMapping::default_pos());
        let r = align_all(&cut, &[coarse], 0.9).unwrap();
        assert_eq!(r.matched_tags(0, "POS"), BTreeSet::from(["NOUN"]));
    }

    #[test]
    fn rejects_bad_theta_and_sizes() {
        let cut = ClusterCut::from_assignment(vec![0, 0]).unwrap();
        assert!(align_all(&cut, &[], 0.0).is_err());
        assert!(align_all(&cut, &[], 1.5).is_err());
        assert!(align_all(&cut, &[scheme("POS", &["NN"])], 0.9).is_err());
    }
}
