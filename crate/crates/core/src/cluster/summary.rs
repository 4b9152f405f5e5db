use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::ClusterCut;
use crate::error::{Error, Result};
use crate::repr::TokenOccurrence;

/// Clusters with more occurrences than this are flagged under-clustered.
pub const UNDER_CLUSTERED_SIZE: usize = 1000;
/// Clusters with fewer distinct types than this are flagged over-clustered.
pub const OVER_CLUSTERED_TYPES: usize = 5;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClusterSummary {
    pub cluster_id: usize,
    pub n_occurrences: usize,
    pub n_types: usize,
    pub under_clustered: bool,
    pub over_clustered: bool,
    pub type_counts: BTreeMap<String, usize>,
}

impl ClusterSummary {
    pub fn from_types<'a>(cluster_id: usize, types: impl IntoIterator<Item = &'a str>) -> Self {
        let mut type_counts = BTreeMap::new();
        for t in types {
            *type_counts.entry(t.to_string()).or_insert(0) += 1;
        }
        let n_occurrences = type_counts.values().sum();
        let n_types = type_counts.len();
        Self {
            cluster_id,
            n_occurrences,
            n_types,
            under_clustered: n_occurrences > UNDER_CLUSTERED_SIZE,
            over_clustered: n_types < OVER_CLUSTERED_TYPES,
            type_counts,
        }
    }
}

pub fn summarize(cut: &ClusterCut, occurrences: &[TokenOccurrence]) -> Result<Vec<ClusterSummary>> {
    if cut.n_leaves() != occurrences.len() {
        return Err(Error::SizeMismatch {
            expected: cut.n_leaves(),
            found: occurrences.len(),
        });
    }
    Ok(cut
        .clusters()
        .map(|(c, members)| {
            ClusterSummary::from_types(c, members.iter().map(|&o| occurrences[o].token_type.as_str()))
        })
        .collect())
}
