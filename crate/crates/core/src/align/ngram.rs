use std::collections::{BTreeMap, BTreeSet};

use crate::cluster::ClusterSummary;
use crate::error::{Error, Result};

/// Inclusive character n-gram lengths. Unigrams are never produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NgramRange {
    min: usize,
    max: usize,
}

impl Default for NgramRange {
    fn default() -> Self {
        Self { min: 2, max: 6 }
    }
}

impl NgramRange {
    pub fn new(min: usize, max: usize) -> Result<Self> {
        if min < 2 || max < min {
            return Err(Error::Config(format!("invalid ngram range {min}..={max} (need 2 <= min <= max)")));
        }
        Ok(Self { min, max })
    }

    /// Distinct character n-grams of `token`.
    pub fn ngrams<'a>(&self, token: &'a str) -> BTreeSet<&'a str> {
        let bounds: Vec<usize> = token.char_indices().map(|(i, _)| i).chain([token.len()]).collect();
        let n_chars = bounds.len() - 1;
        let mut out = BTreeSet::new();
        for len in self.min..=self.max.min(n_chars) {
            for start in 0..=n_chars - len {
                out.insert(&token[bounds[start]..bounds[start + len]]);
            }
        }
        out
    }
}

/// The n-gram shared by the most member occurrences.
///
/// Coverage of an n-gram is the total occurrence count of member types that
/// contain it. Ties go to the longer n-gram, then the lexicographically
/// smaller one. Returns `None` when the best coverage is below 2.
pub fn best_ngram(summary: &ClusterSummary, range: NgramRange) -> Option<(String, usize)> {
    let mut coverage: BTreeMap<&str, usize> = BTreeMap::new();
    for (ty, &count) in &summary.type_counts {
        for g in range.ngrams(ty) {
            *coverage.entry(g).or_insert(0) += count;
        }
    }
    coverage
        .into_iter()
        .filter(|&(_, c)| c >= 2)
        .max_by(|a, b| {
            a.1.cmp(&b.1)
                .then(a.0.chars().count().cmp(&b.0.chars().count()))
                .then(b.0.cmp(a.0))
        })
        .map(|(g, c)| (g.to_string(), c))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn summary(types: &[(&str, usize)]) -> ClusterSummary {
        ClusterSummary::from_types(
            0,
            types.iter().flat_map(|&(t, c)| std::iter::repeat_n(t, c)),
        )
    }

    /// Exhaustive enumeration, independent of `NgramRange::ngrams`.
    fn brute_force(types: &[(&str, usize)]) -> Option<(String, usize)> {
        let mut candidates = BTreeSet::new();
        for (t, _) in types {
            let chars: Vec<char> = t.chars().collect();
            for i in 0..chars.len() {
                for j in i + 2..=(i + 6).min(chars.len()) {
                    candidates.insert(chars[i..j].iter().collect::<String>());
                }
            }
        }
        let mut best: Option<(String, usize)> = None;
        for g in candidates {
            let cov: usize = types.iter().filter(|(t, _)| t.contains(g.as_str())).map(|(_, c)| c).sum();
            if cov < 2 {
                continue;
            }
            let better = match &best {
                None => true,
                Some((bg, bc)) => {
                    cov > *bc
                        || (cov == *bc && g.chars().count() > bg.chars().count())
                        || (cov == *bc && g.chars().count() == bg.chars().count() && g < *bg)
                }
            };
            if better {
                best = Some((g, cov));
            }
        }
        best
    }

    #[test]
    fn anti_prefix_fixture() {
        let types = [("anti-war", 3), ("anti-tax", 2)];
        assert_eq!(brute_force(&types), Some(("anti-".to_string(), 5)));
        assert_eq!(best_ngram(&summary(&types), NgramRange::default()), Some(("anti-".to_string(), 5)));
    }

    #[test]
    fn no_match_cases() {
        assert_eq!(best_ngram(&summary(&[("xyz", 1)]), NgramRange::default()), None);
        assert_eq!(best_ngram(&summary(&[("ab", 1), ("cd", 1)]), NgramRange::default()), None);
    }

    #[test]
    fn unicode_boundaries() {
        let r = NgramRange::default();
        let g = r.ngrams("café");
        assert!(g.contains("fé") && g.contains("café"));
        assert!(NgramRange::new(1, 3).is_err());
    }

    proptest! {
        #[test]
        fn matches_brute_force(types in prop::collection::btree_map("[a-c]{1,7}", 1usize..4, 1..6)) {
            let types: Vec<(&str, usize)> = types.iter().map(|(t, c)| (t.as_str(), *c)).collect();
            let got = best_ngram(&summary(&types), NgramRange::default());
            if let Some((g, _)) = &got {
                prop_assert!(g.chars().count() >= 2);
            }
            prop_assert_eq!(got, brute_force(&types));
        }
    }
}
