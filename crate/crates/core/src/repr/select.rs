use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::path::Path;

use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::Corpus;
use crate::error::{Error, Result};
use crate::jsonl;

/// Bundled English closed-class list (lowercase, `#` comments).
pub const DEFAULT_CLOSED_CLASS: &str = include_str!("../../data/closed_class_en.txt");

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TokenOccurrence {
    pub occ_id: usize,
    pub sentence_id: usize,
    pub position: usize,
    #[serde(rename = "token")]
    pub token_type: String,
}

/// What to do with types whose frequency exceeds the per-type cap.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OverCapMode {
    /// Keep a seeded uniform sample of exactly `max_occurrences_per_type`.
    #[default]
    Sample,
    /// Drop every occurrence of the type.
    Drop,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SelectionPolicy {
    pub min_type_frequency: usize,
    pub max_occurrences_per_type: usize,
    pub closed_class_words: HashSet<String>,
    pub over_cap: OverCapMode,
    pub seed: u64,
}

impl Default for SelectionPolicy {
    fn default() -> Self {
        Self {
            min_type_frequency: 2,
            max_occurrences_per_type: 10,
            closed_class_words: HashSet::new(),
            over_cap: OverCapMode::Sample,
            seed: 0,
        }
    }
}

impl SelectionPolicy {
    pub fn validate(&self) -> Result<()> {
        if self.min_type_frequency < 1 {
            return Err(Error::Config("min_type_frequency must be >= 1".into()));
        }
        if self.max_occurrences_per_type < 1 {
            return Err(Error::Config("max_occurrences_per_type must be >= 1".into()));
        }
        Ok(())
    }

    /// Parses a word list (one per line, `#` comments). Every entry matches
    /// as written and in title case.
    pub fn parse_closed_class(text: &str) -> HashSet<String> {
        let mut words = HashSet::new();
        for line in text.lines() {
            let w = line.trim();
            if w.is_empty() || w.starts_with('#') {
                continue;
            }
            words.insert(w.to_string());
            let mut chars = w.chars();
            if let Some(first) = chars.next() {
                let title: String = first.to_uppercase().chain(chars).collect();
                words.insert(title);
            }
        }
        words
    }

    pub fn with_default_closed_class(mut self) -> Self {
        self.closed_class_words = Self::parse_closed_class(DEFAULT_CLOSED_CLASS);
        self
    }
}

/// Every token of the corpus as an occurrence, ids in (sentence, position) order.
pub fn all_occurrences(corpus: &Corpus) -> Vec<TokenOccurrence> {
    corpus
        .sentences()
        .iter()
        .flat_map(|s| {
            s.tokens.iter().enumerate().map(move |(position, tok)| (s.sentence_id, position, tok))
        })
        .enumerate()
        .map(|(occ_id, (sentence_id, position, tok))| TokenOccurrence {
            occ_id,
            sentence_id,
            position,
            token_type: tok.clone(),
        })
        .collect()
}

pub fn select_occurrences(corpus: &Corpus, policy: &SelectionPolicy) -> Result<Vec<TokenOccurrence>> {
    select_from(&all_occurrences(corpus), policy)
}

/// Applies the frequency/closed-class/cap policy to a candidate set.
///
/// Frequencies are counted over `candidates`. Capped types are sampled in
/// lexicographic type order from a single seeded stream, so the result does
/// not depend on hash iteration order. Surviving occurrences are re-numbered
/// contiguously in (sentence_id, position) order.
pub fn select_from(candidates: &[TokenOccurrence], policy: &SelectionPolicy) -> Result<Vec<TokenOccurrence>> {
    policy.validate()?;

    let mut by_type: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
    let mut located: Vec<usize> = (0..candidates.len()).collect();
    located.sort_by_key(|&i| (candidates[i].sentence_id, candidates[i].position));
    for pair in located.windows(2) {
        let (a, b) = (&candidates[pair[0]], &candidates[pair[1]]);
        if (a.sentence_id, a.position) == (b.sentence_id, b.position) {
            return Err(Error::Invalid(format!(
                "duplicate occurrence at sentence {} position {}",
                a.sentence_id, a.position
            )));
        }
    }
    for &i in &located {
        by_type.entry(candidates[i].token_type.as_str()).or_default().push(i);
    }

    let mut rng = ChaCha8Rng::seed_from_u64(policy.seed);
    let mut keep = BTreeSet::new();
    for (ty, idxs) in by_type {
        if idxs.len() < policy.min_type_frequency || policy.closed_class_words.contains(ty) {
            continue;
        }
        let cap = policy.max_occurrences_per_type;
        if idxs.len() > cap {
            if policy.over_cap == OverCapMode::Drop {
                continue;
            }
            let mut picked: Vec<usize> = index::sample(&mut rng, idxs.len(), cap).into_vec();
            picked.sort_unstable();
            keep.extend(picked.into_iter().map(|p| idxs[p]));
        } else {
            keep.extend(idxs);
        }
    }

    let mut kept: Vec<&TokenOccurrence> = keep.into_iter().map(|i| &candidates[i]).collect();
    kept.sort_by_key(|o| (o.sentence_id, o.position));
    Ok(kept
        .into_iter()
        .enumerate()
        .map(|(occ_id, o)| TokenOccurrence { occ_id, ..o.clone() })
        .collect())
}

#[derive(Deserialize)]
struct OccurrenceLine {
    occ_id: usize,
    sentence_id: usize,
    position: usize,
    token: String,
}

/// Loads an occurrence sidecar. When a corpus is supplied, positions and
/// token strings are checked against it.
pub fn load_occurrences(path: &Path, corpus: Option<&Corpus>) -> Result<Vec<TokenOccurrence>> {
    let rows: Vec<(usize, OccurrenceLine)> = jsonl::read(path)?;
    let mut out = Vec::with_capacity(rows.len());
    let mut seen = HashSet::new();
    for (line, r) in rows {
        if r.occ_id != out.len() {
            return Err(Error::parse(
                path,
                line,
                format!("occ_id {} out of sequence (expected {})", r.occ_id, out.len()),
            ));
        }
        if !seen.insert((r.sentence_id, r.position)) {
            return Err(Error::parse(
                path,
                line,
                format!("duplicate occurrence at sentence {} position {}", r.sentence_id, r.position),
            ));
        }
        if let Some(c) = corpus {
            let s = c
                .sentence(r.sentence_id)
                .ok_or_else(|| Error::parse(path, line, format!("unknown sentence {}", r.sentence_id)))?;
            match s.tokens.get(r.position) {
                Some(t) if *t == r.token => {}
                Some(t) => {
                    return Err(Error::parse(
                        path,
                        line,
                        format!("token {:?} does not match corpus token {t:?}", r.token),
                    ))
                }
                None => {
                    return Err(Error::parse(
                        path,
                        line,
                        format!("position {} outside sentence {} of length {}", r.position, r.sentence_id, s.tokens.len()),
                    ))
                }
            }
        }
        out.push(TokenOccurrence {
            occ_id: r.occ_id,
            sentence_id: r.sentence_id,
            position: r.position,
            token_type: r.token,
        });
    }
    Ok(out)
}

pub fn write_occurrences(path: &Path, occurrences: &[TokenOccurrence]) -> Result<()> {
    jsonl::write(path, occurrences)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::repr::CorpusSentence;
    use std::collections::HashMap;

    fn corpus_from(sentences: &[&[&str]]) -> Corpus {
        Corpus::new(
            sentences
                .iter()
                .enumerate()
                .map(|(i, toks)| CorpusSentence {
                    sentence_id: i,
                    text: toks.join(" "),
                    tokens: toks.iter().map(|t| t.to_string()).collect(),
                })
                .collect(),
        )
        .unwrap()
    }

    fn kept_counts(occ: &[TokenOccurrence]) -> HashMap<String, usize> {
        let mut m = HashMap::new();
        for o in occ {
            *m.entry(o.token_type.clone()).or_insert(0) += 1;
        }
        m
    }

    #[test]
    fn singleton_is_dropped() {
        let c = corpus_from(&[&["zyx", "run", "run"]]);
        let occ = select_occurrences(&c, &SelectionPolicy::default()).unwrap();
        assert!(occ.iter().all(|o| o.token_type != "zyx"));
        assert_eq!(occ.len(), 2);
    }

    #[test]
    fn cap_keeps_exactly_ten() {
        let sents: Vec<Vec<&str>> = (0..25).map(|_| vec!["run", "home"]).collect();
        let refs: Vec<&[&str]> = sents.iter().map(|s| s.as_slice()).collect();
        let occ = select_occurrences(&corpus_from(&refs), &SelectionPolicy::default()).unwrap();
        let counts = kept_counts(&occ);
        assert_eq!(counts["run"], 10);
        assert_eq!(counts["home"], 10);
    }

    #[test]
    fn fixture_frequencies_one_three_twelve() {
        // hand count: a x1, b x3, c x12 -> kept {0, 3, 10}
        let mut sents: Vec<Vec<&str>> = vec![vec!["a", "b"], vec!["b", "b"]];
        for _ in 0..12 {
            sents.push(vec!["c"]);
        }
        let refs: Vec<&[&str]> = sents.iter().map(|s| s.as_slice()).collect();
        let occ = select_occurrences(&corpus_from(&refs), &SelectionPolicy::default()).unwrap();
        let counts = kept_counts(&occ);
        assert_eq!(counts.get("a"), None);
        assert_eq!(counts["b"], 3);
        assert_eq!(counts["c"], 10);
        // contiguous ids in (sentence, position) order
        for (i, o) in occ.iter().enumerate() {
            assert_eq!(o.occ_id, i);
        }
        assert!(occ.windows(2).all(|w| (w[0].sentence_id, w[0].position) < (w[1].sentence_id, w[1].position)));
    }

    #[test]
    fn drop_over_cap_removes_whole_type() {
        let sents: Vec<Vec<&str>> = (0..12).map(|_| vec!["c", "d"]).collect();
        let refs: Vec<&[&str]> = sents.iter().map(|s| s.as_slice()).collect();
        let policy = SelectionPolicy {
            over_cap: OverCapMode::Drop,
            max_occurrences_per_type: 11,
            ..Default::default()
        };
        assert!(select_occurrences(&corpus_from(&refs), &policy).unwrap().is_empty());
    }

    #[test]
    fn closed_class_is_case_sensitive_with_title_forms() {
        let c = corpus_from(&[&["The", "the", "THE", "cat"], &["The", "the", "THE", "cat"]]);
        let policy = SelectionPolicy::default().with_default_closed_class();
        let occ = select_occurrences(&c, &policy).unwrap();
        let counts = kept_counts(&occ);
        assert_eq!(counts.get("the"), None);
        assert_eq!(counts.get("The"), None);
        assert_eq!(counts["THE"], 2);
        assert_eq!(counts["cat"], 2);
    }

    #[test]
    fn same_seed_same_sample() {
        let sents: Vec<Vec<&str>> = (0..40).map(|_| vec!["x"]).collect();
        let refs: Vec<&[&str]> = sents.iter().map(|s| s.as_slice()).collect();
        let c = corpus_from(&refs);
        let p = SelectionPolicy { seed: 7, ..Default::default() };
        assert_eq!(select_occurrences(&c, &p).unwrap(), select_occurrences(&c, &p).unwrap());
        let q = SelectionPolicy { seed: 8, ..Default::default() };
        assert_ne!(select_occurrences(&c, &p).unwrap(), select_occurrences(&c, &q).unwrap());
    }

    #[test]
    fn invalid_policy_rejected() {
        let c = corpus_from(&[&["a"]]);
        let p = SelectionPolicy { max_occurrences_per_type: 0, ..Default::default() };
        assert!(matches!(select_occurrences(&c, &p), Err(Error::Config(_))));
    }
}
