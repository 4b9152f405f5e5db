use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::Assignment;
use crate::agreement::{effective_records, Answer, AnnotationRecord, Question, CONSOLIDATION};
use crate::error::{Error, Result};
use crate::jsonl;
use crate::repr::TokenOccurrence;
use crate::taxonomy::ConceptLabel;

/// Concept labels attached to each annotated cluster.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ClusterLabels(pub BTreeMap<usize, BTreeSet<ConceptLabel>>);

#[derive(Serialize, Deserialize)]
struct LabelLine {
    cluster_id: usize,
    labels: Vec<ConceptLabel>,
}

impl ClusterLabels {
    /// JSON lines `{"cluster_id": int, "labels": [str, ...]}`.
    pub fn load(path: &Path) -> Result<Self> {
        let mut map: BTreeMap<usize, BTreeSet<ConceptLabel>> = BTreeMap::new();
        for (_, l) in jsonl::read::<LabelLine>(path)? {
            map.entry(l.cluster_id).or_default().extend(l.labels);
        }
        Ok(Self(map))
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let lines: Vec<LabelLine> = self
            .0
            .iter()
            .map(|(&cluster_id, l)| LabelLine {
                cluster_id,
                labels: l.iter().cloned().collect(),
            })
            .collect();
        jsonl::write(path, &lines)
    }

    /// Labels from Q1 "yes" answers. A consolidation record, when present,
    /// decides the cluster's labels; otherwise annotators' labels are pooled.
    pub fn from_annotations(log: &[AnnotationRecord]) -> Self {
        let mut consolidated: BTreeMap<usize, BTreeSet<ConceptLabel>> = BTreeMap::new();
        let mut pooled: BTreeMap<usize, BTreeSet<ConceptLabel>> = BTreeMap::new();
        let mut has_consolidation = BTreeSet::new();
        for r in effective_records(log).into_iter().filter(|r| r.question == Question::Q1) {
            if r.annotator_id == CONSOLIDATION {
                has_consolidation.insert(r.cluster_id);
                if r.answer == Answer::Yes {
                    consolidated.entry(r.cluster_id).or_default().extend(r.labels.iter().cloned());
                }
            } else if r.answer == Answer::Yes {
                pooled.entry(r.cluster_id).or_default().extend(r.labels.iter().cloned());
            }
        }
        for (c, l) in pooled {
            if !has_consolidation.contains(&c) {
                consolidated.entry(c).or_default().extend(l);
            }
        }
        consolidated.retain(|_, l| !l.is_empty());
        Self(consolidated)
    }

    pub fn get(&self, cluster: usize) -> Option<&BTreeSet<ConceptLabel>> {
        self.0.get(&cluster).filter(|l| !l.is_empty())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BcnEntry {
    /// The label's hierarchy path, shallowest ancestor first; the last
    /// element is the cluster's label.
    pub labels: Vec<ConceptLabel>,
    pub token: String,
    pub sentence_id: usize,
    pub position: usize,
    pub cluster_id: usize,
    pub confidence: f64,
}

impl BcnEntry {
    pub fn label(&self) -> &ConceptLabel {
        self.labels.last().expect("entry has a label")
    }
}

/// Per-label token and type counts, rolled up to every ancestor.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct BcnStats {
    pub rows: BTreeMap<ConceptLabel, LabelCounts>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabelCounts {
    pub tokens: usize,
    pub types: usize,
}

impl BcnStats {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("label,tokens,types\n");
        for (label, c) in &self.rows {
            writeln!(out, "{label},{},{}", c.tokens, c.types).unwrap();
        }
        out
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_csv()).map_err(|e| Error::io(path, e))
    }
}

/// Counts distinct occurrences `(sentence_id, position)` and distinct
/// token strings under every label appearing in the entries' paths.
pub fn stats_from_entries(entries: &[BcnEntry]) -> BcnStats {
    let mut occ: BTreeMap<&ConceptLabel, BTreeSet<(usize, usize)>> = BTreeMap::new();
    let mut types: BTreeMap<&ConceptLabel, BTreeSet<&str>> = BTreeMap::new();
    for e in entries {
        for l in &e.labels {
            occ.entry(l).or_default().insert((e.sentence_id, e.position));
            types.entry(l).or_default().insert(&e.token);
        }
    }
    BcnStats {
        rows: occ
            .into_iter()
            .map(|(l, o)| {
                let counts = LabelCounts {
                    tokens: o.len(),
                    types: types[l].len(),
                };
                (l.clone(), counts)
            })
            .collect(),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BcnOutput {
    pub entries: Vec<BcnEntry>,
    pub stats: BcnStats,
    /// Assignments to clusters that carry no label.
    pub dropped_unlabeled: usize,
}

/// One entry per (assignment, cluster label). `occurrences[a.row]`
/// identifies the token behind each assignment.
pub fn build_bcn(
    assignments: &[Assignment],
    labels: &ClusterLabels,
    occurrences: &[TokenOccurrence],
) -> Result<BcnOutput> {
    let mut entries = Vec::new();
    let mut dropped = 0;
    for a in assignments {
        let occ = occurrences.get(a.row).ok_or_else(|| {
            Error::Invalid(format!("assignment row {} has no occurrence ({} known)", a.row, occurrences.len()))
        })?;
        let Some(cluster_labels) = labels.get(a.cluster_id) else {
            dropped += 1;
            continue;
        };
        for label in cluster_labels {
            let mut path = label.ancestors();
            path.push(label.clone());
            entries.push(BcnEntry {
                labels: path,
                token: occ.token_type.clone(),
                sentence_id: occ.sentence_id,
                position: occ.position,
                cluster_id: a.cluster_id,
                confidence: a.confidence,
            });
        }
    }
    let stats = stats_from_entries(&entries);
    Ok(BcnOutput {
        entries,
        stats,
        dropped_unlabeled: dropped,
    })
}

pub fn load_bcn(path: &Path) -> Result<Vec<BcnEntry>> {
    Ok(jsonl::read(path)?.into_iter().map(|(_, e)| e).collect())
}
