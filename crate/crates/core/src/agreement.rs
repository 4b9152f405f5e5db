//! Inter-annotator agreement over cluster annotations: Fleiss' kappa,
//! Krippendorff's alpha (nominal) and average observed agreement.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::jsonl;
use crate::taxonomy::ConceptLabel;

/// Annotator id reserved for consolidated (adjudicated) answers.
pub const CONSOLIDATION: &str = "consolidation";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Question {
    /// Is the cluster meaningful?
    Q1,
    /// Can the cluster and its sibling be combined into a meaningful group?
    Q2,
}

impl std::str::FromStr for Question {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "Q1" | "q1" => Ok(Question::Q1),
            "Q2" | "q2" => Ok(Question::Q2),
            other => Err(Error::Config(format!("unknown question {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Answer {
    Yes,
    No,
    /// "Don't know or can't judge"; a category of its own.
    #[serde(alias = "dont_know")]
    Unsure,
}

impl Answer {
    pub fn as_str(self) -> &'static str {
        match self {
            Answer::Yes => "yes",
            Answer::No => "no",
            Answer::Unsure => "unsure",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnnotationRecord {
    pub cluster_id: usize,
    pub annotator_id: String,
    pub question: Question,
    pub answer: Answer,
    #[serde(default)]
    pub labels: Vec<ConceptLabel>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timestamp: Option<String>,
    /// Log index of an earlier record by the same annotator for the same
    /// cluster and question that this one replaces.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub supersedes: Option<usize>,
}

pub fn load_log(path: &Path) -> Result<Vec<AnnotationRecord>> {
    Ok(jsonl::read(path)?.into_iter().map(|(_, r)| r).collect())
}

/// Keeps the last effective record per (cluster, annotator, question):
/// superseded records are removed, everything else is kept in log order.
pub fn effective_records(log: &[AnnotationRecord]) -> Vec<&AnnotationRecord> {
    let superseded: BTreeSet<usize> = log.iter().filter_map(|r| r.supersedes).collect();
    log.iter()
        .enumerate()
        .filter(|(i, _)| !superseded.contains(i))
        .map(|(_, r)| r)
        .collect()
}

/// Items x annotators matrix of category indices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AgreementTable {
    categories: Vec<String>,
    annotators: Vec<String>,
    items: Vec<usize>,
    ratings: Vec<Vec<usize>>,
    dropped_items: usize,
}

impl AgreementTable {
    pub fn new(
        categories: Vec<String>,
        annotators: Vec<String>,
        items: Vec<usize>,
        ratings: Vec<Vec<usize>>,
    ) -> Result<Self> {
        if ratings.is_empty() {
            return Err(Error::Agreement("table has no items".into()));
        }
        if annotators.len() < 2 {
            return Err(Error::Agreement(format!("need at least 2 annotators, got {}", annotators.len())));
        }
        if items.len() != ratings.len() {
            return Err(Error::Agreement("item ids and rows differ in length".into()));
        }
        for (i, row) in ratings.iter().enumerate() {
            if row.len() != annotators.len() {
                return Err(Error::Agreement(format!(
                    "row {i} has {} ratings for {} annotators",
                    row.len(),
                    annotators.len()
                )));
            }
            if let Some(&c) = row.iter().find(|&&c| c >= categories.len()) {
                return Err(Error::Agreement(format!("row {i} uses unknown category {c}")));
            }
        }
        Ok(Self {
            categories,
            annotators,
            items,
            ratings,
            dropped_items: 0,
        })
    }

    /// Builds a table from string answers; categories are the sorted
    /// distinct answers and annotators are numbered from 0.
    pub fn from_rows<S: AsRef<str>>(rows: &[Vec<S>]) -> Result<Self> {
        let categories: Vec<String> = rows
            .iter()
            .flatten()
            .map(|s| s.as_ref().to_string())
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        let index: BTreeMap<&str, usize> = categories.iter().enumerate().map(|(i, c)| (c.as_str(), i)).collect();
        let width = rows.first().map_or(0, Vec::len);
        let ratings = rows
            .iter()
            .map(|r| r.iter().map(|s| index[s.as_ref()]).collect())
            .collect();
        Self::new(
            categories.clone(),
            (0..width).map(|a| format!("A{}", a + 1)).collect(),
            (0..rows.len()).collect(),
            ratings,
        )
    }

    /// Table for one question over the given annotators (all annotators
    /// other than [`CONSOLIDATION`] when `None`). Clusters not answered by
    /// every annotator are dropped and counted.
    pub fn from_records(
        log: &[AnnotationRecord],
        question: Question,
        annotators: Option<&[String]>,
    ) -> Result<Self> {
        let records = effective_records(log);
        let mut answers: BTreeMap<usize, BTreeMap<&str, Answer>> = BTreeMap::new();
        for r in records.iter().filter(|r| r.question == question) {
            answers.entry(r.cluster_id).or_default().insert(&r.annotator_id, r.answer);
        }
        let annotators: Vec<String> = match annotators {
            Some(a) => a.to_vec(),
            None => records
                .iter()
                .filter(|r| r.question == question && r.annotator_id != CONSOLIDATION)
                .map(|r| r.annotator_id.clone())
                .collect::<BTreeSet<_>>()
                .into_iter()
                .collect(),
        };
        let categories = [Answer::Yes, Answer::No, Answer::Unsure];
        let mut items = Vec::new();
        let mut ratings = Vec::new();
        let mut dropped = 0;
        for (cluster, by_annotator) in &answers {
            let row: Option<Vec<usize>> = annotators
                .iter()
                .map(|a| {
                    by_annotator
                        .get(a.as_str())
                        .map(|ans| categories.iter().position(|c| c == ans).unwrap())
                })
                .collect();
            match row {
                Some(row) => {
                    items.push(*cluster);
                    ratings.push(row);
                }
                None => dropped += 1,
            }
        }
        let mut table = Self::new(
            categories.iter().map(|c| c.as_str().to_string()).collect(),
            annotators,
            items,
            ratings,
        )?;
        table.dropped_items = dropped;
        Ok(table)
    }

    pub fn n_items(&self) -> usize {
        self.ratings.len()
    }

    pub fn n_annotators(&self) -> usize {
        self.annotators.len()
    }

    pub fn annotators(&self) -> &[String] {
        &self.annotators
    }

    pub fn items(&self) -> &[usize] {
        &self.items
    }

    pub fn dropped_items(&self) -> usize {
        self.dropped_items
    }

    /// `counts[i][c]`: annotators who put item `i` in category `c`.
    fn category_counts(&self) -> Vec<Vec<usize>> {
        self.ratings
            .iter()
            .map(|row| {
                let mut c = vec![0usize; self.categories.len()];
                for &v in row {
                    c[v] += 1;
                }
                c
            })
            .collect()
    }
}

/// Fleiss' kappa. Returns 1.0 when expected agreement is 1 (a single
/// category used throughout).
pub fn fleiss_kappa(table: &AgreementTable) -> f64 {
    let n = table.n_annotators() as f64;
    let items = table.n_items() as f64;
    let counts = table.category_counts();
    let p_bar = counts
        .iter()
        .map(|row| {
            let sq: f64 = row.iter().map(|&c| (c * c) as f64).sum();
            (sq - n) / (n * (n - 1.0))
        })
        .sum::<f64>()
        / items;
    let p_e: f64 = (0..table.categories.len())
        .map(|j| {
            let share = counts.iter().map(|row| row[j] as f64).sum::<f64>() / (items * n);
            share * share
        })
        .sum();
    if (1.0 - p_e).abs() < 1e-15 {
        return 1.0;
    }
    (p_bar - p_e) / (1.0 - p_e)
}

/// Krippendorff's alpha for nominal data via the coincidence matrix.
/// Needs at least two items; returns 1.0 when only one category occurs.
pub fn krippendorff_alpha(table: &AgreementTable) -> Result<f64> {
    if table.n_items() < 2 {
        return Err(Error::Agreement("alpha is undefined for a single item".into()));
    }
    let k = table.categories.len();
    let mut coincidence = vec![vec![0.0f64; k]; k];
    for row in table.category_counts() {
        let m: usize = row.iter().sum();
        let w = 1.0 / (m as f64 - 1.0);
        for c in 0..k {
            for d in 0..k {
                let pairs = if c == d { row[c] * row[c].saturating_sub(1) } else { row[c] * row[d] };
                coincidence[c][d] += pairs as f64 * w;
            }
        }
    }
    let marginals: Vec<f64> = coincidence.iter().map(|r| r.iter().sum()).collect();
    let total: f64 = marginals.iter().sum();
    let mut observed = 0.0;
    let mut expected = 0.0;
    for c in 0..k {
        for d in 0..k {
            if c != d {
                observed += coincidence[c][d];
                expected += marginals[c] * marginals[d];
            }
        }
    }
    if expected == 0.0 {
        return Ok(1.0);
    }
    Ok(1.0 - (total - 1.0) * observed / expected)
}

/// Mean over items of the fraction of annotator pairs that agree.
pub fn average_observed_agreement(table: &AgreementTable) -> f64 {
    let n = table.n_annotators();
    let pairs = (n * (n - 1) / 2) as f64;
    table
        .category_counts()
        .iter()
        .map(|row| row.iter().map(|&c| (c * c.saturating_sub(1) / 2) as f64).sum::<f64>() / pairs)
        .sum::<f64>()
        / table.n_items() as f64
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgreementStats {
    pub fleiss_kappa: f64,
    /// `None` where alpha is undefined (a single item).
    pub krippendorff_alpha: Option<f64>,
    pub avg_observed: f64,
    pub n_items: usize,
    pub n_annotators: usize,
    pub dropped_items: usize,
}

impl AgreementStats {
    pub fn compute(table: &AgreementTable) -> Self {
        Self {
            fleiss_kappa: fleiss_kappa(table),
            krippendorff_alpha: krippendorff_alpha(table).ok(),
            avg_observed: average_observed_agreement(table),
            n_items: table.n_items(),
            n_annotators: table.n_annotators(),
            dropped_items: table.dropped_items(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairAgreement {
    pub annotator: String,
    pub reference: String,
    pub stats: AgreementStats,
}

/// Mean of each statistic over annotator/reference pairs. Alpha is `None`
/// if any pair leaves it undefined.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeanAgreement {
    pub fleiss_kappa: f64,
    pub krippendorff_alpha: Option<f64>,
    pub avg_observed: f64,
}

impl MeanAgreement {
    pub fn of(pairs: &[PairAgreement]) -> Option<Self> {
        if pairs.is_empty() {
            return None;
        }
        let n = pairs.len() as f64;
        let alphas: Option<Vec<f64>> = pairs.iter().map(|p| p.stats.krippendorff_alpha).collect();
        Some(Self {
            fleiss_kappa: pairs.iter().map(|p| p.stats.fleiss_kappa).sum::<f64>() / n,
            krippendorff_alpha: alphas.map(|a| a.iter().sum::<f64>() / n),
            avg_observed: pairs.iter().map(|p| p.stats.avg_observed).sum::<f64>() / n,
        })
    }
}

/// Each annotator against a reference column (the consolidation by
/// default), one two-column table per annotator.
pub fn against_reference(
    log: &[AnnotationRecord],
    question: Question,
    reference: &str,
) -> Result<Vec<PairAgreement>> {
    let annotators: BTreeSet<&str> = log
        .iter()
        .filter(|r| r.question == question && r.annotator_id != reference)
        .map(|r| r.annotator_id.as_str())
        .collect();
    if annotators.is_empty() {
        return Err(Error::Agreement(format!("no annotators besides {reference}")));
    }
    annotators
        .into_iter()
        .map(|a| {
            let pair = [a.to_string(), reference.to_string()];
            let table = AgreementTable::from_records(log, question, Some(&pair))?;
            Ok(PairAgreement {
                annotator: a.to_string(),
                reference: reference.to_string(),
                stats: AgreementStats::compute(&table),
            })
        })
        .collect()
}
