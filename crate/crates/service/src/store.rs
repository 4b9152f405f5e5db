use std::collections::BTreeMap;
use std::fs::{File, OpenOptions};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use axum::http::StatusCode;
use latent_concepts::agreement::{Answer, AnnotationRecord, Question};
use latent_concepts::taxonomy::LabelSet;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum StoreError {
    #[error("unknown cluster {0}")]
    UnknownCluster(usize),
    #[error("cluster {0} has no sibling, so Q2 cannot be asked")]
    NoSibling(usize),
    #[error("invalid label {text:?}: {reason}")]
    InvalidLabel { text: String, reason: String },
    #[error("{0}")]
    InvalidRecord(String),
    #[error("{annotator} already answered {question:?} for cluster {cluster} (record {existing}); submit a superseding record instead")]
    Duplicate {
        cluster: usize,
        annotator: String,
        question: Question,
        existing: usize,
    },
    #[error("record {0} is already superseded")]
    Stale(usize),
}

impl StoreError {
    pub fn status(&self) -> StatusCode {
        match self {
            StoreError::UnknownCluster(_) => StatusCode::NOT_FOUND,
            StoreError::NoSibling(_) => StatusCode::BAD_REQUEST,
            StoreError::InvalidLabel { .. } | StoreError::InvalidRecord(_) => StatusCode::UNPROCESSABLE_ENTITY,
            StoreError::Duplicate { .. } | StoreError::Stale(_) => StatusCode::CONFLICT,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct RecordKey {
    pub cluster_id: usize,
    pub annotator_id: String,
    pub question: Question,
}

impl RecordKey {
    fn of(r: &AnnotationRecord) -> Self {
        Self {
            cluster_id: r.cluster_id,
            annotator_id: r.annotator_id.clone(),
            question: r.question,
        }
    }
}

/// Event-sourced annotation state: the log is the source of truth and the
/// label set and current-record index are derived from it.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct AnnotationStore {
    log: Vec<AnnotationRecord>,
    labels: LabelSet,
    current: BTreeMap<RecordKey, usize>,
}

impl AnnotationStore {
    pub fn new(seed_labels: LabelSet) -> Self {
        Self {
            labels: seed_labels,
            ..Default::default()
        }
    }

    /// Rebuilds a store by applying `log` in order. `accepts` performs the
    /// cluster-level checks; a failure reports the offending log index.
    pub fn replay(
        seed_labels: LabelSet,
        log: &[AnnotationRecord],
        accepts: impl Fn(usize, Question) -> Result<(), StoreError>,
    ) -> Result<Self, (usize, StoreError)> {
        let mut store = Self::new(seed_labels);
        for (i, r) in log.iter().enumerate() {
            accepts(r.cluster_id, r.question).map_err(|e| (i, e))?;
            store.apply(r.clone()).map_err(|e| (i, e))?;
        }
        Ok(store)
    }

    pub fn log(&self) -> &[AnnotationRecord] {
        &self.log
    }

    pub fn labels(&self) -> &LabelSet {
        &self.labels
    }

    /// Log index of the effective record for a key.
    pub fn current(&self, key: &RecordKey) -> Option<usize> {
        self.current.get(key).copied()
    }

    /// Annotators with an effective answer to `question` on `cluster`.
    pub fn annotators_of(&self, cluster: usize, question: Question) -> Vec<String> {
        self.current
            .keys()
            .filter(|k| k.cluster_id == cluster && k.question == question)
            .map(|k| k.annotator_id.clone())
            .collect()
    }

    /// Record-level validation, independent of cluster data.
    pub fn check(&self, r: &AnnotationRecord) -> Result<(), StoreError> {
        if r.annotator_id.trim().is_empty() {
            return Err(StoreError::InvalidRecord("annotator_id is empty".into()));
        }
        match (r.answer, r.labels.is_empty()) {
            (Answer::Yes, true) => {
                return Err(StoreError::InvalidRecord("a yes answer needs at least one label".into()))
            }
            (Answer::No | Answer::Unsure, false) => {
                return Err(StoreError::InvalidRecord(format!(
                    "labels are only allowed on yes answers, got {}",
                    r.answer.as_str()
                )))
            }
            _ => {}
        }
        let key = RecordKey::of(r);
        let existing = self.current(&key);
        match (r.supersedes, existing) {
            (None, None) => Ok(()),
            (None, Some(existing)) => Err(StoreError::Duplicate {
                cluster: r.cluster_id,
                annotator: r.annotator_id.clone(),
                question: r.question,
                existing,
            }),
            (Some(target), Some(existing)) if target == existing => Ok(()),
            (Some(target), _) => match self.log.get(target) {
                Some(old) if RecordKey::of(old) == key => Err(StoreError::Stale(target)),
                _ => Err(StoreError::InvalidRecord(format!(
                    "record {target} is not a record of this annotator, cluster and question"
                ))),
            },
        }
    }

    /// Validates and appends; returns the new record's log index.
    pub fn apply(&mut self, r: AnnotationRecord) -> Result<usize, StoreError> {
        self.check(&r)?;
        let id = self.log.len();
        if r.answer == Answer::Yes {
            for l in &r.labels {
                self.labels.insert(l.clone());
                self.labels.record_use(l);
            }
        }
        self.current.insert(RecordKey::of(&r), id);
        self.log.push(r);
        Ok(id)
    }
}

/// Appends records to the JSON-lines log, flushing after each one.
#[derive(Debug)]
pub struct LogAppender {
    path: PathBuf,
    out: BufWriter<File>,
}

impl LogAppender {
    pub fn open(path: &Path) -> Result<Self, crate::ServiceError> {
        let file = OpenOptions::new()
            .create(true)
            .append(true)
            .open(path)
            .map_err(|e| crate::ServiceError::Io(format!("{}: {e}", path.display())))?;
        Ok(Self {
            path: path.to_path_buf(),
            out: BufWriter::new(file),
        })
    }

    pub fn append(&mut self, record: &AnnotationRecord) -> Result<(), crate::ServiceError> {
        let io = |e: std::io::Error| crate::ServiceError::Io(format!("{}: {e}", self.path.display()));
        let line = serde_json::to_string(record).expect("records serialize");
        writeln!(self.out, "{line}").map_err(io)?;
        self.out.flush().map_err(io)
    }
}
