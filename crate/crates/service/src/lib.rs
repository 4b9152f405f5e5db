//! Annotation service: serves cluster views built from a clustering run and
//! records Q1/Q2 answers in an append-only JSON-lines log.

mod data;
mod error;
mod routes;
mod store;

use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::{Arc, Mutex, RwLock};

pub use data::{ClusterData, ClusterIndexEntry, ClusterView, Context};
pub use error::ServiceError;
pub use routes::router;
pub use store::{AnnotationStore, LogAppender, RecordKey, StoreError};

/// Default cap on sample contexts per cluster view.
pub const DEFAULT_CONTEXT_CAP: usize = 50;
/// File name of the annotation log inside the data directory.
pub const LOG_FILE: &str = "annotations.jsonl";

#[derive(Debug, Clone)]
pub struct ServiceConfig {
    pub listen: SocketAddr,
    pub data_dir: PathBuf,
    pub corpus: PathBuf,
    pub occurrences: PathBuf,
    pub cut: PathBuf,
    /// Without a dendrogram no cluster has a sibling, so Q2 is unavailable.
    pub dendrogram: Option<PathBuf>,
    pub seed_labels: Option<PathBuf>,
    pub context_cap: usize,
    pub seed: u64,
}

impl ServiceConfig {
    /// Inputs at their conventional names inside `data_dir`. The dendrogram
    /// is used only if present.
    pub fn in_dir(data_dir: impl Into<PathBuf>) -> Self {
        let data_dir = data_dir.into();
        let dendrogram = data_dir.join("dendrogram.json");
        Self {
            listen: SocketAddr::from(([127, 0, 0, 1], 8080)),
            corpus: data_dir.join("corpus.jsonl"),
            occurrences: data_dir.join("occurrences.jsonl"),
            cut: data_dir.join("cut.jsonl"),
            dendrogram: dendrogram.exists().then_some(dendrogram),
            seed_labels: None,
            context_cap: DEFAULT_CONTEXT_CAP,
            seed: 0,
            data_dir,
        }
    }
}

pub struct AppState {
    pub data: ClusterData,
    pub store: RwLock<AnnotationStore>,
    appender: Mutex<LogAppender>,
}

impl AppState {
    pub fn new(data: ClusterData, store: AnnotationStore, appender: LogAppender) -> Self {
        Self {
            data,
            store: RwLock::new(store),
            appender: Mutex::new(appender),
        }
    }

    /// Loads the cluster data, then replays the existing log (if any) on top
    /// of the seed labels.
    pub fn open(config: &ServiceConfig) -> Result<Self, ServiceError> {
        let data = ClusterData::load(config)?;
        let seed = match &config.seed_labels {
            Some(p) => latent_concepts::taxonomy::LabelSet::load(p)?,
            None => Default::default(),
        };
        let log_path = config.data_dir.join(LOG_FILE);
        let store = if log_path.exists() {
            let log = latent_concepts::agreement::load_log(&log_path)?;
            AnnotationStore::replay(seed, &log, |c, q| data.accepts(c, q))
                .map_err(|(i, e)| ServiceError::Replay { index: i, source: e })?
        } else {
            AnnotationStore::new(seed)
        };
        let appender = LogAppender::open(&log_path)?;
        Ok(Self::new(data, store, appender))
    }
}

/// Binds `config.listen` and serves until the process is stopped.
pub async fn serve(config: ServiceConfig) -> Result<(), ServiceError> {
    let state = Arc::new(AppState::open(&config)?);
    let listener = tokio::net::TcpListener::bind(config.listen)
        .await
        .map_err(|e| ServiceError::Io(format!("bind {}: {e}", config.listen)))?;
    let addr = listener.local_addr().map_err(|e| ServiceError::Io(e.to_string()))?;
    eprintln!("annotation service listening on http://{addr}");
    axum::serve(listener, router(state))
        .await
        .map_err(|e| ServiceError::Io(e.to_string()))
}
