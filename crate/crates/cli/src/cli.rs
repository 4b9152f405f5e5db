use std::net::SocketAddr;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

/// Latent concept discovery over layer-wise token embeddings.
///
/// Every flag can also be set through an environment variable named
/// `LATENT_<FLAG>` (upper case, dashes as underscores), e.g. `LATENT_K=500`.
#[derive(Debug, Parser)]
#[command(name = "latent-concepts", version, propagate_version = true)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Select token occurrences and subset per-layer embeddings to them.
    Prepare(PrepareArgs),
    /// Ward-cluster one layer's embeddings and cut the tree at K.
    Cluster(ClusterArgs),
    /// Per-cluster type counts, flags and best shared character n-gram.
    Summarize(SummarizeArgs),
    /// Align clusters with tag schemes at threshold theta.
    Align(AlignArgs),
    /// Combine per-layer alignment results into one CSV.
    Report(ReportArgs),
    /// Inter-annotator agreement over an annotation log.
    Agreement(AgreementArgs),
    /// Train a cluster classifier on a train/held-out split.
    BcnTrain(BcnTrainArgs),
    /// Precision and coverage of a classifier on the held-out split.
    BcnEval(BcnEvalArgs),
    /// Assign new occurrences to labelled clusters above a confidence threshold.
    BcnApply(BcnApplyArgs),
    /// Token and type counts per label of a concept dataset.
    BcnStats(BcnStatsArgs),
    /// Run the annotation HTTP service.
    Serve(ServeArgs),
    /// Generate synthetic inputs for trying the pipeline.
    #[command(subcommand)]
    Synth(SynthCommand),
}

#[derive(Debug, Args)]
pub struct OutArg {
    /// Output directory (created if missing).
    #[arg(long, env = "LATENT_OUT")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct PrepareArgs {
    #[arg(long, env = "LATENT_CORPUS")]
    pub corpus: PathBuf,
    /// Occurrence sidecar listing every embedded token; defaults to all corpus tokens.
    #[arg(long, env = "LATENT_OCCURRENCES")]
    pub occurrences: Option<PathBuf>,
    /// LCE files whose rows follow the occurrence sidecar; one per layer.
    #[arg(long, env = "LATENT_EMBEDDINGS", value_delimiter = ',')]
    pub embeddings: Vec<PathBuf>,
    #[arg(long, env = "LATENT_MIN_FREQUENCY", default_value_t = 2)]
    pub min_frequency: usize,
    #[arg(long, env = "LATENT_MAX_PER_TYPE", default_value_t = 10)]
    pub max_per_type: usize,
    /// Drop types above the cap instead of sampling them down.
    #[arg(long, env = "LATENT_DROP_OVER_CAP")]
    pub drop_over_cap: bool,
    /// Closed-class word list (one per line); defaults to the bundled English list.
    #[arg(long, env = "LATENT_CLOSED_CLASS", conflicts_with = "no_closed_class")]
    pub closed_class: Option<PathBuf>,
    #[arg(long, env = "LATENT_NO_CLOSED_CLASS")]
    pub no_closed_class: bool,
    #[arg(long, env = "LATENT_SEED", default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub out: OutArg,
}

#[derive(Debug, Args)]
pub struct ClusterArgs {
    #[arg(long, env = "LATENT_EMBEDDINGS")]
    pub embeddings: PathBuf,
    /// Checked against the embedding rows when given.
    #[arg(long, env = "LATENT_OCCURRENCES")]
    pub occurrences: Option<PathBuf>,
    /// Expected layer; must match the file header when given.
    #[arg(long, env = "LATENT_LAYER")]
    pub layer: Option<u32>,
    #[arg(long, env = "LATENT_K", default_value_t = 1000)]
    pub k: usize,
    /// Also write the within-cluster SSE for these K values.
    #[arg(long, env = "LATENT_WCSS_K", value_delimiter = ',')]
    pub wcss_k: Vec<usize>,
    #[command(flatten)]
    pub out: OutArg,
}

#[derive(Debug, Args)]
pub struct SummarizeArgs {
    #[arg(long, env = "LATENT_CUT")]
    pub cut: PathBuf,
    #[arg(long, env = "LATENT_OCCURRENCES")]
    pub occurrences: PathBuf,
    #[arg(long, env = "LATENT_NGRAM_MIN", default_value_t = 2)]
    pub ngram_min: usize,
    #[arg(long, env = "LATENT_NGRAM_MAX", default_value_t = 6)]
    pub ngram_max: usize,
    #[command(flatten)]
    pub out: OutArg,
}

#[derive(Debug, Args)]
pub struct AlignArgs {
    #[arg(long, env = "LATENT_CUT")]
    pub cut: PathBuf,
    #[arg(long, env = "LATENT_OCCURRENCES")]
    pub occurrences: PathBuf,
    /// Needed for the built-in Position scheme.
    #[arg(long, env = "LATENT_CORPUS")]
    pub corpus: Option<PathBuf>,
    /// Layer the cut was computed on; labels the report rows.
    #[arg(long, env = "LATENT_LAYER")]
    pub layer: u32,
    /// Occurrence-level scheme file as NAME=PATH (repeatable).
    #[arg(long = "scheme", env = "LATENT_SCHEME", value_delimiter = ',')]
    pub schemes: Vec<String>,
    /// Type-level lexicon as NAME=PATH (repeatable).
    #[arg(long = "type-scheme", env = "LATENT_TYPE_SCHEME", value_delimiter = ',')]
    pub type_schemes: Vec<String>,
    /// Add a coarsened copy NAME-coarse of these schemes.
    #[arg(long, env = "LATENT_COARSEN", value_delimiter = ',')]
    pub coarsen: Vec<String>,
    /// `PATTERN COARSE` mapping for --coarsen; defaults to the bundled POS mapping.
    #[arg(long, env = "LATENT_TAG_MAP")]
    pub tag_map: Option<PathBuf>,
    /// Skip the built-in Casing, Position, Affix and Ngram schemes.
    #[arg(long, env = "LATENT_NO_BUILTIN")]
    pub no_builtin: bool,
    #[arg(long, env = "LATENT_THETA", default_value_t = 0.9)]
    pub theta: f64,
    #[command(flatten)]
    pub out: OutArg,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    /// alignment.json files, one per layer.
    #[arg(long, env = "LATENT_ALIGNMENT", value_delimiter = ',', required = true)]
    pub alignment: Vec<PathBuf>,
    #[command(flatten)]
    pub out: OutArg,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum QuestionArg {
    Q1,
    Q2,
}

#[derive(Debug, Args)]
pub struct AgreementArgs {
    #[arg(long, env = "LATENT_LOG")]
    pub log: PathBuf,
    /// Restrict to one question; both by default.
    #[arg(long, env = "LATENT_QUESTION", value_enum)]
    pub question: Option<QuestionArg>,
    /// Annotator to pair every other annotator with.
    #[arg(long, env = "LATENT_REFERENCE", default_value = "consolidation")]
    pub reference: String,
    #[command(flatten)]
    pub out: OutArg,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Method {
    /// Multinomial logistic regression.
    Softmax,
    /// Nearest centroid with softmax confidences.
    Centroid,
}

#[derive(Debug, Args)]
pub struct BcnTrainArgs {
    #[arg(long, env = "LATENT_EMBEDDINGS")]
    pub embeddings: PathBuf,
    #[arg(long, env = "LATENT_CUT")]
    pub cut: PathBuf,
    #[arg(long, env = "LATENT_LAYER")]
    pub layer: Option<u32>,
    #[arg(long, env = "LATENT_METHOD", value_enum, default_value_t = Method::Softmax)]
    pub method: Method,
    #[arg(long, env = "LATENT_HOLDOUT", default_value_t = 0.1)]
    pub holdout: f64,
    /// Hold out whole clusters instead of occurrences within each cluster.
    #[arg(long, env = "LATENT_SPLIT_BY_CLUSTER")]
    pub split_by_cluster: bool,
    #[arg(long, env = "LATENT_LAMBDA", default_value_t = 1e-4)]
    pub lambda: f64,
    #[arg(long, env = "LATENT_MAX_ITERS", default_value_t = 1000)]
    pub max_iters: usize,
    #[arg(long, env = "LATENT_TOLERANCE", default_value_t = 1e-6)]
    pub tolerance: f64,
    #[arg(long, env = "LATENT_SEED", default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub out: OutArg,
}

#[derive(Debug, Args)]
pub struct BcnEvalArgs {
    #[arg(long, env = "LATENT_MODEL")]
    pub model: PathBuf,
    #[arg(long, env = "LATENT_EMBEDDINGS")]
    pub embeddings: PathBuf,
    #[arg(long, env = "LATENT_CUT")]
    pub cut: PathBuf,
    /// split.json written by bcn-train.
    #[arg(long, env = "LATENT_SPLIT")]
    pub split: PathBuf,
    #[arg(long, env = "LATENT_THRESHOLD", default_value_t = 0.97)]
    pub threshold: f64,
    /// Additional thresholds for the coverage curve.
    #[arg(long, env = "LATENT_THRESHOLDS", value_delimiter = ',', default_value = "0,0.5,0.9,0.97,0.99")]
    pub thresholds: Vec<f64>,
    #[command(flatten)]
    pub out: OutArg,
}

#[derive(Debug, Args)]
pub struct BcnApplyArgs {
    #[arg(long, env = "LATENT_MODEL")]
    pub model: PathBuf,
    #[arg(long, env = "LATENT_EMBEDDINGS")]
    pub embeddings: PathBuf,
    /// Occurrences behind the embedding rows.
    #[arg(long, env = "LATENT_OCCURRENCES")]
    pub occurrences: PathBuf,
    /// Cluster labels as JSON lines `{"cluster_id", "labels"}`.
    #[arg(long, env = "LATENT_LABELS", required_unless_present = "annotations", conflicts_with = "annotations")]
    pub labels: Option<PathBuf>,
    /// Derive cluster labels from an annotation log instead.
    #[arg(long, env = "LATENT_ANNOTATIONS")]
    pub annotations: Option<PathBuf>,
    #[arg(long, env = "LATENT_THRESHOLD", default_value_t = 0.97)]
    pub threshold: f64,
    #[command(flatten)]
    pub out: OutArg,
}

#[derive(Debug, Args)]
pub struct BcnStatsArgs {
    #[arg(long, env = "LATENT_BCN")]
    pub bcn: PathBuf,
    #[command(flatten)]
    pub out: OutArg,
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    #[arg(long, env = "LATENT_LISTEN", default_value = "127.0.0.1:8080")]
    pub listen: SocketAddr,
    /// Holds the annotation log; also the default location of the inputs.
    #[arg(long, env = "LATENT_DATA_DIR")]
    pub data_dir: PathBuf,
    #[arg(long, env = "LATENT_CORPUS")]
    pub corpus: Option<PathBuf>,
    #[arg(long, env = "LATENT_OCCURRENCES")]
    pub occurrences: Option<PathBuf>,
    #[arg(long, env = "LATENT_CUT")]
    pub cut: Option<PathBuf>,
    #[arg(long, env = "LATENT_DENDROGRAM")]
    pub dendrogram: Option<PathBuf>,
    #[arg(long, env = "LATENT_SEED_LABELS")]
    pub seed_labels: Option<PathBuf>,
    #[arg(long, env = "LATENT_CONTEXT_CAP", default_value_t = 50)]
    pub context_cap: usize,
    #[arg(long, env = "LATENT_SEED", default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Subcommand)]
pub enum SynthCommand {
    /// Templated corpus, token sidecar, per-layer embeddings and tag lexicons.
    Data(SynthDataArgs),
    /// Simulated Q1 annotations for a cut of synthetic data.
    Annotations(SynthAnnotationsArgs),
}

#[derive(Debug, Args)]
pub struct SynthDataArgs {
    #[arg(long, env = "LATENT_SENTENCES", default_value_t = 200)]
    pub sentences: usize,
    #[arg(long, env = "LATENT_LAYERS", value_delimiter = ',', default_value = "1,2")]
    pub layers: Vec<u32>,
    #[arg(long, env = "LATENT_DIM", default_value_t = 16)]
    pub dim: usize,
    #[arg(long, env = "LATENT_SEED", default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub out: OutArg,
}

#[derive(Debug, Args)]
pub struct SynthAnnotationsArgs {
    #[arg(long, env = "LATENT_CUT")]
    pub cut: PathBuf,
    #[arg(long, env = "LATENT_OCCURRENCES")]
    pub occurrences: PathBuf,
    #[arg(long, env = "LATENT_ANNOTATORS", default_value_t = 3)]
    pub annotators: usize,
    /// Probability that an annotator flips the true answer.
    #[arg(long, env = "LATENT_NOISE", default_value_t = 0.1)]
    pub noise: f64,
    #[arg(long, env = "LATENT_SEED", default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub out: OutArg,
}
