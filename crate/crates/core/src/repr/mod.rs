//! Corpus loading, occurrence selection and per-layer embedding files.

mod corpus;
mod embeddings;
mod select;

pub use corpus::{load_corpus, Corpus, CorpusSentence};
pub use embeddings::{load_embeddings, read_lce, write_lce, LayerEmbeddings, LCE_HEADER_LEN, LCE_MAGIC};
pub use select::{
    all_occurrences, load_occurrences, select_from, select_occurrences, write_occurrences, OverCapMode,
    SelectionPolicy, TokenOccurrence, DEFAULT_CLOSED_CLASS,
};
