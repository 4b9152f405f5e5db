//! Discovery and analysis of latent concepts in layer-wise contextual
//! representations.
//!
//! The pipeline: select token occurrences from a corpus ([`repr`]), cluster
//! their embeddings with exact Ward linkage ([`cluster`]), label clusters
//! with hierarchical concept tags ([`taxonomy`]), compare them against
//! pre-defined tag schemes ([`align`]), measure annotator agreement
//! ([`agreement`]) and propagate labels to new tokens ([`bcn`]).

pub mod agreement;
pub mod align;
pub mod bcn;
pub mod cluster;
pub mod error;
pub mod jsonl;
pub mod repr;
pub mod synth;
pub mod taxonomy;

pub use error::{Error, Result};
