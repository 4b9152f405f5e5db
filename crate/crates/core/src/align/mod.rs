//! Built-in lexical taggers, external tag schemes, and the cluster/tag
//! alignment rule.
//!
//! A cluster is aligned with a tag when at least `ceil(theta * n)` of its `n`
//! member occurrences carry that tag.

mod alignment;
mod ngram;
mod report;
mod scheme;
mod tagger;

pub use alignment::{align_all, required_count, AlignmentMatch, AlignmentResult, ClusterAlignment};
pub use ngram::{best_ngram, NgramRange};
pub use report::{LayerAlignmentReport, SchemeCurve};
pub use scheme::{coarsen_scheme, load_scheme, Granularity, TagMapping, TagScheme, DEFAULT_COARSE_POS};
pub use tagger::{casing_of, tag_affix, tag_casing, tag_ngrams, tag_position, AffixLists, Casing};
