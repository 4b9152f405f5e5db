//! Exact Ward agglomerative clustering and everything derived from the
//! resulting merge tree.
//!
//! Merge heights are increases in total within-cluster sum of squares
//! (centroid form `|A||B| / (|A| + |B|) * ||mu_A - mu_B||^2`), not their
//! square roots. The sum of all heights is the global SSE of the data.

mod cut;
mod dendrogram;
mod nnchain;
mod summary;
mod wcss;

pub use cut::{load_cut, siblings, write_cut, ClusterCut};
pub use dendrogram::{Dendrogram, MergeNode};
pub use nnchain::{build_dendrogram, ward_cost};
pub use summary::{summarize, ClusterSummary, OVER_CLUSTERED_TYPES, UNDER_CLUSTERED_SIZE};
pub use wcss::{global_sse, wcss_sweep};
