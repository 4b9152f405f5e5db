//! Label propagation: a multinomial logistic-regression classifier over
//! cluster ids, thresholded on its confidence, expands annotated clusters
//! to new token occurrences.

mod classifier;
mod dataset;
mod split;

pub use classifier::{
    evaluate_held_out, evaluate_grid, objective_and_gradient, predict_assign, train_classifier, Assignment,
    CentroidAssigner, ConceptClassifier, ConceptModel, ConceptPredictor, Evaluation, TrainConfig, TrainReport,
};
pub use dataset::{build_bcn, load_bcn, stats_from_entries, BcnEntry, BcnOutput, BcnStats, ClusterLabels};
pub use split::{split_by_cluster, split_held_out, Split};
