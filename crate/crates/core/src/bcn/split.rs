use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::TrainConfig;
use crate::align::required_count;
use crate::cluster::ClusterCut;
use crate::error::{Error, Result};

/// Occurrence ids on each side of a train/held-out split, ascending.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Split {
    pub train: Vec<usize>,
    pub heldout: Vec<usize>,
}

/// Holds out `ceil(fraction * n)` occurrences of every cluster with at least
/// two members, never the whole cluster. Singletons go to train.
pub fn split_held_out(cut: &ClusterCut, cfg: &TrainConfig) -> Result<Split> {
    cfg.validate()?;
    if cut.k() == 0 {
        return Err(Error::Invalid("cannot split an empty cut".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut train = Vec::new();
    let mut heldout = Vec::new();
    for (_, members) in cut.clusters() {
        let n = members.len();
        if n < 2 {
            train.extend_from_slice(members);
            continue;
        }
        let h = required_count(cfg.holdout_fraction, n).min(n - 1);
        let mut take = vec![false; n];
        for i in index::sample(&mut rng, n, h) {
            take[i] = true;
        }
        for (i, &occ) in members.iter().enumerate() {
            if take[i] {
                heldout.push(occ);
            } else {
                train.push(occ);
            }
        }
    }
    train.sort_unstable();
    heldout.sort_unstable();
    Ok(Split { train, heldout })
}

/// Holds out `ceil(fraction * k)` whole clusters (at most `k - 2`, so that
/// at least two classes remain for training).
pub fn split_by_cluster(cut: &ClusterCut, cfg: &TrainConfig) -> Result<Split> {
    cfg.validate()?;
    let k = cut.k();
    if k < 3 {
        return Err(Error::Invalid(format!("whole-cluster split needs at least 3 clusters, got {k}")));
    }
    let h = required_count(cfg.holdout_fraction, k).min(k - 2);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut held = vec![false; k];
    for c in index::sample(&mut rng, k, h) {
        held[c] = true;
    }
    let (mut train, mut heldout) = (Vec::new(), Vec::new());
    for (c, members) in cut.clusters() {
        if held[c] {
            heldout.extend_from_slice(members);
        } else {
            train.extend_from_slice(members);
        }
    }
    train.sort_unstable();
    heldout.sort_unstable();
    Ok(Split { train, heldout })
}
