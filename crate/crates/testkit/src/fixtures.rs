use std::collections::{BTreeMap, BTreeSet};

use latent_concepts::align::{Granularity, TagScheme};
use latent_concepts::cluster::ClusterCut;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Per-scheme cluster counts planted in [`planted_alignment`].
pub const PLANTED_COUNTS: &[(&str, usize)] = &[
    ("Ngram", 20),
    ("Suffix", 5),
    ("Casing", 229),
    ("POS", 297),
    ("SEM", 96),
    ("LIWC", 15),
    ("WordNet", 39),
    ("CCG", 87),
    ("Chunk", 63),
    ("FW", 35),
];

/// Extra clusters that are POS-pure only after coarsening (NN/NNS mixes and
/// the like).
pub const PLANTED_COARSE_ONLY: usize = 203;

pub const CLUSTER_SIZE: usize = 10;
pub const N_CLUSTERS: usize = 1000;

const FINE_POS: &[&str] = &["NN", "NNS", "NNP", "VB", "VBD", "JJ", "JJS", "RB", "IN", "CD"];
const COARSE_PAIRS: &[(&str, &str)] = &[("NN", "NNS"), ("VB", "VBD"), ("JJ", "JJS")];
const MIXED_POS: &[&str] = &["NN", "VB", "JJ", "RB", "IN"];

pub struct PlantedAlignment {
    pub cut: ClusterCut,
    pub schemes: Vec<TagScheme>,
    /// Clusters planted as pure per scheme.
    pub pure: BTreeMap<String, BTreeSet<usize>>,
}

fn vocabulary(scheme: &str) -> Vec<String> {
    if scheme == "POS" {
        return FINE_POS.iter().map(|s| s.to_string()).collect();
    }
    (0..12).map(|i| format!("{scheme}-{i}")).collect()
}

/// 1000 clusters of 10 occurrences. For each scheme the planted clusters
/// have 9 or 10 members sharing one tag; every other cluster spreads five
/// tags two apiece, so no tag reaches 9 of 10.
pub fn planted_alignment(seed: u64) -> PlantedAlignment {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = N_CLUSTERS * CLUSTER_SIZE;
    let assignment: Vec<usize> = (0..n).map(|i| i / CLUSTER_SIZE).collect();
    let cut = ClusterCut::from_assignment(assignment).unwrap();
    let mut schemes = Vec::new();
    let mut pure = BTreeMap::new();
    for &(name, count) in PLANTED_COUNTS {
        let vocab = vocabulary(name);
        let mut order: Vec<usize> = (0..N_CLUSTERS).collect();
        order.shuffle(&mut rng);
        let planted: BTreeSet<usize> = order[..count].iter().copied().collect();
        let coarse_only: BTreeSet<usize> = if name == "POS" {
            order[count..count + PLANTED_COARSE_ONLY].iter().copied().collect()
        } else {
            BTreeSet::new()
        };
        let mut tags = vec![BTreeSet::new(); n];
        for c in 0..N_CLUSTERS {
            let mut cluster_tags: Vec<String> = if planted.contains(&c) {
                let main = vocab.choose(&mut rng).unwrap().clone();
                let agree = if rng.gen_bool(0.5) { CLUSTER_SIZE } else { CLUSTER_SIZE - 1 };
                let mut t = vec![main.clone(); agree];
                while t.len() < CLUSTER_SIZE {
                    let other = vocab.iter().filter(|v| **v != main).collect::<Vec<_>>();
                    t.push((*other.choose(&mut rng).unwrap()).clone());
                }
                t
            } else if coarse_only.contains(&c) {
                let (a, b) = COARSE_PAIRS.choose(&mut rng).unwrap();
                (0..CLUSTER_SIZE).map(|i| if i % 2 == 0 { a } else { b }.to_string()).collect()
            } else {
                let five: Vec<String> = if name == "POS" {
                    MIXED_POS.iter().map(|s| s.to_string()).collect()
                } else {
                    vocab.choose_multiple(&mut rng, 5).cloned().collect()
                };
                (0..CLUSTER_SIZE).map(|i| five[i % 5].clone()).collect()
            };
            cluster_tags.shuffle(&mut rng);
            for (i, t) in cluster_tags.into_iter().enumerate() {
                tags[c * CLUSTER_SIZE + i].insert(t);
            }
        }
        schemes.push(TagScheme::new(name, Granularity::Occurrence, tags).unwrap());
        pure.insert(name.to_string(), planted);
    }
    PlantedAlignment { cut, schemes, pure }
}

/// A random cut over `n` occurrences plus one occurrence scheme whose tags
/// are drawn from a small vocabulary with a skew, so that some clusters come
/// close to the threshold.
pub fn random_alignment(seed: u64) -> (ClusterCut, TagScheme) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let k = rng.gen_range(1..=20);
    let n = rng.gen_range(k..=k * 15);
    let mut assignment: Vec<usize> = (0..k).collect();
    assignment.extend((k..n).map(|_| rng.gen_range(0..k)));
    assignment.shuffle(&mut rng);
    let cut = ClusterCut::from_assignment(assignment.clone()).unwrap();
    let bias: Vec<f64> = (0..k).map(|_| rng.gen_range(0.3..1.0)).collect();
    let tags = assignment
        .iter()
        .map(|&c| {
            let mut set = BTreeSet::new();
            let tag = if rng.gen_bool(bias[c]) { 0 } else { rng.gen_range(1..4) };
            set.insert(format!("T{tag}"));
            if rng.gen_bool(0.1) {
                set.insert(format!("T{}", rng.gen_range(0..4)));
            }
            set
        })
        .collect();
    (cut, TagScheme::new("R", Granularity::Occurrence, tags).unwrap())
}
