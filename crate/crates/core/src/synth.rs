//! Deterministic synthetic data: Gaussian blobs, a small templated corpus
//! with a hidden word-class structure, matching toy embeddings and
//! simulated annotations.

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::agreement::{Answer, AnnotationRecord, Question, CONSOLIDATION};
use crate::cluster::ClusterCut;
use crate::error::Result;
use crate::repr::{Corpus, CorpusSentence, LayerEmbeddings, TokenOccurrence};
use crate::taxonomy::ConceptLabel;

fn normal(rng: &mut impl Rng) -> f64 {
    rng.sample(StandardNormal)
}

/// `n_clusters` isotropic blobs of `per_cluster` points. Centres are drawn
/// with standard deviation `spread`, points around them with `noise`.
/// Returns the points and their blob index.
pub fn gaussian_blobs(
    n_clusters: usize,
    per_cluster: usize,
    dim: usize,
    spread: f64,
    noise: f64,
    seed: u64,
) -> (LayerEmbeddings, Vec<usize>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let centres: Vec<Vec<f64>> = (0..n_clusters)
        .map(|_| (0..dim).map(|_| spread * normal(&mut rng)).collect())
        .collect();
    let mut data = Vec::with_capacity(n_clusters * per_cluster * dim);
    let mut truth = Vec::with_capacity(n_clusters * per_cluster);
    for (c, centre) in centres.iter().enumerate() {
        for _ in 0..per_cluster {
            data.extend(centre.iter().map(|&m| (m + noise * normal(&mut rng)) as f32));
            truth.push(c);
        }
    }
    let emb = LayerEmbeddings::new(0, truth.len(), dim, data).expect("finite samples");
    (emb, truth)
}

/// Uniform random points in the unit cube.
pub fn uniform_points(n: usize, dim: usize, seed: u64) -> LayerEmbeddings {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let data = (0..n * dim).map(|_| rng.gen::<f32>()).collect();
    LayerEmbeddings::new(0, n, dim, data).expect("finite samples")
}

/// Word classes of the toy vocabulary: (group, POS tag, words).
pub const TOY_VOCABULARY: &[(&str, &str, &[&str])] = &[
    ("animal", "NN", &["dog", "horse", "salmon", "trout", "eagle", "tiger", "wolf", "sparrow", "otter", "badger", "camel", "lizard", "falcon", "goat"]),
    ("country", "NNP", &["Germany", "France", "Spain", "Japan", "Brazil", "Canada", "Kenya", "Norway", "Chile", "Egypt", "India", "Peru", "Greece", "Poland"]),
    ("number", "CD", &["12", "45", "78", "2019", "310", "64", "5", "900", "17", "23", "1500", "88", "3", "41"]),
    ("action", "VBD", &["visited", "praised", "ignored", "studied", "painted", "watched", "helped", "followed", "greeted", "trained", "chased", "fed", "carried", "found"]),
    ("superlative", "JJS", &["strongest", "fastest", "largest", "smallest", "oldest", "bravest", "calmest", "tallest", "wisest", "youngest"]),
    ("manner", "RB", &["quickly", "slowly", "quietly", "openly", "rarely", "gladly", "calmly", "boldly", "loudly", "gently"]),
    ("day", "NNP", &["Monday", "Tuesday", "Wednesday", "Thursday", "Friday", "Saturday", "Sunday"]),
    ("profession", "NN", &["doctor", "teacher", "lawyer", "farmer", "pilot", "nurse", "baker", "judge", "miner", "sailor", "dentist", "chef", "poet", "clerk"]),
    ("colour", "JJ", &["red", "green", "blue", "yellow", "purple", "orange", "grey", "brown", "white", "black"]),
    ("city", "NNP", &["Paris", "Berlin", "Madrid", "Tokyo", "Lima", "Cairo", "Oslo", "Athens", "Warsaw", "Nairobi", "Delhi", "Toronto"]),
];

const TEMPLATES: &[&[&str]] = &[
    &["The", "profession", "action", "the", "colour", "animal", "in", "city", ",", "country", "."],
    &["On", "day", "the", "superlative", "animal", "action", "number", "colour", "birds", "manner", "."],
    &["country", "action", "the", "profession", "manner", "on", "day", "near", "city", "."],
    &["A", "profession", "from", "city", "manner", "action", "number", "colour", "animal", "on", "day", "."],
    &["day", "was", "the", "superlative", "day", "for", "the", "profession", "in", "country", "."],
    &["In", "city", "the", "profession", "action", "the", "superlative", "animal", "manner", "."],
];

fn group_words(group: &str) -> &'static [&'static str] {
    TOY_VOCABULARY.iter().find(|(g, _, _)| *g == group).map(|(_, _, w)| *w).unwrap_or(&[])
}

/// `n_sentences` templated sentences. Slots name a vocabulary group; other
/// template tokens are literal.
pub fn toy_corpus(n_sentences: usize, seed: u64) -> Corpus {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sentences = (0..n_sentences)
        .map(|sentence_id| {
            let template = TEMPLATES.choose(&mut rng).unwrap();
            let tokens: Vec<String> = template
                .iter()
                .map(|slot| match group_words(slot) {
                    [] => slot.to_string(),
                    words => words.choose(&mut rng).unwrap().to_string(),
                })
                .collect();
            CorpusSentence {
                sentence_id,
                text: tokens.join(" "),
                tokens,
            }
        })
        .collect();
    Corpus::new(sentences).expect("generated ids are contiguous")
}

/// Group of a toy vocabulary word.
pub fn toy_group(token: &str) -> Option<&'static str> {
    TOY_VOCABULARY
        .iter()
        .find(|(_, _, words)| words.contains(&token))
        .map(|(g, _, _)| *g)
}

/// Type-level POS lexicon for the toy vocabulary, one `(token, tag)` pair.
pub fn toy_pos_lexicon() -> Vec<(&'static str, &'static str)> {
    TOY_VOCABULARY
        .iter()
        .flat_map(|(_, tag, words)| words.iter().map(move |w| (*w, *tag)))
        .collect()
}

/// Per-layer embeddings for toy occurrences: group centre + type offset +
/// context noise, with the group component dominating at higher layers.
/// Identical `(occurrences, layer, dim, seed)` give identical bytes.
pub fn toy_embeddings(occurrences: &[TokenOccurrence], layer: u32, dim: usize, seed: u64) -> Result<LayerEmbeddings> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut group_centre: BTreeMap<&str, Vec<f64>> = BTreeMap::new();
    for (g, _, _) in TOY_VOCABULARY {
        group_centre.insert(g, (0..dim).map(|_| 6.0 * normal(&mut rng)).collect());
    }
    let unknown: Vec<f64> = (0..dim).map(|_| 6.0 * normal(&mut rng)).collect();
    let types: BTreeSet<&str> = occurrences.iter().map(|o| o.token_type.as_str()).collect();
    let mut type_offset: BTreeMap<&str, Vec<f64>> = BTreeMap::new();
    for t in types {
        type_offset.insert(t, (0..dim).map(|_| normal(&mut rng)).collect());
    }
    let group_weight = 0.5 + 0.5 * f64::from(layer.min(2)) / 2.0;
    let type_weight = 2.0 - group_weight;
    let mut occ_rng = ChaCha8Rng::seed_from_u64(seed ^ (u64::from(layer) << 32) ^ 0x9e37_79b9);
    let mut data = Vec::with_capacity(occurrences.len() * dim);
    for o in occurrences {
        let centre = toy_group(&o.token_type)
            .map(|g| &group_centre[g])
            .unwrap_or(&unknown);
        let offset = &type_offset[o.token_type.as_str()];
        for j in 0..dim {
            let v = group_weight * centre[j] + type_weight * offset[j] + 0.3 * normal(&mut occ_rng);
            data.push(v as f32);
        }
    }
    LayerEmbeddings::new(layer, occurrences.len(), dim, data)
}

/// Simulated Q1 annotations for a toy cut. A cluster is meaningful when at
/// least 80% of its occurrences share one vocabulary group; then the label
/// is `SEM:<group>`. Each annotator's answer is flipped with probability
/// `noise`; the consolidation records the noiseless answer.
pub fn toy_annotations(
    cut: &ClusterCut,
    occurrences: &[TokenOccurrence],
    annotators: usize,
    noise: f64,
    seed: u64,
) -> Vec<AnnotationRecord> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut log = Vec::new();
    for (cluster_id, members) in cut.clusters() {
        let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
        for &m in members {
            *counts.entry(toy_group(&occurrences[m].token_type).unwrap_or("other")).or_insert(0) += 1;
        }
        let (group, top) = counts.iter().max_by_key(|(_, &c)| c).map(|(g, c)| (*g, *c)).unwrap();
        let truth = 5 * top >= 4 * members.len() && group != "other";
        let label = ConceptLabel::parse(&format!("SEM:{group}")).expect("group names are valid segments");
        let record = |who: String, yes: bool| AnnotationRecord {
            cluster_id,
            annotator_id: who,
            question: Question::Q1,
            answer: if yes { Answer::Yes } else { Answer::No },
            labels: if yes { vec![label.clone()] } else { vec![] },
            timestamp: None,
            supersedes: None,
        };
        for a in 0..annotators {
            let flip = rng.gen::<f64>() < noise;
            log.push(record(format!("A{}", a + 1), truth != flip));
        }
        log.push(record(CONSOLIDATION.to_string(), truth));
    }
    log
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::repr::{select_occurrences, SelectionPolicy};

    #[test]
    fn toy_pipeline_inputs_are_deterministic() {
        let c = toy_corpus(200, 1);
        assert_eq!(c, toy_corpus(200, 1));
        assert_eq!(c.len(), 200);
        let occ = select_occurrences(&c, &SelectionPolicy::default().with_default_closed_class()).unwrap();
        assert!(occ.len() >= 1000, "{}", occ.len());
        let a = toy_embeddings(&occ, 1, 8, 3).unwrap();
        assert_eq!(a, toy_embeddings(&occ, 1, 8, 3).unwrap());
        assert_ne!(a.data(), toy_embeddings(&occ, 2, 8, 3).unwrap().data());
    }

    #[test]
    fn blobs_shape() {
        let (e, truth) = gaussian_blobs(3, 4, 2, 10.0, 0.1, 0);
        assert_eq!((e.n_rows(), e.dim()), (12, 2));
        assert_eq!(truth, vec![0, 0, 0, 0, 1, 1, 1, 1, 2, 2, 2, 2]);
    }
}
