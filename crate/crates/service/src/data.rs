use std::collections::{BTreeMap, HashMap};

use latent_concepts::agreement::Question;
use latent_concepts::cluster::{load_cut, siblings, summarize, ClusterCut, ClusterSummary, Dendrogram};
use latent_concepts::repr::{load_corpus, load_occurrences, Corpus, TokenOccurrence};
use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::store::StoreError;
use crate::{ServiceConfig, ServiceError};

/// Read-only view of one clustering run.
#[derive(Debug, Clone)]
pub struct ClusterData {
    corpus: Corpus,
    occurrences: Vec<TokenOccurrence>,
    cut: ClusterCut,
    summaries: Vec<ClusterSummary>,
    sibling_of: HashMap<usize, usize>,
    context_cap: usize,
    seed: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Context {
    pub occ_id: usize,
    pub sentence_id: usize,
    /// Token index of the highlighted occurrence in `tokens`.
    pub position: usize,
    pub text: String,
    pub tokens: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClusterView {
    pub cluster_id: usize,
    pub size: usize,
    /// Token type to occurrence count.
    pub word_cloud: BTreeMap<String, usize>,
    pub contexts: Vec<Context>,
    pub sibling: Option<usize>,
    pub under_clustered: bool,
    pub over_clustered: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClusterIndexEntry {
    pub cluster_id: usize,
    pub size: usize,
    pub n_types: usize,
    pub under_clustered: bool,
    pub over_clustered: bool,
    pub sibling: Option<usize>,
    /// Annotators (consolidation included) with a Q1 answer.
    pub annotated_by: Vec<String>,
}

impl ClusterData {
    pub fn new(
        corpus: Corpus,
        occurrences: Vec<TokenOccurrence>,
        cut: ClusterCut,
        dendrogram: Option<&Dendrogram>,
        context_cap: usize,
        seed: u64,
    ) -> Result<Self, ServiceError> {
        let summaries = summarize(&cut, &occurrences)?;
        for o in &occurrences {
            let ok = corpus
                .sentence(o.sentence_id)
                .and_then(|s| s.tokens.get(o.position))
                .is_some_and(|t| *t == o.token_type);
            if !ok {
                return Err(ServiceError::Data(format!(
                    "occurrence {} does not match the corpus",
                    o.occ_id
                )));
            }
        }
        let mut sibling_of = HashMap::new();
        if let Some(d) = dendrogram {
            for (a, b) in siblings(d, &cut)? {
                sibling_of.insert(a, b);
                sibling_of.insert(b, a);
            }
        }
        Ok(Self {
            corpus,
            occurrences,
            cut,
            summaries,
            sibling_of,
            context_cap,
            seed,
        })
    }

    pub fn load(config: &ServiceConfig) -> Result<Self, ServiceError> {
        let corpus = load_corpus(&config.corpus)?;
        let occurrences = load_occurrences(&config.occurrences, Some(&corpus))?;
        let cut = load_cut(&config.cut)?;
        let dendrogram = config.dendrogram.as_deref().map(Dendrogram::load).transpose()?;
        Self::new(corpus, occurrences, cut, dendrogram.as_ref(), config.context_cap, config.seed)
    }

    pub fn n_clusters(&self) -> usize {
        self.cut.k()
    }

    pub fn sibling(&self, cluster: usize) -> Option<usize> {
        self.sibling_of.get(&cluster).copied()
    }

    pub fn summary(&self, cluster: usize) -> Option<&ClusterSummary> {
        self.summaries.get(cluster)
    }

    /// Whether a record for `cluster` and `question` may be stored.
    pub fn accepts(&self, cluster: usize, question: Question) -> Result<(), StoreError> {
        if cluster >= self.n_clusters() {
            return Err(StoreError::UnknownCluster(cluster));
        }
        if question == Question::Q2 && self.sibling(cluster).is_none() {
            return Err(StoreError::NoSibling(cluster));
        }
        Ok(())
    }

    /// Up to `context_cap` member sentences, sampled with a per-cluster seed
    /// and listed in occurrence order.
    pub fn view(&self, cluster: usize) -> Option<ClusterView> {
        let summary = self.summary(cluster)?;
        let members = self.cut.members(cluster);
        let take = members.len().min(self.context_cap);
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed ^ (cluster as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15));
        let mut picked = index::sample(&mut rng, members.len(), take).into_vec();
        picked.sort_unstable();
        let contexts = picked
            .into_iter()
            .map(|i| {
                let o = &self.occurrences[members[i]];
                let s = self.corpus.sentence(o.sentence_id).expect("checked at load");
                Context {
                    occ_id: o.occ_id,
                    sentence_id: o.sentence_id,
                    position: o.position,
                    text: s.text.clone(),
                    tokens: s.tokens.clone(),
                }
            })
            .collect();
        Some(ClusterView {
            cluster_id: cluster,
            size: summary.n_occurrences,
            word_cloud: summary.type_counts.clone(),
            contexts,
            sibling: self.sibling(cluster),
            under_clustered: summary.under_clustered,
            over_clustered: summary.over_clustered,
        })
    }

    pub fn index_entry(&self, cluster: usize, annotated_by: Vec<String>) -> Option<ClusterIndexEntry> {
        let s = self.summary(cluster)?;
        Some(ClusterIndexEntry {
            cluster_id: cluster,
            size: s.n_occurrences,
            n_types: s.n_types,
            under_clustered: s.under_clustered,
            over_clustered: s.over_clustered,
            sibling: self.sibling(cluster),
            annotated_by,
        })
    }
}
