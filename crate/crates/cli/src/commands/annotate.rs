use std::collections::BTreeMap;

use serde::Serialize;

use latent_concepts::agreement::{
    against_reference, load_log, AgreementStats, AgreementTable, MeanAgreement, PairAgreement, Question,
};
use latent_concepts::cluster::load_cut;
use latent_concepts::jsonl;
use latent_concepts::repr::{all_occurrences, load_occurrences, write_lce, write_occurrences};
use latent_concepts::synth::{toy_annotations, toy_corpus, toy_embeddings, TOY_VOCABULARY};
use latent_concepts_service::ServiceConfig;

use crate::cli::{AgreementArgs, QuestionArg, ServeArgs, SynthAnnotationsArgs, SynthDataArgs};
use crate::error::{CliError, CliResult};
use crate::manifest::{ensure_dir, Recorder};

#[derive(Serialize)]
struct QuestionAgreement {
    /// All non-consolidation annotators together; `None` with fewer than two
    /// or no cluster answered by all of them.
    pooled: Option<AgreementStats>,
    pairs: Vec<PairAgreement>,
    average: Option<MeanAgreement>,
}

pub fn agreement(a: AgreementArgs) -> CliResult<()> {
    let out = &a.out.out;
    let mut rec = Recorder::new();
    let questions = match a.question {
        Some(QuestionArg::Q1) => vec![Question::Q1],
        Some(QuestionArg::Q2) => vec![Question::Q2],
        None => vec![Question::Q1, Question::Q2],
    };
    rec.config("questions", &questions).config("reference", &a.reference).input(&a.log);

    let log = load_log(&a.log)?;
    let mut report: BTreeMap<Question, QuestionAgreement> = BTreeMap::new();
    for &q in &questions {
        // With both questions requested, a question nobody answered is
        // reported as empty instead of failing the run.
        let strict = questions.len() == 1;
        let pooled = match AgreementTable::from_records(&log, q, None) {
            Ok(t) => Some(AgreementStats::compute(&t)),
            Err(e) if strict => return Err(e.into()),
            Err(_) => None,
        };
        let pairs = if log.iter().any(|r| r.question == q && r.annotator_id == a.reference) {
            against_reference(&log, q, &a.reference)?
        } else {
            Vec::new()
        };
        let average = MeanAgreement::of(&pairs);
        report.insert(q, QuestionAgreement { pooled, pairs, average });
    }
    ensure_dir(out)?;
    jsonl::write_json(&rec.output(out, "agreement.json"), &report)?;
    rec.finish(out, "agreement")?;
    Ok(())
}

pub fn serve(a: ServeArgs) -> CliResult<()> {
    let mut config = ServiceConfig::in_dir(&a.data_dir);
    config.listen = a.listen;
    config.context_cap = a.context_cap;
    config.seed = a.seed;
    config.seed_labels = a.seed_labels;
    if let Some(p) = a.corpus {
        config.corpus = p;
    }
    if let Some(p) = a.occurrences {
        config.occurrences = p;
    }
    if let Some(p) = a.cut {
        config.cut = p;
    }
    if a.dendrogram.is_some() {
        config.dendrogram = a.dendrogram;
    }
    let runtime = tokio::runtime::Runtime::new().map_err(|e| CliError::io(&a.data_dir, e))?;
    runtime.block_on(latent_concepts_service::serve(config))?;
    Ok(())
}

#[derive(Serialize)]
struct LexiconLine<'a> {
    token: &'a str,
    tags: [String; 1],
}

pub fn synth_data(a: SynthDataArgs) -> CliResult<()> {
    let out = &a.out.out;
    let mut rec = Recorder::new();
    rec.seed(a.seed)
        .config("sentences", a.sentences)
        .config("layers", &a.layers)
        .config("dim", a.dim);
    if a.sentences == 0 || a.dim == 0 {
        return Err(CliError::Usage("--sentences and --dim must be positive".into()));
    }
    let corpus = toy_corpus(a.sentences, a.seed);
    let occ = all_occurrences(&corpus);
    ensure_dir(out)?;
    corpus.write(&rec.output(out, "corpus.jsonl"))?;
    write_occurrences(&rec.output(out, "tokens.jsonl"), &occ)?;
    let mut layers = a.layers.clone();
    layers.sort_unstable();
    layers.dedup();
    for &layer in &layers {
        let emb = toy_embeddings(&occ, layer, a.dim, a.seed)?;
        write_lce(&rec.output(out, &format!("layer{layer}.lce")), &emb)?;
    }
    let lexicon = |tag: &dyn Fn(&str, &str) -> String| -> Vec<LexiconLine> {
        TOY_VOCABULARY
            .iter()
            .flat_map(|(group, pos, words)| {
                words.iter().map(move |w| LexiconLine {
                    token: w,
                    tags: [tag(group, pos)],
                })
            })
            .collect()
    };
    jsonl::write(&rec.output(out, "pos.jsonl"), &lexicon(&|_, pos| pos.to_string()))?;
    jsonl::write(&rec.output(out, "sem.jsonl"), &lexicon(&|group, _| group.to_string()))?;
    rec.finish(out, "synth-data")?;
    Ok(())
}

pub fn synth_annotations(a: SynthAnnotationsArgs) -> CliResult<()> {
    let out = &a.out.out;
    let mut rec = Recorder::new();
    rec.seed(a.seed)
        .config("annotators", a.annotators)
        .config("noise", a.noise)
        .input(&a.cut)
        .input(&a.occurrences);
    if !(0.0..=1.0).contains(&a.noise) {
        return Err(CliError::Usage(format!("--noise {} outside [0, 1]", a.noise)));
    }
    let cut = load_cut(&a.cut)?;
    let occ = load_occurrences(&a.occurrences, None)?;
    if occ.len() != cut.n_leaves() {
        return Err(latent_concepts::Error::SizeMismatch {
            expected: cut.n_leaves(),
            found: occ.len(),
        }
        .into());
    }
    let log = toy_annotations(&cut, &occ, a.annotators, a.noise, a.seed);
    ensure_dir(out)?;
    jsonl::write(&rec.output(out, "annotations.jsonl"), &log)?;
    rec.finish(out, "synth-annotations")?;
    Ok(())
}
