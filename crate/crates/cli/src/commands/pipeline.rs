use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use latent_concepts::align::{
    align_all, best_ngram, coarsen_scheme, load_scheme, tag_affix, tag_casing, tag_ngrams, tag_position, AffixLists,
    AlignmentResult, Granularity, LayerAlignmentReport, NgramRange, TagMapping, TagScheme,
};
use latent_concepts::cluster::{
    build_dendrogram, load_cut, siblings, summarize as summarize_cut, wcss_sweep, write_cut, ClusterCut,
    ClusterSummary,
};
use latent_concepts::jsonl;
use latent_concepts::repr::{
    all_occurrences, load_corpus, load_embeddings, load_occurrences, read_lce, select_from, write_lce,
    write_occurrences, OverCapMode, SelectionPolicy,
};

use super::{named_path, write_text};
use crate::cli::{AlignArgs, ClusterArgs, PrepareArgs, ReportArgs, SummarizeArgs};
use crate::error::{CliError, CliResult};
use crate::manifest::{ensure_dir, Recorder};

pub fn prepare(a: PrepareArgs) -> CliResult<()> {
    let out = &a.out.out;
    let mut rec = Recorder::new();
    rec.seed(a.seed)
        .config("min_frequency", a.min_frequency)
        .config("max_per_type", a.max_per_type)
        .config("drop_over_cap", a.drop_over_cap)
        .config("no_closed_class", a.no_closed_class)
        .input(&a.corpus);

    let corpus = load_corpus(&a.corpus)?;
    let candidates = match &a.occurrences {
        Some(p) => {
            rec.input(p);
            load_occurrences(p, Some(&corpus))?
        }
        None => all_occurrences(&corpus),
    };
    let mut policy = SelectionPolicy {
        min_type_frequency: a.min_frequency,
        max_occurrences_per_type: a.max_per_type,
        over_cap: if a.drop_over_cap { OverCapMode::Drop } else { OverCapMode::Sample },
        seed: a.seed,
        ..SelectionPolicy::default()
    };
    if let Some(p) = &a.closed_class {
        rec.input(p);
        let text = std::fs::read_to_string(p).map_err(|e| CliError::io(p, e))?;
        policy.closed_class_words = SelectionPolicy::parse_closed_class(&text);
    } else if !a.no_closed_class {
        policy = policy.with_default_closed_class();
    }
    let selected = select_from(&candidates, &policy)?;
    if selected.is_empty() {
        eprintln!("warning: the selection policy kept no occurrences");
    }

    let row_of: HashMap<(usize, usize), usize> = candidates
        .iter()
        .map(|o| ((o.sentence_id, o.position), o.occ_id))
        .collect();
    let rows: Vec<usize> = selected.iter().map(|o| row_of[&(o.sentence_id, o.position)]).collect();

    ensure_dir(out)?;
    let mut layers = BTreeSet::new();
    let mut subsets = Vec::new();
    for p in &a.embeddings {
        rec.input(p);
        let emb = load_embeddings(p, &candidates)?;
        if !layers.insert(emb.layer()) {
            return Err(CliError::Usage(format!("layer {} given twice", emb.layer())));
        }
        subsets.push(emb.select_rows(&rows));
    }
    write_occurrences(&rec.output(out, "occurrences.jsonl"), &selected)?;
    for emb in &subsets {
        write_lce(&rec.output(out, &format!("layer{}.lce", emb.layer())), emb)?;
    }
    rec.finish(out, "prepare")?;
    eprintln!("selected {} of {} occurrences", selected.len(), candidates.len());
    Ok(())
}

#[derive(Serialize)]
struct SiblingLine {
    cluster_id: usize,
    sibling_id: usize,
}

pub fn cluster(a: ClusterArgs) -> CliResult<()> {
    let out = &a.out.out;
    let mut rec = Recorder::new();
    rec.config("k", a.k).config("wcss_k", &a.wcss_k).input(&a.embeddings);

    let emb = match &a.occurrences {
        Some(p) => {
            rec.input(p);
            load_embeddings(&a.embeddings, &load_occurrences(p, None)?)?
        }
        None => read_lce(&a.embeddings)?,
    };
    if let Some(layer) = a.layer {
        if layer != emb.layer() {
            return Err(CliError::Usage(format!(
                "--layer {layer} does not match the file's layer {}",
                emb.layer()
            )));
        }
    }
    rec.config("layer", emb.layer());
    if a.k < 1 || a.k > emb.n_rows() {
        return Err(latent_concepts::Error::KOutOfRange { k: a.k, n: emb.n_rows() }.into());
    }

    let dendrogram = build_dendrogram(&emb)?;
    let cut = ClusterCut::from_dendrogram(&dendrogram, a.k)?;
    let pairs = siblings(&dendrogram, &cut)?;
    let mut ks: Vec<usize> = a.wcss_k.clone();
    ks.push(a.k);
    ks.sort_unstable();
    ks.dedup();
    let wcss = wcss_sweep(&emb, &dendrogram, &ks)?;

    ensure_dir(out)?;
    dendrogram.write(&rec.output(out, "dendrogram.json"))?;
    write_cut(&rec.output(out, "cut.jsonl"), &cut)?;
    let lines: Vec<SiblingLine> = pairs
        .iter()
        .map(|&(cluster_id, sibling_id)| SiblingLine { cluster_id, sibling_id })
        .collect();
    jsonl::write(&rec.output(out, "siblings.jsonl"), &lines)?;
    let mut csv = String::from("k,wcss\n");
    for (k, v) in &wcss {
        csv.push_str(&format!("{k},{v}\n"));
    }
    write_text(&rec.output(out, "wcss.csv"), &csv)?;
    rec.finish(out, "cluster")?;
    eprintln!("clustered {} occurrences into {} clusters", emb.n_rows(), cut.k());
    Ok(())
}

#[derive(Serialize)]
struct BestNgram {
    ngram: String,
    count: usize,
}

#[derive(Serialize)]
struct SummaryLine {
    #[serde(flatten)]
    summary: ClusterSummary,
    best_ngram: Option<BestNgram>,
}

pub fn summarize(a: SummarizeArgs) -> CliResult<()> {
    let out = &a.out.out;
    let mut rec = Recorder::new();
    rec.config("ngram_min", a.ngram_min)
        .config("ngram_max", a.ngram_max)
        .input(&a.cut)
        .input(&a.occurrences);
    let range = NgramRange::new(a.ngram_min, a.ngram_max)?;
    let cut = load_cut(&a.cut)?;
    let occ = load_occurrences(&a.occurrences, None)?;
    let lines: Vec<SummaryLine> = summarize_cut(&cut, &occ)?
        .into_iter()
        .map(|summary| {
            let best_ngram = best_ngram(&summary, range).map(|(ngram, count)| BestNgram { ngram, count });
            SummaryLine { summary, best_ngram }
        })
        .collect();
    ensure_dir(out)?;
    jsonl::write(&rec.output(out, "summaries.jsonl"), &lines)?;
    rec.finish(out, "summarize")?;
    Ok(())
}

/// `alignment.json`: one layer's alignment result.
#[derive(Debug, Serialize, Deserialize)]
pub struct LayerAlignment {
    pub layer: u32,
    #[serde(flatten)]
    pub result: AlignmentResult,
}

pub fn align(a: AlignArgs) -> CliResult<()> {
    let out = &a.out.out;
    let mut rec = Recorder::new();
    rec.config("layer", a.layer)
        .config("theta", a.theta)
        .config("coarsen", &a.coarsen)
        .config("no_builtin", a.no_builtin)
        .input(&a.cut)
        .input(&a.occurrences);
    if !(a.theta > 0.0 && a.theta <= 1.0) {
        return Err(CliError::Usage(format!("--theta {} outside (0, 1]", a.theta)));
    }

    let cut = load_cut(&a.cut)?;
    let corpus = match &a.corpus {
        Some(p) => {
            rec.input(p);
            Some(load_corpus(p)?)
        }
        None => None,
    };
    let occ = load_occurrences(&a.occurrences, corpus.as_ref())?;

    let mut schemes: Vec<TagScheme> = Vec::new();
    if !a.no_builtin {
        schemes.push(tag_casing(&occ));
        match &corpus {
            Some(c) => schemes.push(tag_position(&occ, c)?),
            None => eprintln!("note: no --corpus given; skipping the Position scheme"),
        }
        schemes.push(tag_affix(&occ, &AffixLists::english()));
        schemes.push(tag_ngrams(&occ, NgramRange::default()));
    }
    let external = a
        .schemes
        .iter()
        .map(|s| (s, Granularity::Occurrence))
        .chain(a.type_schemes.iter().map(|s| (s, Granularity::Type)));
    for (arg, granularity) in external {
        let (name, path) = named_path(arg)?;
        rec.input(&path);
        schemes.push(load_scheme(&path, &name, granularity, &occ)?);
    }
    if !a.coarsen.is_empty() {
        let mapping = match &a.tag_map {
            Some(p) => {
                rec.input(p);
                TagMapping::load(p)?
            }
            None => TagMapping::default_pos(),
        };
        for name in &a.coarsen {
            let fine = schemes
                .iter()
                .find(|s| s.name() == name)
                .ok_or_else(|| CliError::Usage(format!("--coarsen {name}: no such scheme")))?;
            let coarse = coarsen_scheme(fine, &mapping).renamed(format!("{name}-coarse"));
            schemes.push(coarse);
        }
    }
    let mut names = BTreeSet::new();
    if let Some(dup) = schemes.iter().find(|s| !names.insert(s.name().to_string())) {
        return Err(CliError::Usage(format!("scheme name {} used twice", dup.name())));
    }
    if schemes.is_empty() {
        return Err(CliError::Usage("no schemes to align with".into()));
    }

    let result = align_all(&cut, &schemes, a.theta)?;
    let counts = result.counts_per_scheme();
    ensure_dir(out)?;
    let doc = LayerAlignment { layer: a.layer, result };
    jsonl::write_json(&rec.output(out, "alignment.json"), &doc)?;
    let mut csv = String::from("scheme,aligned_clusters,clusters\n");
    for (scheme, c) in &counts {
        csv.push_str(&format!("{scheme},{c},{}\n", doc.result.n_clusters()));
    }
    write_text(&rec.output(out, "counts.csv"), &csv)?;
    rec.finish(out, "align")?;
    Ok(())
}

pub fn report(a: ReportArgs) -> CliResult<()> {
    let out = &a.out.out;
    let mut rec = Recorder::new();
    let mut per_layer: BTreeMap<u32, BTreeMap<String, usize>> = BTreeMap::new();
    for p in &a.alignment {
        rec.input(p);
        let doc: LayerAlignment = jsonl::read_json(p)?;
        if per_layer.insert(doc.layer, doc.result.counts_per_scheme()).is_some() {
            return Err(CliError::Usage(format!("layer {} given twice", doc.layer)));
        }
    }
    let rows: Vec<(u32, BTreeMap<String, usize>)> = per_layer.into_iter().collect();
    let report = LayerAlignmentReport::from_counts(&rows)?;
    ensure_dir(out)?;
    report.write_csv(&rec.output(out, "report.csv"))?;
    rec.finish(out, "report")?;
    Ok(())
}
