use serde::Serialize;

use latent_concepts::agreement::load_log;
use latent_concepts::bcn::{
    build_bcn, evaluate_grid, load_bcn, predict_assign, split_by_cluster, split_held_out, stats_from_entries,
    train_classifier, CentroidAssigner, ClusterLabels, ConceptModel, Evaluation, Split, TrainConfig, TrainReport,
};
use latent_concepts::cluster::{load_cut, ClusterCut};
use latent_concepts::jsonl;
use latent_concepts::repr::{load_embeddings, load_occurrences, read_lce, LayerEmbeddings};

use super::write_text;
use crate::cli::{BcnApplyArgs, BcnEvalArgs, BcnStatsArgs, BcnTrainArgs, Method};
use crate::error::{CliError, CliResult};
use crate::manifest::{ensure_dir, Recorder};

fn checked_embeddings(path: &std::path::Path, cut: &ClusterCut) -> CliResult<LayerEmbeddings> {
    let emb = read_lce(path)?;
    if emb.n_rows() != cut.n_leaves() {
        return Err(latent_concepts::Error::SizeMismatch {
            expected: cut.n_leaves(),
            found: emb.n_rows(),
        }
        .into());
    }
    Ok(emb)
}

#[derive(Serialize)]
struct TrainSummary {
    method: &'static str,
    layer: u32,
    n_train: usize,
    n_heldout: usize,
    n_classes: usize,
    optimizer: Option<TrainReport>,
}

pub fn train(a: BcnTrainArgs) -> CliResult<()> {
    let out = &a.out.out;
    let mut rec = Recorder::new();
    let method = match a.method {
        Method::Softmax => "softmax",
        Method::Centroid => "centroid",
    };
    rec.seed(a.seed)
        .config("method", method)
        .config("holdout", a.holdout)
        .config("split_by_cluster", a.split_by_cluster)
        .config("lambda", a.lambda)
        .config("max_iters", a.max_iters)
        .config("tolerance", a.tolerance)
        .input(&a.embeddings)
        .input(&a.cut);
    let cfg = TrainConfig {
        holdout_fraction: a.holdout,
        l2_lambda: a.lambda,
        max_iters: a.max_iters,
        tolerance: a.tolerance,
        seed: a.seed,
        ..TrainConfig::default()
    };
    cfg.validate()?;

    let cut = load_cut(&a.cut)?;
    let emb = checked_embeddings(&a.embeddings, &cut)?;
    if let Some(layer) = a.layer {
        if layer != emb.layer() {
            return Err(CliError::Usage(format!(
                "--layer {layer} does not match the file's layer {}",
                emb.layer()
            )));
        }
    }
    let split = if a.split_by_cluster {
        split_by_cluster(&cut, &cfg)?
    } else {
        split_held_out(&cut, &cfg)?
    };
    let labels: Vec<usize> = split.train.iter().map(|&o| cut.cluster_of(o)).collect();
    let (model, optimizer) = match a.method {
        Method::Softmax => {
            let (m, report) = train_classifier(&emb, &split.train, &labels, &cfg)?;
            (ConceptModel::Softmax(m), Some(report))
        }
        Method::Centroid => (
            ConceptModel::Centroid(CentroidAssigner::fit(&emb, &split.train, &labels)?),
            None,
        ),
    };
    let summary = TrainSummary {
        method,
        layer: emb.layer(),
        n_train: split.train.len(),
        n_heldout: split.heldout.len(),
        n_classes: latent_concepts::bcn::ConceptPredictor::cluster_ids(&model).len(),
        optimizer,
    };

    ensure_dir(out)?;
    model.write(&rec.output(out, "model.bin"))?;
    jsonl::write_json(&rec.output(out, "split.json"), &split)?;
    jsonl::write_json(&rec.output(out, "train_report.json"), &summary)?;
    rec.finish(out, "bcn-train")?;
    Ok(())
}

#[derive(Serialize)]
struct EvalReport {
    threshold: f64,
    at_threshold: Evaluation,
    curve: Vec<Evaluation>,
}

pub fn eval(a: BcnEvalArgs) -> CliResult<()> {
    let out = &a.out.out;
    let mut rec = Recorder::new();
    let mut thresholds = a.thresholds.clone();
    thresholds.push(a.threshold);
    if let Some(t) = thresholds.iter().find(|t| !(0.0..=1.0).contains(*t)) {
        return Err(CliError::Usage(format!("threshold {t} outside [0, 1]")));
    }
    thresholds.sort_by(f64::total_cmp);
    thresholds.dedup();
    rec.config("threshold", a.threshold)
        .config("thresholds", &thresholds)
        .input(&a.model)
        .input(&a.embeddings)
        .input(&a.cut)
        .input(&a.split);

    let model = ConceptModel::load(&a.model)?;
    let cut = load_cut(&a.cut)?;
    let emb = checked_embeddings(&a.embeddings, &cut)?;
    let split: Split = jsonl::read_json(&a.split)?;
    if let Some(&bad) = split.heldout.iter().find(|&&o| o >= cut.n_leaves()) {
        return Err(latent_concepts::Error::Invalid(format!("held-out occurrence {bad} is not in the cut")).into());
    }
    let truth: Vec<usize> = split.heldout.iter().map(|&o| cut.cluster_of(o)).collect();
    let curve = evaluate_grid(&model, &emb, &split.heldout, &truth, &thresholds)?;
    let at_threshold = curve
        .iter()
        .find(|e| e.threshold == a.threshold)
        .cloned()
        .expect("threshold is part of the grid");

    let mut csv = String::from("threshold,n,covered,correct,coverage,precision\n");
    for e in &curve {
        let precision = e.precision.map(|p| p.to_string()).unwrap_or_default();
        csv.push_str(&format!(
            "{},{},{},{},{},{precision}\n",
            e.threshold, e.n, e.covered, e.correct, e.coverage
        ));
    }
    ensure_dir(out)?;
    let report = EvalReport {
        threshold: a.threshold,
        at_threshold,
        curve,
    };
    jsonl::write_json(&rec.output(out, "eval.json"), &report)?;
    write_text(&rec.output(out, "eval.csv"), &csv)?;
    rec.finish(out, "bcn-eval")?;
    Ok(())
}

#[derive(Serialize)]
struct ApplyReport {
    occurrences: usize,
    assigned: usize,
    dropped_unlabeled: usize,
    entries: usize,
}

pub fn apply(a: BcnApplyArgs) -> CliResult<()> {
    let out = &a.out.out;
    let mut rec = Recorder::new();
    if !(0.0..=1.0).contains(&a.threshold) {
        return Err(CliError::Usage(format!("threshold {} outside [0, 1]", a.threshold)));
    }
    rec.config("threshold", a.threshold)
        .input(&a.model)
        .input(&a.embeddings)
        .input(&a.occurrences);

    let model = ConceptModel::load(&a.model)?;
    let occ = load_occurrences(&a.occurrences, None)?;
    let emb = load_embeddings(&a.embeddings, &occ)?;
    let labels = match (&a.labels, &a.annotations) {
        (Some(p), _) => {
            rec.input(p);
            ClusterLabels::load(p)?
        }
        (None, Some(p)) => {
            rec.input(p);
            ClusterLabels::from_annotations(&load_log(p)?)
        }
        (None, None) => return Err(CliError::Usage("one of --labels or --annotations is required".into())),
    };
    let assignments = predict_assign(&model, &emb, a.threshold)?;
    let bcn = build_bcn(&assignments, &labels, &occ)?;

    ensure_dir(out)?;
    jsonl::write(&rec.output(out, "bcn.jsonl"), &bcn.entries)?;
    bcn.stats.write_csv(&rec.output(out, "bcn_stats.csv"))?;
    let report = ApplyReport {
        occurrences: occ.len(),
        assigned: assignments.len(),
        dropped_unlabeled: bcn.dropped_unlabeled,
        entries: bcn.entries.len(),
    };
    jsonl::write_json(&rec.output(out, "apply_report.json"), &report)?;
    rec.finish(out, "bcn-apply")?;
    eprintln!(
        "{} of {} occurrences assigned; {} in unlabelled clusters",
        report.assigned, report.occurrences, report.dropped_unlabeled
    );
    Ok(())
}

pub fn stats(a: BcnStatsArgs) -> CliResult<()> {
    let out = &a.out.out;
    let mut rec = Recorder::new();
    rec.input(&a.bcn);
    let entries = load_bcn(&a.bcn)?;
    ensure_dir(out)?;
    stats_from_entries(&entries).write_csv(&rec.output(out, "bcn_stats.csv"))?;
    rec.finish(out, "bcn-stats")?;
    Ok(())
}
