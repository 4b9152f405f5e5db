use latent_concepts::bcn::{
    build_bcn, evaluate_grid, objective_and_gradient, predict_assign, split_by_cluster, split_held_out,
    train_classifier, Assignment, CentroidAssigner, ClusterLabels, ConceptClassifier, ConceptModel, ConceptPredictor, TrainConfig,
};
use latent_concepts::cluster::ClusterCut;
use latent_concepts::repr::{LayerEmbeddings, TokenOccurrence};
use latent_concepts::synth::gaussian_blobs;
use latent_concepts::taxonomy::ConceptLabel;
use latent_concepts_testkit::metrics::{max_relative_error, numeric_gradient};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_problem(seed: u64, n: usize, d: usize, c: usize) -> (Vec<f64>, Vec<f64>, Vec<usize>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let x: Vec<f64> = (0..n * d).map(|_| rng.gen_range(-2.0..2.0)).collect();
    let labels: Vec<usize> = (0..n).map(|_| rng.gen_range(0..c)).collect();
    let params: Vec<f64> = (0..c * d + c).map(|_| rng.gen_range(-1.0..1.0)).collect();
    (params, x, labels)
}

#[test]
fn gradient_matches_central_differences_on_a_small_instance() {
    let (params, x, labels) = random_problem(1, 5, 4, 3);
    let lambda = 0.1;
    let (_, g) = objective_and_gradient(&params, &x, &labels, 3, lambda);
    let num = numeric_gradient(|p| objective_and_gradient(p, &x, &labels, 3, lambda).0, &params, 1e-5);
    assert!(max_relative_error(&g, &num) <= 1e-5);
}

#[test]
fn common_bias_shift_leaves_the_objective_unchanged() {
    let (params, x, labels) = random_problem(2, 8, 3, 4);
    let (o1, _) = objective_and_gradient(&params, &x, &labels, 4, 0.05);
    let mut shifted = params.clone();
    for b in &mut shifted[12..] {
        *b += 3.5;
    }
    let (o2, _) = objective_and_gradient(&shifted, &x, &labels, 4, 0.05);
    assert!((o1 - o2).abs() < 1e-12);
}

fn blob_cut(k: usize, per: usize, seed: u64) -> (LayerEmbeddings, ClusterCut) {
    let (e, truth) = gaussian_blobs(k, per, 8, 10.0, 1.0, seed);
    (e, ClusterCut::from_assignment(truth).unwrap())
}

#[test]
fn separable_blobs_are_learned_exactly() {
    let (e, cut) = blob_cut(5, 40, 4);
    let rows: Vec<usize> = (0..e.n_rows()).collect();
    let (clf, report) = train_classifier(&e, &rows, cut.assignment(), &TrainConfig::default()).unwrap();
    assert_eq!(report.train_accuracy, 1.0);
    assert!(report.final_objective < 0.1);
    assert_eq!(clf.cluster_ids(), [0, 1, 2, 3, 4]);
}

#[test]
fn held_out_precision_and_coverage() {
    let (e, cut) = blob_cut(10, 60, 5);
    let cfg = TrainConfig::default();
    let split = split_held_out(&cut, &cfg).unwrap();
    let labels: Vec<usize> = split.train.iter().map(|&o| cut.cluster_of(o)).collect();
    let (clf, _) = train_classifier(&e, &split.train, &labels, &cfg).unwrap();
    let truth: Vec<usize> = split.heldout.iter().map(|&o| cut.cluster_of(o)).collect();
    let grid = [0.0, 0.5, 0.9, 0.97, 0.99];
    let evals = evaluate_grid(&clf, &e, &split.heldout, &truth, &grid).unwrap();
    assert!(evals.windows(2).all(|w| w[0].coverage >= w[1].coverage));
    assert_eq!(evals[0].coverage, 1.0);
    assert!(evals[3].precision.unwrap() >= 0.99);

    let centroid = CentroidAssigner::fit(&e, &split.train, &labels).unwrap();
    let ce = evaluate_grid(&centroid, &e, &split.heldout, &truth, &grid).unwrap();
    assert!(ce[3].precision.unwrap() >= 0.99);
}

#[test]
fn identical_inputs_predict_the_class_priors() {
    let rows: Vec<Vec<f32>> = vec![vec![0.5, -1.0]; 10];
    let e = LayerEmbeddings::from_rows(0, &rows).unwrap();
    let labels = vec![0, 0, 0, 0, 0, 0, 1, 1, 1, 2];
    let idx: Vec<usize> = (0..10).collect();
    let cfg = TrainConfig {
        tolerance: 1e-12,
        max_iters: 5000,
        ..Default::default()
    };
    let (clf, _) = train_classifier(&e, &idx, &labels, &cfg).unwrap();
    let p = clf.probabilities(&[0.5, -1.0]);
    for (got, want) in p.iter().zip([0.6, 0.3, 0.1]) {
        assert!((got - want).abs() < 1e-3, "{p:?}");
    }
}

#[test]
fn classifier_file_round_trip() {
    let (e, cut) = blob_cut(3, 20, 6);
    let rows: Vec<usize> = (0..e.n_rows()).collect();
    let (clf, _) = train_classifier(&e, &rows, cut.assignment(), &TrainConfig::default()).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("m.bin");
    clf.write(&path).unwrap();
    assert_eq!(ConceptClassifier::load(&path).unwrap(), clf);
    assert_eq!(ConceptModel::load(&path).unwrap(), ConceptModel::Softmax(clf));

    let centroid = CentroidAssigner::fit(&e, &rows, cut.assignment()).unwrap();
    let cpath = dir.path().join("c.bin");
    centroid.write(&cpath).unwrap();
    let back = ConceptModel::load(&cpath).unwrap();
    assert_eq!(back.probabilities(e.row(3)), centroid.probabilities(e.row(3)));
    assert!(ConceptClassifier::load(&cpath).is_err());
}

#[test]
fn splits_partition_occurrences() {
    let (_, cut) = blob_cut(6, 15, 7);
    let cfg = TrainConfig::default();
    for split in [split_held_out(&cut, &cfg).unwrap(), split_by_cluster(&cut, &cfg).unwrap()] {
        let mut all: Vec<usize> = split.train.iter().chain(&split.heldout).copied().collect();
        all.sort_unstable();
        assert_eq!(all, (0..cut.n_leaves()).collect::<Vec<_>>());
    }
    let s = split_held_out(&cut, &cfg).unwrap();
    assert_eq!(s.heldout.len(), 6 * 2);
    let by = split_by_cluster(&cut, &cfg).unwrap();
    let held: std::collections::BTreeSet<usize> = by.heldout.iter().map(|&o| cut.cluster_of(o)).collect();
    let train: std::collections::BTreeSet<usize> = by.train.iter().map(|&o| cut.cluster_of(o)).collect();
    assert!(held.is_disjoint(&train));
}

#[test]
fn bcn_rolls_counts_up_the_hierarchy() {
    let l = |s: &str| ConceptLabel::parse(s).unwrap();
    let mut labels = ClusterLabels::default();
    labels.0.insert(0, [l("SEM:entity:person")].into());
    labels.0.insert(1, [l("SEM:entity:place")].into());
    let occ: Vec<TokenOccurrence> = ["Ann", "Bob", "Ann", "Rome"]
        .iter()
        .enumerate()
        .map(|(i, t)| TokenOccurrence {
            occ_id: i,
            sentence_id: i,
            position: 0,
            token_type: t.to_string(),
        })
        .collect();
    let a = |row, cluster_id| Assignment {
        row,
        cluster_id,
        confidence: 0.99,
    };
    let out = build_bcn(&[a(0, 0), a(1, 0), a(2, 0), a(3, 1), a(3, 7)], &labels, &occ).unwrap();
    assert_eq!(out.dropped_unlabeled, 1);
    let csv = out.stats.to_csv();
    assert_eq!(
        csv,
        "label,tokens,types\nSEM:entity,4,3\nSEM:entity:person,3,2\nSEM:entity:place,1,1\n"
    );
}

#[test]
fn threshold_gate_on_assignments() {
    let (e, cut) = blob_cut(4, 30, 8);
    let rows: Vec<usize> = (0..e.n_rows()).collect();
    let (clf, _) = train_classifier(&e, &rows, cut.assignment(), &TrainConfig::default()).unwrap();
    let loose = predict_assign(&clf, &e, 0.0).unwrap();
    let strict = predict_assign(&clf, &e, 0.999_999).unwrap();
    assert_eq!(loose.len(), e.n_rows());
    assert!(strict.len() <= loose.len());
    assert!(strict.iter().all(|a| a.confidence >= 0.999_999));
    assert_eq!(predict_assign(&clf, &e, 2.0).unwrap().len(), loose.iter().filter(|a| a.confidence >= 1.0).count());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn gradient_check_on_random_instances(seed in any::<u64>(), n in 1usize..8, d in 1usize..5, c in 2usize..5, lambda in 0.0f64..0.5) {
        let (params, x, labels) = random_problem(seed, n, d, c);
        let (_, g) = objective_and_gradient(&params, &x, &labels, c, lambda);
        let num = numeric_gradient(|p| objective_and_gradient(p, &x, &labels, c, lambda).0, &params, 1e-5);
        prop_assert!(max_relative_error(&g, &num) <= 1e-5);
    }
}
