use latent_concepts::cluster::{build_dendrogram, global_sse, siblings, wcss_sweep, ClusterCut, Dendrogram};
use latent_concepts::repr::LayerEmbeddings;
use latent_concepts::synth::{gaussian_blobs, uniform_points};
use latent_concepts_testkit::metrics::adjusted_rand_index;
use latent_concepts_testkit::ward::{naive_ward, partition_of, sse};
use proptest::prelude::*;

fn as_f64(e: &LayerEmbeddings) -> Vec<Vec<f64>> {
    e.rows().map(|r| r.iter().map(|&v| f64::from(v)).collect()).collect()
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1e-300)
}

fn assert_matches_oracle(e: &LayerEmbeddings) {
    let d = build_dendrogram(e).unwrap();
    let oracle = naive_ward(&as_f64(e));
    let n = e.n_rows();
    for k in 1..=n {
        let cut = ClusterCut::from_dendrogram(&d, k).unwrap();
        assert_eq!(partition_of(cut.assignment()), oracle.partition(k), "k={k}");
    }
    for (m, o) in d.merges().iter().zip(&oracle.merges) {
        assert!(rel(m.height, o.height) <= 1e-8, "{} vs {}", m.height, o.height);
    }
}

#[test]
fn random_instances_match_greedy_oracle() {
    for seed in 0..8 {
        let e = uniform_points(20 + 7 * seed as usize, 1 + seed as usize % 5, seed);
        assert!(naive_ward(&as_f64(&e)).min_gap() > 1e-9);
        assert_matches_oracle(&e);
    }
}

#[test]
fn three_point_line() {
    let e = LayerEmbeddings::from_rows(0, &[vec![0.0], vec![1.0], vec![3.0]]).unwrap();
    let d = build_dendrogram(&e).unwrap();
    let m = d.merges();
    assert_eq!((m[0].left, m[0].right, m[0].height, m[0].size), (0, 1, 0.5, 2));
    assert_eq!((m[1].left, m[1].right, m[1].size), (2, 3, 3));
    assert!(rel(m[1].height, 2.0 / 3.0 * 2.5 * 2.5) < 1e-15);
}

#[test]
fn equilateral_ties_still_give_a_valid_tree() {
    let h = 3f32.sqrt() / 2.0;
    let e = LayerEmbeddings::from_rows(0, &[vec![0.0, 0.0], vec![1.0, 0.0], vec![0.5, h]]).unwrap();
    let d = build_dendrogram(&e).unwrap();
    assert!((d.merges()[0].height - 0.5).abs() < 1e-6);
    Dendrogram::new(3, d.merges().to_vec()).unwrap();
}

#[test]
fn duplicate_points_merge_at_zero() {
    let rows = vec![vec![1.0, 2.0]; 6];
    let d = build_dendrogram(&LayerEmbeddings::from_rows(0, &rows).unwrap()).unwrap();
    assert!(d.heights().all(|h| h == 0.0));
}

#[test]
fn heights_sum_to_global_sse() {
    for seed in 0..5 {
        let (e, _) = gaussian_blobs(6, 30, 4, 5.0, 1.0, seed);
        let d = build_dendrogram(&e).unwrap();
        let total: f64 = d.heights().sum();
        let all: Vec<usize> = (0..e.n_rows()).collect();
        assert!(rel(total, global_sse(&e)) <= 1e-8);
        assert!(rel(total, sse(&as_f64(&e), &all)) <= 1e-8);
    }
}

#[test]
fn wcss_matches_direct_recomputation() {
    let e = uniform_points(100, 3, 11);
    let d = build_dendrogram(&e).unwrap();
    let pts = as_f64(&e);
    let sweep = wcss_sweep(&e, &d, &[1, 2, 5, 10, 100]).unwrap();
    for &k in &[2, 5, 10] {
        let cut = ClusterCut::from_dendrogram(&d, k).unwrap();
        let direct: f64 = cut.clusters().map(|(_, m)| sse(&pts, m)).sum();
        assert!(rel(sweep[&k], direct) <= 1e-8, "k={k}: {} vs {direct}", sweep[&k]);
    }
    let values: Vec<f64> = sweep.values().copied().collect();
    assert!(values.windows(2).all(|w| w[0] >= w[1]));
    assert_eq!(sweep[&100], 0.0);
}

#[test]
fn well_separated_blobs_are_recovered() {
    let (e, truth) = gaussian_blobs(8, 40, 6, 20.0, 0.5, 3);
    let d = build_dendrogram(&e).unwrap();
    let cut = ClusterCut::from_dendrogram(&d, 8).unwrap();
    assert_eq!(adjusted_rand_index(cut.assignment(), &truth), 1.0);
}

#[test]
fn siblings_are_children_of_one_node() {
    let e = uniform_points(40, 2, 5);
    let d = build_dendrogram(&e).unwrap();
    for k in [2, 5, 10, 25] {
        let cut = ClusterCut::from_dendrogram(&d, k).unwrap();
        let pairs = siblings(&d, &cut).unwrap();
        // Oracle: a merge whose two children's leaf sets are both whole cut clusters.
        let mut expected = Vec::new();
        for m in d.merges() {
            let l = d.leaves_of(m.left);
            let r = d.leaves_of(m.right);
            let whole = |leaves: &[usize]| {
                let c = cut.cluster_of(leaves[0]);
                leaves.iter().all(|&x| cut.cluster_of(x) == c) && cut.members(c).len() == leaves.len()
            };
            if whole(&l) && whole(&r) {
                let (a, b) = (cut.cluster_of(l[0]), cut.cluster_of(r[0]));
                expected.push((a.min(b), a.max(b)));
            }
        }
        expected.sort_unstable();
        assert_eq!(pairs, expected, "k={k}");
        assert!(!pairs.is_empty());
    }
}

#[test]
fn dendrogram_json_round_trip() {
    let e = uniform_points(30, 2, 9);
    let d = build_dendrogram(&e).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("d.json");
    d.write(&path).unwrap();
    assert_eq!(Dendrogram::load(&path).unwrap(), d);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn permuting_points_permutes_the_hierarchy(seed in 0u64..1000, n in 3usize..40, dim in 1usize..5) {
        let e = uniform_points(n, dim, seed);
        prop_assume!(naive_ward(&as_f64(&e)).min_gap() > 1e-9);
        let mut perm: Vec<usize> = (0..n).collect();
        perm.reverse();
        perm.rotate_left((seed as usize) % n);
        let permuted = e.select_rows(&perm);
        let d1 = build_dendrogram(&e).unwrap();
        let d2 = build_dendrogram(&permuted).unwrap();
        for k in 1..=n {
            let a = ClusterCut::from_dendrogram(&d1, k).unwrap();
            let b = ClusterCut::from_dendrogram(&d2, k).unwrap();
            let mapped: Vec<usize> = (0..n).map(|i| b.cluster_of(perm.iter().position(|&p| p == i).unwrap())).collect();
            prop_assert_eq!(partition_of(a.assignment()), partition_of(&mapped));
        }
        for (x, y) in d1.heights().zip(d2.heights()) {
            prop_assert!(rel(x, y) <= 1e-8);
        }
    }

    #[test]
    fn hierarchy_invariants(seed in 0u64..1000, n in 1usize..60, dim in 1usize..4) {
        let e = uniform_points(n, dim, seed);
        let d = build_dendrogram(&e).unwrap();
        prop_assert_eq!(d.merges().len(), n - 1);
        let h: Vec<f64> = d.heights().collect();
        prop_assert!(h.windows(2).all(|w| w[0] <= w[1]));
        let total: f64 = h.iter().sum();
        prop_assert!(rel(total, global_sse(&e)) <= 1e-8 || total < 1e-12);
        for k in 1..=n {
            prop_assert_eq!(ClusterCut::from_dendrogram(&d, k).unwrap().k(), k);
        }
    }
}
