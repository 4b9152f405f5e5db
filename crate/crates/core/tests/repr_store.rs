use std::collections::{BTreeMap, HashSet};
use std::io::Write;

use latent_concepts::repr::{
    all_occurrences, load_embeddings, load_occurrences, read_lce, select_from, select_occurrences, write_lce,
    write_occurrences, Corpus, CorpusSentence, LayerEmbeddings, OverCapMode, SelectionPolicy, TokenOccurrence,
    LCE_HEADER_LEN,
};
use latent_concepts::Error;
use proptest::prelude::*;

fn corpus_of(sentences: &[Vec<&str>]) -> Corpus {
    Corpus::new(
        sentences
            .iter()
            .enumerate()
            .map(|(i, toks)| CorpusSentence {
                sentence_id: i,
                text: toks.join(" "),
                tokens: toks.iter().map(|t| t.to_string()).collect(),
            })
            .collect(),
    )
    .unwrap()
}

fn counts(occ: &[TokenOccurrence]) -> BTreeMap<String, usize> {
    let mut m = BTreeMap::new();
    for o in occ {
        *m.entry(o.token_type.clone()).or_insert(0) += 1;
    }
    m
}

#[test]
fn hand_counted_frequencies() {
    // "a" once, "b" three times, "c" twelve times.
    let mut sents = vec![vec!["a", "b", "c"], vec!["b", "c"], vec!["b", "c"]];
    sents.extend((0..9).map(|_| vec!["c"]));
    let occ = select_occurrences(&corpus_of(&sents), &SelectionPolicy::default()).unwrap();
    let c = counts(&occ);
    assert_eq!(c.get("a"), None);
    assert_eq!(c["b"], 3);
    assert_eq!(c["c"], 10);
    assert!(occ.iter().enumerate().all(|(i, o)| o.occ_id == i));
}

#[test]
fn drop_mode_removes_frequent_types() {
    let sents: Vec<Vec<&str>> = (0..25).map(|_| vec!["run", "fast"]).collect();
    let policy = SelectionPolicy {
        over_cap: OverCapMode::Drop,
        max_occurrences_per_type: 30,
        ..Default::default()
    };
    let occ = select_occurrences(&corpus_of(&sents), &policy).unwrap();
    assert_eq!(counts(&occ)["run"], 25);
    let occ = select_occurrences(&corpus_of(&sents), &SelectionPolicy { over_cap: OverCapMode::Drop, ..Default::default() }).unwrap();
    assert!(occ.is_empty());
}

#[test]
fn default_closed_class_drops_function_words_in_both_cases() {
    let sents: Vec<Vec<&str>> = (0..4).map(|_| vec!["The", "dog", "saw", "the", "cat"]).collect();
    let occ = select_occurrences(&corpus_of(&sents), &SelectionPolicy::default().with_default_closed_class()).unwrap();
    let c = counts(&occ);
    assert!(!c.contains_key("the") && !c.contains_key("The"));
    assert_eq!(c["dog"], 4);
}

#[test]
fn occurrence_sidecar_round_trip_and_checks() {
    let corpus = corpus_of(&[vec!["x", "y"], vec!["y", "x"]]);
    let occ = all_occurrences(&corpus);
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("occ.jsonl");
    write_occurrences(&path, &occ).unwrap();
    assert_eq!(load_occurrences(&path, Some(&corpus)).unwrap(), occ);
    let other = corpus_of(&[vec!["x", "z"], vec!["y", "x"]]);
    assert!(load_occurrences(&path, Some(&other)).is_err());
}

#[test]
fn lce_layout_is_exact() {
    let e = LayerEmbeddings::new(3, 2, 2, vec![1.0, -2.0, 0.5, 4.0]).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("l.lce");
    write_lce(&path, &e).unwrap();
    let bytes = std::fs::read(&path).unwrap();
    assert_eq!(bytes.len(), LCE_HEADER_LEN + 16);
    assert_eq!(&bytes[..4], b"LCE1");
    assert_eq!(&bytes[4..8], &3u32.to_le_bytes());
    assert_eq!(&bytes[8..12], &2u32.to_le_bytes());
    assert_eq!(&bytes[12..16], &2u32.to_le_bytes());
    assert_eq!(&bytes[16..20], &[0, 0, 0, 0]);
    assert_eq!(&bytes[20..24], &1.0f32.to_le_bytes());
    assert_eq!(&bytes[32..36], &4.0f32.to_le_bytes());
}

fn raw_lce(n: u32, d: u32, values: &[f32]) -> tempfile::NamedTempFile {
    let mut f = tempfile::NamedTempFile::new().unwrap();
    f.write_all(b"LCE1").unwrap();
    for v in [0u32, n, d] {
        f.write_all(&v.to_le_bytes()).unwrap();
    }
    f.write_all(&[0, 0, 0, 0]).unwrap();
    for v in values {
        f.write_all(&v.to_le_bytes()).unwrap();
    }
    f
}

fn occurrences(n: usize) -> Vec<TokenOccurrence> {
    (0..n)
        .map(|i| TokenOccurrence {
            occ_id: i,
            sentence_id: i,
            position: 0,
            token_type: "w".into(),
        })
        .collect()
}

#[test]
fn embedding_loader_errors() {
    let ok = raw_lce(4, 3, &[0.0; 12]);
    let e = load_embeddings(ok.path(), &occurrences(4)).unwrap();
    assert_eq!((e.n_rows(), e.dim()), (4, 3));
    assert!(matches!(
        load_embeddings(ok.path(), &occurrences(5)),
        Err(Error::SizeMismatch { expected: 5, found: 4 })
    ));

    let mut values = [0.0f32; 12];
    values[2 * 3 + 1] = f32::NAN;
    let nan = raw_lce(4, 3, &values);
    assert!(matches!(read_lce(nan.path()), Err(Error::NonFinite { row: 2, col: 1 })));

    let short = raw_lce(4, 3, &[0.0; 11]);
    assert!(read_lce(short.path()).is_err());

    let mut bad = tempfile::NamedTempFile::new().unwrap();
    bad.write_all(b"LCE2").unwrap();
    bad.write_all(&[0u8; 16]).unwrap();
    assert!(read_lce(bad.path()).unwrap_err().to_string().contains("magic"));
}

fn corpus_strategy() -> impl Strategy<Value = Corpus> {
    let vocab = prop::sample::select(vec!["a", "b", "c", "d", "e", "the", "of", "x", "y", "z"]);
    prop::collection::vec(prop::collection::vec(vocab, 1..12), 0..40).prop_map(|sents| {
        corpus_of(&sents)
    })
}

proptest! {
    #[test]
    fn selection_invariants(corpus in corpus_strategy(), min in 1usize..4, extra in 0usize..6, seed in 0u64..50) {
        let closed: HashSet<String> = ["the", "of"].iter().map(|s| s.to_string()).collect();
        let policy = SelectionPolicy {
            min_type_frequency: min,
            max_occurrences_per_type: min + extra,
            closed_class_words: closed.clone(),
            over_cap: OverCapMode::Sample,
            seed,
        };
        let occ = select_occurrences(&corpus, &policy).unwrap();
        let corpus_freq = counts(&all_occurrences(&corpus));
        for (ty, n) in counts(&occ) {
            prop_assert!(n <= policy.max_occurrences_per_type);
            prop_assert!(!closed.contains(&ty));
            prop_assert!(corpus_freq[&ty] >= min);
            prop_assert_eq!(n, corpus_freq[&ty].min(policy.max_occurrences_per_type));
        }
        for o in &occ {
            prop_assert_eq!(&corpus.sentences()[o.sentence_id].tokens[o.position], &o.token_type);
        }
        prop_assert!(occ.windows(2).all(|w| (w[0].sentence_id, w[0].position) < (w[1].sentence_id, w[1].position)));
        prop_assert_eq!(&select_from(&occ, &policy).unwrap(), &occ);
        prop_assert_eq!(&select_occurrences(&corpus, &policy).unwrap(), &occ);
    }

    #[test]
    fn lce_round_trip_is_bit_identical(
        layer in 0u32..25,
        dim in 1usize..8,
        bits in prop::collection::vec(any::<u32>(), 0..64),
    ) {
        let finite: Vec<f32> = bits.into_iter().map(f32::from_bits).filter(|v| v.is_finite()).collect();
        let n = finite.len() / dim;
        let data = finite[..n * dim].to_vec();
        let e = LayerEmbeddings::new(layer, n, dim, data).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("x.lce");
        write_lce(&path, &e).unwrap();
        let back = read_lce(&path).unwrap();
        prop_assert_eq!(back.layer(), layer);
        let a: Vec<u32> = e.data().iter().map(|v| v.to_bits()).collect();
        let b: Vec<u32> = back.data().iter().map(|v| v.to_bits()).collect();
        prop_assert_eq!(a, b);
    }
}
