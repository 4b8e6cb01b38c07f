use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use semshift::sgns::{build_vocab, learning_rate, train, train_corpus, Corpus, TrainConfig, Vocabulary};
use semshift::{cosine_similarity, Error};

fn small_config() -> TrainConfig {
    TrainConfig {
        dim: 10,
        min_count: 1,
        epochs: 2,
        ..TrainConfig::default()
    }
}

fn counts(pairs: &[(&str, u64)]) -> HashMap<String, u64> {
    pairs.iter().map(|&(w, c)| (w.to_string(), c)).collect()
}

fn corpus_file(text: &str) -> (tempfile::TempDir, std::path::PathBuf) {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("tokens.txt");
    std::fs::write(&path, text).unwrap();
    (dir, path)
}

#[test]
fn defaults() {
    let c = TrainConfig::default();
    assert_eq!((c.dim, c.window, c.min_count, c.epochs), (200, 5, 10, 10));
    assert_eq!((c.lr_start, c.lr_end, c.negatives), (0.025, 0.0025, 5));
    assert_eq!(c.subsample_threshold, 0.0);
}

#[test]
fn schedule_endpoints_and_midpoint() {
    let c = TrainConfig::default();
    assert_eq!(learning_rate(0.0, &c), 0.025);
    assert_eq!(learning_rate(1.0, &c), 0.0025);
    assert!((learning_rate(0.5, &c) - 0.01375).abs() < 1e-15);
    let near_end = learning_rate(1.0 - 1e-12, &c);
    assert!(near_end > 0.0025 && near_end - 0.0025 < 1e-12);
}

#[test]
fn vocab_threshold() {
    let (_d, path) = corpus_file("a a a b\n");
    let v = build_vocab(&path, 2).unwrap();
    assert_eq!(v.words(), ["a"]);
    assert_eq!(v.counts(), [3]);
    assert_eq!(v.total_tokens(), 3);
    let all = build_vocab(&path, 1).unwrap();
    assert_eq!(all.words(), ["a", "b"]);
    assert!(matches!(build_vocab(&path, 4), Err(Error::EmptyVocabulary)));
}

#[test]
fn vocab_orders_by_count_then_token() {
    let v = Vocabulary::from_counts(counts(&[("b", 2), ("a", 2), ("c", 5), ("d", 1)]), 1).unwrap();
    assert_eq!(v.words(), ["c", "a", "b", "d"]);
    assert_eq!(v.index_of("b"), Some(2));
}

#[test]
fn vocab_matches_a_recount() {
    let text = "the cat sat\non the mat the end\n\ncat cat #tag\n";
    let (_d, path) = corpus_file(text);
    let v = build_vocab(&path, 2).unwrap();
    let mut oracle: HashMap<&str, u64> = HashMap::new();
    for t in text.split_whitespace() {
        *oracle.entry(t).or_default() += 1;
    }
    oracle.retain(|_, c| *c >= 2);
    assert_eq!(v.len(), oracle.len());
    for (w, c) in &oracle {
        assert_eq!(v.count(w), Some(*c), "{w}");
    }
    assert_eq!(v.total_tokens(), oracle.values().sum::<u64>());
}

/// "aa bb" repeated, plus "cc" dropped into random sentences over fifty filler words.
fn repeated_sentence_corpus() -> Vec<Vec<String>> {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut sentences = vec![vec!["aa".to_string(), "bb".to_string()]; 1000];
    for _ in 0..1000 {
        let mut s: Vec<String> = (0..5).map(|_| format!("u{}", rng.random_range(0..50))).collect();
        s.insert(rng.random_range(0..=5), "cc".to_string());
        sentences.push(s);
    }
    sentences
}

#[test]
fn co_occurrence_pulls_words_together() {
    let corpus = Corpus::from_sentences("rep", &repeated_sentence_corpus(), 1).unwrap();
    for seed in 1..=3 {
        let config = TrainConfig {
            epochs: 10,
            seed,
            ..small_config()
        };
        let space = train_corpus(&corpus, &config, None).unwrap();
        let v = |w| space.vector(w).unwrap();
        let near = cosine_similarity(v("aa"), v("bb")).unwrap();
        let far = cosine_similarity(v("aa"), v("cc")).unwrap();
        assert!(near > far, "seed {seed}: {near} vs {far}");
    }
}

#[test]
fn output_shape_vocab_and_frequencies() {
    let (_d, path) = corpus_file(&"x y z x y x w\n".repeat(50));
    let config = TrainConfig {
        min_count: 60,
        ..small_config()
    };
    let space = train(&path, &config, None).unwrap();
    let vocab = build_vocab(&path, 60).unwrap();
    assert_eq!(space.words(), vocab.words());
    assert_eq!(space.frequencies().unwrap(), vocab.counts());
    assert_eq!(space.dim(), 10);
    assert_eq!(space.label(), "tokens");
    assert!(space.vectors().iter().all(|x| x.is_finite()));
}

#[test]
fn deterministic_mode_is_bit_reproducible() {
    let sentences: Vec<Vec<String>> = (0..300)
        .map(|i| (0..8).map(|j| format!("w{}", (i * 7 + j * 3) % 40)).collect())
        .collect();
    let corpus = Corpus::from_sentences("c", &sentences, 1).unwrap();
    let a = train_corpus(&corpus, &small_config(), None).unwrap();
    let b = train_corpus(&corpus, &small_config(), None).unwrap();
    assert_eq!(a.vectors(), b.vectors());
    let c = train_corpus(
        &corpus,
        &TrainConfig {
            seed: 9,
            ..small_config()
        },
        None,
    )
    .unwrap();
    assert_ne!(a.vectors(), c.vectors());
}

#[test]
fn parallel_mode_stays_finite() {
    let sentences: Vec<Vec<String>> = (0..400)
        .map(|i| (0..8).map(|j| format!("w{}", (i * 5 + j) % 30)).collect())
        .collect();
    let corpus = Corpus::from_sentences("c", &sentences, 1).unwrap();
    let config = TrainConfig {
        threads: 3,
        lr_start: 0.5,
        lr_end: 0.1,
        ..small_config()
    };
    let space = train_corpus(&corpus, &config, None).unwrap();
    assert!(space.vectors().iter().all(|x| x.is_finite()));
}

#[test]
fn zero_epochs_keep_the_init() {
    let first: Vec<Vec<&str>> = vec![vec!["a", "b", "c", "d"]; 50];
    let second: Vec<Vec<&str>> = vec![vec!["a", "b", "e", "f"]; 50];
    let base = train_corpus(&Corpus::from_sentences("p1", &first, 1).unwrap(), &small_config(), None).unwrap();
    let corpus = Corpus::from_sentences("p2", &second, 1).unwrap();
    let config = TrainConfig {
        epochs: 0,
        ..small_config()
    };
    let warm = train_corpus(&corpus, &config, Some(&base)).unwrap();
    for w in ["a", "b"] {
        assert_eq!(warm.vector(w), base.vector(w));
    }
    assert!(warm.vector("e").unwrap().iter().all(|x| x.abs() <= 0.5 / 10.0));

    let trained = train_corpus(&corpus, &small_config(), Some(&base)).unwrap();
    assert_ne!(trained.vector("a"), base.vector("a"));
}

#[test]
fn training_errors() {
    let tiny = Corpus::from_sentences("t", &[vec!["a", "b"]], 1).unwrap();
    assert!(matches!(
        train_corpus(&tiny, &small_config(), None),
        Err(Error::CorpusTooShort { tokens: 2, window: 5 })
    ));

    let sentences = vec![vec!["a", "b", "c", "d", "e", "f", "g"]; 3];
    let corpus = Corpus::from_sentences("c", &sentences, 1).unwrap();
    let other = train_corpus(
        &corpus,
        &TrainConfig {
            dim: 4,
            ..small_config()
        },
        None,
    )
    .unwrap();
    assert!(matches!(
        train_corpus(&corpus, &small_config(), Some(&other)),
        Err(Error::DimensionMismatch(..))
    ));

    for bad in [
        TrainConfig {
            dim: 0,
            ..small_config()
        },
        TrainConfig {
            window: 0,
            ..small_config()
        },
        TrainConfig {
            negatives: 0,
            ..small_config()
        },
        TrainConfig {
            lr_start: 0.001,
            ..small_config()
        },
        TrainConfig {
            lr_end: 0.0,
            ..small_config()
        },
    ] {
        assert!(
            matches!(train_corpus(&corpus, &bad, None), Err(Error::InvalidArgument(_))),
            "{bad:?}"
        );
    }
}
