use std::collections::{BTreeMap, HashSet};
use std::io::Cursor;

use proptest::prelude::*;

use semshift::text::{load_stopwords, preprocess_document, process_lines, run_corpus, CorpusStats, PipelineConfig};

fn config(stop: &[&str], min_tokens: usize) -> PipelineConfig {
    PipelineConfig::default()
        .with_stopwords(stop.iter().copied())
        .with_min_tokens(min_tokens)
}

fn tokens(raw: &str, cfg: &PipelineConfig) -> Option<Vec<String>> {
    preprocess_document(raw, cfg)
}

#[test]
fn strips_urls_mentions_and_stopwords() {
    let got = tokens(
        "Check THIS https://t.co/x @user #COVID19 now",
        &config(&["this", "now"], 0),
    );
    assert_eq!(got.unwrap(), ["check", "#covid19"]);
}

#[test]
fn hashtag_and_bare_word_stay_distinct() {
    let got = tokens("#Corona #corona CORONA", &config(&[], 0));
    assert_eq!(got.unwrap(), ["#corona", "#corona", "corona"]);
}

#[test]
fn short_documents_are_dropped() {
    let nine = "one two three four five six seven eight nine";
    assert_eq!(tokens(nine, &config(&[], 10)), None);
    assert_eq!(tokens(&format!("{nine} ten"), &config(&[], 10)).unwrap().len(), 10);
    assert_eq!(PipelineConfig::default().min_tokens, 10);
}

#[test]
fn emoji_and_punctuation_are_deleted() {
    let got = tokens("Stay safe!!! 😷😷 it's co-vid... #Stay_Home", &config(&[], 0)).unwrap();
    assert_eq!(got, ["stay", "safe", "its", "covid", "#stayhome"]);
}

#[test]
fn glued_hashtags_split() {
    let got = tokens("#ppe#masks a#b # ##", &config(&[], 0)).unwrap();
    assert_eq!(got, ["#ppe", "#masks", "a", "#b"]);
}

#[test]
fn dropping_hashtags_is_optional() {
    let mut cfg = config(&[], 0);
    cfg.keep_hashtags = false;
    assert_eq!(tokens("stay #home", &cfg).unwrap(), ["stay"]);
}

#[test]
fn stop_list_file_is_lowercased_and_skips_comments() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("stop.txt");
    std::fs::write(&path, "; comment\nThe\n  and \n\n").unwrap();
    assert_eq!(
        load_stopwords(&path).unwrap(),
        HashSet::from(["the".to_string(), "and".to_string()])
    );
}

#[test]
fn shipped_stop_list_loads() {
    let list = load_stopwords(concat!(env!("CARGO_MANIFEST_DIR"), "/data/stopwords_en.txt")).unwrap();
    assert_eq!(list.len(), 179);
    assert!(list.contains("the") && list.contains("wouldn't"));
}

#[test]
fn counts_kept_and_dropped_documents() {
    let input = "a a #b\nx\n";
    let stats = process_lines(Cursor::new(input), &config(&[], 2), |_| Ok(())).unwrap();
    assert_eq!((stats.documents_kept, stats.documents_dropped), (1, 1));
    assert_eq!(
        stats.word_frequencies,
        BTreeMap::from([("a".into(), 2), ("#b".into(), 1)])
    );
    assert_eq!(stats.hashtag_frequencies, BTreeMap::from([("#b".into(), 1)]));
}

const SAMPLE: &str = "\
RT @who: Wash your hands!! https://who.int/covid #COVID19 #StayHome
Lockdown day 12, still baking bread #quarantine #stayhome 🍞
@nhs thank you #heroes #ppe #NHS nurses doctors cleaners
ok
Markets crash as oil falls below zero #economy #oil #covid19
";

#[test]
fn run_corpus_matches_a_recount_of_its_output() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("raw.txt");
    let output = dir.path().join("tokens.txt");
    std::fs::write(&input, SAMPLE).unwrap();
    let cfg = config(&["your", "as", "below"], 3);
    let stats = run_corpus(&input, &cfg, &output).unwrap();

    let written = std::fs::read_to_string(&output).unwrap();
    let mut words = BTreeMap::new();
    let mut tags = BTreeMap::new();
    for tok in written.split_whitespace() {
        *words.entry(tok.to_string()).or_insert(0u64) += 1;
        if tok.starts_with('#') {
            *tags.entry(tok.to_string()).or_insert(0u64) += 1;
        }
    }
    assert_eq!(stats.word_frequencies, words);
    assert_eq!(stats.hashtag_frequencies, tags);
    assert_eq!(stats.documents_kept, written.lines().count() as u64);
    assert_eq!(
        stats.documents_kept + stats.documents_dropped,
        SAMPLE.lines().count() as u64
    );
    assert_eq!(stats.documents_dropped, 1);
}

#[test]
fn run_corpus_is_byte_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("raw.txt");
    std::fs::write(&input, SAMPLE).unwrap();
    let cfg = config(&[], 1);
    let a = run_corpus(&input, &cfg, dir.path().join("a.txt")).unwrap();
    let b = run_corpus(&input, &cfg, dir.path().join("b.txt")).unwrap();
    assert_eq!(
        std::fs::read(dir.path().join("a.txt")).unwrap(),
        std::fs::read(dir.path().join("b.txt")).unwrap()
    );
    assert_eq!(a.to_json().unwrap(), b.to_json().unwrap());
}

#[test]
fn stats_json_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let stats = process_lines(Cursor::new(SAMPLE), &config(&[], 1), |_| Ok(())).unwrap();
    stats.save_json(dir.path().join("s.json")).unwrap();
    assert_eq!(CorpusStats::load_json(dir.path().join("s.json")).unwrap(), stats);
}

proptest! {
    #[test]
    fn output_tokens_are_clean(raw in "[ -~à-ÿ😀-😊\t#@/:]{0,80}") {
        let cfg = config(&[], 0);
        let toks = preprocess_document(&raw, &cfg).unwrap();
        for t in &toks {
            prop_assert!(!t.is_empty());
            prop_assert!(t.chars().all(|c| c.is_ascii_lowercase() || c.is_ascii_digit() || c == '#'), "{t:?}");
            if t.starts_with('#') {
                prop_assert!(t.len() >= 2 && t.matches('#').count() == 1, "{t:?}");
            } else {
                prop_assert!(!t.contains('#'));
            }
        }
    }

    #[test]
    fn line_counts_add_up(lines in prop::collection::vec("[a-z #@]{0,30}", 0..20), min in 0usize..4) {
        let text = lines.join("\n");
        let stats = process_lines(Cursor::new(text.as_str()), &config(&[], min), |_| Ok(())).unwrap();
        prop_assert_eq!(stats.documents_kept + stats.documents_dropped, text.lines().count() as u64);
        for (tag, n) in &stats.hashtag_frequencies {
            prop_assert_eq!(stats.word_frequencies.get(tag), Some(n));
        }
    }
}
