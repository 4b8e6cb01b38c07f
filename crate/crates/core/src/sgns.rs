//! Skip-gram with negative sampling.
//!
//! The trainer follows the usual word2vec conventions: a per-pair window
//! shrunk uniformly in `1..=window`, negatives drawn from the unigram
//! distribution raised to 3/4, input vectors initialized uniformly in
//! `[-0.5/dim, 0.5/dim]` and output vectors at zero. The learning rate
//! falls linearly from `lr_start` to `lr_end` within every epoch and resets
//! at the next one. Only input vectors are exported.
//!
//! Pairs whose score already satisfies `|u.v| >= 6` are skipped, as in
//! gensim.
//!
//! With `threads == 1` training is single-threaded and bit-reproducible for
//! a fixed seed. With more threads, workers share the weight matrices
//! without locks and lost updates are tolerated.

use std::cell::Cell;
use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;
use std::sync::atomic::{AtomicU64, Ordering};
use std::time::Instant;

use ndarray::Array2;
use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::embedding::{label_from_path, EmbeddingSpace};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub dim: usize,
    pub window: usize,
    pub min_count: u64,
    pub epochs: usize,
    pub lr_start: f64,
    pub lr_end: f64,
    pub negatives: usize,
    /// Frequent-word downsampling threshold; `0.0` disables it.
    pub subsample_threshold: f64,
    pub seed: u64,
    /// 1 selects the deterministic single-threaded mode.
    pub threads: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            dim: 200,
            window: 5,
            min_count: 10,
            epochs: 10,
            lr_start: 0.025,
            lr_end: 0.0025,
            negatives: 5,
            subsample_threshold: 0.0,
            seed: 1,
            threads: 1,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidArgument(msg.to_string()));
        if self.dim == 0 {
            return bad("dim must be >= 1");
        }
        if self.window == 0 {
            return bad("window must be >= 1");
        }
        if !(self.lr_end > 0.0 && self.lr_start >= self.lr_end) {
            return bad("learning rates must satisfy lr_start >= lr_end > 0");
        }
        if self.negatives == 0 {
            return bad("negatives must be >= 1");
        }
        if self.subsample_threshold.is_nan() || self.subsample_threshold < 0.0 {
            return bad("subsample_threshold must be >= 0");
        }
        if self.threads == 0 {
            return bad("threads must be >= 1");
        }
        Ok(())
    }
}

/// Learning rate after `epoch_progress` of the current epoch has been seen.
pub fn learning_rate(epoch_progress: f64, config: &TrainConfig) -> f64 {
    let p = epoch_progress.clamp(0.0, 1.0);
    // Interpolated this way both endpoints come out exact.
    config.lr_start * (1.0 - p) + config.lr_end * p
}

/// Retained tokens ordered by descending count, then by token.
#[derive(Debug, Clone, PartialEq)]
pub struct Vocabulary {
    words: Vec<String>,
    counts: Vec<u64>,
    index: HashMap<String, usize>,
    total_tokens: u64,
}

impl Vocabulary {
    pub fn from_counts(counts: HashMap<String, u64>, min_count: u64) -> Result<Self> {
        let mut kept: Vec<(String, u64)> = counts.into_iter().filter(|&(_, c)| c >= min_count && c > 0).collect();
        if kept.is_empty() {
            return Err(Error::EmptyVocabulary);
        }
        kept.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
        let total_tokens = kept.iter().map(|(_, c)| c).sum();
        let index = kept.iter().enumerate().map(|(i, (w, _))| (w.clone(), i)).collect();
        let (words, counts) = kept.into_iter().unzip();
        Ok(Vocabulary {
            words,
            counts,
            index,
            total_tokens,
        })
    }

    pub fn words(&self) -> &[String] {
        &self.words
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn index_of(&self, word: &str) -> Option<usize> {
        self.index.get(word).copied()
    }

    pub fn count(&self, word: &str) -> Option<u64> {
        self.index_of(word).map(|i| self.counts[i])
    }

    pub fn total_tokens(&self) -> u64 {
        self.total_tokens
    }
}

fn read_token_lines(path: &Path) -> Result<Vec<Vec<String>>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    BufReader::new(file)
        .lines()
        .map(|line| {
            line.map(|l| l.split_whitespace().map(str::to_string).collect())
                .map_err(|e| Error::io(path, e))
        })
        .collect()
}

fn count_tokens<S: AsRef<str>>(sentences: &[Vec<S>]) -> HashMap<String, u64> {
    let mut counts = HashMap::new();
    for token in sentences.iter().flatten() {
        *counts.entry(token.as_ref().to_string()).or_insert(0) += 1;
    }
    counts
}

pub fn build_vocab(corpus: impl AsRef<Path>, min_count: u64) -> Result<Vocabulary> {
    let sentences = read_token_lines(corpus.as_ref())?;
    Vocabulary::from_counts(count_tokens(&sentences), min_count)
}

/// A token corpus encoded against its own vocabulary.
#[derive(Debug, Clone)]
pub struct Corpus {
    label: String,
    vocab: Vocabulary,
    sentences: Vec<Vec<u32>>,
}

impl Corpus {
    pub fn from_file(path: impl AsRef<Path>, min_count: u64) -> Result<Self> {
        let path = path.as_ref();
        let sentences = read_token_lines(path)?;
        Self::from_sentences(label_from_path(path), &sentences, min_count)
    }

    pub fn from_sentences<S: AsRef<str>>(
        label: impl Into<String>,
        sentences: &[Vec<S>],
        min_count: u64,
    ) -> Result<Self> {
        let vocab = Vocabulary::from_counts(count_tokens(sentences), min_count)?;
        let encoded = sentences
            .iter()
            .map(|s| {
                s.iter()
                    .filter_map(|t| vocab.index_of(t.as_ref()).map(|i| i as u32))
                    .collect::<Vec<u32>>()
            })
            .filter(|s| !s.is_empty())
            .collect();
        Ok(Corpus {
            label: label.into(),
            vocab,
            sentences: encoded,
        })
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn vocab(&self) -> &Vocabulary {
        &self.vocab
    }

    pub fn sentences(&self) -> &[Vec<u32>] {
        &self.sentences
    }
}

/// Train on a token file (one document per line). The result is labelled
/// with the file stem.
pub fn train(corpus: impl AsRef<Path>, config: &TrainConfig, init: Option<&EmbeddingSpace>) -> Result<EmbeddingSpace> {
    let corpus = Corpus::from_file(corpus, config.min_count)?;
    train_corpus(&corpus, config, init)
}

/// Train on an encoded corpus. Words present in `init` start from its
/// vectors; the rest are drawn at random.
pub fn train_corpus(corpus: &Corpus, config: &TrainConfig, init: Option<&EmbeddingSpace>) -> Result<EmbeddingSpace> {
    config.validate()?;
    let vocab = corpus.vocab();
    if vocab.total_tokens() <= config.window as u64 {
        return Err(Error::CorpusTooShort {
            tokens: vocab.total_tokens(),
            window: config.window,
        });
    }
    if let Some(init) = init {
        if init.dim() != config.dim {
            return Err(Error::DimensionMismatch(init.dim(), config.dim));
        }
    }

    let dim = config.dim;
    let n = vocab.len();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let scale = 0.5 / dim as f64;
    let mut input: Vec<f64> = (0..n * dim).map(|_| rng.random_range(-scale..scale)).collect();
    let mut warm = 0;
    if let Some(init) = init {
        for (i, word) in vocab.words().iter().enumerate() {
            if let Some(v) = init.vector(word) {
                input[i * dim..(i + 1) * dim].copy_from_slice(v);
                warm += 1;
            }
        }
        log::info!("warm start: {warm} of {n} words initialized from {:?}", init.label());
    }
    let mut output = vec![0.0; n * dim];

    let noise = WeightedIndex::new(vocab.counts().iter().map(|&c| (c as f64).powf(0.75)))
        .expect("vocabulary counts are positive");
    let keep_prob = keep_probabilities(vocab, config.subsample_threshold);
    let job = Job {
        config,
        noise: &noise,
        keep_prob: keep_prob.as_deref(),
    };

    for epoch in 0..config.epochs {
        let started = Instant::now();
        let pairs = if config.threads == 1 {
            let input = Cell::from_mut(input.as_mut_slice()).as_slice_of_cells();
            let output = Cell::from_mut(output.as_mut_slice()).as_slice_of_cells();
            job.run(corpus.sentences(), input, output, &mut rng)
        } else {
            run_parallel(&job, corpus.sentences(), &mut input, &mut output, epoch)
        };
        let secs = started.elapsed().as_secs_f64().max(1e-9);
        log::info!(
            "epoch {}/{}: lr {:.6} -> {:.6}, {:.0} pairs/sec",
            epoch + 1,
            config.epochs,
            config.lr_start,
            config.lr_end,
            pairs as f64 / secs
        );
    }

    if input.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument(
            "training diverged to non-finite values; lower the learning rate".into(),
        ));
    }
    let vectors = Array2::from_shape_vec((n, dim), input).expect("n * dim buffer");
    EmbeddingSpace::new(
        corpus.label(),
        vocab.words().to_vec(),
        vectors,
        Some(vocab.counts().to_vec()),
    )
}

fn keep_probabilities(vocab: &Vocabulary, threshold: f64) -> Option<Vec<f64>> {
    if threshold <= 0.0 {
        return None;
    }
    let total = vocab.total_tokens() as f64;
    Some(
        vocab
            .counts()
            .iter()
            .map(|&c| {
                let ratio = c as f64 / (threshold * total);
                ((ratio.sqrt() + 1.0) / ratio).min(1.0)
            })
            .collect(),
    )
}

/// Shared weight storage; `Cell` for the single-threaded path, relaxed
/// atomics for lock-free parallel updates.
trait Weights {
    fn load(&self, i: usize) -> f64;
    fn store(&self, i: usize, v: f64);
}

impl Weights for [Cell<f64>] {
    #[inline(always)]
    fn load(&self, i: usize) -> f64 {
        self[i].get()
    }
    #[inline(always)]
    fn store(&self, i: usize, v: f64) {
        self[i].set(v)
    }
}

impl Weights for [AtomicU64] {
    #[inline(always)]
    fn load(&self, i: usize) -> f64 {
        f64::from_bits(self[i].load(Ordering::Relaxed))
    }
    #[inline(always)]
    fn store(&self, i: usize, v: f64) {
        self[i].store(v.to_bits(), Ordering::Relaxed)
    }
}

struct Job<'a> {
    config: &'a TrainConfig,
    noise: &'a WeightedIndex<f64>,
    keep_prob: Option<&'a [f64]>,
}

impl Job<'_> {
    /// One epoch over `sentences`; returns the number of positive pairs.
    fn run<W: Weights + ?Sized>(&self, sentences: &[Vec<u32>], input: &W, output: &W, rng: &mut ChaCha8Rng) -> u64 {
        let dim = self.config.dim;
        let total: usize = sentences.iter().map(Vec::len).sum();
        let mut seen = 0usize;
        let mut center = vec![0.0; dim];
        let mut grad = vec![0.0; dim];
        let mut kept = Vec::new();
        let mut pairs = 0u64;

        for sentence in sentences {
            kept.clear();
            match self.keep_prob {
                Some(p) => kept.extend(
                    sentence
                        .iter()
                        .copied()
                        .filter(|&w| rng.random::<f64>() < p[w as usize]),
                ),
                None => kept.extend_from_slice(sentence),
            }
            for pos in 0..kept.len() {
                let lr = learning_rate((seen + pos) as f64 / total as f64, self.config);
                let reach = rng.random_range(1..=self.config.window);
                let lo = pos.saturating_sub(reach);
                let hi = (pos + reach).min(kept.len() - 1);
                for ctx in lo..=hi {
                    if ctx == pos {
                        continue;
                    }
                    self.train_pair(
                        kept[pos] as usize,
                        kept[ctx] as usize,
                        lr,
                        input,
                        output,
                        &mut center,
                        &mut grad,
                        rng,
                    );
                    pairs += 1;
                }
            }
            seen += sentence.len();
        }
        pairs
    }

    #[allow(clippy::too_many_arguments)]
    #[inline]
    fn train_pair<W: Weights + ?Sized>(
        &self,
        center_word: usize,
        context_word: usize,
        lr: f64,
        input: &W,
        output: &W,
        center: &mut [f64],
        grad: &mut [f64],
        rng: &mut ChaCha8Rng,
    ) {
        let dim = self.config.dim;
        let base = center_word * dim;
        for (k, c) in center.iter_mut().enumerate() {
            *c = input.load(base + k);
        }
        grad.fill(0.0);
        for draw in 0..=self.config.negatives {
            let (target, label) = if draw == 0 {
                (context_word, 1.0)
            } else {
                let t = self.noise.sample(rng);
                if t == context_word {
                    continue;
                }
                (t, 0.0)
            };
            let out = target * dim;
            let mut dot = 0.0;
            for (k, c) in center.iter().enumerate() {
                dot += c * output.load(out + k);
            }
            if dot.abs() >= MAX_DOT {
                continue;
            }
            let g = (label - sigmoid(dot)) * lr;
            for k in 0..dim {
                let u = output.load(out + k);
                grad[k] += g * u;
                output.store(out + k, u + g * center[k]);
            }
        }
        for (k, g) in grad.iter().enumerate() {
            input.store(base + k, center[k] + g);
        }
    }
}

/// Scores beyond this are treated as saturated.
const MAX_DOT: f64 = 6.0;

#[inline]
fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

fn run_parallel(job: &Job<'_>, sentences: &[Vec<u32>], input: &mut [f64], output: &mut [f64], epoch: usize) -> u64 {
    let to_atomic = |buf: &mut [f64]| -> Vec<AtomicU64> { buf.iter().map(|v| AtomicU64::new(v.to_bits())).collect() };
    let shared_in = to_atomic(input);
    let shared_out = to_atomic(output);
    let threads = job.config.threads;
    let chunk = sentences.len().div_ceil(threads).max(1);

    let pairs = std::thread::scope(|scope| {
        let handles: Vec<_> = sentences
            .chunks(chunk)
            .enumerate()
            .map(|(worker, part)| {
                let (shared_in, shared_out) = (&shared_in[..], &shared_out[..]);
                scope.spawn(move || {
                    let seed = job.config.seed.wrapping_add(1 + (epoch * threads + worker) as u64);
                    let mut rng = ChaCha8Rng::seed_from_u64(seed);
                    job.run(part, shared_in, shared_out, &mut rng)
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("worker panicked")).sum()
    });

    for (dst, src) in input.iter_mut().zip(&shared_in) {
        *dst = f64::from_bits(src.load(Ordering::Relaxed));
    }
    for (dst, src) in output.iter_mut().zip(&shared_out) {
        *dst = f64::from_bits(src.load(Ordering::Relaxed));
    }
    pairs
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_config() -> TrainConfig {
        TrainConfig {
            dim: 10,
            min_count: 1,
            epochs: 3,
            ..TrainConfig::default()
        }
    }

    fn sentences(text: &str) -> Vec<Vec<String>> {
        text.lines()
            .map(|l| l.split_whitespace().map(str::to_string).collect())
            .collect()
    }

    #[test]
    fn schedule_endpoints() {
        let c = TrainConfig::default();
        assert_eq!(learning_rate(0.0, &c), 0.025);
        assert_eq!(learning_rate(1.0, &c), 0.0025);
        assert!((learning_rate(0.5, &c) - 0.01375).abs() < 1e-15);
        assert!((learning_rate(0.999_999, &c) - 0.0025).abs() < 1e-7);
    }

    #[test]
    fn vocab_threshold_and_order() {
        let counts: HashMap<String, u64> = [("a", 3), ("b", 1), ("c", 3), ("d", 2)]
            .map(|(w, c)| (w.to_string(), c))
            .into();
        let v = Vocabulary::from_counts(counts.clone(), 2).unwrap();
        assert_eq!(v.words(), ["a", "c", "d"]);
        assert_eq!(v.counts(), [3, 3, 2]);
        assert_eq!(v.total_tokens(), 8);
        assert!(matches!(
            Vocabulary::from_counts(counts, 4),
            Err(Error::EmptyVocabulary)
        ));
    }

    #[test]
    fn short_corpus_is_rejected() {
        let corpus = Corpus::from_sentences("s", &sentences("a b c"), 1).unwrap();
        let err = train_corpus(&corpus, &small_config(), None).unwrap_err();
        assert!(matches!(err, Error::CorpusTooShort { tokens: 3, window: 5 }));
    }

    #[test]
    fn init_dimension_must_match() {
        let corpus = Corpus::from_sentences("s", &sentences(&"a b c d e f g\n".repeat(3)), 1).unwrap();
        let init = EmbeddingSpace::new("i", vec!["a".into()], Array2::ones((1, 3)), None).unwrap();
        let err = train_corpus(&corpus, &small_config(), Some(&init)).unwrap_err();
        assert!(matches!(err, Error::DimensionMismatch(3, 10)));
    }

    #[test]
    fn invalid_configs() {
        let mut c = small_config();
        c.lr_end = 0.0;
        assert!(c.validate().is_err());
        let mut c = small_config();
        c.lr_end = 0.1;
        assert!(c.validate().is_err());
        let mut c = small_config();
        c.negatives = 0;
        assert!(c.validate().is_err());
    }

    #[test]
    fn subsampling_keeps_rare_words() {
        let counts: HashMap<String, u64> = [("the", 10_000), ("rare", 1)].map(|(w, c)| (w.to_string(), c)).into();
        let v = Vocabulary::from_counts(counts, 1).unwrap();
        let p = keep_probabilities(&v, 1e-3).unwrap();
        assert!(p[0] < 0.1);
        assert_eq!(p[1], 1.0);
    }

    #[test]
    fn parallel_mode_produces_finite_vectors() {
        let text = "aa bb cc dd\nee ff gg hh\n".repeat(200);
        let corpus = Corpus::from_sentences("p", &sentences(&text), 1).unwrap();
        let config = TrainConfig {
            threads: 4,
            ..small_config()
        };
        let space = train_corpus(&corpus, &config, None).unwrap();
        assert_eq!(space.len(), 8);
        assert!(space.vectors().iter().all(|v| v.is_finite()));
    }
}
