//! Two-period topic corpora with planted semantic shifts.
//!
//! Every word has a home topic and a Zipf weight. A sentence picks one
//! topic and draws most of its tokens from it, the rest from the whole
//! vocabulary. In the second ("event") period the shifted words trade home
//! topics pairwise, so each one appears in its partner's former contexts,
//! and their frequency is multiplied by `event_boost`. All other words keep
//! their topic; their event-period weight gets log-normal jitter so the two
//! periods' frequency rankings differ.
//!
//! With `niche_topics > 0` the last topics are filled with words from the
//! shifted rank band only, so they are rare in the base period. In the event
//! period every niche word is boosted and the shifted words are drawn from
//! them, which makes the shifted words part of the event high-frequency
//! stratum.

use std::collections::HashMap;
use std::io::Write;
use std::path::Path;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::LogNormal;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct ShiftScenario {
    pub vocab_size: usize,
    pub topics: usize,
    pub tokens_per_period: usize,
    pub sentence_len: usize,
    /// Share of a sentence's tokens drawn from its topic.
    pub topic_purity: f64,
    pub zipf_exponent: f64,
    pub shifted: usize,
    /// Base-period frequency-rank band, as fractions of the vocabulary,
    /// that shifted words are drawn from.
    pub shifted_rank_band: (f64, f64),
    /// Event-period weight multiplier for shifted words.
    pub event_boost: f64,
    /// Log-normal sigma on the event-period weight of every other word.
    pub event_jitter: f64,
    /// Topics built from band words only and boosted in the event period.
    pub niche_topics: usize,
    pub seed: u64,
}

impl Default for ShiftScenario {
    fn default() -> Self {
        ShiftScenario {
            vocab_size: 2000,
            topics: 20,
            tokens_per_period: 200_000,
            sentence_len: 10,
            topic_purity: 0.8,
            zipf_exponent: 1.0,
            shifted: 20,
            shifted_rank_band: (0.3, 0.6),
            event_boost: 20.0,
            event_jitter: 0.5,
            niche_topics: 0,
            seed: 7,
        }
    }
}

/// Generated periods plus the ground truth needed to score detectors.
#[derive(Debug, Clone)]
pub struct ShiftCorpus {
    pub base: Vec<Vec<String>>,
    pub event: Vec<Vec<String>>,
    pub shifted: Vec<String>,
    pub base_topic: HashMap<String, usize>,
    pub event_topic: HashMap<String, usize>,
}

pub fn word_name(i: usize) -> String {
    format!("w{i:04}")
}

impl ShiftScenario {
    pub fn generate(&self) -> Result<ShiftCorpus> {
        let n = self.vocab_size;
        if self.topics < 2 || n < self.topics || self.sentence_len == 0 {
            return Err(Error::InvalidArgument(
                "need >= 2 topics, vocab >= topics and a positive sentence length".into(),
            ));
        }
        let band = (
            (self.shifted_rank_band.0 * n as f64) as usize,
            ((self.shifted_rank_band.1 * n as f64) as usize).min(n),
        );
        if band.1 < band.0 + self.shifted {
            return Err(Error::InvalidArgument("shifted rank band too narrow".into()));
        }
        let niche_size = n / self.topics;
        if self.niche_topics > 0
            && (self.niche_topics < 2
                || self.niche_topics >= self.topics
                || band.1 - band.0 < self.niche_topics * niche_size
                || self.niche_topics * niche_size < self.shifted)
        {
            return Err(Error::InvalidArgument(
                "niche topics need 2..topics topics that fit in the shifted band".into(),
            ));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);

        // Word i has base-frequency rank i; topics are assigned round-robin
        // over a shuffled order so each topic spans the frequency range.
        let base_weight: Vec<f64> = (0..n)
            .map(|r| 1.0 / ((r + 10) as f64).powf(self.zipf_exponent))
            .collect();
        let mut base_topic = vec![0; n];
        let mut in_niche = vec![false; n];
        let mut band_words: Vec<usize> = (band.0..band.1).collect();
        band_words.shuffle(&mut rng);
        let niche: Vec<usize> = band_words[..self.niche_topics * niche_size].to_vec();
        let mainstream = self.topics - self.niche_topics;
        for (slot, &w) in niche.iter().enumerate() {
            base_topic[w] = mainstream + slot / niche_size;
            in_niche[w] = true;
        }
        let mut order: Vec<usize> = (0..n).filter(|&w| !in_niche[w]).collect();
        order.shuffle(&mut rng);
        for (slot, &w) in order.iter().enumerate() {
            base_topic[w] = slot % mainstream;
        }

        let mut candidates = if self.niche_topics > 0 { niche } else { band_words };
        candidates.shuffle(&mut rng);
        let mut shifted: Vec<usize> = candidates.into_iter().take(self.shifted).collect();
        shifted.sort_unstable();

        // Pair shifted words across different topics and swap their homes.
        let mut event_topic = base_topic.clone();
        let mut pool = shifted.clone();
        pool.shuffle(&mut rng);
        while pool.len() >= 2 {
            let a = pool.pop().expect("len >= 2");
            let pos = pool.iter().position(|&b| base_topic[b] != base_topic[a]).unwrap_or(0);
            let b = pool.swap_remove(pos);
            event_topic[a] = base_topic[b];
            event_topic[b] = base_topic[a];
            if event_topic[a] == base_topic[a] {
                event_topic[a] = (base_topic[a] + 1) % self.topics;
                event_topic[b] = (base_topic[b] + 1) % self.topics;
            }
        }
        if let Some(last) = pool.pop() {
            event_topic[last] = (base_topic[last] + 1 + rng.random_range(0..self.topics - 1)) % self.topics;
        }

        let jitter =
            LogNormal::new(0.0, self.event_jitter.max(0.0)).map_err(|e| Error::InvalidArgument(e.to_string()))?;
        let mut event_weight: Vec<f64> = base_weight.iter().map(|w| w * jitter.sample(&mut rng)).collect();
        for w in (0..n).filter(|&w| in_niche[w]).chain(shifted.iter().copied()) {
            event_weight[w] = base_weight[w] * self.event_boost;
        }

        let base = self.sample_period(&base_weight, &base_topic, &mut rng);
        let event = self.sample_period(&event_weight, &event_topic, &mut rng);
        let named = |topics: &[usize]| -> HashMap<String, usize> {
            topics.iter().enumerate().map(|(i, &t)| (word_name(i), t)).collect()
        };
        Ok(ShiftCorpus {
            base,
            event,
            shifted: shifted.into_iter().map(word_name).collect(),
            base_topic: named(&base_topic),
            event_topic: named(&event_topic),
        })
    }

    fn sample_period(&self, weight: &[f64], topic: &[usize], rng: &mut ChaCha8Rng) -> Vec<Vec<String>> {
        let mut members: Vec<Vec<usize>> = vec![Vec::new(); self.topics];
        for (w, &t) in topic.iter().enumerate() {
            members[t].push(w);
        }
        let per_topic: Vec<WeightedIndex<f64>> = members
            .iter()
            .map(|m| WeightedIndex::new(m.iter().map(|&w| weight[w])).expect("non-empty topic"))
            .collect();
        let topic_mass: Vec<f64> = members.iter().map(|m| m.iter().map(|&w| weight[w]).sum()).collect();
        let pick_topic = WeightedIndex::new(&topic_mass).expect("positive mass");
        let background = WeightedIndex::new(weight).expect("positive weights");

        let sentences = self.tokens_per_period.div_ceil(self.sentence_len);
        (0..sentences)
            .map(|_| {
                let t = pick_topic.sample(rng);
                (0..self.sentence_len)
                    .map(|_| {
                        let w = if rng.random::<f64>() < self.topic_purity {
                            members[t][per_topic[t].sample(rng)]
                        } else {
                            background.sample(rng)
                        };
                        word_name(w)
                    })
                    .collect()
            })
            .collect()
    }
}

/// Write sentences one per line, tokens separated by single spaces.
pub fn write_sentences(sentences: &[Vec<String>], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = std::io::BufWriter::new(file);
    for s in sentences {
        writeln!(out, "{}", s.join(" ")).map_err(|e| Error::io(path, e))?;
    }
    out.flush().map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> ShiftScenario {
        ShiftScenario {
            vocab_size: 200,
            topics: 10,
            tokens_per_period: 5_000,
            shifted: 5,
            ..ShiftScenario::default()
        }
    }

    #[test]
    fn shifted_words_change_topic() {
        let corpus = small().generate().unwrap();
        assert_eq!(corpus.shifted.len(), 5);
        for w in &corpus.shifted {
            assert_ne!(corpus.base_topic[w], corpus.event_topic[w], "{w}");
        }
        let moved = corpus
            .base_topic
            .iter()
            .filter(|(w, t)| corpus.event_topic[*w] != **t)
            .count();
        assert_eq!(moved, 5);
    }

    #[test]
    fn generation_is_seeded() {
        let a = small().generate().unwrap();
        let b = small().generate().unwrap();
        assert_eq!(a.base, b.base);
        assert_eq!(a.event, b.event);
        assert_eq!(a.base.iter().map(Vec::len).sum::<usize>(), 5_000);
    }
}
