//! Tweet-style text normalization and corpus statistics.

use std::collections::{BTreeMap, HashSet};
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;
use std::sync::LazyLock;

use regex::Regex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

static URL: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"https?://\S*").unwrap());
static MENTION: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"@\w+").unwrap());

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineConfig {
    pub stopwords: HashSet<String>,
    pub min_tokens: usize,
    /// Drop `#`-tokens entirely when false.
    pub keep_hashtags: bool,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            stopwords: HashSet::new(),
            min_tokens: 10,
            keep_hashtags: true,
        }
    }
}

impl PipelineConfig {
    pub fn with_stopwords<I, S>(mut self, words: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        self.stopwords = words.into_iter().map(|w| w.as_ref().to_lowercase()).collect();
        self
    }

    pub fn with_min_tokens(mut self, min_tokens: usize) -> Self {
        self.min_tokens = min_tokens;
        self
    }
}

/// Read a stop-word list, one word per line. Blank lines and lines starting
/// with `;` are ignored; entries are lowercased.
pub fn load_stopwords(path: impl AsRef<Path>) -> Result<HashSet<String>> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut words = HashSet::new();
    for line in BufReader::new(file).lines() {
        let line = line.map_err(|e| Error::io(path, e))?;
        let word = line.trim();
        if word.is_empty() || word.starts_with(';') {
            continue;
        }
        words.insert(word.to_lowercase());
    }
    Ok(words)
}

/// Normalize one raw document into tokens, or `None` when it ends up shorter
/// than `config.min_tokens`.
///
/// Steps run in this order: lowercase, strip URLs and `@mentions`, delete
/// every character outside `[a-z0-9#]` and whitespace, split on whitespace,
/// drop stop words, apply the length filter.
pub fn preprocess_document(raw: &str, config: &PipelineConfig) -> Option<Vec<String>> {
    let lowered = raw.to_lowercase();
    let no_urls = URL.replace_all(&lowered, " ");
    let no_mentions = MENTION.replace_all(&no_urls, " ");
    let cleaned: String = no_mentions
        .chars()
        .filter(|c| c.is_ascii_lowercase() || c.is_ascii_digit() || *c == '#' || c.is_whitespace())
        .collect();

    let mut tokens = Vec::new();
    for piece in cleaned.split_whitespace() {
        split_hashtags(piece, &mut tokens);
    }
    tokens.retain(|t| {
        if t.starts_with('#') {
            config.keep_hashtags
        } else {
            !config.stopwords.contains(t)
        }
    });

    (tokens.len() >= config.min_tokens).then_some(tokens)
}

/// `a#b##c` becomes `a`, `#b`, `#c`; a bare run of `#` is dropped.
fn split_hashtags(piece: &str, out: &mut Vec<String>) {
    let mut rest = piece;
    loop {
        let body_start = rest.len() - rest.trim_start_matches('#').len();
        let hashed = body_start > 0;
        let body = &rest[body_start..];
        let end = body.find('#').unwrap_or(body.len());
        let word = &body[..end];
        if !word.is_empty() {
            out.push(if hashed { format!("#{word}") } else { word.to_string() });
        }
        if end == body.len() {
            break;
        }
        rest = &body[end..];
    }
}

/// Counts over the documents that survived preprocessing.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CorpusStats {
    pub documents_kept: u64,
    pub documents_dropped: u64,
    pub word_frequencies: BTreeMap<String, u64>,
    pub hashtag_frequencies: BTreeMap<String, u64>,
}

impl CorpusStats {
    fn add(&mut self, tokens: &[String]) {
        self.documents_kept += 1;
        for token in tokens {
            *self.word_frequencies.entry(token.clone()).or_insert(0) += 1;
            if token.starts_with('#') {
                *self.hashtag_frequencies.entry(token.clone()).or_insert(0) += 1;
            }
        }
    }

    pub fn total_tokens(&self) -> u64 {
        self.word_frequencies.values().sum()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn save_json(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let mut text = self.to_json()?;
        text.push('\n');
        std::fs::write(path, text).map_err(|e| Error::io(path, e))
    }

    pub fn load_json(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(serde_json::from_str(&text)?)
    }
}

/// Preprocess every line of `input` and write one space-joined token line
/// per kept document to `output`, in input order.
pub fn run_corpus(input: impl AsRef<Path>, config: &PipelineConfig, output: impl AsRef<Path>) -> Result<CorpusStats> {
    let (input, output) = (input.as_ref(), output.as_ref());
    let reader = BufReader::new(File::open(input).map_err(|e| Error::io(input, e))?);
    let mut writer = BufWriter::new(File::create(output).map_err(|e| Error::io(output, e))?);
    let stats = process_lines(reader, config, |tokens| {
        writer.write_all(tokens.join(" ").as_bytes())?;
        writer.write_all(b"\n")
    })
    .map_err(|e| with_io_path(e, input))?;
    writer.flush().map_err(|e| Error::io(output, e))?;
    Ok(stats)
}

fn with_io_path(err: Error, path: &Path) -> Error {
    match err {
        Error::Io { source, .. } => Error::io(path, source),
        other => other,
    }
}

/// Streaming core of [`run_corpus`]; `emit` sees each kept document.
pub fn process_lines<R, F>(reader: R, config: &PipelineConfig, mut emit: F) -> Result<CorpusStats>
where
    R: BufRead,
    F: FnMut(&[String]) -> std::io::Result<()>,
{
    let mut stats = CorpusStats::default();
    for line in reader.lines() {
        let line = line.map_err(|e| Error::io("<input>", e))?;
        match preprocess_document(&line, config) {
            Some(tokens) => {
                emit(&tokens).map_err(|e| Error::io("<output>", e))?;
                stats.add(&tokens);
            }
            None => stats.documents_dropped += 1,
        }
    }
    Ok(stats)
}
