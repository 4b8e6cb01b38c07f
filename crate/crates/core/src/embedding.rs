//! Embedding spaces: vocabulary, dense vectors and per-word corpus counts.
//!
//! Files use the word2vec text format: a `<vocab_size> <dim>` header
//! followed by one `<token> <d floats>` row per word. Corpus counts travel
//! in a separate vocabulary file with one `<token> <count>` pair per line.

use std::collections::{HashMap, HashSet};
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use ndarray::{Array2, ArrayView1};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One corpus or period mapped to dense vectors.
///
/// Row `i` of the vector matrix belongs to `words()[i]`. Hashtags keep
/// their leading `#`.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingSpace {
    label: String,
    aligned_to: Option<String>,
    words: Vec<String>,
    index: HashMap<String, usize>,
    vectors: Array2<f64>,
    frequencies: Option<Vec<u64>>,
}

impl EmbeddingSpace {
    pub fn new(
        label: impl Into<String>,
        words: Vec<String>,
        vectors: Array2<f64>,
        frequencies: Option<Vec<u64>>,
    ) -> Result<Self> {
        if words.len() != vectors.nrows() {
            return Err(Error::InvalidArgument(format!(
                "{} words but {} vector rows",
                words.len(),
                vectors.nrows()
            )));
        }
        if let Some(freqs) = &frequencies {
            if freqs.len() != words.len() {
                return Err(Error::InvalidArgument(format!(
                    "{} words but {} frequencies",
                    words.len(),
                    freqs.len()
                )));
            }
        }
        let mut index = HashMap::with_capacity(words.len());
        for (i, word) in words.iter().enumerate() {
            if index.insert(word.clone(), i).is_some() {
                return Err(Error::DuplicateToken {
                    line: i + 2,
                    token: word.clone(),
                });
            }
        }
        for (i, row) in vectors.rows().into_iter().enumerate() {
            if row.iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFinite { line: i + 2 });
            }
        }
        Ok(EmbeddingSpace {
            label: label.into(),
            aligned_to: None,
            words,
            index,
            vectors: vectors.as_standard_layout().into_owned(),
            frequencies,
        })
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn set_label(&mut self, label: impl Into<String>) {
        self.label = label.into();
    }

    /// Identifier of the coordinate frame the vectors currently live in:
    /// the label of the space they were rotated into, or the own label.
    pub fn frame(&self) -> &str {
        self.aligned_to.as_deref().unwrap_or(&self.label)
    }

    pub(crate) fn set_frame(&mut self, frame: &str) {
        self.aligned_to = if frame == self.label {
            None
        } else {
            Some(frame.to_string())
        };
    }

    pub fn words(&self) -> &[String] {
        &self.words
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.vectors.ncols()
    }

    pub fn vectors(&self) -> &Array2<f64> {
        &self.vectors
    }

    pub(crate) fn vectors_mut(&mut self) -> &mut Array2<f64> {
        &mut self.vectors
    }

    pub fn index_of(&self, word: &str) -> Option<usize> {
        self.index.get(word).copied()
    }

    pub fn contains(&self, word: &str) -> bool {
        self.index.contains_key(word)
    }

    pub fn row(&self, i: usize) -> &[f64] {
        self.vectors
            .row(i)
            .to_slice()
            .expect("standard layout rows are contiguous")
    }

    pub fn vector(&self, word: &str) -> Option<&[f64]> {
        self.index_of(word).map(|i| self.row(i))
    }

    pub fn row_view(&self, i: usize) -> ArrayView1<'_, f64> {
        self.vectors.row(i)
    }

    pub fn frequencies(&self) -> Option<&[u64]> {
        self.frequencies.as_deref()
    }

    pub fn frequency(&self, word: &str) -> Option<u64> {
        let freqs = self.frequencies.as_ref()?;
        self.index_of(word).map(|i| freqs[i])
    }

    /// Attach corpus counts from a token→count table. Words absent from the
    /// table get a count of zero.
    pub fn set_frequencies(&mut self, table: &HashMap<String, u64>) {
        self.frequencies = Some(self.words.iter().map(|w| table.get(w).copied().unwrap_or(0)).collect());
    }

    /// Synthesize counts from row order (`|V| - i`). word2vec files are
    /// conventionally written most-frequent first, so this recovers the
    /// frequency ranking of externally trained models that ship no counts.
    pub fn set_rank_frequencies(&mut self) {
        let n = self.len() as u64;
        self.frequencies = Some((0..n).map(|i| n - i).collect());
    }

    /// Token → count table, if counts are attached.
    pub fn frequency_table(&self) -> Option<HashMap<String, u64>> {
        let freqs = self.frequencies.as_ref()?;
        Some(self.words.iter().cloned().zip(freqs.iter().copied()).collect())
    }
}

/// A word and its cosine similarity to a query vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VectorQueryResult {
    pub word: String,
    pub similarity: f64,
}

/// Cosine similarity, clamped to `[-1, 1]`.
pub fn cosine_similarity(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch(a.len(), b.len()));
    }
    let (mut dot, mut na, mut nb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        dot += x * y;
        na += x * x;
        nb += y * y;
    }
    if na == 0.0 || nb == 0.0 {
        return Err(Error::ZeroVector);
    }
    Ok((dot / (na.sqrt() * nb.sqrt())).clamp(-1.0, 1.0))
}

/// The `k` words most similar to `query`, best first.
///
/// Ties keep vocabulary order. Excluded tokens are skipped, so fewer than
/// `k` results come back only when exclusions exhaust the vocabulary.
/// Rows that are exactly zero have no defined similarity and are skipped.
pub fn nearest_neighbors(
    space: &EmbeddingSpace,
    query: &[f64],
    k: usize,
    exclude: &HashSet<&str>,
) -> Result<Vec<VectorQueryResult>> {
    if space.is_empty() {
        return Err(Error::EmptySpace);
    }
    if k == 0 || k > space.len() {
        return Err(Error::InvalidArgument(format!(
            "k must be in 1..={}, got {k}",
            space.len()
        )));
    }
    if query.len() != space.dim() {
        return Err(Error::DimensionMismatch(query.len(), space.dim()));
    }
    if query.iter().all(|&v| v == 0.0) {
        return Err(Error::ZeroVector);
    }

    let mut scored: Vec<(usize, f64)> = Vec::with_capacity(space.len());
    for (i, word) in space.words().iter().enumerate() {
        if exclude.contains(word.as_str()) {
            continue;
        }
        match cosine_similarity(query, space.row(i)) {
            Ok(sim) => scored.push((i, sim)),
            Err(Error::ZeroVector) => continue,
            Err(e) => return Err(e),
        }
    }
    scored.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    scored.truncate(k);
    Ok(scored
        .into_iter()
        .map(|(i, similarity)| VectorQueryResult {
            word: space.words()[i].clone(),
            similarity,
        })
        .collect())
}

/// Label used for a space loaded from `path`: the file stem.
pub fn label_from_path(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "space".to_string())
}

/// Load a word2vec text file. The space is labelled with the file stem.
pub fn load_embeddings(path: impl AsRef<Path>) -> Result<EmbeddingSpace> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_word2vec(BufReader::new(file), label_from_path(path)).map_err(|e| with_path(e, path))
}

fn with_path(err: Error, path: &Path) -> Error {
    match err {
        Error::Io { source, .. } => Error::io(path, source),
        other => other,
    }
}

pub fn read_word2vec<R: BufRead>(reader: R, label: impl Into<String>) -> Result<EmbeddingSpace> {
    let mut lines = reader.lines();
    let header = match lines.next() {
        Some(line) => line.map_err(|e| Error::io("<reader>", e))?,
        None => return Err(Error::MalformedHeader("empty file".into())),
    };
    let fields: Vec<&str> = header.split_whitespace().collect();
    let (vocab_size, dim) = match fields.as_slice() {
        [n, d] => (
            n.parse::<usize>().map_err(|_| Error::MalformedHeader(header.clone()))?,
            d.parse::<usize>().map_err(|_| Error::MalformedHeader(header.clone()))?,
        ),
        _ => return Err(Error::MalformedHeader(header.clone())),
    };
    if dim == 0 {
        return Err(Error::MalformedHeader(header));
    }

    let mut words = Vec::with_capacity(vocab_size);
    let mut seen = HashSet::with_capacity(vocab_size);
    let mut data = Vec::with_capacity(vocab_size.saturating_mul(dim));
    for (offset, line) in lines.enumerate() {
        let line_no = offset + 2;
        let line = line.map_err(|e| Error::io("<reader>", e))?;
        let mut parts = line.split_whitespace();
        let Some(token) = parts.next() else {
            if line.trim().is_empty() {
                continue;
            }
            unreachable!("non-blank line has a first field");
        };
        if words.len() == vocab_size {
            return Err(Error::RowCount {
                expected: vocab_size,
                found: vocab_size + 1,
            });
        }
        let start = data.len();
        for part in parts {
            let value: f64 = part.parse().map_err(|_| Error::MalformedRow {
                line: line_no,
                reason: format!("cannot parse {part:?} as a number"),
            })?;
            if !value.is_finite() {
                return Err(Error::NonFinite { line: line_no });
            }
            data.push(value);
        }
        let found = data.len() - start;
        if found != dim {
            return Err(Error::RowDimension {
                line: line_no,
                expected: dim,
                found,
            });
        }
        if !seen.insert(token.to_string()) {
            return Err(Error::DuplicateToken {
                line: line_no,
                token: token.to_string(),
            });
        }
        words.push(token.to_string());
    }
    if words.len() != vocab_size {
        return Err(Error::RowCount {
            expected: vocab_size,
            found: words.len(),
        });
    }
    let vectors = Array2::from_shape_vec((vocab_size, dim), data).expect("row lengths were checked against the header");
    EmbeddingSpace::new(label, words, vectors, None)
}

pub fn save_embeddings(space: &EmbeddingSpace, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = BufWriter::new(file);
    write_word2vec(space, &mut out).map_err(|e| with_path(e, path))?;
    out.flush().map_err(|e| Error::io(path, e))
}

/// Values are written in shortest round-trip form, so a reload is exact.
pub fn write_word2vec<W: Write>(space: &EmbeddingSpace, out: &mut W) -> Result<()> {
    let io_err = |e| Error::io("<writer>", e);
    writeln!(out, "{} {}", space.len(), space.dim()).map_err(io_err)?;
    for (i, word) in space.words().iter().enumerate() {
        write!(out, "{word}").map_err(io_err)?;
        for v in space.row(i) {
            write!(out, " {v}").map_err(io_err)?;
        }
        out.write_all(b"\n").map_err(io_err)?;
    }
    Ok(())
}

/// Frequency sidecar next to an embedding file: same path, `.vocab` extension.
pub fn sidecar_path(embeddings: &Path) -> PathBuf {
    embeddings.with_extension("vocab")
}

/// Load embeddings plus their frequency sidecar when one exists. Without a
/// sidecar, rank-based pseudo-frequencies are attached and a warning logged.
pub fn load_with_frequencies(path: impl AsRef<Path>) -> Result<EmbeddingSpace> {
    let path = path.as_ref();
    let mut space = load_embeddings(path)?;
    let sidecar = sidecar_path(path);
    if sidecar.exists() {
        space.set_frequencies(&load_frequencies(&sidecar)?);
    } else {
        log::warn!("no frequency file {}; using rank order as frequency", sidecar.display());
        space.set_rank_frequencies();
    }
    Ok(space)
}

/// Save embeddings and, when frequencies are attached, their sidecar.
pub fn save_with_frequencies(space: &EmbeddingSpace, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    save_embeddings(space, path)?;
    if space.frequencies().is_some() {
        save_frequencies(space, sidecar_path(path))?;
    }
    Ok(())
}

/// Read a `<token> <count>` vocabulary file.
pub fn load_frequencies(path: impl AsRef<Path>) -> Result<HashMap<String, u64>> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut table = HashMap::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        let mut parts = line.split_whitespace();
        let (Some(token), Some(count), None) = (parts.next(), parts.next(), parts.next()) else {
            if line.trim().is_empty() {
                continue;
            }
            return Err(Error::MalformedRow {
                line: i + 1,
                reason: "expected `<token> <count>`".into(),
            });
        };
        let count = count.parse().map_err(|_| Error::MalformedRow {
            line: i + 1,
            reason: format!("bad count {count:?}"),
        })?;
        if table.insert(token.to_string(), count).is_some() {
            return Err(Error::DuplicateToken {
                line: i + 1,
                token: token.to_string(),
            });
        }
    }
    Ok(table)
}

/// Write the attached counts in vocabulary order.
pub fn save_frequencies(space: &EmbeddingSpace, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let freqs = space
        .frequencies()
        .ok_or_else(|| Error::NoFrequencies(space.label().to_string()))?;
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = BufWriter::new(file);
    for (word, count) in space.words().iter().zip(freqs) {
        writeln!(out, "{word} {count}").map_err(|e| Error::io(path, e))?;
    }
    out.flush().map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    fn parse(text: &str) -> Result<EmbeddingSpace> {
        read_word2vec(text.as_bytes(), "t")
    }

    #[test]
    fn parses_small_file() {
        let s = parse("2 3\na 1 0 0\nb 0 1 0\n").unwrap();
        assert_eq!(s.len(), 2);
        assert_eq!(s.dim(), 3);
        assert_eq!(s.words(), ["a", "b"]);
        assert_eq!(s.vector("b").unwrap(), [0.0, 1.0, 0.0]);
    }

    #[test]
    fn short_row_reports_line() {
        let err = parse("2 3\na 1 0\nb 0 1 0\n").unwrap_err();
        assert!(err.to_string().starts_with("dimension mismatch at line 2"), "{err}");
    }

    #[test]
    fn duplicate_token_reports_line() {
        let err = parse("2 2\na 1 0\na 0 1\n").unwrap_err();
        assert!(matches!(err, Error::DuplicateToken { line: 3, .. }), "{err}");
    }

    #[test]
    fn rejects_bad_headers_and_values() {
        assert!(matches!(parse("2\na 1\n"), Err(Error::MalformedHeader(_))));
        assert!(matches!(parse("x 3\n"), Err(Error::MalformedHeader(_))));
        assert!(matches!(parse(""), Err(Error::MalformedHeader(_))));
        assert!(matches!(parse("1 2\na nan 0\n"), Err(Error::NonFinite { line: 2 })));
        assert!(matches!(parse("1 2\na inf 0\n"), Err(Error::NonFinite { line: 2 })));
        assert!(matches!(parse("2 2\na 1 0\n"), Err(Error::RowCount { .. })));
        assert!(matches!(parse("1 2\na 1 0\nb 1 0\n"), Err(Error::RowCount { .. })));
    }

    #[test]
    fn empty_space_writes_header_only() {
        let s = EmbeddingSpace::new("e", vec![], Array2::zeros((0, 4)), None).unwrap();
        let mut buf = Vec::new();
        write_word2vec(&s, &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "0 4\n");
    }

    #[test]
    fn two_word_space_writes_three_lines() {
        let s = parse("2 3\na 1 0 0\nb 0 1 0\n").unwrap();
        let mut buf = Vec::new();
        write_word2vec(&s, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 3);
        assert!(text.ends_with('\n'));
    }

    #[test]
    fn cosine_basics() {
        let v = [0.3, -1.2, 2.0];
        let neg: Vec<f64> = v.iter().map(|x| -x).collect();
        assert!((cosine_similarity(&v, &v).unwrap() - 1.0).abs() < 1e-15);
        assert!((cosine_similarity(&v, &neg).unwrap() + 1.0).abs() < 1e-15);
        assert_eq!(cosine_similarity(&[1.0, 0.0], &[0.0, 1.0]).unwrap(), 0.0);
        assert!(matches!(
            cosine_similarity(&[0.0, 0.0], &[1.0, 0.0]),
            Err(Error::ZeroVector)
        ));
        assert!(matches!(
            cosine_similarity(&[1.0], &[1.0, 0.0]),
            Err(Error::DimensionMismatch(1, 2))
        ));
    }

    #[test]
    fn neighbors_of_orthogonal_words() {
        let s = EmbeddingSpace::new(
            "o",
            vec!["a".into(), "b".into(), "c".into()],
            array![[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]],
            None,
        )
        .unwrap();
        let exclude: HashSet<&str> = ["a"].into_iter().collect();
        let nn = nearest_neighbors(&s, s.vector("a").unwrap(), 2, &exclude).unwrap();
        assert_eq!(nn.len(), 2);
        assert_eq!(nn[0].word, "b");
        assert_eq!(nn[1].word, "c");
        assert!(nn.iter().all(|r| r.similarity == 0.0));
    }

    #[test]
    fn neighbors_argument_errors() {
        let s = parse("2 2\na 1 0\nb 0 1\n").unwrap();
        let none = HashSet::new();
        assert!(matches!(
            nearest_neighbors(&s, &[0.0, 0.0], 1, &none),
            Err(Error::ZeroVector)
        ));
        assert!(nearest_neighbors(&s, &[1.0, 0.0], 3, &none).is_err());
        let empty = EmbeddingSpace::new("e", vec![], Array2::zeros((0, 2)), None).unwrap();
        assert!(matches!(
            nearest_neighbors(&empty, &[1.0, 0.0], 1, &none),
            Err(Error::EmptySpace)
        ));
    }

    #[test]
    fn rank_frequencies_follow_row_order() {
        let mut s = parse("3 1\na 1\nb 2\nc 3\n").unwrap();
        s.set_rank_frequencies();
        assert_eq!(s.frequencies().unwrap(), [3, 2, 1]);
    }
}
