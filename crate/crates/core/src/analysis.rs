//! Reports over stability tables: case-study trajectories, distributions,
//! frequency correlations and shift rankings.
//!
//! Two missing-word conventions coexist here. Trajectory similarity series
//! give a word missing from a space similarity `0` plus an `absent` flag;
//! stability tables carry the `-1` sentinel plus a `missing` flag, and
//! sentinel rows are left out of every statistic.

use std::collections::HashMap;
use std::io::Write;

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::clustering::Pca2;
use crate::embedding::{cosine_similarity, EmbeddingSpace};
use crate::error::{Error, Result};
use crate::stability::StabilityRecord;

pub const DEFAULT_BINS: usize = 50;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeriesEntry {
    pub similarity: f64,
    pub absent: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NeighborTrack {
    pub word: String,
    /// 2-D position per space; `None` where the word is missing.
    pub points: Vec<Option<[f64; 2]>>,
    /// Cosine similarity to the target per space.
    pub similarities: Vec<SeriesEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryReport {
    pub target: String,
    pub spaces: Vec<String>,
    pub target_points: Vec<Option<[f64; 2]>>,
    pub neighbors: Vec<NeighborTrack>,
}

impl TrajectoryReport {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// Follow `target` and its `neighbors` through spaces that already share a
/// coordinate frame. All points are projected with one PCA basis fitted on
/// every present target and neighbor vector.
pub fn neighbor_trajectory(target: &str, spaces: &[&EmbeddingSpace], neighbors: &[String]) -> Result<TrajectoryReport> {
    if !spaces.iter().any(|s| s.contains(target)) {
        return Err(Error::MissingWord(target.to_string(), "any space".to_string()));
    }
    if let Some(first) = spaces.first() {
        if spaces
            .iter()
            .any(|s| s.frame() != first.frame() || s.dim() != first.dim())
        {
            log::warn!("trajectory spaces are not in one coordinate frame; rotate them first");
        }
    }

    let dim = spaces[0].dim();
    let mut rows: Vec<f64> = Vec::new();
    for space in spaces {
        for word in std::iter::once(target).chain(neighbors.iter().map(String::as_str)) {
            if let Some(v) = space.vector(word) {
                rows.extend_from_slice(v);
            }
        }
    }
    let n_rows = rows.len() / dim;
    let basis = if n_rows >= 2 {
        Some(Pca2::fit(
            &Array2::from_shape_vec((n_rows, dim), rows).expect("rows of dim"),
        )?)
    } else {
        None
    };
    let project = |v: &[f64]| basis.as_ref().map_or([0.0, 0.0], |b| b.project(v));

    let target_points = spaces.iter().map(|s| s.vector(target).map(project)).collect();
    let tracks = neighbors
        .iter()
        .map(|word| -> Result<NeighborTrack> {
            let mut points = Vec::with_capacity(spaces.len());
            let mut similarities = Vec::with_capacity(spaces.len());
            for space in spaces {
                let v = space.vector(word);
                points.push(v.map(project));
                let entry = match (space.vector(target), v) {
                    (Some(t), Some(v)) => SeriesEntry {
                        similarity: cosine_similarity(t, v)?,
                        absent: false,
                    },
                    _ => SeriesEntry {
                        similarity: 0.0,
                        absent: true,
                    },
                };
                similarities.push(entry);
            }
            Ok(NeighborTrack {
                word: word.clone(),
                points,
                similarities,
            })
        })
        .collect::<Result<_>>()?;

    Ok(TrajectoryReport {
        target: target.to_string(),
        spaces: spaces.iter().map(|s| s.label().to_string()).collect(),
        target_points,
        neighbors: tracks,
    })
}

/// Uniform bins over `[-1, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub edges: Vec<f64>,
    pub counts: Vec<u64>,
}

impl Histogram {
    pub fn new(values: impl IntoIterator<Item = f64>, bins: usize) -> Self {
        let edges = (0..=bins).map(|i| -1.0 + 2.0 * i as f64 / bins as f64).collect();
        let mut counts = vec![0; bins];
        for v in values {
            counts[bin_index(v, bins)] += 1;
        }
        Histogram { edges, counts }
    }
}

/// Bins are half-open except the last, which also takes `1.0`.
pub fn bin_index(v: f64, bins: usize) -> usize {
    let pos = ((v + 1.0) / 2.0 * bins as f64).floor();
    (pos.max(0.0) as usize).min(bins - 1)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilityDistribution {
    pub histogram: Histogram,
    pub included: usize,
    pub sentinels: usize,
    pub mean: f64,
    pub median: f64,
    /// Adjusted Fisher–Pearson skewness; `None` for zero variance or n < 3.
    pub skewness: Option<f64>,
}

impl StabilityDistribution {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

pub fn stability_distribution(records: &[StabilityRecord], bins: usize) -> Result<StabilityDistribution> {
    if records.is_empty() {
        return Err(Error::InvalidArgument("no stability records".into()));
    }
    if bins == 0 {
        return Err(Error::InvalidArgument("bins must be positive".into()));
    }
    let mut values: Vec<f64> = records.iter().filter(|r| !r.missing).map(|r| r.stab).collect();
    let sentinels = records.len() - values.len();
    if values.is_empty() {
        return Err(Error::AllSentinel);
    }
    let histogram = Histogram::new(values.iter().copied(), bins);
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let m2 = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    let m3 = values.iter().map(|v| (v - mean).powi(3)).sum::<f64>() / n;
    let skewness = (values.len() >= 3 && m2 > 0.0).then(|| (n * (n - 1.0)).sqrt() / (n - 2.0) * m3 / m2.powf(1.5));
    values.sort_by(f64::total_cmp);
    let mid = values.len() / 2;
    let median = if values.len().is_multiple_of(2) {
        (values[mid - 1] + values[mid]) / 2.0
    } else {
        values[mid]
    };
    Ok(StabilityDistribution {
        histogram,
        included: values.len(),
        sentinels,
        mean,
        median,
        skewness,
    })
}

/// Average ranks (1-based), ties sharing the mean of their positions.
pub fn ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut out = vec![0.0; values.len()];
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && values[order[end]] == values[order[start]] {
            end += 1;
        }
        let rank = (start + end + 1) as f64 / 2.0;
        for &i in &order[start..end] {
            out[i] = rank;
        }
        start = end;
    }
    out
}

/// Spearman rank correlation: Pearson correlation of the average ranks.
pub fn spearman(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch(x.len(), y.len()));
    }
    if x.len() < 3 {
        return Err(Error::TooFewPairs(x.len()));
    }
    let (rx, ry) = (ranks(x), ranks(y));
    let n = x.len() as f64;
    let mean = (n + 1.0) / 2.0;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in rx.iter().zip(&ry) {
        sxy += (a - mean) * (b - mean);
        sxx += (a - mean) * (a - mean);
        syy += (b - mean) * (b - mean);
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::InvalidArgument("correlation of a constant series".into()));
    }
    Ok((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationRow {
    pub word: String,
    pub stab: f64,
    pub frequency: Option<u64>,
    pub log10_frequency: Option<f64>,
    pub missing: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationReport {
    pub frequency_source: String,
    /// Spearman coefficient over non-sentinel words found in the table.
    pub coefficient: f64,
    pub sample_size: usize,
    pub rows: Vec<CorrelationRow>,
}

impl CorrelationReport {
    /// Scatter export: `word,stab,frequency,log10_frequency,missing_flag`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["word", "stab", "frequency", "log10_frequency", "missing_flag"])?;
        for row in &self.rows {
            w.write_record([
                row.word.clone(),
                row.stab.to_string(),
                row.frequency.map(|f| f.to_string()).unwrap_or_default(),
                row.log10_frequency.map(|f| f.to_string()).unwrap_or_default(),
                u8::from(row.missing).to_string(),
            ])?;
        }
        w.flush().map_err(|e| Error::io("<csv>", e))
    }
}

pub fn frequency_stability_correlation(
    records: &[StabilityRecord],
    frequencies: &HashMap<String, u64>,
    frequency_source: &str,
) -> Result<CorrelationReport> {
    let rows: Vec<CorrelationRow> = records
        .iter()
        .map(|r| {
            let frequency = frequencies.get(&r.word).copied();
            CorrelationRow {
                word: r.word.clone(),
                stab: r.stab,
                frequency,
                log10_frequency: frequency.filter(|&f| f > 0).map(|f| (f as f64).log10()),
                missing: r.missing,
            }
        })
        .collect();
    let (stabs, freqs): (Vec<f64>, Vec<f64>) = rows
        .iter()
        .filter(|r| !r.missing)
        .filter_map(|r| r.frequency.map(|f| (r.stab, f as f64)))
        .unzip();
    if stabs.len() < 3 {
        return Err(Error::TooFewPairs(stabs.len()));
    }
    Ok(CorrelationReport {
        frequency_source: frequency_source.to_string(),
        coefficient: spearman(&stabs, &freqs)?,
        sample_size: stabs.len(),
        rows,
    })
}

/// The `top_n` least stable words, lowest first; ties go by token.
pub fn shift_ranking(records: &[StabilityRecord], top_n: usize) -> Vec<(String, f64)> {
    let mut ranked: Vec<(String, f64)> = records
        .iter()
        .filter(|r| !r.missing)
        .map(|r| (r.word.clone(), r.stab))
        .collect();
    ranked.sort_by(|a, b| a.1.total_cmp(&b.1).then_with(|| a.0.cmp(&b.0)));
    ranked.truncate(top_n);
    ranked
}
