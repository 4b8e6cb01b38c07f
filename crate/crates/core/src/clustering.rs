//! Hashtag topic clustering: unit-normalized vectors, k-means with
//! k-means++ seeding, silhouette model selection and a 2-D PCA projection.

use std::collections::HashMap;
use std::io::Write;
use std::ops::RangeInclusive;

use nalgebra::DMatrix;
use ndarray::{Array1, Array2, ArrayView1, Axis};
use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::embedding::EmbeddingSpace;
use crate::error::{Error, Result};

pub const DEFAULT_RESTARTS: usize = 10;
pub const DEFAULT_MAX_ITERS: usize = 300;
pub const DEFAULT_MIN_HASHTAG_FREQUENCY: u64 = 10;

/// Rows of every `#`-token with at least `min_frequency` occurrences,
/// scaled to unit L2 norm. Tokens come back in vocabulary order.
pub fn select_hashtag_vectors(space: &EmbeddingSpace, min_frequency: u64) -> Result<(Vec<String>, Array2<f64>)> {
    let freqs = space
        .frequencies()
        .ok_or_else(|| Error::NoFrequencies(space.label().to_string()))?;
    let mut tokens = Vec::new();
    let mut data = Vec::new();
    for (i, word) in space.words().iter().enumerate() {
        if !word.starts_with('#') || word.len() < 2 || freqs[i] < min_frequency {
            continue;
        }
        let v = space.row(i);
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm == 0.0 {
            log::warn!("skipping zero vector for {word}");
            continue;
        }
        tokens.push(word.clone());
        data.extend(v.iter().map(|x| x / norm));
    }
    if tokens.is_empty() {
        return Err(Error::NoHashtags(min_frequency));
    }
    let matrix = Array2::from_shape_vec((tokens.len(), space.dim()), data).expect("rows of dim");
    Ok((tokens, matrix))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Silhouette {
    pub values: Vec<f64>,
    pub mean: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterResult {
    pub k: usize,
    pub assignments: Vec<usize>,
    #[serde(with = "crate::matrix_rows")]
    pub centroids: Array2<f64>,
    /// `None` when `k < 2`.
    pub silhouette: Option<Silhouette>,
    pub inertia: f64,
    /// Inertia after every assignment step of the winning run.
    pub inertia_history: Vec<f64>,
    pub seed: u64,
}

impl ClusterResult {
    pub fn members(&self, cluster: usize) -> impl Iterator<Item = usize> + '_ {
        self.assignments
            .iter()
            .enumerate()
            .filter(move |(_, &c)| c == cluster)
            .map(|(i, _)| i)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

fn sq_dist(a: ArrayView1<'_, f64>, b: ArrayView1<'_, f64>) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn nearest(point: ArrayView1<'_, f64>, centroids: &Array2<f64>) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (c, centroid) in centroids.rows().into_iter().enumerate() {
        let d = sq_dist(point, centroid);
        if d < best.1 {
            best = (c, d);
        }
    }
    best
}

fn plus_plus_init(data: &Array2<f64>, k: usize, rng: &mut ChaCha8Rng) -> Array2<f64> {
    let n = data.nrows();
    let mut chosen = vec![rng.random_range(0..n)];
    let mut closest: Vec<f64> = data
        .rows()
        .into_iter()
        .map(|p| sq_dist(p, data.row(chosen[0])))
        .collect();
    while chosen.len() < k {
        let next = match WeightedIndex::new(&closest) {
            Ok(dist) => dist.sample(rng),
            // Every remaining point coincides with a center.
            Err(_) => {
                let free: Vec<usize> = (0..n).filter(|i| !chosen.contains(i)).collect();
                free[rng.random_range(0..free.len())]
            }
        };
        chosen.push(next);
        for (i, p) in data.rows().into_iter().enumerate() {
            closest[i] = closest[i].min(sq_dist(p, data.row(next)));
        }
    }
    data.select(Axis(0), &chosen)
}

fn assign(data: &Array2<f64>, centroids: &Array2<f64>, assignments: &mut [usize]) -> f64 {
    let mut inertia = 0.0;
    for (i, p) in data.rows().into_iter().enumerate() {
        let (c, d) = nearest(p, centroids);
        assignments[i] = c;
        inertia += d;
    }
    inertia
}

/// Recompute means; an empty cluster takes the point farthest from its
/// own (new) centroid.
fn update(data: &Array2<f64>, assignments: &[usize], centroids: &mut Array2<f64>) {
    let k = centroids.nrows();
    let mut sums = Array2::<f64>::zeros(centroids.raw_dim());
    let mut sizes = vec![0usize; k];
    for (p, &c) in data.rows().into_iter().zip(assignments) {
        sums.row_mut(c).scaled_add(1.0, &p);
        sizes[c] += 1;
    }
    let mut empty = Vec::new();
    for (c, &size) in sizes.iter().enumerate() {
        if size == 0 {
            empty.push(c);
        } else {
            let mean = &sums.row(c) / size as f64;
            centroids.row_mut(c).assign(&mean);
        }
    }
    if empty.is_empty() {
        return;
    }
    let mut order: Vec<(usize, f64)> = data
        .rows()
        .into_iter()
        .zip(assignments)
        .enumerate()
        .filter(|(_, (_, &c))| sizes[c] > 1)
        .map(|(i, (p, &c))| (i, sq_dist(p, centroids.row(c))))
        .collect();
    order.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    for (c, (i, _)) in empty.into_iter().zip(order) {
        log::debug!("re-seeding empty cluster {c} with point {i}");
        centroids.row_mut(c).assign(&data.row(i));
    }
}

fn lloyd(data: &Array2<f64>, k: usize, max_iters: usize, rng: &mut ChaCha8Rng) -> (Array2<f64>, Vec<usize>, Vec<f64>) {
    let mut centroids = plus_plus_init(data, k, rng);
    let mut assignments = vec![0; data.nrows()];
    let mut history = vec![assign(data, &centroids, &mut assignments)];
    let mut next = assignments.clone();
    for _ in 0..max_iters {
        update(data, &assignments, &mut centroids);
        history.push(assign(data, &centroids, &mut next));
        let stable = next == assignments;
        std::mem::swap(&mut next, &mut assignments);
        if stable {
            break;
        }
    }
    (centroids, assignments, history)
}

/// Lloyd's algorithm, best of `restarts` k-means++ runs by inertia. Run
/// `r` draws from a generator seeded with `seed + r`.
pub fn kmeans(data: &Array2<f64>, k: usize, seed: u64, max_iters: usize, restarts: usize) -> Result<ClusterResult> {
    let n = data.nrows();
    if k == 0 || k > n {
        return Err(Error::InvalidArgument(format!("k must be in 1..={n}, got {k}")));
    }
    let mut best: Option<(Array2<f64>, Vec<usize>, Vec<f64>)> = None;
    for restart in 0..restarts.max(1) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(restart as u64));
        let run = lloyd(data, k, max_iters, &mut rng);
        let better = match &best {
            None => true,
            Some(b) => run.2.last() < b.2.last(),
        };
        if better {
            best = Some(run);
        }
    }
    let (centroids, assignments, inertia_history) = best.expect("at least one run");
    let silhouette = if k >= 2 {
        Some(silhouette(data, &assignments)?)
    } else {
        None
    };
    Ok(ClusterResult {
        k,
        inertia: *inertia_history.last().expect("one assignment step"),
        assignments,
        centroids,
        silhouette,
        inertia_history,
        seed,
    })
}

/// Per-sample silhouette coefficients with Euclidean distance. Members of
/// singleton clusters score 0.
pub fn silhouette(data: &Array2<f64>, assignments: &[usize]) -> Result<Silhouette> {
    let n = data.nrows();
    if assignments.len() != n {
        return Err(Error::InvalidArgument(format!(
            "{} assignments for {n} samples",
            assignments.len()
        )));
    }
    let k = assignments.iter().max().map_or(0, |m| m + 1);
    let mut sizes = vec![0usize; k];
    for &c in assignments {
        sizes[c] += 1;
    }
    if sizes.iter().filter(|&&s| s > 0).count() < 2 {
        return Err(Error::SingleCluster);
    }
    let mut values = Vec::with_capacity(n);
    let mut totals = vec![0.0; k];
    for i in 0..n {
        totals.fill(0.0);
        for j in 0..n {
            if i != j {
                totals[assignments[j]] += sq_dist(data.row(i), data.row(j)).sqrt();
            }
        }
        let own = assignments[i];
        if sizes[own] == 1 {
            values.push(0.0);
            continue;
        }
        let a = totals[own] / (sizes[own] - 1) as f64;
        let b = (0..k)
            .filter(|&c| c != own && sizes[c] > 0)
            .map(|c| totals[c] / sizes[c] as f64)
            .fold(f64::INFINITY, f64::min);
        let scale = a.max(b);
        values.push(if scale > 0.0 { (b - a) / scale } else { 0.0 });
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    Ok(Silhouette { values, mean })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    /// `(k, mean silhouette)` in increasing `k`.
    pub scores: Vec<(usize, f64)>,
    pub best_k: usize,
}

/// Mean silhouette for every `k` in range; the best `k` wins, smaller on ties.
pub fn sweep_k(data: &Array2<f64>, k_range: RangeInclusive<usize>, seed: u64) -> Result<SweepResult> {
    let n = data.nrows();
    if k_range.is_empty() {
        return Err(Error::InvalidArgument("empty k range".into()));
    }
    if *k_range.start() < 2 || *k_range.end() + 1 > n {
        return Err(Error::InvalidArgument(format!(
            "k range {}..={} must lie within 2..={}",
            k_range.start(),
            k_range.end(),
            n.saturating_sub(1)
        )));
    }
    let mut scores = Vec::new();
    let mut best = (0, f64::NEG_INFINITY);
    for k in k_range {
        let result = kmeans(data, k, seed, DEFAULT_MAX_ITERS, DEFAULT_RESTARTS)?;
        let mean = result.silhouette.expect("k >= 2").mean;
        log::info!("k = {k}: mean silhouette {mean:.4}");
        if mean > best.1 {
            best = (k, mean);
        }
        scores.push((k, mean));
    }
    Ok(SweepResult { scores, best_k: best.0 })
}

/// Top-2 principal axes of a point cloud.
#[derive(Debug, Clone, PartialEq)]
pub struct Pca2 {
    pub mean: Array1<f64>,
    /// 2 × d, rows are unit axes (zero when the data has lower rank).
    pub components: Array2<f64>,
    /// Variance along each axis (squared singular value / (n − 1)).
    pub explained_variance: [f64; 2],
}

impl Pca2 {
    /// Each axis is signed so its largest-magnitude loading is non-negative.
    pub fn fit(data: &Array2<f64>) -> Result<Self> {
        let (n, d) = data.dim();
        if n < 2 {
            return Err(Error::InvalidArgument(format!("PCA needs >= 2 points, got {n}")));
        }
        let mean = data.mean_axis(Axis(0)).expect("n >= 2");
        let centered = data - &mean;
        let m = DMatrix::from_fn(n, d, |i, j| centered[[i, j]]);
        let svd = m.svd(false, true);
        let v_t = svd.v_t.expect("requested V^T");
        let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
        order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));

        let top = svd.singular_values[order[0]];
        let mut components = Array2::zeros((2, d));
        let mut explained_variance = [0.0; 2];
        for (slot, &idx) in order.iter().take(2).enumerate() {
            let sv = svd.singular_values[idx];
            if sv <= 1e-12 * top.max(f64::MIN_POSITIVE) || sv == 0.0 {
                log::warn!("data has rank < {}; PCA axis {slot} left at zero", slot + 1);
                continue;
            }
            let mut axis: Vec<f64> = v_t.row(idx).iter().copied().collect();
            let pivot = axis
                .iter()
                .copied()
                .fold(0.0f64, |b, x| if x.abs() > b.abs() { x } else { b });
            if pivot < 0.0 {
                axis.iter_mut().for_each(|x| *x = -*x);
            }
            components.row_mut(slot).assign(&ArrayView1::from(&axis));
            explained_variance[slot] = sv * sv / (n - 1) as f64;
        }
        Ok(Pca2 {
            mean,
            components,
            explained_variance,
        })
    }

    pub fn transform(&self, data: &Array2<f64>) -> Array2<f64> {
        (data - &self.mean).dot(&self.components.t())
    }

    pub fn project(&self, v: &[f64]) -> [f64; 2] {
        let centered = &ArrayView1::from(v) - &self.mean;
        [
            centered.dot(&self.components.row(0)),
            centered.dot(&self.components.row(1)),
        ]
    }
}

/// Mean-center and project onto the top two principal axes.
pub fn pca_2d(data: &Array2<f64>) -> Result<Array2<f64>> {
    Ok(Pca2::fit(data)?.transform(data))
}

/// For every cluster, its `m` most frequent members (count desc, then token).
pub fn top_hashtags_per_cluster(
    result: &ClusterResult,
    tokens: &[String],
    frequencies: &HashMap<String, u64>,
    m: usize,
) -> Vec<Vec<(String, u64)>> {
    (0..result.k)
        .map(|c| {
            let mut members: Vec<(String, u64)> = result
                .members(c)
                .map(|i| {
                    let t = &tokens[i];
                    (t.clone(), frequencies.get(t).copied().unwrap_or(0))
                })
                .collect();
            members.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
            members.truncate(m);
            members
        })
        .collect()
}

/// `cluster,rank,hashtag,frequency`, ranks starting at 1.
pub fn write_top_hashtags_csv<W: Write>(tables: &[Vec<(String, u64)>], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["cluster", "rank", "hashtag", "frequency"])?;
    for (c, table) in tables.iter().enumerate() {
        for (rank, (tag, freq)) in table.iter().enumerate() {
            w.write_record([c.to_string(), (rank + 1).to_string(), tag.clone(), freq.to_string()])?;
        }
    }
    w.flush().map_err(|e| Error::io("<csv>", e))
}

/// `token,cluster,silhouette`.
pub fn write_silhouette_csv<W: Write>(tokens: &[String], result: &ClusterResult, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["token", "cluster", "silhouette"])?;
    let values = result.silhouette.as_ref().map(|s| s.values.as_slice());
    for (i, token) in tokens.iter().enumerate() {
        let s = values.map(|v| v[i].to_string()).unwrap_or_default();
        w.write_record([token.clone(), result.assignments[i].to_string(), s])?;
    }
    w.flush().map_err(|e| Error::io("<csv>", e))
}

/// `token,x,y,cluster`.
pub fn write_pca_csv<W: Write>(tokens: &[String], points: &Array2<f64>, assignments: &[usize], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["token", "x", "y", "cluster"])?;
    for (i, token) in tokens.iter().enumerate() {
        w.write_record([
            token.clone(),
            points[[i, 0]].to_string(),
            points[[i, 1]].to_string(),
            assignments[i].to_string(),
        ])?;
    }
    w.flush().map_err(|e| Error::io("<csv>", e))
}
