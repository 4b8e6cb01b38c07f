//! Orthogonal Procrustes alignment between embedding spaces.
//!
//! Anchor matrices hold one word per row. Given base anchors `W0` and the
//! same words' target vectors `W`, the fitted `R` minimizes
//! `‖W0·Q − W‖_F` over orthogonal `Q`, so right-multiplying a base row
//! vector by `R` carries it into target coordinates. Reflections are
//! allowed and nothing is centered or rescaled.

use std::path::Path;

use nalgebra::DMatrix;
use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::embedding::EmbeddingSpace;
use crate::error::{Error, Result};

/// Anchor words shared by two spaces, most frequent (in `source`) first.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnchorSet {
    pub words: Vec<String>,
    /// Label of the space whose counts ranked the anchors.
    pub source: String,
    /// Number of anchors that were asked for.
    pub requested: usize,
}

impl AnchorSet {
    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn is_saturated(&self) -> bool {
        self.words.len() < self.requested
    }
}

/// The `k` most frequent words of `base` that also occur in `target`.
pub fn select_anchors(base: &EmbeddingSpace, target: &EmbeddingSpace, k: usize) -> Result<AnchorSet> {
    if k == 0 {
        return Err(Error::InvalidArgument("anchor count must be positive".into()));
    }
    let freqs = base
        .frequencies()
        .ok_or_else(|| Error::NoFrequencies(base.label().to_string()))?;
    let mut order: Vec<usize> = (0..base.len()).collect();
    order.sort_by(|&a, &b| freqs[b].cmp(&freqs[a]).then(a.cmp(&b)));
    let words: Vec<String> = order
        .into_iter()
        .map(|i| &base.words()[i])
        .filter(|w| target.contains(w))
        .take(k)
        .cloned()
        .collect();
    if words.is_empty() {
        return Err(Error::NoSharedWords(
            base.label().to_string(),
            target.label().to_string(),
        ));
    }
    if words.len() < k {
        log::warn!(
            "only {} shared words between {:?} and {:?}; wanted {k} anchors",
            words.len(),
            base.label(),
            target.label()
        );
    }
    if words.len() < base.dim() {
        log::warn!(
            "{} anchors for dimension {}: the rotation is under-determined",
            words.len(),
            base.dim()
        );
    }
    Ok(AnchorSet {
        words,
        source: base.label().to_string(),
        requested: k,
    })
}

/// A fitted orthogonal map from one space's frame into another's.
#[derive(Debug, Clone, PartialEq)]
pub struct RotationMap {
    pub from_label: String,
    pub to_label: String,
    pub anchors: AnchorSet,
    /// `‖W0·R − W‖_F` over the anchors.
    pub residual: f64,
    rotation: Array2<f64>,
}

impl RotationMap {
    pub fn new(
        from_label: impl Into<String>,
        to_label: impl Into<String>,
        rotation: Array2<f64>,
        anchors: AnchorSet,
        residual: f64,
    ) -> Result<Self> {
        if rotation.nrows() != rotation.ncols() {
            return Err(Error::DimensionMismatch(rotation.nrows(), rotation.ncols()));
        }
        Ok(RotationMap {
            from_label: from_label.into(),
            to_label: to_label.into(),
            anchors,
            residual,
            rotation: rotation.as_standard_layout().into_owned(),
        })
    }

    pub fn identity(from_label: &str, to_label: &str, dim: usize) -> Self {
        RotationMap {
            from_label: from_label.to_string(),
            to_label: to_label.to_string(),
            anchors: AnchorSet {
                words: Vec::new(),
                source: from_label.to_string(),
                requested: 0,
            },
            residual: 0.0,
            rotation: Array2::eye(dim),
        }
    }

    pub fn dim(&self) -> usize {
        self.rotation.nrows()
    }

    pub fn matrix(&self) -> &Array2<f64> {
        &self.rotation
    }

    /// Exact inverse: the transpose, with labels swapped.
    pub fn inverse(&self) -> Self {
        RotationMap {
            from_label: self.to_label.clone(),
            to_label: self.from_label.clone(),
            anchors: self.anchors.clone(),
            residual: self.residual,
            rotation: self.rotation.t().as_standard_layout().into_owned(),
        }
    }

    /// `v·R` for a row vector `v`.
    pub fn map_vector(&self, v: &[f64]) -> Vec<f64> {
        let d = self.dim();
        let mut out = vec![0.0; d];
        for (i, &x) in v.iter().enumerate() {
            let row = self.rotation.row(i);
            for (o, r) in out.iter_mut().zip(row.iter()) {
                *o += x * r;
            }
        }
        out
    }

    /// Largest entry of `|RᵀR − I|`.
    pub fn orthogonality_error(&self) -> f64 {
        let gram = self.rotation.t().dot(&self.rotation);
        gram.indexed_iter()
            .map(|((i, j), v)| (v - if i == j { 1.0 } else { 0.0 }).abs())
            .fold(0.0, f64::max)
    }

    pub fn determinant(&self) -> f64 {
        to_nalgebra(&self.rotation).determinant()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&RotationMapWire::from(self))?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str::<RotationMapWire>(text)?.try_into()
    }
}

/// JSON layout: labels, anchors, residual and `R` flattened row-major.
#[derive(Debug, Serialize, Deserialize)]
struct RotationMapWire {
    from_label: String,
    to_label: String,
    dim: usize,
    anchor_source: String,
    anchors_requested: usize,
    anchors: Vec<String>,
    residual: f64,
    rotation: Vec<f64>,
}

impl From<&RotationMap> for RotationMapWire {
    fn from(map: &RotationMap) -> Self {
        RotationMapWire {
            from_label: map.from_label.clone(),
            to_label: map.to_label.clone(),
            dim: map.dim(),
            anchor_source: map.anchors.source.clone(),
            anchors_requested: map.anchors.requested,
            anchors: map.anchors.words.clone(),
            residual: map.residual,
            rotation: map.rotation.iter().copied().collect(),
        }
    }
}

impl TryFrom<RotationMapWire> for RotationMap {
    type Error = Error;

    fn try_from(w: RotationMapWire) -> Result<Self> {
        if w.rotation.len() != w.dim * w.dim {
            return Err(Error::DimensionMismatch(w.rotation.len(), w.dim * w.dim));
        }
        let rotation = Array2::from_shape_vec((w.dim, w.dim), w.rotation).expect("length checked against dim");
        RotationMap::new(
            w.from_label,
            w.to_label,
            rotation,
            AnchorSet {
                words: w.anchors,
                source: w.anchor_source,
                requested: w.anchors_requested,
            },
            w.residual,
        )
    }
}

/// Both directions between two spaces, each fitted on its own anchors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RotationPair {
    #[serde(with = "wire")]
    pub forward: RotationMap,
    #[serde(with = "wire")]
    pub backward: RotationMap,
}

mod wire {
    use super::{RotationMap, RotationMapWire};
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(map: &RotationMap, s: S) -> Result<S::Ok, S::Error> {
        RotationMapWire::from(map).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<RotationMap, D::Error> {
        RotationMapWire::deserialize(d)?
            .try_into()
            .map_err(serde::de::Error::custom)
    }
}

impl RotationPair {
    pub fn save_json(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let mut text = serde_json::to_string_pretty(self)?;
        text.push('\n');
        std::fs::write(path, text).map_err(|e| Error::io(path, e))
    }

    pub fn load_json(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(serde_json::from_str(&text)?)
    }
}

fn to_nalgebra(a: &Array2<f64>) -> DMatrix<f64> {
    DMatrix::from_fn(a.nrows(), a.ncols(), |i, j| a[[i, j]])
}

fn anchor_matrix(space: &EmbeddingSpace, anchors: &AnchorSet) -> Result<Array2<f64>> {
    let mut m = Array2::zeros((anchors.len(), space.dim()));
    for (r, word) in anchors.words.iter().enumerate() {
        let v = space
            .vector(word)
            .ok_or_else(|| Error::MissingWord(word.clone(), space.label().to_string()))?;
        m.row_mut(r).assign(&ndarray::ArrayView1::from(v));
    }
    Ok(m)
}

/// Solve the orthogonal Procrustes problem over `anchors`.
///
/// With `W0ᵀW = UΣVᵀ`, `R = UVᵀ`. Each left singular vector is flipped so
/// its largest-magnitude entry is non-negative (with the matching right
/// vector) before composing, which pins the result for identical inputs.
pub fn fit_rotation(base: &EmbeddingSpace, target: &EmbeddingSpace, anchors: &AnchorSet) -> Result<RotationMap> {
    if base.dim() != target.dim() {
        return Err(Error::DimensionMismatch(base.dim(), target.dim()));
    }
    if anchors.len() < 2 {
        return Err(Error::InvalidArgument(format!(
            "need at least 2 anchors, got {}",
            anchors.len()
        )));
    }
    let w0 = anchor_matrix(base, anchors)?;
    let w = anchor_matrix(target, anchors)?;
    let cross = to_nalgebra(&w0.t().dot(&w));
    let rotation = procrustes(&cross);
    let residual = (w0.dot(&rotation) - &w).iter().map(|v| v * v).sum::<f64>().sqrt();
    RotationMap::new(base.frame(), target.frame(), rotation, anchors.clone(), residual)
}

fn procrustes(cross: &DMatrix<f64>) -> Array2<f64> {
    let d = cross.nrows();
    let svd = cross.clone().svd(true, true);
    if let Some(min) = svd.singular_values.iter().copied().reduce(f64::min) {
        if min < 1e-12 {
            log::warn!("rank-deficient anchor cross-covariance (smallest singular value {min:.3e})");
        }
    }
    let mut u = svd.u.expect("requested U");
    let mut v_t = svd.v_t.expect("requested V^T");
    for c in 0..u.ncols() {
        let col = u.column(c);
        let pivot =
            col.iter().copied().enumerate().fold(
                (0, 0.0f64),
                |best, (i, x)| if x.abs() > best.1.abs() { (i, x) } else { best },
            );
        if pivot.1 < 0.0 {
            u.column_mut(c).neg_mut();
            v_t.row_mut(c).neg_mut();
        }
    }
    let r = u * v_t;
    Array2::from_shape_fn((d, d), |(i, j)| r[(i, j)])
}

/// Fit `i → j` on the top-`k` words of `i` and `j → i` on the top-`k` words
/// of `j`. The two fits are independent; with identical anchor sets they
/// would be exact transposes of each other.
pub fn fit_pair(space_i: &EmbeddingSpace, space_j: &EmbeddingSpace, k: usize) -> Result<RotationPair> {
    let forward_anchors = select_anchors(space_i, space_j, k)?;
    let backward_anchors = select_anchors(space_j, space_i, k)?;
    Ok(RotationPair {
        forward: fit_rotation(space_i, space_j, &forward_anchors)?,
        backward: fit_rotation(space_j, space_i, &backward_anchors)?,
    })
}

/// Multiply every row of `space` by `R`. The result lives in the map's
/// target frame; labels and counts are kept.
pub fn apply_rotation(space: &EmbeddingSpace, map: &RotationMap) -> Result<EmbeddingSpace> {
    if space.dim() != map.dim() {
        return Err(Error::DimensionMismatch(space.dim(), map.dim()));
    }
    if space.frame() != map.from_label {
        return Err(Error::MapMismatch {
            map_from: map.from_label.clone(),
            map_to: map.to_label.clone(),
            from: space.frame().to_string(),
            to: map.to_label.clone(),
        });
    }
    let mut out = space.clone();
    *out.vectors_mut() = space.vectors().dot(map.matrix());
    out.set_frame(&map.to_label);
    Ok(out)
}
