//! Semantic shift detection across embedding spaces trained on different
//! corpora or time periods.
//!
//! The pipeline runs text normalization ([`text`]), per-period skip-gram
//! training with optional warm start ([`sgns`]), orthogonal Procrustes
//! alignment ([`alignment`]), two-way rotational stability ([`stability`]),
//! hashtag topic clustering ([`clustering`]) and reporting ([`analysis`]).
//! [`synthetic`] generates corpora with planted shifts for testing.

pub mod alignment;
pub mod analysis;
pub mod clustering;
pub mod config;
pub mod embedding;
pub mod error;
pub mod sgns;
pub mod stability;
pub mod synthetic;
pub mod text;

pub use alignment::{apply_rotation, fit_pair, fit_rotation, select_anchors, AnchorSet, RotationMap, RotationPair};
pub use embedding::{
    cosine_similarity, load_embeddings, load_with_frequencies, nearest_neighbors, save_embeddings,
    save_with_frequencies, EmbeddingSpace, VectorQueryResult,
};
pub use error::{Error, Result};
pub use stability::{ComparedPair, Scope, StabilityRecord};

pub(crate) mod matrix_rows {
    use ndarray::Array2;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(m: &Array2<f64>, s: S) -> Result<S::Ok, S::Error> {
        let rows: Vec<Vec<f64>> = m.rows().into_iter().map(|r| r.to_vec()).collect();
        rows.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Array2<f64>, D::Error> {
        let rows = Vec::<Vec<f64>>::deserialize(d)?;
        let ncols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != ncols) {
            return Err(serde::de::Error::custom("ragged matrix rows"));
        }
        let flat: Vec<f64> = rows.iter().flatten().copied().collect();
        Array2::from_shape_vec((rows.len(), ncols), flat).map_err(serde::de::Error::custom)
    }
}
