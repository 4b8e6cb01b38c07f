//! Plant a random rotation between two copies of a space and recover it
//! with Procrustes over the most frequent words.
//!
//! ```text
//! cargo run --example align_spaces
//! ```

use nalgebra::DMatrix;
use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use semshift::{apply_rotation, fit_pair, fit_rotation, select_anchors, EmbeddingSpace};

fn random_orthogonal(dim: usize, rng: &mut impl Rng) -> Array2<f64> {
    let g = DMatrix::from_fn(dim, dim, |_, _| rng.sample::<f64, _>(StandardNormal));
    let q = g.qr().q();
    Array2::from_shape_fn((dim, dim), |(i, j)| q[(i, j)])
}

fn main() -> semshift::Result<()> {
    let (n, dim) = (500, 50);
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let words: Vec<String> = (0..n).map(|i| format!("w{i}")).collect();
    let vectors = Array2::from_shape_fn((n, dim), |_| rng.sample::<f64, _>(StandardNormal));
    let mut base = EmbeddingSpace::new("base", words.clone(), vectors.clone(), None)?;
    base.set_rank_frequencies();

    let planted = random_orthogonal(dim, &mut rng);
    let mut target = EmbeddingSpace::new("target", words, vectors.dot(&planted), None)?;
    target.set_rank_frequencies();

    let anchors = select_anchors(&base, &target, 100)?;
    let map = fit_rotation(&base, &target, &anchors)?;
    let err = (map.matrix() - &planted).iter().fold(0.0f64, |m, x| m.max(x.abs()));
    println!("anchors: {} (first {:?})", anchors.len(), &anchors.words[..3]);
    println!("max |R - planted| = {err:.2e}, residual = {:.2e}", map.residual);
    println!(
        "|R^T R - I|_max = {:.2e}, det = {:+.6}",
        map.orthogonality_error(),
        map.determinant()
    );

    let moved = apply_rotation(&base, &map)?;
    println!("rotated space now lives in frame {:?}", moved.frame());

    let pair = fit_pair(&base, &target, 100)?;
    println!(
        "{}",
        pair.forward.to_json()?.lines().take(6).collect::<Vec<_>>().join("\n")
    );
    Ok(())
}
