//! Pick the number of hashtag topics by silhouette, then report the
//! clusters' top hashtags and a 2-D PCA projection.
//!
//! ```text
//! cargo run --release --example hashtag_clusters
//! ```

use std::collections::HashMap;

use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use semshift::clustering::{
    kmeans, pca_2d, select_hashtag_vectors, sweep_k, top_hashtags_per_cluster, DEFAULT_MAX_ITERS, DEFAULT_RESTARTS,
};
use semshift::EmbeddingSpace;

const TOPICS: [&[&str]; 3] = [
    &[
        "#stayhome",
        "#quarantine",
        "#lockdown",
        "#wfh",
        "#mondaymotivation",
        "#selfisolation",
    ],
    &["#ppe", "#thankyou", "#heroes", "#nurses", "#frontline", "#nhs"],
    &["#stocks", "#economy", "#unemployment", "#markets", "#recession", "#oil"],
];

fn main() -> semshift::Result<()> {
    let dim = 20;
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let centers: Vec<Vec<f64>> = (0..TOPICS.len())
        .map(|_| (0..dim).map(|_| rng.sample::<f64, _>(StandardNormal)).collect())
        .collect();

    let mut words = Vec::new();
    let mut rows = Vec::new();
    let mut counts = HashMap::new();
    for (t, tags) in TOPICS.iter().enumerate() {
        for (rank, tag) in tags.iter().enumerate() {
            words.push(tag.to_string());
            rows.extend(
                centers[t]
                    .iter()
                    .map(|c| c + 0.3 * rng.sample::<f64, _>(StandardNormal)),
            );
            counts.insert(tag.to_string(), 500 / (rank as u64 + 1));
        }
    }
    // Plain words and a rare hashtag are not clustered.
    for (w, c) in [("mask", 900), ("home", 800), ("#rare", 2)] {
        words.push(w.to_string());
        rows.extend((0..dim).map(|_| rng.sample::<f64, _>(StandardNormal)));
        counts.insert(w.to_string(), c);
    }
    let n = words.len();
    let mut space = EmbeddingSpace::new("june", words, Array2::from_shape_vec((n, dim), rows).unwrap(), None)?;
    space.set_frequencies(&counts);

    let (tokens, data) = select_hashtag_vectors(&space, 10)?;
    let sweep = sweep_k(&data, 2..=8, 42)?;
    for (k, s) in &sweep.scores {
        println!("k = {k}: mean silhouette {s:.3}");
    }
    let result = kmeans(&data, sweep.best_k, 42, DEFAULT_MAX_ITERS, DEFAULT_RESTARTS)?;
    println!("best k = {}, inertia {:.4}", sweep.best_k, result.inertia);

    let points = pca_2d(&data)?;
    for (c, top) in top_hashtags_per_cluster(&result, &tokens, &counts, 3)
        .iter()
        .enumerate()
    {
        let first = tokens.iter().position(|t| *t == top[0].0).unwrap();
        println!(
            "cluster {c}: {:?} around ({:+.2}, {:+.2})",
            top.iter().map(|(t, _)| t.as_str()).collect::<Vec<_>>(),
            points[[first, 0]],
            points[[first, 1]]
        );
    }
    Ok(())
}
