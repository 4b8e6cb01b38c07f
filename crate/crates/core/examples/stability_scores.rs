//! Two-way stability on an exactly rotated copy, and the `-1` sentinel
//! for words missing from one side.
//!
//! ```text
//! cargo run --example stability_scores
//! ```

use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use semshift::analysis::stability_distribution;
use semshift::stability::{stability_table, write_stability_csv};
use semshift::{ComparedPair, EmbeddingSpace, Scope};

fn main() -> semshift::Result<()> {
    let (n, dim) = (200, 16);
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let words: Vec<String> = (0..n).map(|i| format!("w{i}")).collect();
    let vectors = Array2::from_shape_fn((n, dim), |_| rng.sample::<f64, _>(StandardNormal));

    // A reflection across the first axis: orthogonal, so stability stays 1.
    let mut flip = Array2::eye(dim);
    flip[[0, 0]] = -1.0;
    let mut a = EmbeddingSpace::new("a", words.clone(), vectors.clone(), None)?;
    a.set_rank_frequencies();
    let mut moved = vectors.dot(&flip);
    let mut b_words = words;
    b_words.truncate(n - 3);
    moved = moved.slice(ndarray::s![..n - 3, ..]).to_owned();
    b_words.push("newcomer".into());
    let extra = Array2::from_shape_fn((1, dim), |_| rng.sample::<f64, _>(StandardNormal));
    moved = ndarray::concatenate![ndarray::Axis(0), moved, extra];
    let mut b = EmbeddingSpace::new("b", b_words, moved, None)?;
    b.set_rank_frequencies();

    let pair = ComparedPair::fit(&a, &b, n)?;
    let records = stability_table(&pair, Scope::Union)?;
    let shown: Vec<_> = records
        .iter()
        .filter(|r| r.missing || r.word == "w0")
        .cloned()
        .collect();
    write_stability_csv(&shown, std::io::stdout())?;

    let dist = stability_distribution(&records, 10)?;
    println!(
        "\nincluded {}, sentinels {}, mean {:.12}, median {:.12}",
        dist.included, dist.sentinels, dist.mean, dist.median
    );
    Ok(())
}
