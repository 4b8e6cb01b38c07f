//! Follow a word and its neighbors across three periods after mapping
//! every period into the first one's frame.
//!
//! ```text
//! cargo run --example neighbor_trajectory
//! ```

use ndarray::{array, Array2};

use semshift::analysis::neighbor_trajectory;
use semshift::{apply_rotation, fit_pair, EmbeddingSpace};

fn space(label: &str, words: &[&str], rows: Array2<f64>) -> semshift::Result<EmbeddingSpace> {
    let mut s = EmbeddingSpace::new(label, words.iter().map(|w| w.to_string()).collect(), rows, None)?;
    s.set_rank_frequencies();
    Ok(s)
}

fn main() -> semshift::Result<()> {
    let words = ["virus", "corona", "beer", "lime", "mask"];
    let april = space(
        "april",
        &words,
        array![
            [1.0, 0.1, 0.0],
            [0.1, 0.2, 1.0],
            [0.0, 0.1, 0.9],
            [0.0, 0.0, 1.0],
            [0.9, 0.3, 0.0]
        ],
    )?;
    // Same geometry seen through a coordinate swap, with `corona` drifting
    // from the drinks towards `virus`; `lime` is gone in June.
    let may = space(
        "may",
        &words,
        array![
            [0.1, 1.0, 0.0],
            [0.6, 0.5, 0.6],
            [0.1, 0.0, 0.9],
            [0.0, 0.0, 1.0],
            [0.3, 0.9, 0.0]
        ],
    )?;
    let june = space(
        "june",
        &["virus", "corona", "beer", "mask"],
        array![[0.1, 1.0, 0.0], [0.2, 1.0, 0.1], [0.1, 0.0, 0.9], [0.3, 0.9, 0.0]],
    )?;

    let am = fit_pair(&april, &may, 5)?;
    let mj = fit_pair(&may, &june, 4)?;
    let may_in_april = apply_rotation(&may, &am.backward)?;
    let june_in_april = apply_rotation(&apply_rotation(&june, &mj.backward)?, &am.backward)?;

    let neighbors: Vec<String> = ["virus", "beer", "lime"].iter().map(|w| w.to_string()).collect();
    let report = neighbor_trajectory("corona", &[&april, &may_in_april, &june_in_april], &neighbors)?;
    for track in &report.neighbors {
        let series: Vec<String> = track
            .similarities
            .iter()
            .map(|e| {
                if e.absent {
                    "absent(0)".into()
                } else {
                    format!("{:.3}", e.similarity)
                }
            })
            .collect();
        println!(
            "cos(corona, {:<5}) over {:?}: {}",
            track.word,
            report.spaces,
            series.join(" -> ")
        );
    }
    Ok(())
}
