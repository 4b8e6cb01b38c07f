//! Train a space on one period, warm-start the next period from it, and
//! show that zero epochs leave the shared vectors untouched.
//!
//! ```text
//! cargo run --release --example train_warm_start
//! ```

use semshift::nearest_neighbors;
use semshift::sgns::{learning_rate, train_corpus, Corpus, TrainConfig};
use semshift::synthetic::ShiftScenario;
use std::collections::HashSet;

fn main() -> semshift::Result<()> {
    let corpus = ShiftScenario {
        vocab_size: 400,
        topics: 8,
        tokens_per_period: 60_000,
        shifted: 4,
        ..ShiftScenario::default()
    }
    .generate()?;
    let config = TrainConfig {
        dim: 32,
        min_count: 5,
        epochs: 5,
        ..TrainConfig::default()
    };
    println!(
        "learning rate over an epoch: {} -> {} -> {}",
        learning_rate(0.0, &config),
        learning_rate(0.5, &config),
        learning_rate(1.0, &config)
    );

    let may = Corpus::from_sentences("may", &corpus.base, config.min_count)?;
    let june = Corpus::from_sentences("june", &corpus.event, config.min_count)?;
    let base = train_corpus(&may, &config, None)?;
    let event = train_corpus(
        &june,
        &TrainConfig {
            seed: 2,
            ..config.clone()
        },
        Some(&base),
    )?;
    println!(
        "may: {} words, june: {} words, dim {}",
        base.len(),
        event.len(),
        event.dim()
    );

    let frozen = train_corpus(
        &june,
        &TrainConfig {
            epochs: 0,
            ..config.clone()
        },
        Some(&base),
    )?;
    let unchanged = frozen
        .words()
        .iter()
        .filter(|w| base.vector(w) == frozen.vector(w))
        .count();
    println!(
        "epochs = 0: {unchanged} of {} shared vectors identical to the init",
        frozen.len()
    );

    let query = &corpus.shifted[0];
    for (label, space) in [("may", &base), ("june", &event)] {
        let v = space.vector(query).expect("shifted words are frequent").to_vec();
        let hits = nearest_neighbors(space, &v, 5, &HashSet::from([query.as_str()]))?;
        let names: Vec<_> = hits.iter().map(|h| format!("{} {:.2}", h.word, h.similarity)).collect();
        println!("{label} neighbors of {query}: {}", names.join(", "));
    }
    Ok(())
}
