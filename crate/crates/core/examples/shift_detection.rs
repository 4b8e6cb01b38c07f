//! End-to-end run on a synthetic two-period corpus with planted shifts:
//! train both periods, align them, rank words by two-way stability and
//! check how many planted words land in the least stable decile.
//!
//! ```text
//! cargo run --release --example shift_detection [dim] [anchors]
//! ```

use std::collections::HashSet;

use semshift::analysis::{frequency_stability_correlation, shift_ranking};
use semshift::sgns::{train_corpus, Corpus, TrainConfig};
use semshift::stability::stability_table;
use semshift::synthetic::ShiftScenario;
use semshift::{ComparedPair, Scope};

fn main() -> semshift::Result<()> {
    let mut args = std::env::args()
        .skip(1)
        .map(|a| a.parse::<usize>().expect("integer argument"));
    let dim = args.next().unwrap_or(100);
    let anchors = args.next().unwrap_or(400);

    let scenario = ShiftScenario {
        event_jitter: 0.3,
        seed: 1,
        ..ShiftScenario::default()
    };
    let corpus = scenario.generate()?;
    let config = TrainConfig {
        dim,
        min_count: 5,
        ..TrainConfig::default()
    };
    let base = train_corpus(&Corpus::from_sentences("base", &corpus.base, 5)?, &config, None)?;
    let event = train_corpus(
        &Corpus::from_sentences("event", &corpus.event, 5)?,
        &TrainConfig { seed: 2, ..config },
        None,
    )?;

    let pair = ComparedPair::fit(&base, &event, anchors)?;
    let records = stability_table(&pair, Scope::Intersection)?;
    let decile = records.len() / 10;
    let lowest: HashSet<String> = shift_ranking(&records, decile).into_iter().map(|(w, _)| w).collect();
    let hits = corpus.shifted.iter().filter(|w| lowest.contains(*w)).count();
    println!(
        "{hits}/{} planted words in the lowest-stability decile ({decile} of {} words)",
        corpus.shifted.len(),
        records.len()
    );

    let mean =
        |f: &dyn Fn(&semshift::StabilityRecord) -> f64| records.iter().map(f).sum::<f64>() / records.len() as f64;
    println!(
        "mean two-way stability {:.4}, mean one-way similarity {:.4}",
        mean(&|r| r.stab),
        mean(&|r| r.one_way_ij.unwrap_or(0.0))
    );
    for (label, space) in [("base", &base), ("event", &event)] {
        let table = space.frequency_table().expect("trained spaces carry counts");
        let report = frequency_stability_correlation(&records, &table, label)?;
        println!("Spearman(stab, {label} frequency) = {:+.3}", report.coefficient);
    }
    Ok(())
}
