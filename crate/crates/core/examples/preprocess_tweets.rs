//! Normalize a few tweets and print the kept token lists and corpus stats.
//!
//! ```text
//! cargo run --example preprocess_tweets [stopwords file]
//! ```

use std::io::Cursor;

use semshift::text::{load_stopwords, preprocess_document, process_lines, PipelineConfig};

const TWEETS: &str = "\
Check THIS https://t.co/x @user #COVID19 now
Stay home, stay safe!! 😷 #StayHome #covid19 #Quarantine
@who says masks help protect health workers #ppe#masks
Thank you to every nurse and doctor on the front line #ThankYou #Heroes
lol
";

fn main() -> semshift::Result<()> {
    let stopwords = match std::env::args().nth(1) {
        Some(path) => load_stopwords(path)?,
        None => load_stopwords(concat!(env!("CARGO_MANIFEST_DIR"), "/data/stopwords_en.txt"))?,
    };
    let config = PipelineConfig::default().with_stopwords(stopwords).with_min_tokens(2);

    for line in TWEETS.lines() {
        match preprocess_document(line, &config) {
            Some(tokens) => println!("{:<60} -> {tokens:?}", line),
            None => println!("{:<60} -> dropped", line),
        }
    }

    let stats = process_lines(Cursor::new(TWEETS), &config, |_| Ok(()))?;
    println!("\n{}", stats.to_json()?);
    Ok(())
}
