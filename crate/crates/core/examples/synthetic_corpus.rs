//! Writes a seeded synthetic labeled corpus and a matching event list.
//!
//! cargo run -p polarity-core --example synthetic_corpus -- <out-dir>

use std::path::PathBuf;

use chrono::NaiveDate;
use polarity_core::corpus::{write_corpus, CorpusFormat};
use polarity_core::synth::tweet_corpus;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "sample".into()));
    std::fs::create_dir_all(&dir)?;
    let start = NaiveDate::from_ymd_opt(2020, 3, 1).expect("valid date");
    let records = tweet_corpus(&["Japan", "USA", "UK", "Australia"], start, 60, 12, 2020);
    write_corpus(&records, dir.join("corpus.csv"), CorpusFormat::Csv)?;
    std::fs::write(
        dir.join("events.csv"),
        "name,group,date\nLED,Japan,2020-04-07\nESP,Japan,2020-04-07\nLED,USA,2020-03-20\nESP,USA,2020-03-27\n\
         LED,UK,2020-03-23\nESP,UK,2020-03-17\nLED,Australia,2020-03-23\nESP,Australia,2020-03-22\n",
    )?;
    println!("wrote {} records to {}", records.len(), dir.display());
    Ok(())
}
