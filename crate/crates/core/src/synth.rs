//! Seeded synthetic data: labeled token corpora, step-change series and
//! dated tweet corpora. Used by tests, benchmarks and the demo fixtures.

use chrono::{Duration, NaiveDate};
use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::corpus::TweetRecord;
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::series::{DailyPoint, PolaritySeries};
use crate::textprep::TokenSeq;

/// Labeled bag-of-words corpus where each class draws most tokens from its
/// own pool and the rest from a pool shared by all classes.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledCorpusSpec {
    pub n_docs: usize,
    pub n_classes: usize,
    pub doc_len: usize,
    pub tokens_per_class: usize,
    pub shared_tokens: usize,
    /// Probability that a token comes from the class-specific pool.
    pub specific_share: f64,
}

impl Default for LabeledCorpusSpec {
    fn default() -> Self {
        Self {
            n_docs: 300,
            n_classes: 3,
            doc_len: 12,
            tokens_per_class: 20,
            shared_tokens: 20,
            specific_share: 0.8,
        }
    }
}

pub fn class_name(i: usize) -> String {
    format!("class{i}")
}

/// Documents are assigned classes round-robin, so counts differ by at most one.
pub fn labeled_corpus(spec: &LabeledCorpusSpec, seed: u64) -> Result<(Vec<TokenSeq>, Vec<String>)> {
    if spec.n_classes < 2 || spec.doc_len == 0 || spec.tokens_per_class == 0 {
        return Err(Error::InvalidInput(
            "labeled corpus needs >= 2 classes and non-empty pools".into(),
        ));
    }
    if !(0.0..=1.0).contains(&spec.specific_share) || (spec.specific_share < 1.0 && spec.shared_tokens == 0) {
        return Err(Error::InvalidInput(
            "specific share must be in [0, 1] with a shared pool below 1".into(),
        ));
    }
    let pools: Vec<Vec<String>> = (0..spec.n_classes)
        .map(|c| (0..spec.tokens_per_class).map(|t| format!("c{c}w{t}")).collect())
        .collect();
    let shared: Vec<String> = (0..spec.shared_tokens).map(|t| format!("sharedw{t}")).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut docs = Vec::with_capacity(spec.n_docs);
    let mut labels = Vec::with_capacity(spec.n_docs);
    for d in 0..spec.n_docs {
        let c = d % spec.n_classes;
        let tokens: Vec<String> = (0..spec.doc_len)
            .map(|_| {
                let pool = if rng.random_bool(spec.specific_share) {
                    &pools[c]
                } else {
                    &shared
                };
                pool.choose(&mut rng).expect("non-empty pool").clone()
            })
            .collect();
        docs.push(TokenSeq::new(tokens)?);
        labels.push(class_name(c));
    }
    Ok((docs, labels))
}

/// Dense daily series over `[event - k, event + k]` with Gaussian noise around
/// `level`, shifted by `shift` strictly after the event day. Both parameters
/// carry the same values.
pub fn step_series<T: Scalar>(
    group: &str,
    event: NaiveDate,
    k: u32,
    level: f64,
    shift: f64,
    sigma: f64,
    seed: u64,
) -> Result<PolaritySeries<T>> {
    let noise = Normal::new(0.0, sigma).map_err(|e| Error::InvalidInput(e.to_string()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let k = i64::from(k);
    let points = (-k..=k)
        .map(|off| {
            let mean = level + if off > 0 { shift } else { 0.0 } + noise.sample(&mut rng);
            let v = T::lit(mean);
            DailyPoint {
                date: event + Duration::days(off),
                n: 1,
                n_pos: 0,
                n_neg: 0,
                n_neu: 1,
                mean_pol: v,
                pn_ratio: v,
            }
        })
        .collect();
    Ok(PolaritySeries {
        group: group.to_owned(),
        points,
    })
}

/// Records with exactly `counts[i]` tweets on day `start + i` (zero-count days
/// are skipped). Texts are placeholders.
pub fn records_with_day_counts(group: &str, start: NaiveDate, counts: &[usize]) -> Vec<TweetRecord> {
    let mut out = Vec::with_capacity(counts.iter().sum());
    for (day, &n) in counts.iter().enumerate() {
        let date = start + Duration::days(day as i64);
        for j in 0..n {
            out.push(TweetRecord {
                id: format!("{group}-{day:04}-{j:03}"),
                date,
                group: group.to_owned(),
                text: "tweet".to_owned(),
                label: None,
            });
        }
    }
    out
}

const HEALTH: &[&str] = &[
    "mask",
    "masks",
    "hospital",
    "hospitals",
    "testing",
    "infection",
    "doctors",
    "nurses",
    "symptoms",
    "ventilator",
];
const ECONOMY: &[&str] = &[
    "economy",
    "jobs",
    "bankruptcy",
    "recession",
    "tourism",
    "business",
    "salary",
    "unemployment",
    "stocks",
    "shops",
];
const OTHER: &[&str] = &[
    "flight", "airline", "luggage", "seat", "crew", "delayed", "boarding", "gate", "pilot", "ticket",
];
const POSITIVE: &[&str] = &["good", "great", "happy", "love", "thanks", "hope", "safe", "glad"];
const NEGATIVE: &[&str] = &["bad", "terrible", "sad", "angry", "worried", "fear", "awful", "hate"];
const FILLER: &[&str] = &[
    "the",
    "today",
    "people",
    "news",
    "government",
    "city",
    "week",
    "really",
    "still",
];

pub const REACTION_CLASSES: [&str; 3] = ["hWorry", "eWorry", "other"];

/// Dated, labeled English tweets for several groups: `per_day` tweets on each
/// of `days` consecutive days. Topic words follow the label, sentiment words
/// are mixed in with a per-group bias.
pub fn tweet_corpus(groups: &[&str], start: NaiveDate, days: usize, per_day: usize, seed: u64) -> Vec<TweetRecord> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(groups.len() * days * per_day);
    for (g, group) in groups.iter().enumerate() {
        let positive_bias = 0.3 + 0.4 * (g as f64 / groups.len().max(1) as f64);
        for day in 0..days {
            let date = start + Duration::days(day as i64);
            for j in 0..per_day {
                let label = rng.random_range(0..REACTION_CLASSES.len());
                let topic = [HEALTH, ECONOMY, OTHER][label];
                let mut words: Vec<String> = Vec::new();
                for _ in 0..rng.random_range(3..7) {
                    words.push(topic.choose(&mut rng).expect("non-empty").to_string());
                }
                let sentiment = if rng.random_bool(positive_bias) {
                    POSITIVE
                } else {
                    NEGATIVE
                };
                words.push(sentiment.choose(&mut rng).expect("non-empty").to_string());
                words.push(FILLER.choose(&mut rng).expect("non-empty").to_string());
                if rng.random_bool(0.2) {
                    words.push("#covid".to_owned());
                }
                if rng.random_bool(0.1) {
                    words.push("@someone".to_owned());
                }
                if rng.random_bool(0.1) {
                    words.push("!".to_owned());
                }
                out.push(TweetRecord {
                    id: format!("{group}-{day:04}-{j:03}"),
                    date,
                    group: (*group).to_owned(),
                    text: words.join(" "),
                    label: Some(REACTION_CLASSES[label].to_owned()),
                });
            }
        }
    }
    out
}
