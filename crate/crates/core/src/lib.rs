//! Event-driven tweet sentiment analysis.
//!
//! Rule-based valence scoring, daily polarity series, before/after event
//! window statistics with Welch's t-test, and a count-vector logistic
//! regression classifier with one-vs-rest evaluation metrics.
//!
//! Numeric code is generic over [`Scalar`] (`f32` or `f64`); the aliases at
//! the crate root fix it to `f64`.

// range checks are written so that NaN fails them
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod corpus;
pub mod error;
pub mod evalmetrics;
pub mod eventstat;
pub mod reactor;
pub mod scalar;
pub mod series;
pub mod specfun;
pub mod synth;
pub mod textprep;
pub mod valence;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub type ValenceConfig = valence::ValenceConfig<f64>;
pub type SentimentScore = valence::SentimentScore<f64>;
pub type Lexicon = valence::Lexicon<f64>;
pub type ValenceScorer = valence::ValenceScorer<f64>;
pub type ScoredRecord = series::ScoredRecord<f64>;
pub type DailyPoint = series::DailyPoint<f64>;
pub type PolaritySeries = series::PolaritySeries<f64>;
pub type WindowPair = eventstat::WindowPair<f64>;
pub type ErrorStats = eventstat::ErrorStats<f64>;
pub type WelchResult = eventstat::WelchResult<f64>;
pub type EventReport = eventstat::EventReport<f64>;
pub type TrainConfig = reactor::TrainConfig<f64>;
pub type LrModel = reactor::LrModel<f64>;
pub type Prediction = reactor::Prediction<f64>;
pub type EventReactions = reactor::EventReactions<f64>;
pub type ClassMetrics = evalmetrics::ClassMetrics<f64>;
pub type MetricsReport = evalmetrics::MetricsReport<f64>;
