//! Date-wise polarity timeseries: mean compound score and the
//! positive-to-negative count ratio per calendar day.

use std::collections::BTreeMap;
use std::fmt;
use std::io::{Read, Write};
use std::str::FromStr;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::corpus::{parse_date, TweetRecord};
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::valence::{classify_polarity, Polarity, SentimentScore, ValenceConfig};

/// A record paired with its valence score.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoredRecord<T> {
    pub record: TweetRecord,
    pub score: SentimentScore<T>,
}

/// Which daily value an analysis reads.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Parameter {
    #[serde(rename = "meanPol")]
    MeanPol,
    #[serde(rename = "pnRatio")]
    PnRatio,
}

impl Parameter {
    pub const ALL: [Parameter; 2] = [Parameter::MeanPol, Parameter::PnRatio];

    pub fn as_str(self) -> &'static str {
        match self {
            Parameter::MeanPol => "meanPol",
            Parameter::PnRatio => "pnRatio",
        }
    }
}

impl fmt::Display for Parameter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Parameter {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "meanpol" => Ok(Parameter::MeanPol),
            "pnratio" => Ok(Parameter::PnRatio),
            _ => Err(Error::InvalidInput(format!("unknown parameter `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct DailyPoint<T> {
    pub date: NaiveDate,
    pub n: usize,
    pub n_pos: usize,
    pub n_neg: usize,
    pub n_neu: usize,
    pub mean_pol: T,
    pub pn_ratio: T,
}

impl<T: Scalar> DailyPoint<T> {
    pub fn value(&self, parameter: Parameter) -> T {
        match parameter {
            Parameter::MeanPol => self.mean_pol,
            Parameter::PnRatio => self.pn_ratio,
        }
    }
}

/// Daily points of one group, strictly ascending by date.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct PolaritySeries<T> {
    pub group: String,
    pub points: Vec<DailyPoint<T>>,
}

impl<T: Scalar> PolaritySeries<T> {
    pub fn point(&self, date: NaiveDate) -> Option<&DailyPoint<T>> {
        self.points
            .binary_search_by_key(&date, |p| p.date)
            .ok()
            .map(|i| &self.points[i])
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Mean of the daily parameter values over all points.
    pub fn overall_mean(&self, parameter: Parameter) -> Option<T> {
        let values: Vec<T> = self.points.iter().map(|p| p.value(parameter)).collect();
        crate::scalar::mean(&values)
    }
}

/// Laplace-smoothed ratio `(n_pos + 1) / (n_neg + 1)`.
pub fn pn_ratio<T: Scalar>(n_pos: usize, n_neg: usize) -> T {
    T::from_count(n_pos + 1) / T::from_count(n_neg + 1)
}

/// One point per distinct date. Within a day records are summed in id order,
/// so the result does not depend on input order.
pub fn daily_aggregate<T: Scalar>(scored: &[ScoredRecord<T>], config: &ValenceConfig<T>) -> Result<PolaritySeries<T>> {
    let Some(first) = scored.first() else {
        return Err(Error::Empty("no scored records to aggregate".into()));
    };
    let group = first.record.group.clone();
    if let Some(r) = scored.iter().find(|s| s.record.group != group) {
        return Err(Error::InvalidInput(format!(
            "records from groups `{group}` and `{}` mixed in one series",
            r.record.group
        )));
    }
    let mut by_day: BTreeMap<NaiveDate, Vec<&ScoredRecord<T>>> = BTreeMap::new();
    for s in scored {
        by_day.entry(s.record.date).or_default().push(s);
    }
    let points = by_day
        .into_iter()
        .map(|(date, mut day)| {
            day.sort_by(|a, b| {
                a.record.id.cmp(&b.record.id).then_with(|| {
                    a.score
                        .compound
                        .partial_cmp(&b.score.compound)
                        .unwrap_or(std::cmp::Ordering::Equal)
                })
            });
            let (mut n_pos, mut n_neg, mut n_neu) = (0, 0, 0);
            let mut total = T::zero();
            for s in &day {
                total += s.score.compound;
                match classify_polarity(&s.score, config) {
                    Polarity::Positive => n_pos += 1,
                    Polarity::Negative => n_neg += 1,
                    Polarity::Neutral => n_neu += 1,
                }
            }
            DailyPoint {
                date,
                n: day.len(),
                n_pos,
                n_neg,
                n_neu,
                mean_pol: total / T::from_count(day.len()),
                pn_ratio: pn_ratio(n_pos, n_neg),
            }
        })
        .collect();
    Ok(PolaritySeries { group, points })
}

/// Groups ordered from most negative to most positive overall meanPol; ties by name.
pub fn rank_groups_by_mean_pol<T: Scalar>(series: &[PolaritySeries<T>]) -> Vec<(String, T)> {
    let mut ranked: Vec<(String, T)> = series
        .iter()
        .filter_map(|s| s.overall_mean(Parameter::MeanPol).map(|m| (s.group.clone(), m)))
        .collect();
    ranked.sort_by(|a, b| {
        a.1.partial_cmp(&b.1)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then_with(|| a.0.cmp(&b.0))
    });
    ranked
}

pub const SERIES_CSV_HEADER: [&str; 7] = ["date", "n", "nPos", "nNeg", "nNeu", "meanPol", "pnRatio"];

/// Writes `date,n,nPos,nNeg,nNeu,meanPol,pnRatio` rows.
pub fn write_series_csv<T: Scalar, W: Write>(series: &PolaritySeries<T>, out: W) -> std::io::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(SERIES_CSV_HEADER)?;
    for p in &series.points {
        w.write_record([
            p.date.format("%Y-%m-%d").to_string(),
            p.n.to_string(),
            p.n_pos.to_string(),
            p.n_neg.to_string(),
            p.n_neu.to_string(),
            p.mean_pol.to_string(),
            p.pn_ratio.to_string(),
        ])?;
    }
    w.flush()
}

pub fn read_series_csv<T: Scalar, R: Read>(input: R, group: &str) -> Result<PolaritySeries<T>> {
    let mut rdr = csv::Reader::from_reader(input);
    let headers = rdr
        .headers()
        .map_err(|e| Error::InvalidInput(format!("series header: {e}")))?
        .clone();
    if headers.iter().ne(SERIES_CSV_HEADER) {
        return Err(Error::InvalidInput(format!(
            "series header must be {}",
            SERIES_CSV_HEADER.join(",")
        )));
    }
    let mut points: Vec<DailyPoint<T>> = Vec::new();
    for (i, row) in rdr.records().enumerate() {
        let row = row.map_err(|e| Error::InvalidInput(format!("series row {}: {e}", i + 1)))?;
        let bad = |what: &str| Error::InvalidInput(format!("series row {}: bad {what}", i + 1));
        let count = |k: usize| row[k].parse::<usize>().map_err(|_| bad(SERIES_CSV_HEADER[k]));
        let real = |k: usize| row[k].parse::<f64>().map(T::lit).map_err(|_| bad(SERIES_CSV_HEADER[k]));
        let p = DailyPoint {
            date: parse_date(&row[0]).map_err(|e| Error::InvalidInput(format!("series row {}: {e}", i + 1)))?,
            n: count(1)?,
            n_pos: count(2)?,
            n_neg: count(3)?,
            n_neu: count(4)?,
            mean_pol: real(5)?,
            pn_ratio: real(6)?,
        };
        if p.n_pos + p.n_neg + p.n_neu != p.n {
            return Err(bad("polarity counts"));
        }
        if points.last().is_some_and(|last| last.date >= p.date) {
            return Err(bad("date order"));
        }
        points.push(p);
    }
    Ok(PolaritySeries {
        group: group.to_owned(),
        points,
    })
}
