//! Before/after event windows over a polarity series, error statistics and
//! Welch's unequal-variance t-test with an exact two-sided p-value.

use std::fmt::Write as _;
use std::io::Read;
use std::path::Path;

use chrono::{Duration, NaiveDate};
use serde::{Deserialize, Serialize};

use crate::corpus::parse_date;
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::series::{Parameter, PolaritySeries};
use crate::specfun::beta_reg_with_complement;

/// Days on each side of an event.
pub const DEFAULT_WINDOW_DAYS: u32 = 15;
/// Significance level used for report flags.
pub const SIGNIFICANCE_LEVEL: f64 = 0.05;

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Event {
    pub name: String,
    pub group: String,
    pub date: NaiveDate,
}

/// Reads an event list: CSV with header `name,group,date`.
pub fn read_events<R: Read>(input: R) -> Result<Vec<Event>> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(input);
    let headers = rdr
        .headers()
        .map_err(|e| Error::InvalidInput(format!("event header: {e}")))?
        .clone();
    let col = |name: &str| headers.iter().position(|h| h.eq_ignore_ascii_case(name));
    let (Some(n), Some(g), Some(d)) = (col("name"), col("group"), col("date")) else {
        return Err(Error::InvalidInput("event file header must be name,group,date".into()));
    };
    let mut events = Vec::new();
    for (i, row) in rdr.records().enumerate() {
        let row = row.map_err(|e| Error::InvalidInput(format!("event row {}: {e}", i + 1)))?;
        let field = |k: usize| row.get(k).filter(|s| !s.is_empty());
        let (Some(name), Some(group), Some(date)) = (field(n), field(g), field(d)) else {
            return Err(Error::InvalidInput(format!("event row {}: missing field", i + 1)));
        };
        let date = parse_date(date).map_err(|e| Error::InvalidInput(format!("event row {}: {e}", i + 1)))?;
        events.push(Event {
            name: name.to_owned(),
            group: group.to_owned(),
            date,
        });
    }
    Ok(events)
}

pub fn load_events(path: impl AsRef<Path>) -> Result<Vec<Event>> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_events(std::io::BufReader::new(file))
}

/// Calendar spans `[date-k, date-1]` and `[date+1, date+k]`; the event day belongs to neither.
pub fn window_spans(date: NaiveDate, k: u32) -> ((NaiveDate, NaiveDate), (NaiveDate, NaiveDate)) {
    let k = Duration::days(i64::from(k));
    let one = Duration::days(1);
    ((date - k, date - one), (date + one, date + k))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct WindowPair<T> {
    pub before: Vec<T>,
    pub after: Vec<T>,
    pub k: u32,
    pub parameter: Parameter,
}

pub fn extract_windows<T: Scalar>(
    series: &PolaritySeries<T>,
    event: &Event,
    k: u32,
    parameter: Parameter,
) -> Result<WindowPair<T>> {
    if series.is_empty() {
        return Err(Error::Empty(format!("series for `{}` is empty", series.group)));
    }
    if k == 0 {
        return Err(Error::InvalidInput("window size must be at least 1 day".into()));
    }
    let ((b0, b1), (a0, a1)) = window_spans(event.date, k);
    let pick = |lo: NaiveDate, hi: NaiveDate| -> Vec<T> {
        series
            .points
            .iter()
            .filter(|p| lo <= p.date && p.date <= hi)
            .map(|p| p.value(parameter))
            .collect()
    };
    let before = pick(b0, b1);
    let after = pick(a0, a1);
    let label = || format!("{} {} {}", event.group, event.name, event.date);
    if before.is_empty() {
        return Err(Error::EmptyWindow {
            event: label(),
            side: "before",
        });
    }
    if after.is_empty() {
        return Err(Error::EmptyWindow {
            event: label(),
            side: "after",
        });
    }
    Ok(WindowPair {
        before,
        after,
        k,
        parameter,
    })
}

/// Sample mean, sample standard deviation (n-1) and standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct ErrorStats<T> {
    pub mean: T,
    /// Zero for a single observation, where no spread can be estimated.
    pub sd: T,
    pub stderr: T,
    pub n: usize,
}

/// Two-pass mean and variance, summed in ascending order so that any
/// permutation of the same values gives bit-identical results.
fn mean_var<T: Scalar>(values: &[T]) -> (T, T) {
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    let values = &sorted[..];
    let n = T::from_count(values.len());
    let mean = values.iter().fold(T::zero(), |a, &v| a + v) / n;
    if values.len() < 2 {
        return (mean, T::zero());
    }
    let ss = values.iter().fold(T::zero(), |a, &v| a + (v - mean) * (v - mean));
    (mean, ss / (n - T::one()))
}

pub fn error_stats<T: Scalar>(values: &[T]) -> Result<ErrorStats<T>> {
    if values.is_empty() {
        return Err(Error::Empty("error statistics need at least one value".into()));
    }
    let (mean, var) = mean_var(values);
    let sd = var.sqrt();
    Ok(ErrorStats {
        mean,
        sd,
        stderr: sd / T::from_count(values.len()).sqrt(),
        n: values.len(),
    })
}

/// Set when both samples have zero variance and the statistic has no finite value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Degeneracy {
    /// Both samples constant at the same value: `t = 0`, `p = 1`.
    EqualConstants,
    /// Both samples constant at different values: `|t| = inf`, `p = 0`.
    DistinctConstants,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct WelchResult<T> {
    pub t: T,
    pub dof: T,
    pub p: T,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub degenerate: Option<Degeneracy>,
}

/// Welch's t-test of `before` against `after`; `t` is positive when `before` has the larger mean.
pub fn welch_t<T: Scalar>(before: &[T], after: &[T]) -> Result<WelchResult<T>> {
    if before.len() < 2 || after.len() < 2 {
        return Err(Error::InvalidInput(format!(
            "Welch's t-test needs at least two values per sample (got {} and {})",
            before.len(),
            after.len()
        )));
    }
    let (n1, n2) = (T::from_count(before.len()), T::from_count(after.len()));
    let (m1, v1) = mean_var(before);
    let (m2, v2) = mean_var(after);
    let (q1, q2) = (v1 / n1, v2 / n2);
    let se2 = q1 + q2;
    if se2 == T::zero() {
        let pooled_dof = n1 + n2 - T::lit(2.0);
        return Ok(if m1 == m2 {
            WelchResult {
                t: T::zero(),
                dof: pooled_dof,
                p: T::one(),
                degenerate: Some(Degeneracy::EqualConstants),
            }
        } else {
            WelchResult {
                t: if m1 > m2 { T::infinity() } else { T::neg_infinity() },
                dof: pooled_dof,
                p: T::zero(),
                degenerate: Some(Degeneracy::DistinctConstants),
            }
        });
    }
    let t = (m1 - m2) / se2.sqrt();
    let dof = se2 * se2 / (q1 * q1 / (n1 - T::one()) + q2 * q2 / (n2 - T::one()));
    let p = two_sided_p(t, dof)?;
    Ok(WelchResult {
        t,
        dof,
        p,
        degenerate: None,
    })
}

/// `P(|T| >= |t|)` for Student's t with `dof` degrees of freedom,
/// evaluated as `I_{dof/(dof+t^2)}(dof/2, 1/2)`.
pub fn two_sided_p<T: Scalar>(t: T, dof: T) -> Result<T> {
    if !(dof > T::zero()) || dof.is_infinite() {
        return Err(Error::Domain(format!(
            "degrees of freedom must be finite and > 0, got {dof}"
        )));
    }
    if t.is_nan() {
        return Err(Error::Domain("t statistic is NaN".into()));
    }
    if t.is_infinite() {
        return Ok(T::zero());
    }
    let t2 = t * t;
    let denom = dof + t2;
    let p = beta_reg_with_complement(dof / T::lit(2.0), T::lit(0.5), dof / denom, t2 / denom)?;
    Ok(p.max(T::zero()).min(T::one()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct ParameterResult<T> {
    pub before: ErrorStats<T>,
    pub after: ErrorStats<T>,
    pub welch: WelchResult<T>,
    pub significant: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct ParameterOutcome<T> {
    pub parameter: Parameter,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub result: Option<ParameterResult<T>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct EventEntry<T> {
    pub event: Event,
    pub outcomes: Vec<ParameterOutcome<T>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct EventReport<T> {
    pub window_days: u32,
    pub significance_level: f64,
    pub entries: Vec<EventEntry<T>>,
}

fn analyse<T: Scalar>(
    series: &PolaritySeries<T>,
    event: &Event,
    k: u32,
    parameter: Parameter,
) -> Result<ParameterResult<T>> {
    let w = extract_windows(series, event, k, parameter)?;
    let welch = welch_t(&w.before, &w.after)?;
    Ok(ParameterResult {
        before: error_stats(&w.before)?,
        after: error_stats(&w.after)?,
        significant: welch.p.to_f64_lossy() < SIGNIFICANCE_LEVEL,
        welch,
    })
}

/// Window statistics and Welch tests for every event and parameter.
///
/// Failures are recorded per entry; the batch always completes. Entries are
/// ordered by group, then date, then event name.
pub fn event_report<T: Scalar>(
    series: &[PolaritySeries<T>],
    events: &[Event],
    k: u32,
    parameters: &[Parameter],
) -> EventReport<T> {
    let mut events: Vec<&Event> = events.iter().collect();
    events.sort_by(|a, b| (&a.group, a.date, &a.name).cmp(&(&b.group, b.date, &b.name)));
    let entries = events
        .into_iter()
        .map(|event| {
            let outcomes = parameters
                .iter()
                .map(|&parameter| {
                    let res = series
                        .iter()
                        .find(|s| s.group == event.group)
                        .ok_or_else(|| Error::Empty(format!("no series for group `{}`", event.group)))
                        .and_then(|s| analyse(s, event, k, parameter));
                    match res {
                        Ok(r) => ParameterOutcome {
                            parameter,
                            result: Some(r),
                            error: None,
                        },
                        Err(e) => ParameterOutcome {
                            parameter,
                            result: None,
                            error: Some(e.to_string()),
                        },
                    }
                })
                .collect();
            EventEntry {
                event: event.clone(),
                outcomes,
            }
        })
        .collect();
    EventReport {
        window_days: k,
        significance_level: SIGNIFICANCE_LEVEL,
        entries,
    }
}

impl<T: Scalar> EventReport<T> {
    fn event_names(&self) -> Vec<&str> {
        let mut names: Vec<&str> = Vec::new();
        for e in &self.entries {
            if !names.contains(&e.event.name.as_str()) {
                names.push(&e.event.name);
            }
        }
        names
    }

    fn groups(&self) -> Vec<&str> {
        let mut groups: Vec<&str> = Vec::new();
        for e in &self.entries {
            if !groups.contains(&e.event.group.as_str()) {
                groups.push(&e.event.group);
            }
        }
        groups
    }

    fn outcome(&self, group: &str, name: &str, parameter: Parameter) -> Option<&ParameterOutcome<T>> {
        self.entries
            .iter()
            .find(|e| e.event.group == group && e.event.name == name)
            .and_then(|e| e.outcomes.iter().find(|o| o.parameter == parameter))
    }

    /// Aligned text: one before/after means table per event, then the t/p/dof table.
    pub fn to_text(&self) -> String {
        let names = self.event_names();
        let groups = self.groups();
        let gw = groups.iter().map(|g| g.len()).max().unwrap_or(0).max(5);
        let cell = |o: Option<&ParameterOutcome<T>>, f: &dyn Fn(&ParameterResult<T>) -> String| {
            o.and_then(|o| o.result.as_ref()).map_or_else(|| "n/a".to_string(), f)
        };
        let mut s = String::new();
        for name in &names {
            let _ = writeln!(
                s,
                "MeanPol and pnRatio before and after {name} (k = {} days)",
                self.window_days
            );
            let _ = writeln!(
                s,
                "{:<gw$}  {:>12}  {:>12}  {:>12}  {:>12}",
                "Group",
                format!("Before{name}"),
                format!("After{name}"),
                format!("Before{name}"),
                format!("After{name}"),
            );
            let _ = writeln!(s, "{:<gw$}  {:>26}  {:>26}", "", "MeanPol", "pnRatio");
            for g in &groups {
                if self.outcome(g, name, Parameter::MeanPol).is_none() {
                    continue;
                }
                let mp = self.outcome(g, name, Parameter::MeanPol);
                let pr = self.outcome(g, name, Parameter::PnRatio);
                let _ = writeln!(
                    s,
                    "{:<gw$}  {:>12}  {:>12}  {:>12}  {:>12}",
                    g,
                    cell(mp, &|r| format!("{:.6}", r.before.mean)),
                    cell(mp, &|r| format!("{:.6}", r.after.mean)),
                    cell(pr, &|r| format!("{:.6}", r.before.mean)),
                    cell(pr, &|r| format!("{:.6}", r.after.mean)),
                );
            }
            s.push('\n');
        }

        let _ = writeln!(s, "Welch's t-test results (two-sided, before minus after)");
        let mut header = format!("{:<gw$}  {:<4}", "Group", "Stat");
        for name in &names {
            for p in Parameter::ALL {
                let _ = write!(header, "  {:>14}", format!("{name} {p}"));
            }
        }
        let _ = writeln!(s, "{}", header.trim_end());
        for g in &groups {
            for (i, stat) in ["t", "p", "dof"].into_iter().enumerate() {
                let mut line = format!("{:<gw$}  {:<4}", if i == 0 { *g } else { "" }, stat);
                for name in &names {
                    for p in Parameter::ALL {
                        let v = cell(self.outcome(g, name, p), &|r| match stat {
                            "t" => format!("{:.4}", r.welch.t),
                            "p" => format!("{:.4}{}", r.welch.p, if r.significant { "*" } else { "" }),
                            _ => format!("{:.3}", r.welch.dof),
                        });
                        let _ = write!(line, "  {v:>14}");
                    }
                }
                let _ = writeln!(s, "{}", line.trim_end());
            }
        }
        let _ = writeln!(s, "* p < {}", self.significance_level);

        let errors: Vec<String> = self
            .entries
            .iter()
            .flat_map(|e| {
                e.outcomes.iter().filter_map(move |o| {
                    o.error.as_ref().map(|msg| {
                        format!(
                            "{} {} ({}) {}: {msg}",
                            e.event.group, e.event.name, e.event.date, o.parameter
                        )
                    })
                })
            })
            .collect();
        if !errors.is_empty() {
            s.push_str("\nErrors\n");
            for e in errors {
                let _ = writeln!(s, "  {e}");
            }
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::series::DailyPoint;

    fn date(s: &str) -> NaiveDate {
        parse_date(s).unwrap()
    }

    fn dense_series(start: &str, days: i64) -> PolaritySeries<f64> {
        let start = date(start);
        PolaritySeries {
            group: "UK".into(),
            points: (0..days)
                .map(|i| DailyPoint {
                    date: start + Duration::days(i),
                    n: 1,
                    n_pos: 1,
                    n_neg: 0,
                    n_neu: 0,
                    mean_pol: (i as f64 * 0.37).sin() * 0.5,
                    pn_ratio: 1.0 + i as f64 * 0.01,
                })
                .collect(),
        }
    }

    fn event(d: &str) -> Event {
        Event {
            name: "LED".into(),
            group: "UK".into(),
            date: date(d),
        }
    }

    #[test]
    fn dense_windows_have_k_points_each() {
        let s = dense_series("2020-03-01", 60);
        let w = extract_windows(&s, &event("2020-04-01"), 15, Parameter::MeanPol).unwrap();
        assert_eq!((w.before.len(), w.after.len()), (15, 15));
    }

    #[test]
    fn windows_outside_data_fail_on_the_empty_side() {
        let s = dense_series("2020-03-01", 60);
        let err = extract_windows(&s, &event("2020-02-01"), 15, Parameter::MeanPol).unwrap_err();
        assert!(matches!(err, Error::EmptyWindow { side: "before", .. }));
        let err = extract_windows(&s, &event("2020-05-05"), 15, Parameter::MeanPol).unwrap_err();
        assert!(matches!(err, Error::EmptyWindow { side: "after", .. }));
    }

    #[test]
    fn error_stats_examples() {
        let c = error_stats(&[0.3f64, 0.3, 0.3]).unwrap();
        assert_eq!((c.mean, c.sd, c.stderr), (0.3, 0.0, 0.0));
        let s = error_stats(&[1.0f64, 2.0, 3.0]).unwrap();
        assert_eq!((s.mean, s.sd), (2.0, 1.0));
        assert!((s.stderr - 1.0 / 3f64.sqrt()).abs() < 1e-15);
        let one = error_stats(&[0.7f64]).unwrap();
        assert_eq!(one.sd, one.stderr);
        assert!(error_stats::<f64>(&[]).is_err());
    }

    #[test]
    fn identical_samples_give_t_zero_p_one() {
        let a = [0.1f64, 0.4, -0.2, 0.3];
        let r = welch_t(&a, &[0.3, -0.2, 0.1, 0.4]).unwrap();
        assert_eq!(r.t, 0.0);
        assert_eq!(r.p, 1.0);
    }

    #[test]
    fn degenerate_constant_samples_are_flagged() {
        let r = welch_t(&[1.0f64, 1.0], &[1.0, 1.0, 1.0]).unwrap();
        assert_eq!((r.t, r.p, r.degenerate), (0.0, 1.0, Some(Degeneracy::EqualConstants)));
        let r = welch_t(&[1.0f64, 1.0], &[2.0, 2.0]).unwrap();
        assert_eq!(r.p, 0.0);
        assert_eq!(r.degenerate, Some(Degeneracy::DistinctConstants));
        assert!(r.t.is_infinite() && r.t < 0.0);
        assert!(welch_t(&[1.0f64], &[2.0, 3.0]).is_err());
    }

    #[test]
    fn near_equal_variances_give_dof_near_pooled() {
        let before: Vec<f64> = (0..15).map(|i| (i as f64 * 0.9).sin()).collect();
        let after: Vec<f64> = (0..15).map(|i| (i as f64 * 0.9 + 0.4).sin() + 0.1).collect();
        let r = welch_t(&before, &after).unwrap();
        assert!(r.dof > 27.0 && r.dof <= 28.0, "dof {}", r.dof);
    }

    #[test]
    fn p_value_domain() {
        assert_eq!(two_sided_p(0.0f64, 5.0).unwrap(), 1.0);
        assert_eq!(two_sided_p(f64::INFINITY, 5.0).unwrap(), 0.0);
        assert!(two_sided_p(1.0f64, 0.0).is_err());
        assert!(two_sided_p(1.0f64, -2.0).is_err());
        // one degree of freedom has a closed form: p = 1 - 2 atan(|t|) / pi
        for &t in &[0.3f64, 1.0, 4.0, 25.0] {
            let exact = 1.0 - 2.0 * t.atan() / std::f64::consts::PI;
            assert!((two_sided_p(t, 1.0).unwrap() - exact).abs() < 1e-13, "t={t}");
        }
        // two degrees of freedom: p = 1 - |t| / sqrt(2 + t^2)
        for &t in &[0.1f64, 1.5, 9.0] {
            let exact = 1.0 - t / (2.0 + t * t).sqrt();
            assert!((two_sided_p(t, 2.0).unwrap() - exact).abs() < 1e-13);
        }
    }

    #[test]
    fn event_file_parsing() {
        let evs = read_events("name,group,date\nLED,Japan,2020-04-07\n ESP , UK ,2020-03-20\n".as_bytes()).unwrap();
        assert_eq!(evs.len(), 2);
        assert_eq!(evs[1].name, "ESP");
        assert!(read_events("name,date\nLED,2020-01-01\n".as_bytes()).is_err());
        assert!(read_events("name,group,date\nLED,UK,2020-02-31\n".as_bytes()).is_err());
    }

    #[test]
    fn report_continues_past_failing_events() {
        let s = dense_series("2020-03-01", 60);
        let events = [event("2019-01-01"), event("2020-04-01")];
        let rep = event_report(&[s], &events, 15, &Parameter::ALL);
        assert_eq!(rep.entries.len(), 2);
        assert!(rep.entries[0].outcomes.iter().all(|o| o.error.is_some()));
        assert!(rep.entries[1].outcomes.iter().all(|o| o.result.is_some()));
        let text = rep.to_text();
        assert!(text.contains("Errors"));
        assert!(text.contains("dof"));
    }
}
