//! Predicted reaction counts in the windows around an event.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::model::LrModel;
use crate::corpus::TweetRecord;
use crate::error::{Error, Result};
use crate::eventstat::{window_spans, Event};
use crate::scalar::Scalar;
use crate::textprep::Preprocessor;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct WindowCounts<T> {
    pub counts: Vec<usize>,
    pub total: usize,
    pub proportions: Vec<T>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct EventReactions<T> {
    pub event: Event,
    pub window_days: u32,
    pub classes: Vec<String>,
    pub before: WindowCounts<T>,
    pub after: WindowCounts<T>,
}

/// Count per class divided by the window total.
pub fn window_proportions<T: Scalar>(counts: &[usize]) -> Result<WindowCounts<T>> {
    let total: usize = counts.iter().sum();
    if total == 0 {
        return Err(Error::Empty("window contains no predictions".into()));
    }
    Ok(WindowCounts {
        counts: counts.to_vec(),
        total,
        proportions: counts
            .iter()
            .map(|&c| T::from_count(c) / T::from_count(total))
            .collect(),
    })
}

/// Classifies the event group's records in the `k` days before and after the
/// event (event day excluded) and tallies predicted classes.
pub fn predicted_event_counts<T: Scalar>(
    records: &[TweetRecord],
    model: &LrModel<T>,
    prep: &Preprocessor,
    event: &Event,
    k: u32,
) -> Result<EventReactions<T>> {
    if k == 0 {
        return Err(Error::InvalidInput("window size must be at least 1 day".into()));
    }
    let ((b0, b1), (a0, a1)) = window_spans(event.date, k);
    let mut before = vec![0usize; model.n_classes()];
    let mut after = vec![0usize; model.n_classes()];
    for r in records.iter().filter(|r| r.group == event.group) {
        let side = if b0 <= r.date && r.date <= b1 {
            &mut before
        } else if a0 <= r.date && r.date <= a1 {
            &mut after
        } else {
            continue;
        };
        side[model.predict(&prep.prep(&r.text)).class_index] += 1;
    }
    let label = || format!("{} {} {}", event.group, event.name, event.date);
    let before = window_proportions(&before).map_err(|_| Error::EmptyWindow {
        event: label(),
        side: "before",
    })?;
    let after = window_proportions(&after).map_err(|_| Error::EmptyWindow {
        event: label(),
        side: "after",
    })?;
    Ok(EventReactions {
        event: event.clone(),
        window_days: k,
        classes: model.classes.clone(),
        before,
        after,
    })
}

/// Aligned table with counts and proportions before and after each event.
pub fn format_reactions_table<T: Scalar>(rows: &[EventReactions<T>]) -> String {
    let mut s = String::new();
    for r in rows {
        let _ = writeln!(
            s,
            "{} {} ({}), k = {} days",
            r.event.group, r.event.name, r.event.date, r.window_days
        );
        let labels: Vec<String> = ["Before", "After"]
            .iter()
            .flat_map(|side| r.classes.iter().map(move |c| format!("{side}:{c}")))
            .collect();
        let width = labels.iter().map(String::len).max().unwrap_or(0).max(8);
        let mut header = format!("{:<10}", "");
        for l in &labels {
            let _ = write!(header, "  {l:>width$}");
        }
        let _ = writeln!(s, "{header}");
        let mut counts = format!("{:<10}", "Tweets");
        let mut props = format!("{:<10}", "% Tweets");
        for w in [&r.before, &r.after] {
            for (c, p) in w.counts.iter().zip(&w.proportions) {
                let _ = write!(counts, "  {c:>width$}");
                let _ = write!(props, "  {:>width$.3}", p.to_f64_lossy());
            }
        }
        let _ = writeln!(s, "{counts}\n{props}\n");
    }
    s
}
