//! One-vs-rest confusion counts, per-class PREC / SN / SP / ACC and their
//! macro average.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// One-vs-rest counts for a single class.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassCounts {
    pub tp: u64,
    pub fp: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
    pub tn: u64,
}

impl ClassCounts {
    pub fn total(&self) -> u64 {
        self.tp + self.fp + self.fn_ + self.tn
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionCounts {
    pub classes: Vec<String>,
    pub per_class: Vec<ClassCounts>,
    pub n: u64,
}

impl ConfusionCounts {
    /// Element-wise sum over classes, the basis of micro averaging.
    pub fn pooled(&self) -> ClassCounts {
        self.per_class
            .iter()
            .fold(ClassCounts::default(), |acc, c| ClassCounts {
                tp: acc.tp + c.tp,
                fp: acc.fp + c.fp,
                fn_: acc.fn_ + c.fn_,
                tn: acc.tn + c.tn,
            })
    }
}

fn class_index(classes: &[String], label: &str) -> Result<usize> {
    classes
        .iter()
        .position(|c| c == label)
        .ok_or_else(|| Error::InvalidInput(format!("unknown label {label:?}")))
}

pub fn confusion<S: AsRef<str>, U: AsRef<str>>(
    predictions: &[S],
    truth: &[U],
    classes: &[String],
) -> Result<ConfusionCounts> {
    if predictions.len() != truth.len() {
        return Err(Error::Shape(format!(
            "{} predictions but {} true labels",
            predictions.len(),
            truth.len()
        )));
    }
    if classes.is_empty() {
        return Err(Error::InvalidInput("no classes given".into()));
    }
    let c = classes.len();
    let mut matrix = vec![vec![0u64; c]; c];
    for (p, t) in predictions.iter().zip(truth) {
        let p = class_index(classes, p.as_ref())?;
        let t = class_index(classes, t.as_ref())?;
        matrix[t][p] += 1;
    }
    let n = predictions.len() as u64;
    let per_class = (0..c)
        .map(|k| {
            let tp = matrix[k][k];
            let row: u64 = matrix[k].iter().sum();
            let col: u64 = matrix.iter().map(|r| r[k]).sum();
            ClassCounts {
                tp,
                fn_: row - tp,
                fp: col - tp,
                tn: n + tp - row - col,
            }
        })
        .collect();
    Ok(ConfusionCounts {
        classes: classes.to_vec(),
        per_class,
        n,
    })
}

/// Metrics for one class. `None` marks a zero denominator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct ClassMetrics<T> {
    pub prec: Option<T>,
    pub sn: Option<T>,
    pub sp: Option<T>,
    pub acc: Option<T>,
}

impl<T: Scalar> ClassMetrics<T> {
    pub fn new(prec: T, sn: T, sp: T, acc: T) -> Self {
        Self {
            prec: Some(prec),
            sn: Some(sn),
            sp: Some(sp),
            acc: Some(acc),
        }
    }

    pub fn values(&self) -> [Option<T>; 4] {
        [self.prec, self.sn, self.sp, self.acc]
    }

    pub fn is_fully_defined(&self) -> bool {
        self.values().iter().all(Option::is_some)
    }

    fn from_values(v: [Option<T>; 4]) -> Self {
        Self {
            prec: v[0],
            sn: v[1],
            sp: v[2],
            acc: v[3],
        }
    }
}

pub const METRIC_NAMES: [&str; 4] = ["PREC", "SN", "SP", "ACC"];

fn ratio<T: Scalar>(num: u64, den: u64) -> Option<T> {
    (den > 0).then(|| T::lit(num as f64) / T::lit(den as f64))
}

pub fn class_metrics<T: Scalar>(c: &ClassCounts) -> ClassMetrics<T> {
    ClassMetrics {
        prec: ratio(c.tp, c.tp + c.fp),
        sn: ratio(c.tp, c.tp + c.fn_),
        sp: ratio(c.tn, c.tn + c.fp),
        acc: ratio(c.tp + c.tn, c.total()),
    }
}

/// Unweighted mean of each metric over the classes where it is defined.
/// A metric undefined for every class stays `None`.
pub fn macro_average<T: Scalar>(per_class: &[ClassMetrics<T>]) -> Result<ClassMetrics<T>> {
    if per_class.is_empty() {
        return Err(Error::Empty("no per-class metrics to average".into()));
    }
    let mut out = [None; 4];
    for (m, slot) in out.iter_mut().enumerate() {
        let defined: Vec<T> = per_class.iter().filter_map(|c| c.values()[m]).collect();
        let skipped = per_class.len() - defined.len();
        if skipped > 0 {
            log::warn!(
                "{}: {skipped} of {} classes undefined, excluded from macro average",
                METRIC_NAMES[m],
                per_class.len()
            );
        }
        *slot = crate::scalar::mean(&defined);
    }
    Ok(ClassMetrics::from_values(out))
}

pub fn micro_average<T: Scalar>(counts: &ConfusionCounts) -> ClassMetrics<T> {
    class_metrics(&counts.pooled())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct MetricsReport<T> {
    pub classes: Vec<String>,
    pub n: u64,
    pub counts: Vec<ClassCounts>,
    pub per_class: Vec<ClassMetrics<T>>,
    #[serde(rename = "macro")]
    pub macro_avg: ClassMetrics<T>,
    #[serde(rename = "micro")]
    pub micro_avg: ClassMetrics<T>,
}

pub fn evaluate<T: Scalar, S: AsRef<str>, U: AsRef<str>>(
    predictions: &[S],
    truth: &[U],
    classes: &[String],
) -> Result<MetricsReport<T>> {
    let counts = confusion(predictions, truth, classes)?;
    if counts.n == 0 {
        return Err(Error::Empty("no labeled samples to evaluate".into()));
    }
    let per_class: Vec<ClassMetrics<T>> = counts.per_class.iter().map(class_metrics).collect();
    Ok(MetricsReport {
        macro_avg: macro_average(&per_class)?,
        micro_avg: micro_average(&counts),
        classes: counts.classes,
        n: counts.n,
        counts: counts.per_class,
        per_class,
    })
}

impl<T: Scalar> MetricsReport<T> {
    /// Aligned table: one row per class, then the macro average row.
    pub fn to_table(&self) -> String {
        let fmt = |v: Option<T>, prec: usize| match v {
            Some(v) => format!("{:.*}", prec, v.to_f64_lossy()),
            None => "undef".to_owned(),
        };
        let width = self
            .classes
            .iter()
            .map(String::len)
            .chain(["Macro average".len()])
            .max()
            .unwrap_or(0);
        let mut s = format!("{:<width$}", "");
        for name in METRIC_NAMES {
            let _ = write!(s, "  {name:>7}");
        }
        s.push('\n');
        let mut row = |label: &str, m: &ClassMetrics<T>, prec: usize| {
            let _ = write!(s, "{label:<width$}");
            for v in m.values() {
                let _ = write!(s, "  {:>7}", fmt(v, prec));
            }
            s.push('\n');
        };
        for (c, m) in self.classes.iter().zip(&self.per_class) {
            row(c, m, 3);
        }
        row("Macro average", &self.macro_avg, 4);
        let _ = writeln!(s, "\nEvaluated samples: {}", self.n);
        s
    }
}
