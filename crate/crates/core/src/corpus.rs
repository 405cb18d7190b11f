//! Loading, validating, filtering and summarizing timestamped text records.
//!
//! Two on-disk layouts are supported, both carrying the fields
//! `id,date,group,text,label`:
//!
//! * CSV with a header row (RFC-4180 quoting, `label` column optional);
//! * JSONL, one object per line, `label` absent or `null` when unlabeled.
//!
//! Malformed rows never abort a load. They are collected into the
//! [`LoadReport`] together with their line number and the reason.

use std::collections::{BTreeMap, HashSet};
use std::fmt::{self, Write as _};
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;
use std::str::FromStr;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One collected short text.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TweetRecord {
    pub id: String,
    pub date: NaiveDate,
    pub group: String,
    pub text: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CorpusFormat {
    Csv,
    Jsonl,
}

impl CorpusFormat {
    /// Guesses the format from a file extension (`.csv`, `.jsonl`, `.ndjson`).
    pub fn from_path(path: &Path) -> Option<Self> {
        match path.extension()?.to_str()?.to_ascii_lowercase().as_str() {
            "csv" => Some(CorpusFormat::Csv),
            "jsonl" | "ndjson" => Some(CorpusFormat::Jsonl),
            _ => None,
        }
    }
}

impl FromStr for CorpusFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(CorpusFormat::Csv),
            "jsonl" | "ndjson" => Ok(CorpusFormat::Jsonl),
            other => Err(Error::InvalidInput(format!("unknown corpus format `{other}`"))),
        }
    }
}

impl fmt::Display for CorpusFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CorpusFormat::Csv => "csv",
            CorpusFormat::Jsonl => "jsonl",
        })
    }
}

/// A row that failed validation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Rejection {
    /// 1-based line number in the source file.
    pub line: u64,
    pub reason: String,
}

#[derive(Debug, Clone, Default)]
pub struct LoadReport {
    pub records: Vec<TweetRecord>,
    pub rejections: Vec<Rejection>,
}

impl LoadReport {
    /// Number of data rows seen (accepted plus rejected).
    pub fn total_rows(&self) -> usize {
        self.records.len() + self.rejections.len()
    }
}

/// Parses an ISO-8601 calendar date, truncating any `T...` or ` ...` time part.
pub fn parse_date(raw: &str) -> std::result::Result<NaiveDate, String> {
    let s = raw.trim();
    let b = s.as_bytes();
    let shape_ok = b.len() >= 10
        && b[..4].iter().all(u8::is_ascii_digit)
        && b[4] == b'-'
        && b[5..7].iter().all(u8::is_ascii_digit)
        && b[7] == b'-'
        && b[8..10].iter().all(u8::is_ascii_digit)
        && (b.len() == 10 || b[10] == b'T' || b[10] == b' ');
    if !shape_ok {
        return Err(format!("date `{s}` is not YYYY-MM-DD"));
    }
    NaiveDate::parse_from_str(&s[..10], "%Y-%m-%d").map_err(|_| format!("date `{s}` is not a valid calendar date"))
}

struct RawRow<'a> {
    id: Option<&'a str>,
    date: Option<&'a str>,
    group: Option<&'a str>,
    text: Option<&'a str>,
    label: Option<&'a str>,
}

fn validate(row: RawRow<'_>) -> std::result::Result<TweetRecord, String> {
    fn required<'a>(v: Option<&'a str>, name: &str) -> std::result::Result<&'a str, String> {
        match v {
            Some(s) if !s.trim().is_empty() => Ok(s),
            _ => Err(format!("missing {name}")),
        }
    }
    let id = required(row.id, "id")?;
    let date = parse_date(required(row.date, "date")?)?;
    let group = required(row.group, "group")?;
    let text = required(row.text, "text")?;
    let label = row.label.map(str::trim).filter(|s| !s.is_empty()).map(str::to_owned);
    Ok(TweetRecord {
        id: id.trim().to_owned(),
        date,
        group: group.trim().to_owned(),
        text: text.to_owned(),
        label,
    })
}

/// Loads every well-formed record from `path` in file order.
pub fn load_corpus(path: impl AsRef<Path>, format: CorpusFormat) -> Result<LoadReport> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_corpus(BufReader::new(file), format, path)
}

/// Same as [`load_corpus`] over an arbitrary reader; `source` names it in errors.
pub fn read_corpus<R: Read>(reader: R, format: CorpusFormat, source: &Path) -> Result<LoadReport> {
    let report = match format {
        CorpusFormat::Csv => read_csv(reader, source)?,
        CorpusFormat::Jsonl => read_jsonl(reader, source)?,
    };
    warn_duplicate_ids(&report.records, source);
    Ok(report)
}

fn warn_duplicate_ids(records: &[TweetRecord], source: &Path) {
    let mut seen = HashSet::with_capacity(records.len());
    let dupes = records.iter().filter(|r| !seen.insert(r.id.as_str())).count();
    if dupes > 0 {
        log::warn!("{}: {dupes} record(s) reuse an earlier id", source.display());
    }
}

fn read_csv<R: Read>(reader: R, source: &Path) -> Result<LoadReport> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_reader(reader);
    let header_err = |reason: String| Error::Header {
        path: source.to_path_buf(),
        reason,
    };
    let headers = rdr.byte_headers().map_err(|e| header_err(e.to_string()))?.clone();
    if headers.is_empty() {
        return Err(header_err("missing header row".into()));
    }
    let names: Vec<String> = headers
        .iter()
        .map(|h| {
            std::str::from_utf8(h)
                .map(|s| s.trim().trim_start_matches('\u{feff}').to_ascii_lowercase())
                .map_err(|_| header_err("header is not valid UTF-8".into()))
        })
        .collect::<Result<_>>()?;
    let col = |name: &str| names.iter().position(|n| n == name);
    let (id_col, date_col, group_col, text_col) = match (col("id"), col("date"), col("group"), col("text")) {
        (Some(a), Some(b), Some(c), Some(d)) => (a, b, c, d),
        _ => {
            return Err(header_err(format!(
                "expected columns id,date,group,text[,label], found {}",
                names.join(",")
            )))
        }
    };
    let label_col = col("label");

    let mut report = LoadReport::default();
    let mut record = csv::ByteRecord::new();
    loop {
        let line = rdr.position().line() + 1;
        match rdr.read_byte_record(&mut record) {
            Ok(false) => break,
            Ok(true) => {}
            Err(e) => {
                if e.is_io_error() {
                    if let csv::ErrorKind::Io(io) = e.into_kind() {
                        return Err(Error::io(source, io));
                    }
                    unreachable!("is_io_error implies ErrorKind::Io");
                }
                report.rejections.push(Rejection {
                    line,
                    reason: e.to_string(),
                });
                continue;
            }
        }
        let line = record.position().map_or(line, |p| p.line());
        let mut fields = Vec::with_capacity(record.len());
        let mut bad_utf8 = false;
        for f in record.iter() {
            match std::str::from_utf8(f) {
                Ok(s) => fields.push(s),
                Err(_) => {
                    bad_utf8 = true;
                    break;
                }
            }
        }
        if bad_utf8 {
            report.rejections.push(Rejection {
                line,
                reason: "row is not valid UTF-8".into(),
            });
            continue;
        }
        let get = |i: usize| fields.get(i).copied();
        let raw = RawRow {
            id: get(id_col),
            date: get(date_col),
            group: get(group_col),
            text: get(text_col),
            label: label_col.and_then(get),
        };
        match validate(raw) {
            Ok(r) => report.records.push(r),
            Err(reason) => report.rejections.push(Rejection { line, reason }),
        }
    }
    Ok(report)
}

fn json_field(
    obj: &serde_json::Map<String, serde_json::Value>,
    key: &str,
) -> std::result::Result<Option<String>, String> {
    use serde_json::Value;
    match obj.get(key) {
        None | Some(Value::Null) => Ok(None),
        Some(Value::String(s)) => Ok(Some(s.clone())),
        Some(Value::Number(n)) if key == "id" => Ok(Some(n.to_string())),
        Some(_) => Err(format!("field `{key}` must be a string")),
    }
}

fn read_jsonl<R: Read>(reader: R, source: &Path) -> Result<LoadReport> {
    let mut report = LoadReport::default();
    let mut reader = BufReader::new(reader);
    let mut buf = Vec::new();
    let mut line: u64 = 0;
    loop {
        buf.clear();
        let n = reader.read_until(b'\n', &mut buf).map_err(|e| Error::io(source, e))?;
        if n == 0 {
            break;
        }
        line += 1;
        let Ok(text) = std::str::from_utf8(&buf) else {
            report.rejections.push(Rejection {
                line,
                reason: "row is not valid UTF-8".into(),
            });
            continue;
        };
        let text = text.trim();
        if text.is_empty() {
            continue;
        }
        let parsed = serde_json::from_str::<serde_json::Value>(text)
            .map_err(|e| format!("invalid JSON: {e}"))
            .and_then(|v| match v {
                serde_json::Value::Object(obj) => {
                    let id = json_field(&obj, "id")?;
                    let date = json_field(&obj, "date")?;
                    let group = json_field(&obj, "group")?;
                    let body = json_field(&obj, "text")?;
                    let label = json_field(&obj, "label")?;
                    validate(RawRow {
                        id: id.as_deref(),
                        date: date.as_deref(),
                        group: group.as_deref(),
                        text: body.as_deref(),
                        label: label.as_deref(),
                    })
                }
                _ => Err("line is not a JSON object".into()),
            });
        match parsed {
            Ok(r) => report.records.push(r),
            Err(reason) => report.rejections.push(Rejection { line, reason }),
        }
    }
    Ok(report)
}

/// Writes records in the given format; the output loads back field-for-field.
pub fn write_corpus(records: &[TweetRecord], path: impl AsRef<Path>, format: CorpusFormat) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = BufWriter::new(file);
    write_corpus_to(records, &mut out, format).map_err(|e| Error::io(path, e))?;
    out.flush().map_err(|e| Error::io(path, e))
}

pub fn write_corpus_to<W: Write>(records: &[TweetRecord], out: W, format: CorpusFormat) -> std::io::Result<()> {
    match format {
        CorpusFormat::Csv => {
            let mut w = csv::Writer::from_writer(out);
            w.write_record(["id", "date", "group", "text", "label"])?;
            for r in records {
                let date = r.date.format("%Y-%m-%d").to_string();
                w.write_record([
                    r.id.as_str(),
                    date.as_str(),
                    r.group.as_str(),
                    r.text.as_str(),
                    r.label.as_deref().unwrap_or(""),
                ])?;
            }
            w.flush()
        }
        CorpusFormat::Jsonl => {
            let mut out = out;
            for r in records {
                serde_json::to_writer(&mut out, r)?;
                out.write_all(b"\n")?;
            }
            out.flush()
        }
    }
}

/// Closed calendar interval `[start, end]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DateRange {
    start: NaiveDate,
    end: NaiveDate,
}

impl DateRange {
    pub fn new(start: NaiveDate, end: NaiveDate) -> Result<Self> {
        if start > end {
            return Err(Error::InvalidInput(format!(
                "inverted date range: {start} is after {end}"
            )));
        }
        Ok(DateRange { start, end })
    }

    pub fn start(&self) -> NaiveDate {
        self.start
    }

    pub fn end(&self) -> NaiveDate {
        self.end
    }

    pub fn contains(&self, date: NaiveDate) -> bool {
        self.start <= date && date <= self.end
    }
}

/// Stable-order subset of `records` matching every given predicate.
pub fn filter(records: &[TweetRecord], group: Option<&str>, range: Option<DateRange>) -> Vec<TweetRecord> {
    records
        .iter()
        .filter(|r| group.is_none_or(|g| r.group == g))
        .filter(|r| range.is_none_or(|d| d.contains(r.date)))
        .cloned()
        .collect()
}

/// Distinct group tags in lexicographic order.
pub fn groups(records: &[TweetRecord]) -> Vec<String> {
    let set: std::collections::BTreeSet<&str> = records.iter().map(|r| r.group.as_str()).collect();
    set.into_iter().map(str::to_owned).collect()
}

/// Per-group collection statistics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusSummary {
    pub group: String,
    pub total_days: usize,
    pub min_per_day: usize,
    pub max_per_day: usize,
    pub avg_per_day: f64,
    pub total_tweets: usize,
}

/// Counts per distinct date for one group. Every record must carry `group`.
pub fn summarize(records: &[TweetRecord], group: &str) -> Result<CorpusSummary> {
    if records.is_empty() {
        return Err(Error::Empty(format!("group `{group}` has no days to summarize")));
    }
    if let Some(r) = records.iter().find(|r| r.group != group) {
        return Err(Error::InvalidInput(format!(
            "record `{}` belongs to group `{}`, not `{group}`",
            r.id, r.group
        )));
    }
    let mut per_day: BTreeMap<NaiveDate, usize> = BTreeMap::new();
    for r in records {
        *per_day.entry(r.date).or_default() += 1;
    }
    let min = per_day.values().copied().min().unwrap_or(0);
    let max = per_day.values().copied().max().unwrap_or(0);
    Ok(CorpusSummary {
        group: group.to_owned(),
        total_days: per_day.len(),
        min_per_day: min,
        max_per_day: max,
        avg_per_day: records.len() as f64 / per_day.len() as f64,
        total_tweets: records.len(),
    })
}

/// Summaries for every group present, in group order.
pub fn summarize_all(records: &[TweetRecord]) -> Result<Vec<CorpusSummary>> {
    if records.is_empty() {
        return Err(Error::Empty("corpus is empty".into()));
    }
    groups(records)
        .iter()
        .map(|g| summarize(&filter(records, Some(g), None), g))
        .collect()
}

/// Aligned text table: `Group  Total days  Min  Max  Avg  Tweets`.
pub fn format_summary_table(rows: &[CorpusSummary]) -> String {
    let width = rows.iter().map(|r| r.group.len()).max().unwrap_or(0).max(5);
    let mut s = String::new();
    let _ = writeln!(
        s,
        "{:<width$}  {:>10}  {:>5}  {:>5}  {:>8}  {:>8}",
        "Group", "Total days", "Min", "Max", "Avg", "Tweets"
    );
    for r in rows {
        let _ = writeln!(
            s,
            "{:<width$}  {:>10}  {:>5}  {:>5}  {:>8.2}  {:>8}",
            r.group, r.total_days, r.min_per_day, r.max_per_day, r.avg_per_day, r.total_tweets
        );
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    fn d(s: &str) -> NaiveDate {
        parse_date(s).unwrap()
    }

    fn csv(input: &str) -> LoadReport {
        read_corpus(input.as_bytes(), CorpusFormat::Csv, Path::new("mem.csv")).unwrap()
    }

    #[test]
    fn empty_file_with_header_loads_nothing() {
        let r = csv("id,date,group,text,label\n");
        assert!(r.records.is_empty());
        assert!(r.rejections.is_empty());
    }

    #[test]
    fn header_without_label_column_is_accepted() {
        let r = csv("id,date,group,text\n1,2020-03-01,UK,hello\n");
        assert_eq!(r.records.len(), 1);
        assert_eq!(r.records[0].label, None);
    }

    #[test]
    fn missing_header_columns_is_an_error() {
        let err = read_corpus("id,when,text\n".as_bytes(), CorpusFormat::Csv, Path::new("x.csv")).unwrap_err();
        assert!(matches!(err, Error::Header { .. }));
        let err = read_corpus("".as_bytes(), CorpusFormat::Csv, Path::new("x.csv")).unwrap_err();
        assert!(matches!(err, Error::Header { .. }));
    }

    #[test]
    fn bad_date_row_is_rejected_not_dropped() {
        let r = csv("id,date,group,text,label\n\
             1,2020-03-01,UK,a,\n\
             2,2020-13-40,UK,b,\n\
             3,2020-03-02,UK,c,\n\
             4,2020-03-03,UK,d,\n");
        assert_eq!(r.records.len(), 3);
        assert_eq!(r.rejections.len(), 1);
        assert_eq!(r.rejections[0].line, 3);
        assert_eq!(r.total_rows(), 4);
    }

    #[test]
    fn rows_missing_required_fields_are_rejected() {
        let r = csv("id,date,group,text\n,2020-03-01,UK,a\n2,2020-03-01,UK,   \n3,2020-03-01\n");
        assert!(r.records.is_empty());
        assert_eq!(r.rejections.len(), 3);
    }

    #[test]
    fn invalid_utf8_rejects_the_row() {
        let mut bytes = b"id,date,group,text\n1,2020-03-01,UK,ok\n2,2020-03-01,UK,".to_vec();
        bytes.extend_from_slice(&[0xff, 0xfe, b'\n']);
        let r = read_corpus(&bytes[..], CorpusFormat::Csv, Path::new("m")).unwrap();
        assert_eq!(r.records.len(), 1);
        assert_eq!(r.rejections.len(), 1);
    }

    #[test]
    fn timestamps_are_truncated_to_the_day() {
        assert_eq!(parse_date("2020-04-07T13:45:00Z").unwrap(), d("2020-04-07"));
        assert_eq!(parse_date("2020-04-07 08:00").unwrap(), d("2020-04-07"));
        assert!(parse_date("2020-4-7").is_err());
        assert!(parse_date("2020-02-30").is_err());
        assert!(parse_date("2020-04-07X").is_err());
    }

    #[test]
    fn jsonl_label_absent_or_null() {
        let input = "{\"id\":\"a\",\"date\":\"2020-03-01\",\"group\":\"UK\",\"text\":\"x\"}\n\
                     \n\
                     {\"id\":7,\"date\":\"2020-03-01\",\"group\":\"UK\",\"text\":\"y\",\"label\":null}\n\
                     {\"id\":\"c\",\"date\":\"2020-03-01\",\"group\":\"UK\",\"text\":\"z\",\"label\":\"other\"}\n\
                     not json\n";
        let r = read_corpus(input.as_bytes(), CorpusFormat::Jsonl, Path::new("m")).unwrap();
        assert_eq!(r.records.len(), 3);
        assert_eq!(r.records[1].id, "7");
        assert_eq!(r.records[2].label.as_deref(), Some("other"));
        assert_eq!(r.rejections.len(), 1);
        assert_eq!(r.rejections[0].line, 5);
    }

    #[test]
    fn csv_quoting_round_trips() {
        let records = vec![TweetRecord {
            id: "1".into(),
            date: d("2020-03-01"),
            group: "UK".into(),
            text: "she said \"hi, there\"\nnew line".into(),
            label: Some("other".into()),
        }];
        let mut buf = Vec::new();
        write_corpus_to(&records, &mut buf, CorpusFormat::Csv).unwrap();
        let back = read_corpus(&buf[..], CorpusFormat::Csv, Path::new("m")).unwrap();
        assert_eq!(back.records, records);
    }

    #[test]
    fn summarize_single_record() {
        let r = csv("id,date,group,text\n1,2020-03-01,UK,a\n");
        let s = summarize(&r.records, "UK").unwrap();
        assert_eq!(
            (s.total_days, s.min_per_day, s.max_per_day, s.total_tweets),
            (1, 1, 1, 1)
        );
        assert_eq!(s.avg_per_day, 1.0);
    }

    #[test]
    fn summarize_rejects_empty_and_foreign_groups() {
        assert!(matches!(summarize(&[], "UK"), Err(Error::Empty(_))));
        let r = csv("id,date,group,text\n1,2020-03-01,UK,a\n2,2020-03-01,USA,b\n");
        assert!(matches!(summarize(&r.records, "UK"), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn filter_without_predicates_is_identity() {
        let r = csv("id,date,group,text\n1,2020-03-01,UK,a\n2,2020-03-02,USA,b\n3,2020-03-03,UK,c\n");
        assert_eq!(filter(&r.records, None, None), r.records);
        let uk = filter(&r.records, Some("UK"), None);
        assert_eq!(uk.iter().map(|r| r.id.as_str()).collect::<Vec<_>>(), ["1", "3"]);
    }

    #[test]
    fn inverted_range_is_an_error() {
        assert!(DateRange::new(d("2020-03-02"), d("2020-03-01")).is_err());
        assert!(DateRange::new(d("2020-03-01"), d("2020-03-01")).is_ok());
    }

    #[test]
    fn format_from_extension() {
        assert_eq!(CorpusFormat::from_path(Path::new("a/b.CSV")), Some(CorpusFormat::Csv));
        assert_eq!(CorpusFormat::from_path(Path::new("b.jsonl")), Some(CorpusFormat::Jsonl));
        assert_eq!(CorpusFormat::from_path(Path::new("b.txt")), None);
    }
}
