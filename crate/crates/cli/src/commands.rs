//! One function per subcommand. Each validates its inputs, then writes its
//! outputs and the effective configuration under `out`.

use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};

use polarity_core::corpus::{filter, format_summary_table, groups, load_corpus, summarize_all, TweetRecord};
use polarity_core::evalmetrics::{evaluate, MetricsReport};
use polarity_core::eventstat::{event_report, load_events, Event};
use polarity_core::reactor::{
    build_vocabulary, format_reactions_table, load_model, predicted_event_counts, save_model, stratified_split, train,
    vectorize, EventReactions, LrModel,
};
use polarity_core::series::{
    daily_aggregate, rank_groups_by_mean_pol, write_series_csv, Parameter, PolaritySeries, ScoredRecord,
};
use polarity_core::textprep::{LemmaDict, Preprocessor, Stoplist};
use polarity_core::valence::{Lexicon, ValenceScorer};
use serde::Serialize;

use crate::config::{RunConfig, EFFECTIVE_CONFIG_FILE};
use crate::error::CliError;

type Result<T> = std::result::Result<T, CliError>;

/// Files a command wrote plus a short human-readable summary.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub written: Vec<PathBuf>,
    pub message: String,
}

fn check_file(path: &Path, what: &str) -> Result<()> {
    if path.is_file() {
        Ok(())
    } else {
        Err(CliError::Invalid(format!(
            "{what} file {} does not exist",
            path.display()
        )))
    }
}

/// Checks every input path the command will read, before any work starts.
fn check_inputs(cfg: &RunConfig, events: bool, model: bool) -> Result<()> {
    check_file(cfg.require(&cfg.corpus, "corpus")?, "corpus")?;
    cfg.corpus_format()?;
    for (path, what) in [
        (&cfg.lexicon, "lexicon"),
        (&cfg.stoplist, "stoplist"),
        (&cfg.lemmas, "lemma"),
    ] {
        if let Some(p) = path {
            check_file(p, what)?;
        }
    }
    if events {
        check_file(cfg.require(&cfg.events, "events")?, "events")?;
    }
    if model {
        check_file(cfg.require(&cfg.model, "model")?, "model")?;
    }
    if cfg.out.exists() && !cfg.out.is_dir() {
        return Err(CliError::Invalid(format!(
            "output path {} is not a directory",
            cfg.out.display()
        )));
    }
    Ok(())
}

struct Output<'a> {
    dir: &'a Path,
    written: Vec<PathBuf>,
}

impl<'a> Output<'a> {
    fn open(cfg: &'a RunConfig) -> Result<Self> {
        fs::create_dir_all(&cfg.out).map_err(|e| CliError::Io {
            path: cfg.out.clone(),
            source: e,
        })?;
        let mut out = Output {
            dir: &cfg.out,
            written: Vec::new(),
        };
        out.write(EFFECTIVE_CONFIG_FILE, cfg.to_toml())?;
        Ok(out)
    }

    fn path(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }

    fn write(&mut self, name: &str, contents: impl AsRef<[u8]>) -> Result<()> {
        let path = self.path(name);
        fs::write(&path, contents).map_err(|e| CliError::Io {
            path: path.clone(),
            source: e,
        })?;
        self.written.push(path);
        Ok(())
    }

    fn write_json<S: Serialize>(&mut self, name: &str, value: &S) -> Result<()> {
        let mut s = serde_json::to_string_pretty(value).map_err(|e| CliError::Invalid(e.to_string()))?;
        s.push('\n');
        self.write(name, s)
    }

    fn finish(self, message: String) -> Outcome {
        Outcome {
            written: self.written,
            message,
        }
    }
}

fn load_records(cfg: &RunConfig) -> Result<Vec<TweetRecord>> {
    let path = cfg.require(&cfg.corpus, "corpus")?;
    let report = load_corpus(path, cfg.corpus_format()?)?;
    for r in &report.rejections {
        log::warn!("{}:{}: {}", path.display(), r.line, r.reason);
    }
    let records = match &cfg.group {
        Some(g) => filter(&report.records, Some(g), None),
        None => report.records,
    };
    if records.is_empty() {
        return Err(polarity_core::Error::Empty(format!("no records in {}", path.display())).into());
    }
    Ok(records)
}

fn scorer(cfg: &RunConfig) -> Result<ValenceScorer<f64>> {
    let lexicon = match &cfg.lexicon {
        Some(path) => {
            let load = Lexicon::load(path)?;
            if !load.rejections.is_empty() {
                log::warn!("{}: {} lexicon lines rejected", path.display(), load.rejections.len());
            }
            load.lexicon
        }
        None => Lexicon::english(),
    };
    Ok(ValenceScorer::new(lexicon, cfg.valence)?)
}

fn preprocessor(cfg: &RunConfig) -> Result<Preprocessor> {
    let stoplist = match &cfg.stoplist {
        Some(p) => Stoplist::load(p)?,
        None => Stoplist::english(),
    };
    let lemmas = match &cfg.lemmas {
        Some(p) => LemmaDict::load(p)?,
        None => LemmaDict::english(),
    };
    Ok(Preprocessor::new(stoplist, lemmas))
}

fn scored_records(cfg: &RunConfig, records: &[TweetRecord]) -> Result<Vec<ScoredRecord<f64>>> {
    let scorer = scorer(cfg)?;
    let prep = cfg.score_preprocessed.then(|| preprocessor(cfg)).transpose()?;
    Ok(records
        .iter()
        .map(|r| {
            let score = match &prep {
                Some(p) => scorer.score(&p.prep(&r.text).join(" ")),
                None => scorer.score(&r.text),
            };
            ScoredRecord {
                record: r.clone(),
                score,
            }
        })
        .collect())
}

fn build_series(cfg: &RunConfig, records: &[TweetRecord]) -> Result<Vec<PolaritySeries<f64>>> {
    let scored = scored_records(cfg, records)?;
    groups(records)
        .iter()
        .map(|g| {
            let mine: Vec<ScoredRecord<f64>> = scored.iter().filter(|s| &s.record.group == g).cloned().collect();
            Ok(daily_aggregate(&mine, &cfg.valence)?)
        })
        .collect()
}

/// File-name-safe form of a group name.
pub fn series_file_name(group: &str) -> String {
    let safe: String = group
        .chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || c == '-' || c == '_' {
                c
            } else {
                '_'
            }
        })
        .collect();
    format!("series_{safe}.csv")
}

fn csv_writer() -> csv::Writer<Vec<u8>> {
    csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new())
}

fn csv_bytes(w: csv::Writer<Vec<u8>>) -> Result<Vec<u8>> {
    w.into_inner().map_err(|e| CliError::Invalid(e.to_string()))
}

fn csv_err(e: csv::Error) -> CliError {
    CliError::Invalid(e.to_string())
}

pub fn cmd_summarize(cfg: &RunConfig) -> Result<Outcome> {
    check_inputs(cfg, false, false)?;
    let records = load_records(cfg)?;
    let rows = summarize_all(&records)?;
    let table = format_summary_table(&rows);
    let mut out = Output::open(cfg)?;
    out.write_json("summary.json", &rows)?;
    out.write("summary.txt", &table)?;
    Ok(out.finish(table))
}

pub fn cmd_score(cfg: &RunConfig) -> Result<Outcome> {
    check_inputs(cfg, false, false)?;
    let records = load_records(cfg)?;
    let scored = scored_records(cfg, &records)?;
    let mut w = csv_writer();
    w.write_record(["id", "group", "date", "pos", "neu", "neg", "compound", "polarity"])
        .map_err(csv_err)?;
    for s in &scored {
        let polarity = polarity_core::valence::classify_polarity(&s.score, &cfg.valence);
        w.write_record([
            s.record.id.clone(),
            s.record.group.clone(),
            s.record.date.to_string(),
            s.score.pos.to_string(),
            s.score.neu.to_string(),
            s.score.neg.to_string(),
            s.score.compound.to_string(),
            polarity.as_str().to_owned(),
        ])
        .map_err(csv_err)?;
    }
    let mut out = Output::open(cfg)?;
    out.write("scores.csv", csv_bytes(w)?)?;
    Ok(out.finish(format!("scored {} records", scored.len())))
}

pub fn cmd_series(cfg: &RunConfig) -> Result<Outcome> {
    check_inputs(cfg, false, false)?;
    let records = load_records(cfg)?;
    let all = build_series(cfg, &records)?;
    let mut out = Output::open(cfg)?;
    for s in &all {
        let mut buf = Vec::new();
        write_series_csv(s, &mut buf).map_err(|e| CliError::Io {
            path: out.path(&series_file_name(&s.group)),
            source: e,
        })?;
        out.write(&series_file_name(&s.group), buf)?;
    }
    let mut w = csv_writer();
    w.write_record(["group", "meanPol"]).map_err(csv_err)?;
    for (g, m) in rank_groups_by_mean_pol(&all) {
        w.write_record([g, m.to_string()]).map_err(csv_err)?;
    }
    out.write("group_ranking.csv", csv_bytes(w)?)?;
    Ok(out.finish(format!("wrote {} series", all.len())))
}

pub fn cmd_event(cfg: &RunConfig) -> Result<Outcome> {
    check_inputs(cfg, true, false)?;
    let events = load_events(cfg.require(&cfg.events, "events")?)?;
    let records = load_records(cfg)?;
    let all = build_series(cfg, &records)?;
    let report = event_report(&all, &events, cfg.window_days, &Parameter::ALL);
    let text = report.to_text();
    let mut out = Output::open(cfg)?;
    out.write_json("event_report.json", &report)?;
    out.write("event_report.txt", &text)?;
    Ok(out.finish(text))
}

fn labeled(records: &[TweetRecord]) -> Vec<(&TweetRecord, &str)> {
    let out: Vec<_> = records
        .iter()
        .filter_map(|r| r.label.as_deref().map(|l| (r, l)))
        .collect();
    let skipped = records.len() - out.len();
    if skipped > 0 {
        log::info!("{skipped} unlabeled records skipped");
    }
    out
}

/// Trains on a seeded stratified split and reports metrics on the held-out part.
pub fn cmd_train(cfg: &RunConfig) -> Result<Outcome> {
    check_inputs(cfg, false, false)?;
    let records = load_records(cfg)?;
    let rows = labeled(&records);
    if rows.is_empty() {
        return Err(polarity_core::Error::Empty("no labeled records to train on".into()).into());
    }
    let labels: Vec<&str> = rows.iter().map(|(_, l)| *l).collect();
    let classes = match &cfg.train.classes {
        Some(c) => c.clone(),
        None => labels
            .iter()
            .map(|l| l.to_string())
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect(),
    };
    let prep = preprocessor(cfg)?;
    let docs: Vec<_> = rows.iter().map(|(r, _)| prep.prep(&r.text)).collect();
    let (train_idx, held_idx) = stratified_split(&labels, cfg.train.validation_fraction, cfg.seed)?;
    let train_docs: Vec<_> = train_idx.iter().map(|&i| docs[i].clone()).collect();
    let train_labels: Vec<&str> = train_idx.iter().map(|&i| labels[i]).collect();
    let vocab = build_vocabulary(&train_docs, cfg.train.min_df)?;
    let x: Vec<_> = train_docs.iter().map(|d| vectorize(d, &vocab)).collect();
    let model = train(&x, &train_labels, &classes, &vocab, &cfg.train_config())?;

    let mut out = Output::open(cfg)?;
    let model_path = cfg.model.clone().unwrap_or_else(|| out.path("model.json"));
    save_model(&model, &model_path)?;
    out.written.push(model_path);
    let mut message = format!(
        "trained on {} documents, {} features, final loss {}",
        x.len(),
        vocab.len(),
        model.stats.map(|s| s.final_loss).unwrap_or(f64::NAN)
    );
    if !held_idx.is_empty() {
        let predicted: Vec<String> = held_idx.iter().map(|&i| model.predict(&docs[i]).label).collect();
        let truth: Vec<&str> = held_idx.iter().map(|&i| labels[i]).collect();
        let report: MetricsReport<f64> = evaluate(&predicted, &truth, &classes)?;
        out.write_json("validation_metrics.json", &report)?;
        out.write("validation_metrics.txt", report.to_table())?;
        message.push('\n');
        message.push_str(&report.to_table());
    }
    Ok(out.finish(message))
}

#[derive(Debug, Serialize)]
struct ReactionEntry {
    event: Event,
    #[serde(skip_serializing_if = "Option::is_none")]
    reactions: Option<EventReactions<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    error: Option<String>,
}

pub fn cmd_predict(cfg: &RunConfig) -> Result<Outcome> {
    check_inputs(cfg, false, true)?;
    if let Some(p) = &cfg.events {
        check_file(p, "events")?;
    }
    let model: LrModel<f64> = load_model(cfg.require(&cfg.model, "model")?)?;
    let records = load_records(cfg)?;
    let prep = preprocessor(cfg)?;

    let mut w = csv_writer();
    let mut header = vec!["id".to_owned(), "date".to_owned(), "predictedLabel".to_owned()];
    header.extend(model.classes.iter().map(|c| format!("p_{c}")));
    w.write_record(&header).map_err(csv_err)?;
    for r in &records {
        let p = model.predict(&prep.prep(&r.text));
        let mut row = vec![r.id.clone(), r.date.to_string(), p.label];
        row.extend(p.probabilities.iter().map(|v| v.to_string()));
        w.write_record(&row).map_err(csv_err)?;
    }
    let mut out = Output::open(cfg)?;
    out.write("predictions.csv", csv_bytes(w)?)?;

    let mut message = format!("predicted {} records", records.len());
    if let Some(path) = &cfg.events {
        let mut events = load_events(path)?;
        events.sort_by(|a, b| (&a.group, a.date, &a.name).cmp(&(&b.group, b.date, &b.name)));
        let entries: Vec<ReactionEntry> = events
            .into_iter()
            .map(
                |event| match predicted_event_counts(&records, &model, &prep, &event, cfg.window_days) {
                    Ok(r) => ReactionEntry {
                        event,
                        reactions: Some(r),
                        error: None,
                    },
                    Err(e) => ReactionEntry {
                        event,
                        reactions: None,
                        error: Some(e.to_string()),
                    },
                },
            )
            .collect();
        let ok: Vec<EventReactions<f64>> = entries.iter().filter_map(|e| e.reactions.clone()).collect();
        let mut text = format_reactions_table(&ok);
        for e in entries.iter().filter(|e| e.error.is_some()) {
            text.push_str(&format!("error: {}\n", e.error.as_deref().unwrap_or_default()));
        }
        out.write_json("reactions.json", &entries)?;
        out.write("reactions.txt", &text)?;
        message.push('\n');
        message.push_str(&text);
    }
    Ok(out.finish(message))
}

/// Scores only the records that carry a label.
pub fn cmd_evaluate(cfg: &RunConfig) -> Result<Outcome> {
    check_inputs(cfg, false, true)?;
    let model: LrModel<f64> = load_model(cfg.require(&cfg.model, "model")?)?;
    let records = load_records(cfg)?;
    let rows = labeled(&records);
    if rows.is_empty() {
        return Err(polarity_core::Error::Empty("no labeled records to evaluate".into()).into());
    }
    let prep = preprocessor(cfg)?;
    let predicted: Vec<String> = rows
        .iter()
        .map(|(r, _)| model.predict(&prep.prep(&r.text)).label)
        .collect();
    let truth: Vec<&str> = rows.iter().map(|(_, l)| *l).collect();
    let report: MetricsReport<f64> = evaluate(&predicted, &truth, &model.classes)?;
    let table = report.to_table();
    let mut out = Output::open(cfg)?;
    out.write_json("metrics.json", &report)?;
    out.write("metrics.txt", &table)?;
    Ok(out.finish(table))
}
