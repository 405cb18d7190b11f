use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use polarity_cli::{commands, CliError, RunConfig};
use polarity_core::corpus::CorpusFormat;

#[derive(Parser)]
#[command(
    name = "polarity",
    version,
    about = "Tweet polarity series, event-window tests and reaction classification"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    opts: Opts,
}

#[derive(Subcommand)]
enum Command {
    /// Per-group day and tweet counts.
    Summarize,
    /// Valence scores for every record.
    Score,
    /// Daily meanPol / pnRatio series, one CSV per group.
    Series,
    /// Before/after window statistics and Welch tests per event.
    Event,
    /// Train the reaction classifier on labeled records.
    Train,
    /// Predict reaction classes, optionally tallied around events.
    Predict,
    /// Evaluate a model on the labeled records of a corpus.
    Evaluate,
}

#[derive(Args)]
struct Opts {
    /// TOML file with run settings; flags take precedence.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    corpus: Option<PathBuf>,
    #[arg(long, global = true)]
    format: Option<CorpusFormat>,
    #[arg(long, global = true)]
    lexicon: Option<PathBuf>,
    #[arg(long, global = true)]
    stoplist: Option<PathBuf>,
    #[arg(long, global = true)]
    lemmas: Option<PathBuf>,
    #[arg(long, global = true)]
    events: Option<PathBuf>,
    #[arg(long, global = true)]
    model: Option<PathBuf>,
    #[arg(long, global = true)]
    group: Option<String>,
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true)]
    window_days: Option<u32>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Score preprocessed tokens instead of raw text.
    #[arg(long, global = true)]
    score_preprocessed: bool,
    #[arg(long, global = true)]
    alpha: Option<f64>,
    #[arg(long, global = true)]
    learning_rate: Option<f64>,
    #[arg(long, global = true)]
    epochs: Option<usize>,
    #[arg(long, global = true)]
    l2: Option<f64>,
    #[arg(long, global = true)]
    tol: Option<f64>,
    #[arg(long, global = true)]
    balance_classes: bool,
    #[arg(long, global = true)]
    min_df: Option<usize>,
    #[arg(long, global = true)]
    validation_fraction: Option<f64>,
}

impl Opts {
    fn overrides(&self) -> toml::Table {
        use toml::Value;
        let path = |p: &PathBuf| Value::String(p.to_string_lossy().into_owned());
        let mut top = toml::Table::new();
        let put = |t: &mut toml::Table, k: &str, v: Option<Value>| {
            if let Some(v) = v {
                t.insert(k.to_owned(), v);
            }
        };
        put(&mut top, "corpus", self.corpus.as_ref().map(path));
        put(&mut top, "format", self.format.map(|f| Value::String(f.to_string())));
        put(&mut top, "lexicon", self.lexicon.as_ref().map(path));
        put(&mut top, "stoplist", self.stoplist.as_ref().map(path));
        put(&mut top, "lemmas", self.lemmas.as_ref().map(path));
        put(&mut top, "events", self.events.as_ref().map(path));
        put(&mut top, "model", self.model.as_ref().map(path));
        put(&mut top, "group", self.group.clone().map(Value::String));
        put(&mut top, "out", self.out.as_ref().map(path));
        put(
            &mut top,
            "window_days",
            self.window_days.map(|v| Value::Integer(v.into())),
        );
        put(&mut top, "seed", self.seed.map(|v| Value::Integer(v as i64)));
        put(
            &mut top,
            "score_preprocessed",
            self.score_preprocessed.then_some(Value::Boolean(true)),
        );

        let mut valence = toml::Table::new();
        put(&mut valence, "alpha", self.alpha.map(Value::Float));
        if !valence.is_empty() {
            top.insert("valence".into(), Value::Table(valence));
        }
        let mut train = toml::Table::new();
        put(&mut train, "learning_rate", self.learning_rate.map(Value::Float));
        put(&mut train, "epochs", self.epochs.map(|v| Value::Integer(v as i64)));
        put(&mut train, "l2", self.l2.map(Value::Float));
        put(&mut train, "tol", self.tol.map(Value::Float));
        put(
            &mut train,
            "balance_classes",
            self.balance_classes.then_some(Value::Boolean(true)),
        );
        put(&mut train, "min_df", self.min_df.map(|v| Value::Integer(v as i64)));
        put(
            &mut train,
            "validation_fraction",
            self.validation_fraction.map(Value::Float),
        );
        if !train.is_empty() {
            top.insert("train".into(), Value::Table(train));
        }
        top
    }
}

fn run(cli: Cli) -> Result<commands::Outcome, CliError> {
    let cfg = RunConfig::layered(cli.opts.config.as_deref(), cli.opts.overrides())?;
    match cli.command {
        Command::Summarize => commands::cmd_summarize(&cfg),
        Command::Score => commands::cmd_score(&cfg),
        Command::Series => commands::cmd_series(&cfg),
        Command::Event => commands::cmd_event(&cfg),
        Command::Train => commands::cmd_train(&cfg),
        Command::Predict => commands::cmd_predict(&cfg),
        Command::Evaluate => commands::cmd_evaluate(&cfg),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(outcome) => {
            println!("{}", outcome.message.trim_end());
            for path in &outcome.written {
                log::info!("wrote {}", path.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
