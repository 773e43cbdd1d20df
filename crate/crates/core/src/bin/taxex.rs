use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use taxex::bio::Tag;
use taxex::corpus::{generate_synthetic_corpus, read_conll, write_conll, ConllOptions};
use taxex::eval::score_tags;
use taxex::harness::{run_experiment, sweep, ExperimentConfig, Report};
use taxex::{Error, Result};

#[derive(Parser)]
#[command(name = "taxex", version, about = "Learn a joint NER tagger from corpora annotated with different label sets")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment and write per-run scores as CSV.
    Run {
        #[arg(long)]
        config: Option<PathBuf>,
        /// CSV destination; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
        /// `key=value` overrides applied after the config file.
        overrides: Vec<String>,
    },
    /// Repeat an experiment for each value of one config key.
    Sweep {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        axis: String,
        /// Comma-separated values; an empty list gives an empty report.
        #[arg(long, value_delimiter = ',', num_args = 0..)]
        values: Vec<String>,
        #[arg(long)]
        out: Option<PathBuf>,
        overrides: Vec<String>,
    },
    /// Write a synthetic corpus in two-column CoNLL format.
    GenCorpus {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        overrides: Vec<String>,
    },
    /// Span-level micro precision, recall and F1 of a prediction file.
    Eval {
        #[arg(long)]
        pred: PathBuf,
        #[arg(long)]
        gold: PathBuf,
    },
}

fn load_config(path: Option<&Path>, overrides: &[String]) -> Result<ExperimentConfig> {
    let mut config = match path {
        Some(p) => ExperimentConfig::from_file(p).map_err(|e| e.in_run(p.display().to_string()))?,
        None => ExperimentConfig::default(),
    };
    for item in overrides {
        let (key, value) = item
            .split_once('=')
            .ok_or_else(|| Error::config(format!("expected key=value, got `{item}`")))?;
        config.set(key.trim(), value.trim())?;
    }
    config.validate()?;
    Ok(config)
}

fn write(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::from(e).in_run(path.display().to_string()))
}

fn emit(report: &Report, out: Option<&Path>) -> Result<()> {
    let csv = report.to_csv();
    match out {
        Some(path) => write(path, &csv)?,
        None => print!("{csv}"),
    }
    eprint!("{}", report.summary_table());
    Ok(())
}

// Rewrites the labels of `pred` into `gold`'s label indices; names gold does
// not know get fresh indices so they can only count as false positives.
fn align_labels(pred: &taxex::corpus::Corpus, gold: &taxex::corpus::Corpus) -> Vec<Vec<Tag>> {
    let mut extra: Vec<String> = Vec::new();
    let mut map = Vec::with_capacity(pred.labels.len());
    for name in pred.labels.names() {
        let index = gold.labels.get(name).unwrap_or_else(|| {
            extra.push(name.clone());
            gold.labels.len() + extra.len() - 1
        });
        map.push(index);
    }
    pred.observed_tags()
        .into_iter()
        .map(|tags| {
            tags.into_iter()
                .map(|t| match t.label() {
                    Some(l) => t.relabel(map[l]),
                    None => t,
                })
                .collect()
        })
        .collect()
}

fn evaluate(pred: &Path, gold: &Path) -> Result<()> {
    let options = ConllOptions::default();
    let read = |p: &Path| read_conll(p, &options).map_err(|e| e.in_run(p.display().to_string()));
    let (pred, gold) = (read(pred)?, read(gold)?);
    let mismatch = pred.len() != gold.len()
        || pred
            .sentences
            .iter()
            .zip(&gold.sentences)
            .any(|(p, g)| p.words != g.words);
    if mismatch {
        return Err(Error::config("prediction and gold files hold different sentences"));
    }
    let scores = score_tags(&align_labels(&pred, &gold), &gold.observed_tags());
    println!("precision,recall,f1,true_positives,predicted,gold");
    println!(
        "{:.6},{:.6},{:.6},{},{},{}",
        scores.precision, scores.recall, scores.f1, scores.true_positives, scores.predicted, scores.gold
    );
    Ok(())
}

fn execute(command: Command) -> Result<()> {
    match command {
        Command::Run { config, out, overrides } => {
            let config = load_config(config.as_deref(), &overrides)?;
            emit(&run_experiment(&config)?, out.as_deref())
        }
        Command::Sweep {
            config,
            axis,
            values,
            out,
            overrides,
        } => {
            let config = load_config(config.as_deref(), &overrides)?;
            let values: Vec<String> = values.into_iter().filter(|v| !v.trim().is_empty()).collect();
            emit(&sweep(&config, &axis, &values)?, out.as_deref())
        }
        Command::GenCorpus { config, out, overrides } => {
            let config = load_config(config.as_deref(), &overrides)?;
            let spec = config
                .synthetic_spec()
                .ok_or_else(|| Error::config("gen-corpus needs a synthetic corpus config"))?;
            let corpus = generate_synthetic_corpus(&spec)?;
            write(&out, &write_conll(&corpus))?;
            eprintln!("wrote {} sentences to {}", corpus.len(), out.display());
            Ok(())
        }
        Command::Eval { pred, gold } => evaluate(&pred, &gold),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("taxex: error: {e}");
            ExitCode::FAILURE
        }
    }
}
