//! Experiment runner: builds partially annotated setups, trains side and
//! final models per method, and reports test scores over splits and seeds.

mod config;
mod report;
mod run;

pub use config::{
    parse_ratio, CorpusSource, ExperimentConfig, Method, ReportKind, SetupKind, ValidationMode,
};
pub use report::{Report, Row, Summary};
pub use run::{
    derive_seed, load_corpus, prepare_split, run_experiment, run_model_b_comparison, sweep, PreparedSplit,
};
