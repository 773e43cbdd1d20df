use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("relation between `{left}` and `{right}` is not symmetric: {forward} vs {backward}")]
    Asymmetry {
        left: String,
        right: String,
        forward: String,
        backward: String,
    },

    #[error("no relation defined for the pair (`{left}`, `{right}`)")]
    MissingPair { left: String, right: String },

    #[error("unsupported taxonomy topology: {0}")]
    UnsupportedTopology(String),

    #[error("entity type `{0}` is declared on both sides; identical types are not supported")]
    IdenticalType(String),

    #[error("invalid entity type: {0}")]
    InvalidType(String),

    #[error("label `{label}` is not part of side {side}")]
    UnknownLabel { label: String, side: String },

    #[error("gold pair ({a}, {b}) is not a member of the final label space")]
    InconsistentGold { a: String, b: String },

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("corpus contains no sentences")]
    EmptyCorpus,

    #[error("coarse type `{0}` has no selected subtypes")]
    NoSubtypes(String),

    #[error("overlapping subsets share no fine-grained type")]
    DisjointSubsets,

    #[error("training diverged at epoch {epoch}: loss = {loss}")]
    Divergence { epoch: usize, loss: f64 },

    #[error("allowed set is empty")]
    EmptyAllowedSet,

    #[error("every allowed logit is masked")]
    Unnormalizable,

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("label spaces differ between joined corpora")]
    LabelSpaceMismatch,

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("{context}: {source}")]
    Run {
        context: String,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    /// Attaches run context (setup, split, seed) to an error.
    pub fn in_run(self, context: impl Into<String>) -> Self {
        Error::Run {
            context: context.into(),
            source: Box::new(self),
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
