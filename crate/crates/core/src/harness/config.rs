use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::corpus::SyntheticSpec;
use crate::error::{Error, Result};
use crate::oracle::AmlTargets;
use crate::tagger::TaggerConfig;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SetupKind {
    Disjoint,
    Subtype,
    Overlapping,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Method {
    NaiveJoin,
    Cl,
    ClPlusPlus,
    Aml,
    XAnn,
    Plm,
    PlmKl,
    UpperBound,
    ModelBOnly,
}

impl Method {
    pub const ALL: [Method; 9] = [
        Method::NaiveJoin,
        Method::Cl,
        Method::ClPlusPlus,
        Method::Aml,
        Method::XAnn,
        Method::Plm,
        Method::PlmKl,
        Method::UpperBound,
        Method::ModelBOnly,
    ];

    /// Whether the method can run on a taxonomy with non-disjoint relations.
    pub fn supports_non_disjoint(self) -> bool {
        !matches!(self, Method::NaiveJoin | Method::Cl)
    }

    pub fn needs_model_a(self) -> bool {
        matches!(self, Method::Cl | Method::ClPlusPlus | Method::XAnn | Method::Plm | Method::PlmKl)
    }

    pub fn needs_model_b(self) -> bool {
        matches!(self, Method::XAnn | Method::Plm | Method::PlmKl | Method::ModelBOnly)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ValidationMode {
    Full,
    Partial,
}

/// What the test score measures.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ReportKind {
    /// Final label space against the fully annotated test set.
    Standard,
    /// Side-B types only, against a test set annotated with side B alone.
    ModelB,
}

#[derive(Clone, Debug, PartialEq)]
pub enum CorpusSource {
    Synthetic(SyntheticSpec),
    Conll { path: PathBuf, fine_separator: Option<char> },
}

macro_rules! named {
    ($ty:ty { $($variant:path => $name:literal),+ $(,)? }) => {
        impl fmt::Display for $ty {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(match self { $($variant => $name),+ })
            }
        }
        impl FromStr for $ty {
            type Err = Error;
            fn from_str(s: &str) -> Result<Self> {
                match s.trim() {
                    $($name => Ok($variant),)+
                    other => Err(Error::config(format!(
                        "unknown {} `{other}` (expected one of: {})",
                        stringify!($ty),
                        [$($name),+].join(", ")
                    ))),
                }
            }
        }
    };
}

named!(SetupKind {
    SetupKind::Disjoint => "disjoint",
    SetupKind::Subtype => "subtype",
    SetupKind::Overlapping => "overlapping",
});

named!(Method {
    Method::NaiveJoin => "naive-join",
    Method::Cl => "cl",
    Method::ClPlusPlus => "cl++",
    Method::Aml => "aml",
    Method::XAnn => "x-ann",
    Method::Plm => "plm",
    Method::PlmKl => "plm-kl",
    Method::UpperBound => "upper-bound",
    Method::ModelBOnly => "model-b-only",
});

named!(ValidationMode {
    ValidationMode::Full => "full",
    ValidationMode::Partial => "partial",
});

named!(ReportKind {
    ReportKind::Standard => "standard",
    ReportKind::ModelB => "model-b",
});

/// One experiment: a setup, the methods to compare and the run protocol.
#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub setup: SetupKind,
    pub methods: Vec<Method>,
    /// Number of coarse types on side A and side B; `None` splits evenly.
    pub type_ratio: Option<(usize, usize)>,
    pub few_shot_k: Option<usize>,
    pub validation_mode: ValidationMode,
    pub report: ReportKind,
    pub splits: usize,
    pub seeds: usize,
    pub seed: u64,
    /// Fraction of training sentences that go to side A.
    pub sentence_ratio: f64,
    pub train_size: usize,
    pub validation_size: usize,
    pub test_size: usize,
    pub corpus: CorpusSource,
    /// Fine types per coarse type of the synthetic corpus; `None` means 0
    /// for the disjoint setup and 4 otherwise.
    pub fine_per_type: Option<usize>,
    pub tagger: TaggerConfig,
    pub learning_rates: Vec<f64>,
    pub designated_type: Option<String>,
    pub subtypes: Vec<String>,
    pub subset_a: Vec<String>,
    pub subset_b: Vec<String>,
    pub aml_targets: AmlTargets,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            setup: SetupKind::Disjoint,
            methods: vec![Method::NaiveJoin, Method::XAnn, Method::Plm, Method::PlmKl, Method::UpperBound],
            type_ratio: None,
            few_shot_k: None,
            validation_mode: ValidationMode::Full,
            report: ReportKind::Standard,
            splits: 5,
            seeds: 5,
            seed: 0,
            sentence_ratio: 0.5,
            train_size: 2000,
            validation_size: 400,
            test_size: 1000,
            corpus: CorpusSource::Synthetic(SyntheticSpec::default()),
            fine_per_type: None,
            tagger: TaggerConfig::default(),
            learning_rates: vec![1e-3, 3e-3, 1e-2],
            designated_type: None,
            subtypes: Vec::new(),
            subset_a: Vec::new(),
            subset_b: Vec::new(),
            aml_targets: AmlTargets::Masked,
        }
    }
}

fn parse<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .trim()
        .parse()
        .map_err(|_| Error::config(format!("bad value for `{key}`: `{value}`")))
}

fn list(value: &str) -> Vec<String> {
    value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(String::from)
        .collect()
}

/// Parses `a:b`.
pub fn parse_ratio(value: &str) -> Result<(usize, usize)> {
    let (a, b) = value
        .split_once(':')
        .ok_or_else(|| Error::config(format!("type ratio `{value}` must look like `a:b`")))?;
    let a: usize = parse("type_ratio", a)?;
    let b: usize = parse("type_ratio", b)?;
    if a == 0 || b == 0 {
        return Err(Error::config("each side needs at least one type"));
    }
    Ok((a, b))
}

impl ExperimentConfig {
    /// Reads a `key = value` file; `#` starts a comment.
    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let text = fs::read_to_string(path.as_ref())?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut config = ExperimentConfig::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| Error::Parse {
                line: lineno + 1,
                message: format!("expected `key = value`, got `{line}`"),
            })?;
            config.set(key.trim(), value.trim()).map_err(|e| Error::Parse {
                line: lineno + 1,
                message: e.to_string(),
            })?;
        }
        config.validate()?;
        Ok(config)
    }

    fn synthetic_mut(&mut self, key: &str) -> Result<&mut SyntheticSpec> {
        match &mut self.corpus {
            CorpusSource::Synthetic(spec) => Ok(spec),
            CorpusSource::Conll { .. } => Err(Error::config(format!("`{key}` only applies to the synthetic corpus"))),
        }
    }

    /// Sets one key; used by the file parser and by sweeps.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "setup" => self.setup = value.parse()?,
            "method" | "methods" => {
                self.methods = list(value).iter().map(|m| m.parse()).collect::<Result<_>>()?;
            }
            "type_ratio" => self.type_ratio = Some(parse_ratio(value)?),
            "few_shot_k" => {
                self.few_shot_k = match value {
                    "" | "none" | "full" => None,
                    v => Some(parse(key, v)?),
                }
            }
            "validation_mode" => self.validation_mode = value.parse()?,
            "report" => self.report = value.parse()?,
            "splits" => self.splits = parse(key, value)?,
            "seeds" => self.seeds = parse(key, value)?,
            "seed" => self.seed = parse(key, value)?,
            "sentence_ratio" => self.sentence_ratio = parse(key, value)?,
            "train_size" => self.train_size = parse(key, value)?,
            "validation_size" => self.validation_size = parse(key, value)?,
            "test_size" => self.test_size = parse(key, value)?,
            "corpus" => {
                self.corpus = if value == "synthetic" {
                    CorpusSource::Synthetic(SyntheticSpec::default())
                } else {
                    CorpusSource::Conll {
                        path: PathBuf::from(value),
                        fine_separator: None,
                    }
                }
            }
            "fine_separator" => match &mut self.corpus {
                CorpusSource::Conll { fine_separator, .. } => {
                    let mut chars = value.chars();
                    *fine_separator = match (chars.next(), chars.next()) {
                        (Some(c), None) => Some(c),
                        _ => return Err(Error::config("fine_separator must be one character")),
                    }
                }
                CorpusSource::Synthetic(_) => {
                    return Err(Error::config("`fine_separator` only applies to CoNLL corpora"))
                }
            },
            "num_types" => self.synthetic_mut(key)?.num_types = parse(key, value)?,
            "fine_per_type" => self.fine_per_type = Some(parse(key, value)?),
            "avg_len" => self.synthetic_mut(key)?.avg_len = parse(key, value)?,
            "density" => self.synthetic_mut(key)?.density = parse(key, value)?,
            "context_vocab" => self.synthetic_mut(key)?.context_vocab = parse(key, value)?,
            "entity_vocab" => self.synthetic_mut(key)?.entity_vocab = parse(key, value)?,
            "cue_words" => self.synthetic_mut(key)?.cue_words = parse(key, value)?,
            "cue_prob" => self.synthetic_mut(key)?.cue_prob = parse(key, value)?,
            "ambiguity" => self.synthetic_mut(key)?.ambiguity = parse(key, value)?,
            "corpus_seed" => self.synthetic_mut(key)?.seed = parse(key, value)?,
            "embedding_dim" => self.tagger.embedding_dim = parse(key, value)?,
            "context_window" => self.tagger.context_window = parse(key, value)?,
            "hidden_dim" => self.tagger.hidden_dim = parse(key, value)?,
            "epochs" => self.tagger.epochs = parse(key, value)?,
            "patience" | "early_stop_patience" => self.tagger.early_stop_patience = parse(key, value)?,
            "batch_size" => self.tagger.batch_size = parse(key, value)?,
            "min_count" => self.tagger.min_count = parse(key, value)?,
            "learning_rate" | "learning_rates" => {
                self.learning_rates = list(value).iter().map(|v| parse(key, v)).collect::<Result<_>>()?;
            }
            "designated_type" => self.designated_type = Some(value.to_string()),
            "subtypes" => self.subtypes = list(value),
            "subset_a" => self.subset_a = list(value),
            "subset_b" => self.subset_b = list(value),
            "aml_targets" => self.aml_targets = value.parse()?,
            other => return Err(Error::config(format!("unknown key `{other}`"))),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        if self.methods.is_empty() {
            return Err(Error::config("no methods selected"));
        }
        if self.setup != SetupKind::Disjoint {
            if let Some(m) = self.methods.iter().find(|m| !m.supports_non_disjoint()) {
                return Err(Error::config(format!(
                    "method `{m}` needs a disjoint setup (use cl++ instead of cl)"
                )));
            }
        }
        if self.report == ReportKind::ModelB && self.setup != SetupKind::Disjoint {
            return Err(Error::config("the Model_B comparison needs a disjoint setup"));
        }
        if self.splits == 0 || self.seeds == 0 {
            return Err(Error::config("splits and seeds must be >= 1"));
        }
        if !(self.sentence_ratio > 0.0 && self.sentence_ratio < 1.0) {
            return Err(Error::config("sentence_ratio must lie in (0, 1)"));
        }
        if self.learning_rates.is_empty() || self.learning_rates.iter().any(|&lr| !(lr > 0.0)) {
            return Err(Error::config("learning_rates must be a non-empty list of positive values"));
        }
        if self.validation_size < 2 || self.test_size == 0 {
            return Err(Error::config("validation_size must be >= 2 and test_size >= 1"));
        }
        if self.few_shot_k == Some(0) {
            return Err(Error::config("few_shot_k must be >= 1"));
        }
        self.tagger.validate()?;
        if let CorpusSource::Synthetic(spec) = &self.corpus {
            spec.validate()?;
        }
        Ok(())
    }

    /// The synthetic spec actually generated, sized to hold every split.
    pub fn synthetic_spec(&self) -> Option<SyntheticSpec> {
        match &self.corpus {
            CorpusSource::Synthetic(spec) => Some(SyntheticSpec {
                sentences: self.train_size + self.validation_size + self.test_size,
                fine_per_type: self.fine_per_type.unwrap_or(match self.setup {
                    SetupKind::Disjoint => 0,
                    _ => 4,
                }),
                ..spec.clone()
            }),
            CorpusSource::Conll { .. } => None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_key_values() {
        let text = "
            # table 1
            setup = disjoint
            methods = naive-join, plm
            type_ratio = 9:9
            few_shot_k = 100
            validation_mode = partial
            splits = 2
            seeds = 3
            learning_rates = 0.001, 0.01
            num_types = 18
        ";
        let c = ExperimentConfig::parse(text).unwrap();
        assert_eq!(c.methods, vec![Method::NaiveJoin, Method::Plm]);
        assert_eq!(c.type_ratio, Some((9, 9)));
        assert_eq!(c.few_shot_k, Some(100));
        assert_eq!(c.validation_mode, ValidationMode::Partial);
        assert_eq!((c.splits, c.seeds), (2, 3));
        assert_eq!(c.learning_rates, vec![0.001, 0.01]);
        assert_eq!(c.synthetic_spec().unwrap().num_types, 18);
    }

    #[test]
    fn rejects_unknown_keys_and_values() {
        assert!(matches!(ExperimentConfig::parse("colour = red"), Err(Error::Parse { line: 1, .. })));
        assert!(ExperimentConfig::parse("method = magic").is_err());
        assert!(ExperimentConfig::parse("type_ratio = 9").is_err());
    }

    #[test]
    fn plain_cl_needs_disjoint_setup() {
        assert!(ExperimentConfig::parse("setup = subtype\nmethods = cl").is_err());
        assert!(ExperimentConfig::parse("setup = subtype\nmethods = cl++").is_ok());
        assert!(ExperimentConfig::parse("setup = overlapping\nmethods = naive-join").is_err());
    }

    #[test]
    fn method_names_round_trip() {
        for m in Method::ALL {
            assert_eq!(m.to_string().parse::<Method>().unwrap(), m);
        }
    }
}
