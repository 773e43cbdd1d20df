//! Plain-text checkpoints.
//!
//! ```text
//! taxex-checkpoint <version>
//! embedding_dim <n>
//! context_window <n>
//! hidden_dim <n>
//! learning_rate <x>
//! epochs <n>
//! seed <n>
//! early_stop_patience <n>
//! batch_size <n>
//! min_count <n>
//! decoding <argmax|threshold>
//! labels <count>
//! <one label per line, canonical order>
//! vocab <count>
//! <one word per line, ids from 2>
//! params <count>
//! <one value per line>
//! ```
//!
//! Values are written with Rust's shortest round-trip formatting, so a saved
//! model loads back bit-for-bit.

use std::fs;
use std::path::Path;
use std::str::Lines;

use crate::bio::LabelSet;
use crate::error::{Error, Result};

use super::{TaggerConfig, TaggerModel, Vocabulary};

pub const CHECKPOINT_VERSION: u32 = 1;
const MAGIC: &str = "taxex-checkpoint";

pub fn save_checkpoint(model: &TaggerModel, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, render(model))?;
    Ok(())
}

pub fn load_checkpoint(path: impl AsRef<Path>) -> Result<TaggerModel> {
    parse(&fs::read_to_string(path)?)
}

pub(crate) fn render(model: &TaggerModel) -> String {
    let c = &model.config;
    let mut out = format!("{MAGIC} {CHECKPOINT_VERSION}\n");
    for (key, value) in [
        ("embedding_dim", c.embedding_dim.to_string()),
        ("context_window", c.context_window.to_string()),
        ("hidden_dim", c.hidden_dim.to_string()),
        ("learning_rate", c.learning_rate.to_string()),
        ("epochs", c.epochs.to_string()),
        ("seed", c.seed.to_string()),
        ("early_stop_patience", c.early_stop_patience.to_string()),
        ("batch_size", c.batch_size.to_string()),
        ("min_count", c.min_count.to_string()),
        ("decoding", c.decoding.to_string()),
    ] {
        out.push_str(&format!("{key} {value}\n"));
    }
    out.push_str(&format!("labels {}\n", model.labels.len()));
    for name in model.labels.names() {
        out.push_str(name);
        out.push('\n');
    }
    out.push_str(&format!("vocab {}\n", model.vocab.words().len()));
    for word in model.vocab.words() {
        out.push_str(word);
        out.push('\n');
    }
    out.push_str(&format!("params {}\n", model.params().len()));
    for p in model.params() {
        out.push_str(&format!("{p}\n"));
    }
    out
}

struct Reader<'a> {
    lines: Lines<'a>,
    line: usize,
}

impl<'a> Reader<'a> {
    fn next(&mut self) -> Result<&'a str> {
        self.line += 1;
        self.lines.next().ok_or_else(|| self.err("unexpected end of checkpoint"))
    }

    fn err(&self, message: impl Into<String>) -> Error {
        Error::Parse {
            line: self.line,
            message: message.into(),
        }
    }

    fn field<T: std::str::FromStr>(&mut self, key: &str) -> Result<T> {
        let line = self.next()?;
        let value = line
            .strip_prefix(key)
            .and_then(|rest| rest.strip_prefix(' '))
            .ok_or_else(|| self.err(format!("expected `{key}`")))?;
        value
            .parse()
            .map_err(|_| self.err(format!("bad value for `{key}`: {value}")))
    }

    fn block(&mut self, key: &str) -> Result<Vec<&'a str>> {
        let n: usize = self.field(key)?;
        (0..n).map(|_| self.next()).collect()
    }
}

pub(crate) fn parse(text: &str) -> Result<TaggerModel> {
    let mut r = Reader {
        lines: text.lines(),
        line: 0,
    };
    let version: u32 = r.field(MAGIC)?;
    if version != CHECKPOINT_VERSION {
        return Err(r.err(format!("unsupported checkpoint version {version}")));
    }
    let config = TaggerConfig {
        embedding_dim: r.field("embedding_dim")?,
        context_window: r.field("context_window")?,
        hidden_dim: r.field("hidden_dim")?,
        learning_rate: r.field("learning_rate")?,
        epochs: r.field("epochs")?,
        seed: r.field("seed")?,
        early_stop_patience: r.field("early_stop_patience")?,
        batch_size: r.field("batch_size")?,
        min_count: r.field("min_count")?,
        decoding: r.field("decoding")?,
    };
    let labels = LabelSet::new(r.block("labels")?)?;
    let vocab = Vocabulary::from_words(r.block("vocab")?.into_iter().map(String::from).collect());
    let params = r
        .block("params")?
        .into_iter()
        .map(|v| v.parse::<f64>())
        .collect::<Result<Vec<f64>, _>>()
        .map_err(|e| r.err(format!("bad parameter: {e}")))?;
    let mut model = TaggerModel::new(config, labels, vocab)?;
    model.set_params(params)?;
    Ok(model)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_is_exact() {
        let config = TaggerConfig {
            embedding_dim: 3,
            hidden_dim: 4,
            seed: 9,
            min_count: 1,
            ..Default::default()
        };
        let words: Vec<String> = ["a", "b", "c"].iter().map(|s| s.to_string()).collect();
        let model = TaggerModel::for_corpus(config, LabelSet::new(["X", "Y"]).unwrap(), [words.as_slice()]).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.ckpt");
        save_checkpoint(&model, &path).unwrap();
        let loaded = load_checkpoint(&path).unwrap();
        assert_eq!(loaded, model);
        assert_eq!(loaded.logits(&words), model.logits(&words));
    }

    #[test]
    fn wrong_version_is_rejected() {
        let err = parse("taxex-checkpoint 99\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, .. }));
    }
}
