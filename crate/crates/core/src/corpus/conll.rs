use std::collections::BTreeSet;
use std::fs;
use std::path::Path;

use crate::bio::{self, LabelSet, Tag};
use crate::error::{Error, Result};

use super::{Corpus, FineLabels, Sentence, SourceSide, SplitRole};

/// Options for reading two-column CoNLL files.
#[derive(Clone, Debug)]
pub struct ConllOptions {
    /// When set, labels spelled `<coarse><sep><fine>` are read as two-level.
    pub fine_separator: Option<char>,
    pub side: SourceSide,
    pub role: SplitRole,
}

impl Default for ConllOptions {
    fn default() -> Self {
        ConllOptions {
            fine_separator: None,
            side: SourceSide::Full,
            role: SplitRole::Train,
        }
    }
}

pub fn read_conll(path: impl AsRef<Path>, options: &ConllOptions) -> Result<Corpus> {
    let text = fs::read_to_string(path)?;
    parse_conll(&text, options)
}

/// Parses `token tag` lines; blank lines separate sentences and `-DOCSTART-`
/// lines are skipped. Orphan `I-X` tags are repaired to `B-X`.
pub fn parse_conll(text: &str, options: &ConllOptions) -> Result<Corpus> {
    let mut raw: Vec<Vec<(usize, String, String)>> = Vec::new();
    let mut current = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            if !current.is_empty() {
                raw.push(std::mem::take(&mut current));
            }
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.first() == Some(&"-DOCSTART-") {
            continue;
        }
        if fields.len() != 2 {
            return Err(Error::Parse {
                line: lineno + 1,
                message: format!("expected 2 columns, found {}", fields.len()),
            });
        }
        let tag = fields[1];
        if tag != "O" && bio::split_prefix(tag).is_none() {
            return Err(Error::Parse {
                line: lineno + 1,
                message: format!("`{tag}` is not a BIO tag"),
            });
        }
        current.push((lineno + 1, fields[0].to_string(), tag.to_string()));
    }
    if !current.is_empty() {
        raw.push(current);
    }
    if raw.is_empty() {
        return Err(Error::EmptyCorpus);
    }

    // Label inventory, sorted for a stable index order.
    let mut coarse_names = BTreeSet::new();
    let mut fine_names = BTreeSet::new();
    for (_, _, tag) in raw.iter().flatten() {
        if let Some((_, name)) = bio::split_prefix(tag) {
            match options.fine_separator.and_then(|sep| name.split_once(sep)) {
                Some((coarse, _)) => {
                    coarse_names.insert(coarse.to_string());
                    fine_names.insert(name.to_string());
                }
                None => {
                    coarse_names.insert(name.to_string());
                }
            }
        }
    }
    let labels = LabelSet::new(coarse_names)?;
    let fine = match options.fine_separator {
        Some(sep) => {
            let fine_labels = LabelSet::new(fine_names)?;
            let parent = fine_labels
                .names()
                .iter()
                .map(|n| labels.get(n.split_once(sep).unwrap().0).unwrap())
                .collect();
            Some(FineLabels {
                labels: fine_labels,
                parent,
            })
        }
        None => None,
    };

    let mut sentences = Vec::with_capacity(raw.len());
    for rows in raw {
        let mut words = Vec::with_capacity(rows.len());
        let mut tags = Vec::with_capacity(rows.len());
        let mut fines = Vec::with_capacity(rows.len());
        for (_, word, tag) in rows {
            words.push(word);
            let parsed = match bio::split_prefix(&tag) {
                None => {
                    fines.push(None);
                    Tag::O
                }
                Some((prefix, name)) => {
                    let (coarse, fine_name) =
                        match options.fine_separator.and_then(|sep| name.split_once(sep)) {
                            Some((c, _)) => (c, Some(name)),
                            None => (name, None),
                        };
                    let label = labels.get(coarse).unwrap();
                    fines.push(fine_name.and_then(|f| fine.as_ref().unwrap().labels.get(f)));
                    if prefix == 'B' {
                        Tag::B(label)
                    } else {
                        Tag::I(label)
                    }
                }
            };
            tags.push(parsed);
        }
        bio::repair(&mut tags);
        let mut sentence = Sentence::new(words, tags, options.side);
        if fine.is_some() {
            sentence.fine = Some(fines);
        }
        sentences.push(sentence);
    }
    Ok(Corpus {
        sentences,
        labels,
        fine,
        role: options.role,
    })
}

/// Writes observed tags as two-column CoNLL. Two-level corpora write the fine
/// label name where one is present.
pub fn write_conll(corpus: &Corpus) -> String {
    let mut out = String::new();
    for sentence in &corpus.sentences {
        for (i, (word, tag)) in sentence.words.iter().zip(&sentence.tags).enumerate() {
            let fine = sentence
                .fine
                .as_ref()
                .and_then(|f| f[i])
                .zip(corpus.fine.as_ref());
            let rendered = match (tag, fine) {
                (Tag::O, _) => "O".to_string(),
                (Tag::B(_), Some((f, fl))) => format!("B-{}", fl.labels.name(f)),
                (Tag::I(_), Some((f, fl))) => format!("I-{}", fl.labels.name(f)),
                (t, None) => corpus.labels.format_tag(*t),
            };
            out.push_str(word);
            out.push(' ');
            out.push_str(&rendered);
            out.push('\n');
        }
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_token() {
        let c = parse_conll("John B-PER\n\n", &ConllOptions::default()).unwrap();
        assert_eq!(c.len(), 1);
        assert_eq!(c.sentences[0].tags, vec![Tag::B(0)]);
        assert_eq!(c.labels.names(), &["PER"]);
    }

    #[test]
    fn orphan_inside_is_repaired() {
        let c = parse_conll("He O\nwent I-LOC\n", &ConllOptions::default()).unwrap();
        assert_eq!(c.sentences[0].tags, vec![Tag::O, Tag::B(0)]);
    }

    #[test]
    fn three_columns_is_a_parse_error() {
        let err = parse_conll("a O\nb NN O\n", &ConllOptions::default()).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }));
    }

    #[test]
    fn bad_tag_is_a_parse_error() {
        let err = parse_conll("a X-PER\n", &ConllOptions::default()).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, .. }));
    }

    #[test]
    fn empty_input() {
        assert!(matches!(
            parse_conll("\n\n-DOCSTART- O\n", &ConllOptions::default()),
            Err(Error::EmptyCorpus)
        ));
    }

    #[test]
    fn two_level_labels() {
        let options = ConllOptions {
            fine_separator: Some('.'),
            ..Default::default()
        };
        let text = "Tom B-PER.actor\nHanks I-PER.actor\nin O\nParis B-LOC\n\n";
        let c = parse_conll(text, &options).unwrap();
        assert_eq!(c.labels.names(), &["LOC", "PER"]);
        let fine = c.fine.as_ref().unwrap();
        assert_eq!(fine.labels.names(), &["PER.actor"]);
        assert_eq!(fine.parent, vec![1]);
        assert_eq!(c.sentences[0].fine.as_ref().unwrap()[..2], [Some(0), Some(0)]);
        assert_eq!(write_conll(&c), text);
    }

    #[test]
    fn write_normalizes_whitespace() {
        let text = "John   B-PER\nSmith\tI-PER\n\n\n\nran O\n";
        let c = parse_conll(text, &ConllOptions::default()).unwrap();
        assert_eq!(write_conll(&c), "John B-PER\nSmith I-PER\n\nran O\n\n");
    }
}
