//! BIO tags over an indexed label set.
//!
//! A label set with `n` labels yields `2n + 1` tags laid out as
//! `O, B-0, I-0, B-1, I-1, ...`. Every probability vector in the crate uses
//! this layout.

use std::collections::HashMap;
use std::fmt;

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Tag {
    O,
    B(usize),
    I(usize),
}

impl Tag {
    pub fn label(self) -> Option<usize> {
        match self {
            Tag::O => None,
            Tag::B(l) | Tag::I(l) => Some(l),
        }
    }

    pub fn index(self) -> usize {
        match self {
            Tag::O => 0,
            Tag::B(l) => 1 + 2 * l,
            Tag::I(l) => 2 + 2 * l,
        }
    }

    pub fn from_index(index: usize) -> Self {
        match index {
            0 => Tag::O,
            i if i % 2 == 1 => Tag::B((i - 1) / 2),
            i => Tag::I((i - 2) / 2),
        }
    }

    /// Same prefix, different label. `O` stays `O`.
    pub fn relabel(self, label: usize) -> Self {
        match self {
            Tag::O => Tag::O,
            Tag::B(_) => Tag::B(label),
            Tag::I(_) => Tag::I(label),
        }
    }

    pub fn is_outside(self) -> bool {
        self == Tag::O
    }
}

pub fn num_tags(num_labels: usize) -> usize {
    2 * num_labels + 1
}

/// Rewrites every orphan `I-X` (following `O` or a tag of another label) to `B-X`.
/// Returns the number of tags changed.
pub fn repair(tags: &mut [Tag]) -> usize {
    let mut changed = 0;
    let mut prev: Option<usize> = None;
    for tag in tags.iter_mut() {
        if let Tag::I(l) = *tag {
            if prev != Some(l) {
                *tag = Tag::B(l);
                changed += 1;
            }
        }
        prev = tag.label();
    }
    changed
}

pub fn is_well_formed(tags: &[Tag]) -> bool {
    let mut prev: Option<usize> = None;
    for tag in tags {
        if let Tag::I(l) = *tag {
            if prev != Some(l) {
                return false;
            }
        }
        prev = tag.label();
    }
    true
}

/// An ordered set of label names with reverse lookup.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct LabelSet {
    names: Vec<String>,
    index: HashMap<String, usize>,
}

impl LabelSet {
    pub fn new<I, S>(names: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut set = LabelSet::default();
        for name in names {
            let name = name.into();
            if name.is_empty() || name == "O" {
                return Err(Error::InvalidType(format!("`{name}` is not a valid label name")));
            }
            if set.index.contains_key(&name) {
                return Err(Error::InvalidType(format!("duplicate label `{name}`")));
            }
            set.index.insert(name.clone(), set.names.len());
            set.names.push(name);
        }
        Ok(set)
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn num_tags(&self) -> usize {
        num_tags(self.len())
    }

    pub fn name(&self, label: usize) -> &str {
        &self.names[label]
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn get(&self, name: &str) -> Option<usize> {
        self.index.get(name).copied()
    }

    pub fn format_tag(&self, tag: Tag) -> String {
        match tag {
            Tag::O => "O".to_string(),
            Tag::B(l) => format!("B-{}", self.names[l]),
            Tag::I(l) => format!("I-{}", self.names[l]),
        }
    }

    /// Parses `O`, `B-<label>` or `I-<label>`. Only the first `-` separates the prefix.
    pub fn parse_tag(&self, text: &str) -> Option<Tag> {
        if text == "O" {
            return Some(Tag::O);
        }
        let (prefix, name) = split_prefix(text)?;
        let label = self.get(name)?;
        match prefix {
            'B' => Some(Tag::B(label)),
            _ => Some(Tag::I(label)),
        }
    }
}

impl fmt::Display for LabelSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{{}}}", self.names.join(", "))
    }
}

/// Splits `B-X` / `I-X` into its prefix and label name.
pub fn split_prefix(text: &str) -> Option<(char, &str)> {
    let (prefix, name) = text.split_once('-')?;
    match prefix {
        "B" | "I" if !name.is_empty() => Some((prefix.chars().next().unwrap(), name)),
        _ => None,
    }
}
