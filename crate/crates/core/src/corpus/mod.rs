//! Corpus data model, CoNLL I/O, synthetic generation and the construction of
//! partially annotated corpus pairs.

mod conll;
mod fewshot;
mod setup;
mod synthetic;

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::bio::{LabelSet, Tag};

pub use conll::{parse_conll, read_conll, write_conll, ConllOptions};
pub use fewshot::{subsample_per_type, Subsample};
pub use setup::{
    build_overlapping_setup, build_subtype_setup, split_and_scrub, OverlapSpec, PartialSetup,
    Projected, Setup, SplitSpec, SubtypeSpec,
};
pub use synthetic::{generate_synthetic_corpus, SyntheticSpec};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SourceSide {
    A,
    B,
    Full,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SplitRole {
    Train,
    Validation,
    Test,
}

/// A tokenized sentence with observed tags.
///
/// `gold` holds final-space tags when the sentence was derived from a fully
/// annotated source. It is kept in memory only and never written out.
#[derive(Clone, Debug, PartialEq)]
pub struct Sentence {
    pub words: Vec<String>,
    pub tags: Vec<Tag>,
    /// Fine-grained label per token for two-level corpora.
    pub fine: Option<Vec<Option<usize>>>,
    pub gold: Option<Vec<Tag>>,
    pub side: SourceSide,
}

impl Sentence {
    pub fn new(words: Vec<String>, tags: Vec<Tag>, side: SourceSide) -> Self {
        debug_assert_eq!(words.len(), tags.len());
        Sentence {
            words,
            tags,
            fine: None,
            gold: None,
            side,
        }
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    /// Labels that start at least one mention in this sentence.
    pub fn mention_labels(&self) -> BTreeSet<usize> {
        self.tags
            .iter()
            .filter_map(|t| match t {
                Tag::B(l) => Some(*l),
                _ => None,
            })
            .collect()
    }
}

/// Fine-grained labels of a two-level corpus and their coarse parents.
#[derive(Clone, Debug, PartialEq)]
pub struct FineLabels {
    pub labels: LabelSet,
    pub parent: Vec<usize>,
}

impl FineLabels {
    pub fn children(&self, coarse: usize) -> Vec<usize> {
        (0..self.labels.len())
            .filter(|&f| self.parent[f] == coarse)
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Corpus {
    pub sentences: Vec<Sentence>,
    /// Labels the observed `tags` index into.
    pub labels: LabelSet,
    pub fine: Option<FineLabels>,
    pub role: SplitRole,
}

impl Corpus {
    pub fn new(sentences: Vec<Sentence>, labels: LabelSet, role: SplitRole) -> Self {
        Corpus {
            sentences,
            labels,
            fine: None,
            role,
        }
    }

    pub fn len(&self) -> usize {
        self.sentences.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sentences.is_empty()
    }

    pub fn num_tokens(&self) -> usize {
        self.sentences.iter().map(Sentence::len).sum()
    }

    /// Number of sentences mentioning each label.
    pub fn sentences_per_label(&self) -> Vec<usize> {
        let mut counts = vec![0; self.labels.len()];
        for s in &self.sentences {
            for l in s.mention_labels() {
                counts[l] += 1;
            }
        }
        counts
    }

    /// A corpus with the same label space holding the given sentences, in order.
    pub fn select(&self, indices: &[usize]) -> Corpus {
        Corpus {
            sentences: indices.iter().map(|&i| self.sentences[i].clone()).collect(),
            labels: self.labels.clone(),
            fine: self.fine.clone(),
            role: self.role,
        }
    }

    pub fn with_role(mut self, role: SplitRole) -> Corpus {
        self.role = role;
        self
    }

    /// Gold final tags of every sentence, falling back to observed tags.
    pub fn gold_tags(&self) -> Vec<Vec<Tag>> {
        self.sentences
            .iter()
            .map(|s| s.gold.clone().unwrap_or_else(|| s.tags.clone()))
            .collect()
    }

    pub fn observed_tags(&self) -> Vec<Vec<Tag>> {
        self.sentences.iter().map(|s| s.tags.clone()).collect()
    }

    /// Splits off validation and test portions from a shuffled copy.
    pub fn carve(&self, validation: usize, test: usize, seed: u64) -> (Corpus, Corpus, Corpus) {
        let order = shuffled_indices(self.len(), seed);
        let validation = validation.min(self.len());
        let test = test.min(self.len() - validation);
        let (val_idx, rest) = order.split_at(validation);
        let (test_idx, train_idx) = rest.split_at(test);
        let mut train_idx = train_idx.to_vec();
        let mut val_idx = val_idx.to_vec();
        let mut test_idx = test_idx.to_vec();
        train_idx.sort_unstable();
        val_idx.sort_unstable();
        test_idx.sort_unstable();
        (
            self.select(&train_idx).with_role(SplitRole::Train),
            self.select(&val_idx).with_role(SplitRole::Validation),
            self.select(&test_idx).with_role(SplitRole::Test),
        )
    }
}

pub(crate) fn shuffled_indices(n: usize, seed: u64) -> Vec<usize> {
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    order
}

/// Seed-driven partition of `0..n` into two sorted index lists, the first
/// holding `round(ratio * n)` entries (at least one on each side when `n >= 2`).
pub(crate) fn partition_indices(n: usize, ratio: f64, seed: u64) -> (Vec<usize>, Vec<usize>) {
    let order = shuffled_indices(n, seed);
    let mut first = ((ratio * n as f64).round() as usize).min(n);
    if n >= 2 {
        first = first.clamp(1, n - 1);
    }
    let mut a = order[..first].to_vec();
    let mut b = order[first..].to_vec();
    a.sort_unstable();
    b.sort_unstable();
    (a, b)
}
