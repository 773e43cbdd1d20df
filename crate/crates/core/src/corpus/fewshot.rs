use log::warn;

use super::{shuffled_indices, Corpus};

/// Result of [`subsample_per_type`].
#[derive(Clone, Debug)]
pub struct Subsample {
    pub corpus: Corpus,
    /// Labels that could not reach `k` sentences, with the number available.
    pub shortfalls: Vec<(String, usize)>,
}

/// Keeps a small set of sentences such that every label is mentioned in at
/// least `min(k, available)` of them.
///
/// Sentences are scanned in seed-shuffled order and kept when they mention a
/// label still short of `k`; a kept sentence counts toward every label it
/// mentions. Output sentences keep their original order. With `k` at least
/// the corpus size the corpus is returned unchanged.
pub fn subsample_per_type(corpus: &Corpus, k: usize, seed: u64) -> Subsample {
    let k = k.max(1);
    if k >= corpus.len() {
        return Subsample {
            corpus: corpus.clone(),
            shortfalls: Vec::new(),
        };
    }
    let mut counts = vec![0usize; corpus.labels.len()];
    let mut keep = Vec::new();
    for i in shuffled_indices(corpus.len(), seed) {
        let labels = corpus.sentences[i].mention_labels();
        if labels.iter().any(|&l| counts[l] < k) {
            for l in labels {
                counts[l] += 1;
            }
            keep.push(i);
        }
    }
    keep.sort_unstable();
    let shortfalls: Vec<(String, usize)> = counts
        .iter()
        .enumerate()
        .filter(|(_, &c)| c < k)
        .map(|(l, &c)| (corpus.labels.name(l).to_string(), c))
        .collect();
    for (name, available) in &shortfalls {
        warn!("type {name}: only {available} sentences available for k = {k}");
    }
    Subsample {
        corpus: corpus.select(&keep),
        shortfalls,
    }
}
