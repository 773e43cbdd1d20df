//! Synthetic fully annotated corpora.
//!
//! Every (fine) entity type owns a Zipf-distributed word list and a handful of
//! cue words that tend to precede its mentions. A shared pool of ambiguous
//! entity words forces the tagger to use context for some mentions, and the
//! long tail of each word list leaves many test words unseen in training.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::bio::{LabelSet, Tag};
use crate::error::{Error, Result};

use super::{Corpus, FineLabels, Sentence, SourceSide, SplitRole};

const COARSE_NAMES: [&str; 18] = [
    "PER", "LOC", "ORG", "MISC", "DATE", "TIME", "MONEY", "PERCENT", "FAC", "GPE", "NORP",
    "EVENT", "LAW", "LANG", "PRODUCT", "WORK", "QUANT", "ORDINAL",
];

#[derive(Clone, Debug, PartialEq)]
pub struct SyntheticSpec {
    pub num_types: usize,
    /// Fine subtypes per coarse type; 0 produces a single-level corpus.
    pub fine_per_type: usize,
    pub sentences: usize,
    pub avg_len: usize,
    /// Target fraction of entity tokens.
    pub density: f64,
    pub context_vocab: usize,
    /// Words per (fine) entity type.
    pub entity_vocab: usize,
    pub cue_words: usize,
    pub cue_prob: f64,
    /// Probability that an entity word comes from the shared ambiguous pool.
    pub ambiguity: f64,
    pub seed: u64,
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        SyntheticSpec {
            num_types: 8,
            fine_per_type: 0,
            sentences: 2000,
            avg_len: 12,
            density: 0.2,
            context_vocab: 400,
            entity_vocab: 120,
            cue_words: 3,
            cue_prob: 0.6,
            ambiguity: 0.1,
            seed: 7,
        }
    }
}

impl SyntheticSpec {
    pub fn validate(&self) -> Result<()> {
        if self.num_types < 2 {
            return Err(Error::config("synthetic corpus needs at least 2 types"));
        }
        if !(self.density > 0.0 && self.density < 1.0) {
            return Err(Error::config("density must lie in (0, 1)"));
        }
        if self.avg_len < 3 || self.sentences == 0 {
            return Err(Error::config("avg_len must be >= 3 and sentences >= 1"));
        }
        if self.context_vocab == 0 || self.entity_vocab == 0 {
            return Err(Error::config("vocabulary sizes must be positive"));
        }
        if !(0.0..=1.0).contains(&self.cue_prob) || !(0.0..=1.0).contains(&self.ambiguity) {
            return Err(Error::config("cue_prob and ambiguity must lie in [0, 1]"));
        }
        Ok(())
    }

    pub fn coarse_names(&self) -> Vec<String> {
        (0..self.num_types)
            .map(|i| match COARSE_NAMES.get(i) {
                Some(n) => n.to_string(),
                None => format!("T{i}"),
            })
            .collect()
    }
}

struct Zipf {
    cumulative: Vec<f64>,
}

impl Zipf {
    fn new(n: usize, exponent: f64) -> Self {
        let mut acc = 0.0;
        let cumulative = (1..=n)
            .map(|r| {
                acc += (r as f64).powf(-exponent);
                acc
            })
            .collect();
        Zipf { cumulative }
    }

    fn sample(&self, rng: &mut impl Rng) -> usize {
        let total = *self.cumulative.last().unwrap();
        let x = rng.gen::<f64>() * total;
        self.cumulative
            .partition_point(|&c| c <= x)
            .min(self.cumulative.len() - 1)
    }
}

// Mention length distribution: 1, 2 or 3 tokens.
fn mention_len(rng: &mut impl Rng) -> usize {
    let x: f64 = rng.gen();
    if x < 0.55 {
        1
    } else if x < 0.9 {
        2
    } else {
        3
    }
}

/// Generates a fully annotated corpus; identical specs give identical corpora.
pub fn generate_synthetic_corpus(spec: &SyntheticSpec) -> Result<Corpus> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let coarse = spec.coarse_names();
    let labels = LabelSet::new(coarse.iter().cloned())?;
    let two_level = spec.fine_per_type > 0;
    let fine = if two_level {
        let mut names = Vec::new();
        let mut parent = Vec::new();
        for (c, name) in coarse.iter().enumerate() {
            for f in 0..spec.fine_per_type {
                names.push(format!("{name}.f{f}"));
                parent.push(c);
            }
        }
        Some(FineLabels {
            labels: LabelSet::new(names)?,
            parent,
        })
    } else {
        None
    };
    let context = Zipf::new(spec.context_vocab, 1.0);
    let entity = Zipf::new(spec.entity_vocab, 1.0);
    let ambiguous = Zipf::new(spec.entity_vocab.max(2) / 2, 1.0);

    let mut sentences = Vec::with_capacity(spec.sentences);
    for _ in 0..spec.sentences {
        let len = (spec.avg_len - 3 + rng.gen_range(0..=6)).max(3);
        let expected = spec.density * len as f64;
        let mut entity_tokens = expected.floor() as usize;
        if rng.gen::<f64>() < expected.fract() {
            entity_tokens += 1;
        }

        let mut mentions = Vec::new();
        let mut used = 0;
        while used < entity_tokens {
            let l = mention_len(&mut rng).min(entity_tokens - used);
            mentions.push(l);
            used += l;
        }
        while !mentions.is_empty() && len - used + 1 < mentions.len() {
            used -= mentions.pop().unwrap();
        }
        let context_tokens = len - used;

        // Mentions sit in distinct slots between context tokens.
        let mut slots: Vec<usize> = (0..=context_tokens).collect();
        for i in 0..mentions.len() {
            let j = rng.gen_range(i..slots.len());
            slots.swap(i, j);
        }
        let mut slots = slots[..mentions.len()].to_vec();
        slots.sort_unstable();

        let mut words: Vec<String> = Vec::with_capacity(len);
        let mut tags = Vec::with_capacity(len);
        let mut fines = Vec::with_capacity(len);
        let mut next_mention = 0;
        for slot in 0..=context_tokens {
            while next_mention < mentions.len() && slots[next_mention] == slot {
                let c = rng.gen_range(0..spec.num_types);
                let f = if two_level {
                    Some(c * spec.fine_per_type + rng.gen_range(0..spec.fine_per_type))
                } else {
                    None
                };
                let key = f.unwrap_or(c);
                if let Some(prev) = words.last_mut() {
                    let is_context = tags.last() == Some(&Tag::O);
                    if is_context && spec.cue_words > 0 && rng.gen::<f64>() < spec.cue_prob {
                        *prev = format!("k{key}_{}", rng.gen_range(0..spec.cue_words));
                    }
                }
                for t in 0..mentions[next_mention] {
                    let word = if rng.gen::<f64>() < spec.ambiguity {
                        format!("x{}", ambiguous.sample(&mut rng))
                    } else {
                        format!("e{key}_{}", entity.sample(&mut rng))
                    };
                    words.push(word);
                    tags.push(if t == 0 { Tag::B(c) } else { Tag::I(c) });
                    fines.push(f);
                }
                next_mention += 1;
            }
            if slot < context_tokens {
                words.push(format!("c{}", context.sample(&mut rng)));
                tags.push(Tag::O);
                fines.push(None);
            }
        }
        let mut sentence = Sentence::new(words, tags, SourceSide::Full);
        if two_level {
            sentence.fine = Some(fines);
        }
        sentences.push(sentence);
    }
    Ok(Corpus {
        sentences,
        labels,
        fine,
        role: SplitRole::Train,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bio;

    #[test]
    fn deterministic_under_seed() {
        let spec = SyntheticSpec {
            num_types: 4,
            sentences: 2000,
            density: 0.2,
            seed: 7,
            ..Default::default()
        };
        let a = generate_synthetic_corpus(&spec).unwrap();
        let b = generate_synthetic_corpus(&spec).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn entity_density_is_close_to_target() {
        let spec = SyntheticSpec {
            num_types: 4,
            sentences: 2000,
            density: 0.2,
            avg_len: 12,
            seed: 7,
            ..Default::default()
        };
        let c = generate_synthetic_corpus(&spec).unwrap();
        let entity: usize = c
            .sentences
            .iter()
            .map(|s| s.tags.iter().filter(|t| !t.is_outside()).count())
            .sum();
        let fraction = entity as f64 / c.num_tokens() as f64;
        assert!((fraction - 0.2).abs() <= 0.02, "fraction = {fraction}");
        let avg = c.num_tokens() as f64 / c.len() as f64;
        assert!((avg - 12.0).abs() < 0.5, "avg len = {avg}");
    }

    #[test]
    fn minimal_spec_has_both_types() {
        let spec = SyntheticSpec {
            num_types: 2,
            sentences: 50,
            ..Default::default()
        };
        let c = generate_synthetic_corpus(&spec).unwrap();
        let counts = c.sentences_per_label();
        assert!(counts.iter().all(|&n| n > 0), "{counts:?}");
        assert!(c.sentences.iter().all(|s| bio::is_well_formed(&s.tags)));
    }

    #[test]
    fn two_level_fine_matches_coarse() {
        let spec = SyntheticSpec {
            num_types: 3,
            fine_per_type: 4,
            sentences: 200,
            ..Default::default()
        };
        let c = generate_synthetic_corpus(&spec).unwrap();
        let fine = c.fine.as_ref().unwrap();
        assert_eq!(fine.labels.len(), 12);
        for s in &c.sentences {
            for (tag, f) in s.tags.iter().zip(s.fine.as_ref().unwrap()) {
                match (tag.label(), f) {
                    (None, None) => {}
                    (Some(c), Some(f)) => assert_eq!(fine.parent[*f], c),
                    other => panic!("misaligned fine label {other:?}"),
                }
            }
        }
    }

    #[test]
    fn rejects_bad_specs() {
        let one = SyntheticSpec {
            num_types: 1,
            ..Default::default()
        };
        assert!(generate_synthetic_corpus(&one).is_err());
        let dense = SyntheticSpec {
            density: 1.0,
            ..Default::default()
        };
        assert!(generate_synthetic_corpus(&dense).is_err());
    }
}
