//! Cross annotation: filling in what one side could not see with the other
//! side's model.

use std::str::FromStr;

use ndarray::ArrayView2;

use crate::bio::{self, Tag};
use crate::corpus::{Corpus, Sentence};
use crate::error::{Error, Result};
use crate::oracle::lift_observed;
use crate::tagger::{argmax, decode, TaggerModel};
use crate::taxonomy::{FinalLabel, Side, Taxonomy};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AnnotateMode {
    /// Observed `O` tokens take the aux model's hard prediction.
    Disjoint,
    /// Every token takes the best final label of its allowed set.
    General,
}

impl FromStr for AnnotateMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "disjoint" => Ok(AnnotateMode::Disjoint),
            "general" => Ok(AnnotateMode::General),
            other => Err(Error::config(format!("unknown annotation mode `{other}`"))),
        }
    }
}

/// Relabels a corpus observed on `side` over the final label space.
///
/// `aux` must be trained on the opposite side. Gold tags are carried over.
pub fn cross_annotate(
    corpus: &Corpus,
    side: Side,
    aux: &TaggerModel,
    taxonomy: &Taxonomy,
    mode: AnnotateMode,
) -> Result<Corpus> {
    if aux.labels != *taxonomy.side(side.other()) {
        return Err(Error::LabelSpaceMismatch);
    }
    if corpus.labels != *taxonomy.side(side) {
        return Err(Error::LabelSpaceMismatch);
    }
    if mode == AnnotateMode::Disjoint && !taxonomy.is_disjoint() {
        return Err(Error::config("disjoint cross annotation needs a disjoint taxonomy"));
    }
    let mut sentences = Vec::with_capacity(corpus.len());
    for chunk in corpus.sentences.chunks(256) {
        let words: Vec<&[String]> = chunk.iter().map(|s| s.words.as_slice()).collect();
        let logits = aux.batch_logits(&words);
        for (sentence, z) in chunk.iter().zip(&logits) {
            let tags = match mode {
                AnnotateMode::Disjoint => annotate_disjoint(taxonomy, side, &sentence.tags, z.view()),
                AnnotateMode::General => annotate_general(taxonomy, side, &sentence.tags, z.view())?,
            };
            let mut out = Sentence::new(sentence.words.clone(), tags, sentence.side);
            out.gold = sentence.gold.clone();
            sentences.push(out);
        }
    }
    Ok(Corpus::new(sentences, taxonomy.space().names().clone(), corpus.role))
}

// Final tag of an opposite-side tag `t` whose other component is O.
fn lift_other(taxonomy: &Taxonomy, other: Side, t: Tag) -> Tag {
    match t.label() {
        None => Tag::O,
        Some(l) => {
            let label = match other {
                Side::A => FinalLabel { a: Some(l), b: None },
                Side::B => FinalLabel { a: None, b: Some(l) },
            };
            let index = taxonomy
                .space()
                .position(label)
                .expect("disjoint space holds every single-sided label");
            t.relabel(index)
        }
    }
}

fn annotate_disjoint(taxonomy: &Taxonomy, side: Side, observed: &[Tag], aux_logits: ArrayView2<f64>) -> Vec<Tag> {
    let predicted = decode(aux_logits);
    let mut tags: Vec<Tag> = observed
        .iter()
        .zip(&predicted)
        .map(|(&obs, &pred)| match obs {
            Tag::O => lift_other(taxonomy, side.other(), pred),
            _ => Tag::from_index(lift_observed(taxonomy, side, obs).expect("disjoint observation")),
        })
        .collect();
    // substituted spans that ran into an observed entity restart after it
    bio::repair(&mut tags);
    tags
}

// Log-probabilities of the allowed final tags of one token, from the aux
// logits of their projections.
fn restricted_log_probs(taxonomy: &Taxonomy, side: Side, observed: Tag, z: &[f64]) -> Result<Vec<(usize, f64)>> {
    let allowed = taxonomy.allowed_tags(side, observed);
    if allowed.is_empty() {
        return Err(Error::EmptyAllowedSet);
    }
    let other = side.other();
    let scored: Vec<(usize, f64)> = allowed
        .iter()
        .map(|&t| (t, z[taxonomy.project_tag(Tag::from_index(t), other).index()]))
        .collect();
    let values: Vec<f64> = scored.iter().map(|s| s.1).collect();
    let lse = crate::oracle::log_sum_exp(&values);
    if lse == f64::NEG_INFINITY {
        return Err(Error::Unnormalizable);
    }
    Ok(scored.into_iter().map(|(t, v)| (t, v - lse)).collect())
}

fn annotate_general(taxonomy: &Taxonomy, side: Side, observed: &[Tag], aux_logits: ArrayView2<f64>) -> Result<Vec<Tag>> {
    let n = observed.len();
    let mut tags = vec![Tag::O; n];
    let row = |i: usize| aux_logits.row(i).to_vec();
    let mut i = 0;
    while i < n {
        let obs = observed[i];
        if obs == Tag::O {
            let scored = restricted_log_probs(taxonomy, side, obs, &row(i))?;
            let values: Vec<f64> = scored.iter().map(|s| s.1).collect();
            tags[i] = Tag::from_index(scored[argmax(&values)].0);
            i += 1;
            continue;
        }
        // one final label for the whole observed span
        let mut end = i + 1;
        while end < n && matches!((observed[end], obs.label()), (Tag::I(l), Some(m)) if l == m) {
            end += 1;
        }
        let labels: Vec<usize> = taxonomy
            .allowed_labels(side, obs.label())
            .members()
            .iter()
            .map(|m| m.expect("observed entity excludes O"))
            .collect();
        let mut totals = vec![0.0; labels.len()];
        for (j, &tag) in observed[i..end].iter().enumerate() {
            for (t, lp) in restricted_log_probs(taxonomy, side, tag, &row(i + j))? {
                let label = Tag::from_index(t).label().expect("entity tag");
                let k = labels.iter().position(|&l| l == label).expect("allowed label");
                totals[k] += lp;
            }
        }
        let best = labels[argmax(&totals)];
        for (j, &tag) in observed[i..end].iter().enumerate() {
            tags[i + j] = tag.relabel(best);
        }
        i = end;
    }
    bio::repair(&mut tags);
    Ok(tags)
}

/// All sentences of `a` followed by all of `b`.
pub fn join_corpora(a: &Corpus, b: &Corpus) -> Result<Corpus> {
    if a.labels != b.labels {
        return Err(Error::LabelSpaceMismatch);
    }
    let mut joined = a.clone();
    joined.sentences.extend(b.sentences.iter().cloned());
    Ok(joined)
}
