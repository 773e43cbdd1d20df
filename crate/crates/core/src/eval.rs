//! Exact-match span scoring.

use crate::bio::{self, Tag};
use crate::corpus::Corpus;
use crate::tagger::TaggerModel;
use crate::taxonomy::{Side, Taxonomy};

/// A labeled span; `end` is inclusive.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Span {
    pub sentence: usize,
    pub start: usize,
    pub end: usize,
    pub label: usize,
}

/// Maximal runs of `B-X I-X ...`. An `I` that does not continue the current
/// span opens a new one.
pub fn extract_spans(tags: &[Tag]) -> Vec<Span> {
    sentence_spans(0, tags)
}

fn sentence_spans(sentence: usize, tags: &[Tag]) -> Vec<Span> {
    let mut spans = Vec::new();
    let mut open: Option<Span> = None;
    for (i, &tag) in tags.iter().enumerate() {
        let continues = matches!((tag, open), (Tag::I(l), Some(s)) if s.label == l);
        if continues {
            if let Some(s) = open.as_mut() {
                s.end = i;
            }
            continue;
        }
        spans.extend(open.take());
        if let Some(label) = tag.label() {
            open = Some(Span {
                sentence,
                start: i,
                end: i,
                label,
            });
        }
    }
    spans.extend(open);
    spans
}

/// Spans of every sentence, keyed by sentence index.
pub fn corpus_spans(tags: &[Vec<Tag>]) -> Vec<Span> {
    tags.iter()
        .enumerate()
        .flat_map(|(i, t)| sentence_spans(i, t))
        .collect()
}

/// Tags that encode exactly `spans` over sentences of the given lengths.
pub fn spans_to_tags(spans: &[Span], lengths: &[usize]) -> Vec<Vec<Tag>> {
    let mut tags: Vec<Vec<Tag>> = lengths.iter().map(|&n| vec![Tag::O; n]).collect();
    for s in spans {
        tags[s.sentence][s.start] = Tag::B(s.label);
        for t in &mut tags[s.sentence][s.start + 1..=s.end] {
            *t = Tag::I(s.label);
        }
    }
    tags
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Scores {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub true_positives: usize,
    pub predicted: usize,
    pub gold: usize,
}

impl Scores {
    fn from_counts(tp: usize, predicted: usize, gold: usize) -> Scores {
        if predicted == 0 && gold == 0 {
            return Scores {
                precision: 1.0,
                recall: 1.0,
                f1: 1.0,
                ..Default::default()
            };
        }
        let ratio = |a: usize, b: usize| if b == 0 { 0.0 } else { a as f64 / b as f64 };
        let (p, r) = (ratio(tp, predicted), ratio(tp, gold));
        let f1 = if p + r == 0.0 { 0.0 } else { 2.0 * p * r / (p + r) };
        Scores {
            precision: p,
            recall: r,
            f1,
            true_positives: tp,
            predicted,
            gold,
        }
    }
}

/// Micro-averaged exact-match scores. Two empty span sets score 1.
pub fn micro_f1(pred: &[Span], gold: &[Span]) -> Scores {
    let mut p = pred.to_vec();
    let mut g = gold.to_vec();
    p.sort_unstable();
    p.dedup();
    g.sort_unstable();
    g.dedup();
    let tp = p.iter().filter(|s| g.binary_search(s).is_ok()).count();
    Scores::from_counts(tp, p.len(), g.len())
}

/// [`micro_f1`] on tag sequences.
pub fn score_tags(pred: &[Vec<Tag>], gold: &[Vec<Tag>]) -> Scores {
    micro_f1(&corpus_spans(pred), &corpus_spans(gold))
}

/// Scores after rewriting predicted tags of `masked` labels to `O`.
pub fn masked_micro_f1(pred: &[Vec<Tag>], gold: &[Vec<Tag>], masked: &[usize]) -> Scores {
    let kept: Vec<Vec<Tag>> = pred
        .iter()
        .map(|tags| {
            let mut t: Vec<Tag> = tags
                .iter()
                .map(|&t| match t.label() {
                    Some(l) if masked.contains(&l) => Tag::O,
                    _ => t,
                })
                .collect();
            bio::repair(&mut t);
            t
        })
        .collect();
    score_tags(&kept, gold)
}

/// Final-space predictions seen from one side: each tag is projected onto
/// that side, which masks every type the side does not annotate.
pub fn project_predictions(taxonomy: &Taxonomy, pred: &[Vec<Tag>], side: Side) -> Vec<Vec<Tag>> {
    pred.iter()
        .map(|tags| {
            let mut t: Vec<Tag> = tags.iter().map(|&t| taxonomy.project_tag(t, side)).collect();
            bio::repair(&mut t);
            t
        })
        .collect()
}

fn words(corpus: &Corpus) -> Vec<&[String]> {
    corpus.sentences.iter().map(|s| s.words.as_slice()).collect()
}

/// Mean of the side-A score on `val_a` and the side-B score on `val_b`, each
/// counting only the types that side annotates.
pub fn partial_validation_score(model: &TaggerModel, taxonomy: &Taxonomy, val_a: &Corpus, val_b: &Corpus) -> f64 {
    let side_score = |val: &Corpus, side: Side| {
        let pred = model.predict_batch(&words(val));
        score_tags(&project_predictions(taxonomy, &pred, side), &val.observed_tags()).f1
    };
    (side_score(val_a, Side::A) + side_score(val_b, Side::B)) / 2.0
}

/// Scores predictions against the corpus' final-space gold tags.
pub fn gold_score(model: &TaggerModel, corpus: &Corpus) -> Scores {
    let pred = model.predict_batch(&words(corpus));
    score_tags(&pred, &corpus.gold_tags())
}

/// Scores predictions against the corpus' observed tags.
pub fn observed_score(model: &TaggerModel, corpus: &Corpus) -> Scores {
    let pred = model.predict_batch(&words(corpus));
    score_tags(&pred, &corpus.observed_tags())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn span(sentence: usize, start: usize, end: usize, label: usize) -> Span {
        Span {
            sentence,
            start,
            end,
            label,
        }
    }

    #[test]
    fn extraction() {
        assert_eq!(extract_spans(&[Tag::B(0), Tag::I(0), Tag::O]), vec![span(0, 0, 1, 0)]);
        assert_eq!(
            extract_spans(&[Tag::B(0), Tag::B(0)]),
            vec![span(0, 0, 0, 0), span(0, 1, 1, 0)]
        );
        assert!(extract_spans(&[Tag::O, Tag::O]).is_empty());
        assert_eq!(
            extract_spans(&[Tag::B(0), Tag::I(1), Tag::I(1)]),
            vec![span(0, 0, 0, 0), span(0, 1, 2, 1)]
        );
    }

    #[test]
    fn f1_by_hand() {
        let gold = [span(0, 0, 0, 0), span(0, 2, 3, 1)];
        let pred = [span(0, 0, 0, 0), span(0, 5, 5, 1)];
        let s = micro_f1(&pred, &gold);
        assert_eq!((s.precision, s.recall, s.f1), (0.5, 0.5, 0.5));
        assert_eq!(micro_f1(&gold, &gold).f1, 1.0);
        assert_eq!(micro_f1(&[], &gold).f1, 0.0);
        assert_eq!(micro_f1(&[], &[]).f1, 1.0);
    }

    #[test]
    fn masking() {
        let gold = vec![vec![Tag::O, Tag::B(0)]];
        // B-1 on a gold-O token is masked away, not a false positive
        let pred = vec![vec![Tag::B(1), Tag::B(0)]];
        assert_eq!(masked_micro_f1(&pred, &gold, &[1]).f1, 1.0);
        assert!(score_tags(&pred, &gold).f1 < 1.0);
        assert_eq!(masked_micro_f1(&pred, &gold, &[]), score_tags(&pred, &gold));
        let all = vec![vec![Tag::B(1), Tag::B(1)]];
        assert_eq!(masked_micro_f1(&all, &gold, &[1]).f1, 0.0);
    }

    #[test]
    fn round_trip_spans() {
        let tags = vec![vec![Tag::B(2), Tag::I(2), Tag::O, Tag::B(0)], vec![Tag::O]];
        let spans = corpus_spans(&tags);
        assert_eq!(spans_to_tags(&spans, &[4, 1]), tags);
    }
}
