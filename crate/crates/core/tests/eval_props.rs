use proptest::prelude::*;

use taxex::bio::{self, Tag};
use taxex::eval::{extract_spans, masked_micro_f1, micro_f1, score_tags, spans_to_tags, corpus_spans};

fn tag_seq(labels: usize) -> impl Strategy<Value = Vec<Tag>> {
    prop::collection::vec((0usize..3, 0..labels), 0..20).prop_map(|raw| {
        let mut tags: Vec<Tag> = raw
            .into_iter()
            .map(|(kind, l)| match kind {
                0 => Tag::O,
                1 => Tag::B(l),
                _ => Tag::I(l),
            })
            .collect();
        bio::repair(&mut tags);
        tags
    })
}

fn corpus(labels: usize) -> impl Strategy<Value = Vec<Vec<Tag>>> {
    prop::collection::vec(tag_seq(labels), 1..6)
}

proptest! {
    #[test]
    fn spans_round_trip(tags in corpus(3)) {
        let lengths: Vec<usize> = tags.iter().map(Vec::len).collect();
        prop_assert_eq!(spans_to_tags(&corpus_spans(&tags), &lengths), tags);
    }

    #[test]
    fn spans_are_ordered_and_in_range(tags in tag_seq(3)) {
        for s in extract_spans(&tags) {
            prop_assert!(s.start <= s.end && s.end < tags.len());
            prop_assert!(matches!(tags[s.start], Tag::B(l) if l == s.label));
        }
    }

    #[test]
    fn swapping_pred_and_gold_swaps_precision_and_recall((pred, gold) in (1usize..6).prop_flat_map(|n| {
        (prop::collection::vec(tag_seq(3), n), prop::collection::vec(tag_seq(3), n))
    })) {
        let gold: Vec<Vec<Tag>> = gold.into_iter().zip(&pred).map(|(mut g, p)| { g.resize(p.len(), Tag::O); bio::repair(&mut g); g }).collect();
        let forward = micro_f1(&corpus_spans(&pred), &corpus_spans(&gold));
        let backward = micro_f1(&corpus_spans(&gold), &corpus_spans(&pred));
        prop_assert_eq!(forward.precision, backward.recall);
        prop_assert_eq!(forward.recall, backward.precision);
        prop_assert!((forward.f1 - backward.f1).abs() < 1e-12);
    }

    #[test]
    fn empty_mask_is_plain_f1(pred in corpus(3)) {
        let gold: Vec<Vec<Tag>> = pred.iter().map(|p| p.iter().map(|&t| if t.label() == Some(0) { Tag::O } else { t }).collect()).collect();
        prop_assert_eq!(masked_micro_f1(&pred, &gold, &[]), score_tags(&pred, &gold));
    }

    #[test]
    fn masking_predictions_on_gold_o_never_lowers_precision(pred in corpus(3)) {
        // label 2 is never annotated in gold
        let gold: Vec<Vec<Tag>> = pred
            .iter()
            .map(|p| {
                let mut g: Vec<Tag> = p.iter().map(|&t| if t.label() == Some(2) { Tag::O } else { t }).collect();
                bio::repair(&mut g);
                g
            })
            .collect();
        let masked = masked_micro_f1(&pred, &gold, &[2]);
        let plain = score_tags(&pred, &gold);
        prop_assert!(masked.precision >= plain.precision);
        // with no gold spans the masked score counts an empty prediction as perfect
        if plain.gold > 0 {
            prop_assert_eq!(masked.recall, plain.recall);
        }
    }
}

#[test]
fn hand_counted_scores() {
    let gold = vec![vec![Tag::B(0), Tag::O, Tag::B(1)]];
    let pred = vec![vec![Tag::B(0), Tag::B(2), Tag::O]];
    let s = score_tags(&pred, &gold);
    assert_eq!((s.precision, s.recall, s.f1), (0.5, 0.5, 0.5));
    assert_eq!(score_tags(&gold, &gold).f1, 1.0);
    assert_eq!(score_tags(&[vec![Tag::O; 3]], &gold).f1, 0.0);
    assert_eq!(score_tags(&[vec![Tag::O]], &[vec![Tag::O]]).f1, 1.0);
}

#[test]
fn adjacent_and_multi_token_spans() {
    let one = extract_spans(&[Tag::B(0), Tag::I(0), Tag::O]);
    assert_eq!(one.len(), 1);
    assert_eq!((one[0].start, one[0].end), (0, 1));
    assert_eq!(extract_spans(&[Tag::B(0), Tag::B(0)]).len(), 2);
    assert!(extract_spans(&[Tag::O, Tag::O]).is_empty());
}

#[test]
fn masked_prediction_on_gold_o_is_not_a_false_positive() {
    let gold = vec![vec![Tag::O, Tag::B(0)]];
    let pred = vec![vec![Tag::B(1), Tag::B(0)]];
    assert_eq!(masked_micro_f1(&pred, &gold, &[1]).precision, 1.0);
    assert_eq!(score_tags(&pred, &gold).precision, 0.5);
    // everything masked: scored as if nothing was predicted
    assert_eq!(masked_micro_f1(&pred, &gold, &[0, 1]), score_tags(&[vec![Tag::O, Tag::O]], &gold));
}
