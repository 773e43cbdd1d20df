//! Generates a synthetic corpus, round-trips it through CoNLL, splits it
//! into two partially annotated halves and draws a few-shot sample.

use taxex::corpus::{
    generate_synthetic_corpus, parse_conll, split_and_scrub, subsample_per_type, write_conll, ConllOptions, SplitSpec,
    SyntheticSpec,
};
use taxex::taxonomy::Side;

fn main() -> taxex::Result<()> {
    let spec = SyntheticSpec {
        num_types: 4,
        sentences: 500,
        ..Default::default()
    };
    let corpus = generate_synthetic_corpus(&spec)?;
    println!("{} sentences, {} tokens, types {:?}", corpus.len(), corpus.num_tokens(), corpus.labels.names());
    println!("sentences per type: {:?}", corpus.sentences_per_label());

    let text = write_conll(&corpus);
    println!("\nfirst sentence in CoNLL:\n{}", text.split("\n\n").next().unwrap_or(""));
    let back = parse_conll(&text, &ConllOptions::default())?;
    // label ids may be renumbered on reading; the text is what must survive
    assert_eq!(write_conll(&back), text);

    // two types per side, sentences split in half
    let split = split_and_scrub(
        &corpus,
        &SplitSpec {
            type_split: vec![Side::A, Side::A, Side::B, Side::B],
            sentence_split_seed: 1,
            ratio: 0.5,
        },
    )?;
    println!(
        "\nD_A: {} sentences over {:?}; D_B: {} sentences over {:?}",
        split.d_a.len(),
        split.d_a.labels.names(),
        split.d_b.len(),
        split.d_b.labels.names()
    );

    let few = subsample_per_type(&split.d_b, 10, 3);
    println!(
        "10-shot sample of D_B: {} sentences, per type {:?}",
        few.corpus.len(),
        few.corpus.sentences_per_label()
    );
    Ok(())
}
