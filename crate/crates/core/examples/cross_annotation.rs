//! Trains a side-B tagger and uses it to fill in the `O` tokens of side-A
//! sentences.

use taxex::annotate::{cross_annotate, AnnotateMode};
use taxex::eval;
use taxex::harness::{load_corpus, prepare_split, ExperimentConfig};
use taxex::oracle::TokenTarget;
use taxex::tagger::{train, TaggerConfig, TaggerModel, TrainSentence};

fn main() -> taxex::Result<()> {
    let config = ExperimentConfig::parse("num_types = 4\ntrain_size = 800\nsplits = 1")?;
    let full = load_corpus(&config)?;
    let split = prepare_split(&config, &full, 0)?;
    let tax = split.taxonomy();

    let data: Vec<TrainSentence> = split
        .d_b
        .sentences
        .iter()
        .map(|s| TrainSentence::new(s.words.clone(), s.tags.iter().map(|t| TokenTarget::Hard(t.index())).collect()))
        .collect();
    let tagger = TaggerConfig {
        epochs: 15,
        learning_rate: 0.01,
        ..Default::default()
    };
    let mut model_b = TaggerModel::for_corpus(tagger, split.d_b.labels.clone(), data.iter().map(|s| s.words.as_slice()))?;
    let val = &split.val_side_b;
    let log = train(&mut model_b, &data, &mut |m| eval::observed_score(m, val).f1)?;
    println!("Model_B: best validation F1 {:.3} at epoch {}", log.best_score, log.best_epoch);

    let annotated = cross_annotate(&split.d_a, taxex::taxonomy::Side::A, &model_b, tax, AnnotateMode::Disjoint)?;
    let agreement = eval::score_tags(&annotated.observed_tags(), &annotated.gold_tags());
    println!("cross-annotated D_A against gold: F1 {:.3}", agreement.f1);

    let names = tax.space().names();
    let (before, after) = (&split.d_a.sentences[0], &annotated.sentences[0]);
    println!("\n{:<10} {:<10} {}", "word", "observed", "cross-annotated");
    for ((w, o), c) in before.words.iter().zip(&before.tags).zip(&after.tags) {
        println!("{w:<10} {:<10} {}", split.d_a.labels.format_tag(*o), names.format_tag(*c));
    }
    Ok(())
}
