//! The partial-label losses on a single token.
//!
//! Side A annotates `Per`; side B annotates `Org`. The word "BBC" is `O` in a
//! side-A sentence, so its true final label is either `O` or an `Org` tag.
//! A Model_B prediction fills in how likely each is.

use ndarray::Array2;
use taxex::bio::Tag;
use taxex::oracle::{build_oracle, kl_term, plm_kl_loss, plm_loss, plm_term, naive_ce_loss};
use taxex::taxonomy::{Side, Taxonomy};

fn main() -> taxex::Result<()> {
    let tax = Taxonomy::disjoint(&["Per"], &["Org"])?;
    let names = tax.space().names();

    // Model_B on "BBC": O 0.3, B-Org 0.7, I-Org 0
    let aux = Array2::from_shape_vec((1, 3), vec![0.3f64.ln(), 0.7f64.ln(), f64::NEG_INFINITY]).unwrap();
    let oracle = build_oracle(&tax, Side::A, &[Tag::O], aux.view())?;
    println!("oracle distribution over final tags:");
    for (t, p) in oracle.tokens[0].probs.iter().enumerate() {
        println!("  {:<14} {p:.3}", names.format_tag(Tag::from_index(t)));
    }

    // a final model that is unsure between O and B-Org
    let f = [0.5f64, 0.35, 0.05, 0.05, 0.05];
    let logits = Array2::from_shape_vec((1, 5), f.iter().map(|p| p.ln()).collect()).unwrap();
    let plm = plm_loss(logits.view(), &oracle)?;
    let kl = plm_kl_loss(logits.view(), &oracle)?;
    let naive = naive_ce_loss(logits.view(), &[Tag::O])?;
    println!("\nloss of f = {f:?}");
    println!("  naive CE (treats BBC as O): {:.4}", naive.loss);
    println!("  PLM  -log <f, g>:           {:.4}", plm.loss);
    println!("  PLM-KL  KL(g || f):         {:.4}", kl.loss);

    // KL is not an upper bound of PLM: for f = g uniform, KL is 0 but PLM is log 2
    let u = [0.5, 0.5];
    println!(
        "\nuniform f = g: PLM {:.4} > KL {:.4}",
        plm_term(&u, &u),
        kl_term(&u, &u)
    );
    Ok(())
}
