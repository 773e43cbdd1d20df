//! Builds a taxonomy from the relation text format and prints the final
//! label space together with the labels each observation allows.

use taxex::bio::Tag;
use taxex::taxonomy::{Side, Taxonomy};

const RELATIONS: &str = "
# side A: coarse person and organisation types
A:Person supertype B:Actor
A:Person supertype B:Politician
A:Organization
# side B: fine types plus an unrelated one
B:Date
";

fn main() -> taxex::Result<()> {
    let tax = Taxonomy::parse_spec(RELATIONS, &[], &[])?;
    println!("side A: {:?}", tax.side_a().names());
    println!("side B: {:?}", tax.side_b().names());

    println!("\nfinal labels:");
    for label in 0..tax.space().len() {
        println!("  {label:>2}  {}", tax.display_label(label));
    }

    for (side, labels) in [(Side::A, tax.side_a()), (Side::B, tax.side_b())] {
        println!("\nobserved on side {side}:");
        let observed = std::iter::once(None).chain((0..labels.len()).map(Some));
        for o in observed {
            let name = o.map_or("O", |l| labels.name(l));
            let allowed: Vec<String> = tax
                .allowed_labels(side, o)
                .members()
                .iter()
                .map(|m| m.map_or("O".to_string(), |l| tax.display_label(l)))
                .collect();
            println!("  {name:<13} -> {}", allowed.join(", "));
        }
    }

    // tags of a final label seen from each side
    let actor = tax.space().names().parse_tag("B-A:Person|B:Actor").expect("label exists");
    println!(
        "\nB-Person:Actor projects to {} on A and {} on B",
        tax.side_a().format_tag(tax.project_tag(actor, Side::A)),
        tax.side_b().format_tag(tax.project_tag(actor, Side::B)),
    );
    assert_ne!(tax.project_tag(actor, Side::A), Tag::O);
    Ok(())
}
