//! All methods on the disjoint setup: two corpora annotated with disjoint
//! halves of the types.
//!
//! Extra `key=value` arguments override the config, e.g.
//! `cargo run --release --example disjoint_experiment -- splits=5 seeds=5`.

use taxex::harness::{run_experiment, ExperimentConfig};

fn main() -> taxex::Result<()> {
    let mut config = ExperimentConfig::parse(
        "
        setup = disjoint
        methods = naive-join, cl, cl++, aml, x-ann, plm, plm-kl, upper-bound
        splits = 1
        seeds = 1
        epochs = 15
        patience = 3
        ",
    )?;
    for arg in std::env::args().skip(1) {
        if let Some((k, v)) = arg.split_once('=') {
            config.set(k, v)?;
        }
    }
    let report = run_experiment(&config)?;
    print!("{}", report.to_csv());
    println!();
    print!("{}", report.summary_table());
    Ok(())
}
