//! Subtype and overlapping setups on a two-level synthetic corpus.

use taxex::harness::{run_experiment, ExperimentConfig};

fn main() -> taxex::Result<()> {
    for setup in ["subtype", "overlapping"] {
        let config = ExperimentConfig::parse(&format!(
            "
            setup = {setup}
            methods = cl++, aml, model-b-only, x-ann, plm, plm-kl, upper-bound
            train_size = 2000
            splits = 1
            seeds = 1
            epochs = 15
            patience = 3
            learning_rates = 0.003, 0.01
            "
        ))?;
        let report = run_experiment(&config)?;
        print!("{}", report.summary_table());
        println!();
    }
    Ok(())
}
