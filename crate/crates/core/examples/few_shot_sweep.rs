//! F1 as D_B shrinks to k sentences per type.

use taxex::harness::{sweep, ExperimentConfig};

fn main() -> taxex::Result<()> {
    let config = ExperimentConfig::parse(
        "
        methods = x-ann, plm
        splits = 1
        seeds = 2
        epochs = 15
        patience = 3
        learning_rates = 0.003
        ",
    )?;
    let values: Vec<String> = ["5", "20", "100"].iter().map(|s| s.to_string()).collect();
    let report = sweep(&config, "few_shot_k", &values)?;
    print!("{}", report.summary_table());
    Ok(())
}
