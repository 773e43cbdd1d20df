//! Whether a final model beats a dedicated side-B model on side-B types,
//! at two type ratios.

use taxex::harness::{run_model_b_comparison, ExperimentConfig};

fn main() -> taxex::Result<()> {
    for ratio in ["9:9", "17:1"] {
        let config = ExperimentConfig::parse(&format!(
            "
            num_types = 18
            type_ratio = {ratio}
            methods = model-b-only, x-ann, plm
            splits = 1
            seeds = 1
            epochs = 15
            patience = 3
            learning_rates = 0.003
            "
        ))?;
        let report = run_model_b_comparison(&config)?;
        println!("type ratio {ratio}");
        print!("{}", report.summary_table());
        println!();
    }
    Ok(())
}
