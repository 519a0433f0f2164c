//! Fit a random forest on Friedman 1 data and print the out-of-bag
//! permutation importance of every predictor.

use seqvimp::forest::{fit_forest, forest_vimp};
use seqvimp::seed::stream;
use seqvimp::simbench::gen_study2;
use seqvimp::ForestConfig;

fn main() -> seqvimp::Result<()> {
    let data = gen_study2(200, &mut stream(1, &[]))?;
    let config = ForestConfig {
        ntree: 200,
        seed: 2,
        ..ForestConfig::default()
    };
    let model = fit_forest(&data, &config)?;
    println!("OOB squared error {:.3}", model.oob_loss(&data, model.loss())?);

    let mut rng = stream(3, &[]);
    for j in 0..data.n_predictors() {
        let report = forest_vimp(&model, j, &data, config.nperm, &mut rng)?;
        println!("{:4} VIMP {:8.4}", report.variable, report.vimp);
    }
    Ok(())
}
