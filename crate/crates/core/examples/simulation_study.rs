//! A small replicated experiment on the logistic model: rejection rates and
//! mean permutation counts for all stopping regimes, computed from one shared
//! permutation sequence per replicate.

use seqvimp::monitor::Method;
use seqvimp::simbench::{gen_study1, run_experiment, Experiment, StudyISpec, STUDY1_VARIABLES};
use seqvimp::{ForestConfig, SequentialSpec, TestKind};

fn main() -> seqvimp::Result<()> {
    let spec = StudyISpec { k: 0.5, n: 100 };
    let exp = Experiment {
        study: "study1".into(),
        k: Some(spec.k),
        replicates: 10,
        forest: ForestConfig {
            ntree: 50,
            ..ForestConfig::default()
        },
        specs: Method::ALL.iter().map(|&m| SequentialSpec::default_for(m)).collect(),
        test: TestKind::TwoSample,
        variables: STUDY1_VARIABLES.to_vec(),
        seed: 2024,
    };
    let result = run_experiment(|rng| gen_study1(&spec, rng), &exp)?;
    println!("{:4} {:8} {:>9} {:>8}", "var", "method", "rejection", "mean m");
    for s in &result.summaries {
        println!(
            "{:4} {:8} {:9.2} {:8.1}",
            s.variable, s.method, s.rejection_frequency, s.mean_permutations
        );
    }
    Ok(())
}
