//! Test every predictor of a dataset and summarise the permutation budget.

use seqvimp::seed::stream;
use seqvimp::simbench::gen_study2;
use seqvimp::vimp_tests::test_all_variables;
use seqvimp::{ForestConfig, SequentialSpec, TestKind};

fn main() -> seqvimp::Result<()> {
    let data = gen_study2(100, &mut stream(21, &[]))?;
    let config = ForestConfig {
        ntree: 50,
        ..ForestConfig::default()
    };
    let spec = SequentialSpec::sprt();
    let all = test_all_variables(&data, &config, &spec, TestKind::General, &mut stream(22, &[]))?;
    for r in &all.reports {
        println!("{:4} {} ({} permutations)", r.name, r.decision.label(), r.permutations_used);
    }
    println!(
        "used {} of at most {} permutations",
        all.total_permutations, all.max_permutations
    );
    Ok(())
}
