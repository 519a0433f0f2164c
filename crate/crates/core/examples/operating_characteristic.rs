//! Power and expected number of permutations of the SPRT and SAPT regimes,
//! plus the two summary numbers used to compare them.

use seqvimp::monitor::{average_expected_permutations, effective_alpha, operating_characteristic};
use seqvimp::SequentialSpec;

fn main() -> seqvimp::Result<()> {
    for spec in [SequentialSpec::sprt(), SequentialSpec::sapt()] {
        println!("{}", spec.method());
        println!("  {:>6} {:>8} {:>9}", "p", "L(p)", "E[m]");
        for p in [0.01, 0.03, 0.04, 0.05, 0.06, 0.08, 0.15] {
            let oc = operating_characteristic(p, &spec)?;
            println!("  {:6.3} {:8.4} {:9.2}", oc.p, oc.power, oc.expected_m);
        }
        println!("  effective alpha            {:.6}", effective_alpha(&spec)?);
        println!("  average E[m] over p~U(0,1) {:.4}", average_expected_permutations(&spec)?);
    }
    Ok(())
}
