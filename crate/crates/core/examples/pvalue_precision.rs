//! The sequential p-value regime: cost, precision and the values the
//! estimate can take.

use seqvimp::monitor::{pval_estimator_support, pval_expected_m, pval_se_fraction};

fn main() -> seqvimp::Result<()> {
    let max_perms = 500;
    println!("{:>4} {:>10} {:>12}", "h", "E[m]", "SE/p");
    for h in [4, 8, 10, 20, 50] {
        println!(
            "{h:4} {:10.3} {:12.4}",
            pval_expected_m(h, max_perms)?,
            pval_se_fraction(h)?
        );
    }
    let support = pval_estimator_support(8, max_perms)?;
    println!("h=8 estimator support has {} values; the first five:", support.len());
    for v in support.iter().take(5) {
        println!("  {v:.6}");
    }
    Ok(())
}
