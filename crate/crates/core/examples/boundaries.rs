//! Print the SPRT and SAPT decision boundaries at a few stages and the
//! earliest stage at which each regime can stop.

use seqvimp::monitor::{sprt_boundaries, MonitorState};
use seqvimp::{Decision, SequentialSpec};

fn earliest_stop(spec: &SequentialSpec, exceed: bool) -> seqvimp::Result<usize> {
    let mut state = MonitorState::new();
    while !state.is_terminal() {
        state.step(exceed, spec)?;
    }
    Ok(state.m())
}

fn main() -> seqvimp::Result<()> {
    for spec in [SequentialSpec::sprt(), SequentialSpec::sapt()] {
        println!("{} (A={:.4}, B={:.4})", spec.method(), spec.a(), spec.b());
        for m in [10, 50, 100, 250, 500] {
            let b = sprt_boundaries(&spec, m)?;
            println!("  m={m:3}: accept H1 if d <= {:7.3}, accept H0 if d >= {:7.3}", b.lower_h1, b.upper_h0);
        }
        println!(
            "  earliest H1 at m={}, earliest H0 at m={}",
            earliest_stop(&spec, false)?,
            earliest_stop(&spec, true)?
        );
    }

    let certain = SequentialSpec::certain();
    let mut state = MonitorState::new();
    while state.decision() == Decision::Continue {
        state.step(true, &certain)?;
    }
    println!("CERTAIN with every permutation exceeding stops at m={}", state.m());
    Ok(())
}
