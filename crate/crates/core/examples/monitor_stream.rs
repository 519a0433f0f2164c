//! Drive the sequential monitor from an arbitrary exceedance stream, here a
//! Bernoulli(p) sequence, and compare all five regimes on the same draws.

use rand::Rng;
use seqvimp::monitor::{Method, MonitorState};
use seqvimp::seed::stream;
use seqvimp::SequentialSpec;

fn main() -> seqvimp::Result<()> {
    let p = 0.02;
    let mut rng = stream(7, &[]);
    let draws: Vec<bool> = (0..500).map(|_| rng.random::<f64>() < p).collect();

    for method in Method::ALL {
        let spec = SequentialSpec::default_for(method);
        let mut state = MonitorState::new();
        for &x in &draws {
            if state.is_terminal() {
                break;
            }
            state.step(x, &spec)?;
        }
        let out = state.outcome(&spec)?;
        let p_value = out.p_value.map_or_else(|| "-".to_string(), |v| format!("{v:.4}"));
        println!(
            "{:8} decision={} permutations={:3} p-value={p_value}",
            method.label(),
            out.hypothesis.label(),
            out.permutations
        );
    }
    Ok(())
}
