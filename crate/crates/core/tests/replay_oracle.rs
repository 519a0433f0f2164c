//! Exact rejection probabilities and stopping times of the truncated SPRT and
//! SAPT monitors, computed by dynamic programming over (m, d), compared with
//! Monte Carlo replays of the monitor.

use rand::Rng;
use seqvimp::monitor::MonitorState;
use seqvimp::seed::stream;
use seqvimp::{Hypothesis, SequentialSpec};

struct Exact {
    h1: f64,
    mean_m: f64,
}

/// Forward recursion on the probability of reaching each (m, d) without
/// stopping. Boundaries are recomputed from the likelihood ratio directly.
fn exact(spec: &SequentialSpec, p: f64) -> Exact {
    let big_m = spec.max_perms();
    let (p0, p1) = (spec.p0(), spec.p1());
    let (la, lb) = (spec.a().ln(), spec.b().ln());
    let mut alive = vec![1.0f64];
    let (mut h1, mut mean_m) = (0.0, 0.0);
    for m in 1..=big_m {
        let mut next = vec![0.0; m + 1];
        for (d, &w) in alive.iter().enumerate() {
            next[d] += w * (1.0 - p);
            next[d + 1] += w * p;
        }
        for (d, w) in next.iter_mut().enumerate() {
            let llr = d as f64 * (p1 / p0).ln() + (m - d) as f64 * ((1.0 - p1) / (1.0 - p0)).ln();
            let stop_h1 = llr >= lb && llr > la;
            let stop_h0 = llr <= la;
            let truncated = m == big_m;
            if stop_h0 || stop_h1 || truncated {
                let accept_h1 = if stop_h0 {
                    false
                } else if stop_h1 {
                    true
                } else {
                    d as f64 / big_m as f64 <= spec.alpha()
                };
                if accept_h1 {
                    h1 += *w;
                }
                mean_m += *w * m as f64;
                *w = 0.0;
            }
        }
        alive = next;
    }
    Exact { h1, mean_m }
}

#[test]
fn replayed_rejection_rates_match_exact_values() {
    let replays = 10_000;
    for (si, spec) in [SequentialSpec::sprt(), SequentialSpec::sapt()].iter().enumerate() {
        for (pi, &p) in [0.01, 0.04, 0.05, 0.06, 0.10].iter().enumerate() {
            let truth = exact(spec, p);
            let mut rng = stream(77, &[si as u64, pi as u64]);
            let (mut h1, mut total_m) = (0usize, 0usize);
            for _ in 0..replays {
                let mut state = MonitorState::new();
                while !state.is_terminal() {
                    state.step(rng.random::<f64>() < p, spec).unwrap();
                }
                let out = state.outcome(spec).unwrap();
                h1 += usize::from(out.hypothesis == Hypothesis::H1);
                total_m += out.permutations;
            }
            let rate = h1 as f64 / replays as f64;
            let se = (truth.h1 * (1.0 - truth.h1) / replays as f64).sqrt().max(1e-4);
            assert!(
                (rate - truth.h1).abs() <= 3.0 * se,
                "{} p={p}: replay {rate} vs exact {}",
                spec.method(),
                truth.h1
            );
            let mean = total_m as f64 / replays as f64;
            assert!(
                (mean - truth.mean_m).abs() <= 0.05 * truth.mean_m,
                "{} p={p}: mean m {mean} vs exact {}",
                spec.method(),
                truth.mean_m
            );
        }
    }
}

#[test]
fn exact_mixture_stopping_time_is_near_the_untruncated_average() {
    // Truncation at M only shortens runs, so the exact mixture mean sits
    // below the untruncated average but within ten percent of it.
    for (spec, untruncated) in [(SequentialSpec::sprt(), 35.4), (SequentialSpec::sapt(), 43.6)] {
        let n = 2000;
        let mix: f64 = (0..n)
            .map(|i| exact(&spec, (i as f64 + 0.5) / n as f64).mean_m)
            .sum::<f64>()
            / n as f64;
        assert!(mix < untruncated && mix > 0.9 * untruncated, "{}: {mix}", spec.method());
    }
}

#[test]
fn truncation_inflates_rejection_near_the_null() {
    // At p0 the truncated SPRT rejects far more often than Wald's alpha.
    let spec = SequentialSpec::sprt();
    let e = exact(&spec, spec.p0());
    assert!((e.h1 - 0.1662).abs() < 5e-4, "{}", e.h1);
}
