use serde::Serialize;

use super::spec::{Method, SequentialSpec};
use crate::error::{Error, Result};

/// Status of a monitor after the most recent step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Decision {
    Continue,
    AcceptH0,
    AcceptH1,
    /// The sequential p-value regime has stopped; see [`pval_estimate`].
    PvalueReady,
}

impl Decision {
    pub fn is_terminal(self) -> bool {
        self != Decision::Continue
    }
}

/// The hypothesis a terminated test accepts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Hypothesis {
    H0,
    H1,
}

impl Hypothesis {
    pub fn rejects_null(self) -> bool {
        self == Hypothesis::H1
    }

    pub fn label(self) -> &'static str {
        match self {
            Hypothesis::H0 => "accept_H0",
            Hypothesis::H1 => "accept_H1",
        }
    }
}

/// Final result of a terminated monitor.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Outcome {
    pub hypothesis: Hypothesis,
    /// Present for the PVAL and COMPLETE regimes.
    pub p_value: Option<f64>,
    pub permutations: usize,
}

/// Linear decision boundaries for `d_m` at one value of `m`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Boundaries {
    /// Accept H0 when `d_m >= upper_h0`.
    pub upper_h0: f64,
    /// Accept H1 when `d_m <= lower_h1`.
    pub lower_h1: f64,
}

/// SPRT/SAPT boundaries at stage `m`, obtained by solving the likelihood
/// ratio inequalities for `d_m`.
pub fn sprt_boundaries(spec: &SequentialSpec, m: usize) -> Result<Boundaries> {
    if !spec.method().is_wald() {
        return Err(Error::Usage(format!(
            "boundaries are only defined for SPRT and SAPT, not {}",
            spec.method()
        )));
    }
    if m == 0 {
        return Err(Error::Usage("boundaries require m >= 1".into()));
    }
    Ok(boundaries_unchecked(spec, m))
}

fn boundaries_unchecked(spec: &SequentialSpec, m: usize) -> Boundaries {
    let (p0, p1) = (spec.p0(), spec.p1());
    // Negative because p1 < p0.
    let denom = (p1 * (1.0 - p0) / (p0 * (1.0 - p1))).ln();
    let slope = ((1.0 - p0) / (1.0 - p1)).ln();
    let m = m as f64;
    Boundaries {
        upper_h0: (spec.a().ln() + m * slope) / denom,
        lower_h1: (spec.b().ln() + m * slope) / denom,
    }
}

fn complete_hypothesis(d: usize, max_perms: usize, alpha: f64) -> Hypothesis {
    if d as f64 / max_perms as f64 <= alpha {
        Hypothesis::H1
    } else {
        Hypothesis::H0
    }
}

/// Certain-stopping rule for a fixed-`M` test at stage `m` with `d`
/// exceedances.
pub fn certain_rule(m: usize, d: usize, max_perms: usize, alpha: f64) -> Decision {
    let big_m = max_perms as f64;
    if d as f64 / big_m > alpha {
        Decision::AcceptH0
    } else if (d + (max_perms - m)) as f64 / big_m <= alpha {
        Decision::AcceptH1
    } else {
        Decision::Continue
    }
}

/// Certain-stopping decision for `state` under a fixed-`M` test at level
/// `alpha`.
pub fn certain_stop(state: &MonitorState, max_perms: usize, alpha: f64) -> Result<Decision> {
    if state.m > max_perms {
        return Err(Error::Usage(format!(
            "state has consumed {} permutations, more than M={max_perms}",
            state.m
        )));
    }
    Ok(certain_rule(state.m, state.d, max_perms, alpha))
}

/// Running state of one sequential test.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MonitorState {
    m: usize,
    d: usize,
    trajectory: Vec<bool>,
    decision: Decision,
}

impl Default for MonitorState {
    fn default() -> Self {
        Self::new()
    }
}

impl MonitorState {
    pub fn new() -> Self {
        MonitorState {
            m: 0,
            d: 0,
            trajectory: Vec::new(),
            decision: Decision::Continue,
        }
    }

    /// Feed `trajectory` into a fresh monitor until it terminates or the
    /// trajectory runs out.
    pub fn replay(trajectory: &[bool], spec: &SequentialSpec) -> MonitorState {
        let mut state = MonitorState::new();
        for &x in trajectory {
            if state.decision.is_terminal() {
                break;
            }
            state
                .step(x, spec)
                .expect("stepping a non-terminal state below M cannot fail");
        }
        state
    }

    /// Permutations consumed so far.
    pub fn m(&self) -> usize {
        self.m
    }

    /// Exceedances observed so far.
    pub fn d(&self) -> usize {
        self.d
    }

    pub fn trajectory(&self) -> &[bool] {
        &self.trajectory
    }

    pub fn decision(&self) -> Decision {
        self.decision
    }

    pub fn is_terminal(&self) -> bool {
        self.decision.is_terminal()
    }

    /// Record one exceedance indicator and apply the spec's stopping rule.
    pub fn step(&mut self, exceeded: bool, spec: &SequentialSpec) -> Result<Decision> {
        if self.decision.is_terminal() {
            return Err(Error::Usage(format!(
                "monitor already terminated with {:?} at m={}",
                self.decision, self.m
            )));
        }
        let max_perms = spec.max_perms();
        if self.m >= max_perms {
            return Err(Error::Usage(format!("monitor already consumed M={max_perms} permutations")));
        }

        self.m += 1;
        self.d += usize::from(exceeded);
        self.trajectory.push(exceeded);

        let (m, d) = (self.m, self.d);
        self.decision = match spec.method() {
            Method::Sprt | Method::Sapt => {
                let bounds = boundaries_unchecked(spec, m);
                let df = d as f64;
                if df >= bounds.upper_h0 {
                    Decision::AcceptH0
                } else if df <= bounds.lower_h1 {
                    Decision::AcceptH1
                } else if m == max_perms {
                    // Truncated without crossing: fall back to the fixed-M rule.
                    match complete_hypothesis(d, max_perms, spec.alpha()) {
                        Hypothesis::H0 => Decision::AcceptH0,
                        Hypothesis::H1 => Decision::AcceptH1,
                    }
                } else {
                    Decision::Continue
                }
            }
            Method::Pval => {
                if d == spec.h() || m == max_perms {
                    Decision::PvalueReady
                } else {
                    Decision::Continue
                }
            }
            Method::Certain => certain_rule(m, d, max_perms, spec.alpha()),
            Method::Complete => {
                if m == max_perms {
                    match complete_hypothesis(d, max_perms, spec.alpha()) {
                        Hypothesis::H0 => Decision::AcceptH0,
                        Hypothesis::H1 => Decision::AcceptH1,
                    }
                } else {
                    Decision::Continue
                }
            }
        };
        Ok(self.decision)
    }

    /// Accepted hypothesis and p-value of a terminated monitor.
    pub fn outcome(&self, spec: &SequentialSpec) -> Result<Outcome> {
        let (hypothesis, p_value) = match (self.decision, spec.method()) {
            (Decision::Continue, _) => {
                return Err(Error::Usage("monitor has not terminated".into()));
            }
            (Decision::PvalueReady, _) => {
                let p = pval_estimate(self, spec)?;
                let hyp = if p <= spec.alpha() {
                    Hypothesis::H1
                } else {
                    Hypothesis::H0
                };
                (hyp, Some(p))
            }
            (decision, method) => {
                let hyp = if decision == Decision::AcceptH1 {
                    Hypothesis::H1
                } else {
                    Hypothesis::H0
                };
                let p = (method == Method::Complete).then(|| self.d as f64 / self.m as f64);
                (hyp, p)
            }
        };
        Ok(Outcome {
            hypothesis,
            p_value,
            permutations: self.m,
        })
    }
}

/// Sequential Monte Carlo p-value of a terminated PVAL monitor: `d/m` when
/// the `h`-th exceedance arrived at `m <= M`, otherwise `(d+1)/(M+1)`.
pub fn pval_estimate(state: &MonitorState, spec: &SequentialSpec) -> Result<f64> {
    if spec.method() != Method::Pval {
        return Err(Error::Usage(format!("p-value estimate requested for {}", spec.method())));
    }
    let (m, d, h, max_perms) = (state.m, state.d, spec.h(), spec.max_perms());
    if d == h && m <= max_perms {
        Ok(d as f64 / m as f64)
    } else if m == max_perms && d < h {
        Ok((d + 1) as f64 / (max_perms + 1) as f64)
    } else {
        Err(Error::Usage(format!(
            "PVAL monitor not terminal (m={m}, d={d}, h={h}, M={max_perms})"
        )))
    }
}

/// The set `{1, h/(h+1), …, h/(M−1), h/M, (h−1)/M, …, 1/M}` in descending
/// order without duplicates.
///
/// The estimator of [`pval_estimate`] with at most `M` permutations takes its
/// values in `pval_support(h, M + 1)`; see [`pval_estimator_support`].
pub fn pval_support(h: usize, max_perms: usize) -> Result<Vec<f64>> {
    if h == 0 || h > max_perms {
        return Err(Error::Usage(format!("support requires 1 <= h <= M, got h={h}, M={max_perms}")));
    }
    let mut fractions: Vec<(usize, usize)> = (h..=max_perms).map(|m| (h, m)).collect();
    fractions.extend((1..h).map(|j| (j, max_perms)));
    // Exact descending order by cross-multiplication, then drop equal ratios.
    fractions.sort_by(|&(a, b), &(c, d)| (c * b).cmp(&(a * d)));
    fractions.dedup_by(|&mut (a, b), &mut (c, d)| a * d == c * b);
    Ok(fractions.into_iter().map(|(n, m)| n as f64 / m as f64).collect())
}

/// All values [`pval_estimate`] can return when at most `max_perms`
/// permutations are drawn.
pub fn pval_estimator_support(h: usize, max_perms: usize) -> Result<Vec<f64>> {
    if h == 0 || h > max_perms {
        return Err(Error::Usage(format!("support requires 1 <= h <= M, got h={h}, M={max_perms}")));
    }
    pval_support(h, max_perms + 1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::monitor::spec::SpecParams;

    fn run(spec: &SequentialSpec, stream: impl IntoIterator<Item = bool>) -> MonitorState {
        let mut state = MonitorState::new();
        for x in stream {
            if state.step(x, spec).unwrap().is_terminal() {
                break;
            }
        }
        state
    }

    #[test]
    fn sapt_anchor_points() {
        let spec = SequentialSpec::sapt();
        let s = run(&spec, std::iter::repeat(false));
        assert_eq!((s.decision(), s.m()), (Decision::AcceptH1, 110));
        let s = run(&spec, std::iter::repeat(true));
        assert_eq!((s.decision(), s.m()), (Decision::AcceptH0, 6));
    }

    #[test]
    fn sprt_anchor_points() {
        let spec = SequentialSpec::sprt();
        let s = run(&spec, std::iter::repeat(false));
        assert_eq!((s.decision(), s.m()), (Decision::AcceptH1, 132));
        let s = run(&spec, std::iter::repeat(true));
        assert_eq!((s.decision(), s.m()), (Decision::AcceptH0, 4));
    }

    #[test]
    fn boundaries_reject_other_methods() {
        assert!(sprt_boundaries(&SequentialSpec::pval(), 3).is_err());
        assert!(sprt_boundaries(&SequentialSpec::sprt(), 0).is_err());
    }

    #[test]
    fn certain_anchor_points() {
        let spec = SequentialSpec::certain();
        let s = run(&spec, std::iter::repeat(true));
        assert_eq!((s.decision(), s.m(), s.d()), (Decision::AcceptH0, 26, 26));
        let s = run(&spec, std::iter::repeat(false));
        assert_eq!((s.decision(), s.m()), (Decision::AcceptH1, 475));
    }

    #[test]
    fn certain_boundary_equality_accepts_h1() {
        // 25/500 = 0.05 is not > alpha
        assert_eq!(certain_rule(500, 25, 500, 0.05), Decision::AcceptH1);
        assert_eq!(certain_rule(500, 26, 500, 0.05), Decision::AcceptH0);
    }

    #[test]
    fn pval_stops_at_h() {
        let spec = SequentialSpec::pval();
        // 8th exceedance at m = 40
        let traj: Vec<bool> = (1..=40).map(|m| m % 5 == 0).collect();
        let s = run(&spec, traj);
        assert_eq!((s.decision(), s.m(), s.d()), (Decision::PvalueReady, 40, 8));
        assert_eq!(pval_estimate(&s, &spec).unwrap(), 0.2);
    }

    #[test]
    fn pval_truncated_case() {
        let spec = SequentialSpec::pval();
        let traj: Vec<bool> = (0..500).map(|m| m < 3).collect();
        let s = run(&spec, traj);
        assert_eq!((s.m(), s.d()), (500, 3));
        let p = pval_estimate(&s, &spec).unwrap();
        assert_eq!(p, 4.0 / 501.0);
        assert!((p - 0.0080).abs() < 5e-5);
        let out = s.outcome(&spec).unwrap();
        assert_eq!(out.hypothesis, Hypothesis::H1);
    }

    #[test]
    fn pval_maximal_estimate() {
        let spec = SequentialSpec::pval();
        let s = run(&spec, std::iter::repeat(true));
        assert_eq!(pval_estimate(&s, &spec).unwrap(), 1.0);
    }

    #[test]
    fn pval_estimate_requires_terminal_state() {
        let spec = SequentialSpec::pval();
        let s = run(&spec, [true, false, false]);
        assert!(matches!(pval_estimate(&s, &spec), Err(Error::Usage(_))));
        assert!(s.outcome(&spec).is_err());
    }

    #[test]
    fn complete_never_stops_early() {
        let spec = SequentialSpec::complete();
        let mut s = MonitorState::new();
        for m in 1..500 {
            assert_eq!(s.step(m % 2 == 0, &spec).unwrap(), Decision::Continue);
        }
        assert!(s.step(false, &spec).unwrap().is_terminal());
        let out = s.outcome(&spec).unwrap();
        assert_eq!(out.p_value, Some(249.0 / 500.0));
        assert_eq!(out.hypothesis, Hypothesis::H0);
    }

    #[test]
    fn stepping_terminal_state_is_usage_error() {
        let spec = SequentialSpec::sprt();
        let mut s = run(&spec, std::iter::repeat(true));
        assert!(matches!(s.step(true, &spec), Err(Error::Usage(_))));
    }

    #[test]
    fn truncated_sprt_falls_back_to_fixed_rule() {
        let params = SpecParams {
            max_perms: 20,
            ..SpecParams::default()
        };
        let spec = SequentialSpec::new(Method::Sprt, &params).unwrap();
        // two early exceedances keep d_m between the boundaries up to m=20
        let s = run(&spec, (0..20).map(|i| i < 2));
        assert_eq!(s.m(), 20);
        assert_eq!(s.decision(), Decision::AcceptH0); // 2/20 > 0.05
        let s = run(&spec, (0..20).map(|i| i == 0));
        assert_eq!(s.decision(), Decision::AcceptH1); // 1/20 <= 0.05
    }

    #[test]
    fn support_small_cases() {
        assert_eq!(pval_support(1, 2).unwrap(), vec![1.0, 0.5]);
        assert_eq!(pval_support(2, 4).unwrap(), vec![1.0, 2.0 / 3.0, 0.5, 0.25]);
        assert!(pval_support(8, 500).unwrap().contains(&0.05));
        assert!(pval_support(0, 5).is_err());
    }

    #[test]
    fn estimator_support_shifts_denominator() {
        let s = pval_estimator_support(8, 500).unwrap();
        assert!(s.contains(&(4.0 / 501.0)));
        assert!(s.contains(&(8.0 / 500.0)));
        assert!(s.windows(2).all(|w| w[0] > w[1]));
    }
}
