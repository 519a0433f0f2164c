//! Permutation tests of VIMP driven by the sequential monitor.
//!
//! Both tests turn a fitted forest into a stream of permutation statistics
//! `u_s` that is compared with the observed importance `u`:
//!
//! - the general test permutes `X_j` in the learning data and refits a
//!   fresh forest for every `u_s`;
//! - the two-sample test fits one forest on the original and one on a
//!   once-permuted copy, pools the `2T` per-tree importances and draws each
//!   `u_s` as the mean of `T` of them without replacement.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::forest::{fit_forest, forest_vimp, Dataset, ForestConfig, VimpReport};
use crate::monitor::{Hypothesis, MonitorState, SequentialSpec};
use crate::report::{bitstring, sig6};
use crate::seed::{derive_seed, stream, StreamRng};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TestKind {
    /// Refit a forest on permuted data for every permutation.
    General,
    /// Resample pooled per-tree importances of two forests.
    TwoSample,
}

impl fmt::Display for TestKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TestKind::General => "general",
            TestKind::TwoSample => "two-sample",
        })
    }
}

impl FromStr for TestKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('_', "-").as_str() {
            "general" => Ok(TestKind::General),
            "two-sample" => Ok(TestKind::TwoSample),
            other => Err(Error::Config(format!("unknown test kind '{other}'"))),
        }
    }
}

/// A source of permutation statistics for one variable.
pub trait StatisticStream {
    /// Observed statistic `u`.
    fn observed(&self) -> f64;

    /// Next permutation statistic `u_s`.
    fn next_statistic(&mut self) -> Result<f64>;
}

/// Uniform random permutation of `0..n`.
fn random_permutation(n: usize, rng: &mut StreamRng) -> Vec<usize> {
    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(rng);
    perm
}

fn fit_and_score(
    data: &Dataset,
    j: usize,
    fcfg: &ForestConfig,
    base: u64,
    path: u64,
) -> Result<VimpReport> {
    let model = fit_forest(data, &fcfg.with_seed(derive_seed(base, &[path, 1])))?;
    forest_vimp(&model, j, data, fcfg.nperm, &mut stream(base, &[path, 2]))
}

/// Statistics of the general test. Permutation `s` permutes `X_j` with the
/// stream `(base, s, 0)` and fits its forest with seed `(base, s, 1)`.
pub struct GeneralStream<'a> {
    data: &'a Dataset,
    j: usize,
    fcfg: ForestConfig,
    base: u64,
    s: u64,
    observed: VimpReport,
}

impl<'a> GeneralStream<'a> {
    pub fn new<R: Rng>(data: &'a Dataset, j: usize, fcfg: &ForestConfig, rng: &mut R) -> Result<Self> {
        check_variable(data, j)?;
        let base: u64 = rng.random();
        let observed = fit_and_score(data, j, fcfg, base, 0)?;
        Ok(GeneralStream {
            data,
            j,
            fcfg: fcfg.clone(),
            base,
            s: 0,
            observed,
        })
    }

    pub fn observed_report(&self) -> &VimpReport {
        &self.observed
    }
}

impl StatisticStream for GeneralStream<'_> {
    fn observed(&self) -> f64 {
        self.observed.vimp
    }

    fn next_statistic(&mut self) -> Result<f64> {
        self.s += 1;
        let perm = random_permutation(self.data.n_rows(), &mut stream(self.base, &[self.s, 0]));
        let permuted = self.data.with_predictor_permuted(self.j, &perm)?;
        Ok(fit_and_score(&permuted, self.j, &self.fcfg, self.base, self.s)?.vimp)
    }
}

/// Statistics of the two-sample test.
pub struct TwoSampleStream {
    original: VimpReport,
    permuted: VimpReport,
    pool: Vec<f64>,
    draws: StreamRng,
}

impl TwoSampleStream {
    pub fn new<R: Rng>(data: &Dataset, j: usize, fcfg: &ForestConfig, rng: &mut R) -> Result<Self> {
        check_variable(data, j)?;
        let base: u64 = rng.random();
        let original = fit_and_score(data, j, fcfg, base, 0)?;
        let perm = random_permutation(data.n_rows(), &mut stream(base, &[1, 0]));
        let permuted_data = data.with_predictor_permuted(j, &perm)?;
        let permuted = fit_and_score(&permuted_data, j, fcfg, base, 1)?;
        let pool = original
            .per_tree_vi
            .iter()
            .chain(&permuted.per_tree_vi)
            .copied()
            .collect();
        Ok(TwoSampleStream {
            original,
            permuted,
            pool,
            draws: stream(base, &[2]),
        })
    }

    /// Build directly from two sets of per-tree importances.
    pub fn from_values(original: Vec<f64>, permuted: Vec<f64>, seed: u64) -> Result<Self> {
        if original.is_empty() || permuted.is_empty() {
            return Err(Error::Data("two-sample test needs per-tree importances in both forests".into()));
        }
        let report = |values: Vec<f64>| VimpReport {
            variable: String::new(),
            variable_index: 0,
            vimp: values.iter().sum::<f64>() / values.len() as f64,
            per_tree_vi: values,
            missing_trees: Vec::new(),
            loss: crate::forest::Loss::SquaredError,
        };
        let pool = original.iter().chain(&permuted).copied().collect();
        Ok(TwoSampleStream {
            original: report(original),
            permuted: report(permuted),
            pool,
            draws: stream(seed, &[2]),
        })
    }

    pub fn original(&self) -> &VimpReport {
        &self.original
    }

    pub fn permuted(&self) -> &VimpReport {
        &self.permuted
    }

    /// The pooled per-tree importances (order changes as draws are made).
    pub fn pool(&self) -> &[f64] {
        &self.pool
    }
}

impl StatisticStream for TwoSampleStream {
    fn observed(&self) -> f64 {
        self.original.vimp
    }

    fn next_statistic(&mut self) -> Result<f64> {
        // A partial Fisher-Yates pass yields a uniform subset of size T
        // whatever the current order of the pool.
        let t = self.original.per_tree_vi.len();
        let n = self.pool.len();
        for i in 0..t {
            let k = self.draws.random_range(i..n);
            self.pool.swap(i, k);
        }
        Ok(self.pool[..t].iter().sum::<f64>() / t as f64)
    }
}

fn check_variable(data: &Dataset, j: usize) -> Result<()> {
    if j >= data.n_predictors() {
        return Err(Error::Usage(format!(
            "predictor {j} out of range for {} predictors",
            data.n_predictors()
        )));
    }
    Ok(())
}

/// Monitors that consumed one shared exceedance sequence.
#[derive(Debug, Clone)]
pub struct SharedRun {
    pub u: f64,
    /// Exceedance indicators, as long as the longest-running monitor.
    pub trajectory: Vec<bool>,
    /// Final monitor state per spec, in input order.
    pub states: Vec<MonitorState>,
}

/// Feed one exceedance sequence to every spec, drawing statistics only until
/// all monitors have terminated.
pub fn run_shared(source: &mut dyn StatisticStream, specs: &[SequentialSpec]) -> Result<SharedRun> {
    if specs.is_empty() {
        return Err(Error::Usage("no stopping regime given".into()));
    }
    let u = source.observed();
    let mut states = vec![MonitorState::new(); specs.len()];
    let mut trajectory = Vec::new();
    while states.iter().any(|s| !s.is_terminal()) {
        let exceeded = source.next_statistic()? >= u;
        trajectory.push(exceeded);
        for (state, spec) in states.iter_mut().zip(specs) {
            if !state.is_terminal() {
                state.step(exceeded, spec)?;
            }
        }
    }
    Ok(SharedRun {
        u,
        trajectory,
        states,
    })
}

fn serialize_hypothesis<S: Serializer>(h: &Hypothesis, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(h.label())
}

fn serialize_bits<S: Serializer>(bits: &[bool], s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&bitstring(bits))
}

/// Result of testing one variable.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VariableTestReport {
    pub name: String,
    pub variable_index: usize,
    pub test: TestKind,
    pub method: SequentialSpec,
    /// Observed VIMP.
    pub u: f64,
    #[serde(serialize_with = "serialize_hypothesis")]
    pub decision: Hypothesis,
    /// Present for the PVAL and COMPLETE regimes.
    pub p_value: Option<f64>,
    pub permutations_used: usize,
    #[serde(serialize_with = "serialize_bits")]
    pub trajectory: Vec<bool>,
}

impl VariableTestReport {
    fn from_state(
        name: &str,
        variable_index: usize,
        test: TestKind,
        spec: &SequentialSpec,
        u: f64,
        state: &MonitorState,
    ) -> Result<Self> {
        let outcome = state.outcome(spec)?;
        Ok(VariableTestReport {
            name: name.to_string(),
            variable_index,
            test,
            method: *spec,
            u,
            decision: outcome.hypothesis,
            p_value: outcome.p_value,
            permutations_used: outcome.permutations,
            trajectory: state.trajectory().to_vec(),
        })
    }
}

/// The general permutation test of predictor `j`.
pub fn general_test<R: Rng>(
    data: &Dataset,
    j: usize,
    fcfg: &ForestConfig,
    spec: &SequentialSpec,
    rng: &mut R,
) -> Result<VariableTestReport> {
    let mut source = GeneralStream::new(data, j, fcfg, rng)?;
    finish(data, j, TestKind::General, spec, &mut source)
}

/// The two-sample permutation test of predictor `j`.
pub fn two_sample_test<R: Rng>(
    data: &Dataset,
    j: usize,
    fcfg: &ForestConfig,
    spec: &SequentialSpec,
    rng: &mut R,
) -> Result<VariableTestReport> {
    let mut source = TwoSampleStream::new(data, j, fcfg, rng)?;
    finish(data, j, TestKind::TwoSample, spec, &mut source)
}

fn finish(
    data: &Dataset,
    j: usize,
    kind: TestKind,
    spec: &SequentialSpec,
    source: &mut dyn StatisticStream,
) -> Result<VariableTestReport> {
    let run = run_shared(source, std::slice::from_ref(spec))?;
    VariableTestReport::from_state(&data.predictor(j).name, j, kind, spec, run.u, &run.states[0])
}

/// Build the statistic stream of `kind` for predictor `j`.
pub fn statistic_stream<'a, R: Rng>(
    kind: TestKind,
    data: &'a Dataset,
    j: usize,
    fcfg: &ForestConfig,
    rng: &mut R,
) -> Result<Box<dyn StatisticStream + 'a>> {
    Ok(match kind {
        TestKind::General => Box::new(GeneralStream::new(data, j, fcfg, rng)?),
        TestKind::TwoSample => Box::new(TwoSampleStream::new(data, j, fcfg, rng)?),
    })
}

pub fn run_test<R: Rng>(
    kind: TestKind,
    data: &Dataset,
    j: usize,
    fcfg: &ForestConfig,
    spec: &SequentialSpec,
    rng: &mut R,
) -> Result<VariableTestReport> {
    match kind {
        TestKind::General => general_test(data, j, fcfg, spec, rng),
        TestKind::TwoSample => two_sample_test(data, j, fcfg, spec, rng),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VariableFailure {
    pub name: String,
    pub variable_index: usize,
    pub error: String,
}

/// Reports for every predictor of a dataset.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AllVariablesReport {
    pub reports: Vec<VariableTestReport>,
    pub failures: Vec<VariableFailure>,
    pub total_permutations: usize,
    /// `M` times the number of tested variables.
    pub max_permutations: usize,
}

/// Test every predictor. Variable `j` draws from the stream `(master, j)`
/// where `master` is drawn from `rng`; a failing variable is recorded and
/// the others still run.
pub fn test_all_variables<R: Rng>(
    data: &Dataset,
    fcfg: &ForestConfig,
    spec: &SequentialSpec,
    kind: TestKind,
    rng: &mut R,
) -> Result<AllVariablesReport> {
    let p = data.n_predictors();
    if p == 0 {
        return Err(Error::Config("the dataset has no predictors".into()));
    }
    let master: u64 = rng.random();
    let results: Vec<Result<VariableTestReport>> = (0..p)
        .into_par_iter()
        .map(|j| run_test(kind, data, j, fcfg, spec, &mut stream(master, &[j as u64])))
        .collect();
    let mut reports = Vec::new();
    let mut failures = Vec::new();
    for (j, r) in results.into_iter().enumerate() {
        match r {
            Ok(r) => reports.push(r),
            Err(e) => {
                log::warn!("testing '{}' failed: {e}", data.predictor(j).name);
                failures.push(VariableFailure {
                    name: data.predictor(j).name.clone(),
                    variable_index: j,
                    error: e.to_string(),
                });
            }
        }
    }
    let total_permutations = reports.iter().map(|r| r.permutations_used).sum();
    Ok(AllVariablesReport {
        total_permutations,
        max_permutations: spec.max_perms() * p,
        reports,
        failures,
    })
}

/// Flat CSV table with one row per report.
pub fn write_reports_csv<W: Write>(out: W, reports: &[VariableTestReport]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "name",
        "u",
        "decision",
        "p_value",
        "permutations_used",
        "method",
        "test",
        "trajectory",
    ])?;
    for r in reports {
        w.write_record([
            r.name.clone(),
            sig6(r.u),
            r.decision.label().to_string(),
            r.p_value.map(sig6).unwrap_or_default(),
            r.permutations_used.to_string(),
            r.method.method().label().to_string(),
            r.test.to_string(),
            bitstring(&r.trajectory),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::monitor::Method;

    struct Fixed {
        u: f64,
        values: Vec<f64>,
        next: usize,
    }

    impl StatisticStream for Fixed {
        fn observed(&self) -> f64 {
            self.u
        }

        fn next_statistic(&mut self) -> Result<f64> {
            let v = self.values[self.next % self.values.len()];
            self.next += 1;
            Ok(v)
        }
    }

    #[test]
    fn strong_predictor_under_sapt_stops_at_earliest_h1() {
        let mut src = Fixed {
            u: 1.0,
            values: vec![0.0],
            next: 0,
        };
        let run = run_shared(&mut src, &[SequentialSpec::sapt()]).unwrap();
        assert_eq!(run.states[0].m(), 110);
        assert_eq!(run.trajectory.len(), 110);
    }

    #[test]
    fn ties_count_as_exceedances() {
        let mut src = TwoSampleStream::from_values(vec![0.3; 4], vec![0.3; 4], 1).unwrap();
        let run = run_shared(&mut src, &[SequentialSpec::sprt()]).unwrap();
        assert!(run.trajectory.iter().all(|&b| b));
        assert_eq!(run.states[0].m(), 4);
        let out = run.states[0].outcome(&SequentialSpec::sprt()).unwrap();
        assert_eq!(out.hypothesis, Hypothesis::H0);
    }

    #[test]
    fn draws_are_subsets_of_the_pool() {
        let original = vec![1.0, 2.0, 3.0];
        let permuted = vec![10.0, 20.0, 30.0];
        let mut src = TwoSampleStream::from_values(original, permuted, 5).unwrap();
        let pooled_mean = src.pool().iter().sum::<f64>() / 6.0;
        assert!((pooled_mean - (src.original().vimp + src.permuted().vimp) / 2.0).abs() < 1e-12);
        for _ in 0..200 {
            let v = src.next_statistic().unwrap();
            // every mean of three distinct pool values lies in [2, 20]
            assert!((2.0..=20.0).contains(&v));
            let mut sorted = src.pool().to_vec();
            sorted.sort_by(f64::total_cmp);
            assert_eq!(sorted, vec![1.0, 2.0, 3.0, 10.0, 20.0, 30.0]);
        }
    }

    #[test]
    fn shared_run_stops_when_all_terminate() {
        let mut src = Fixed {
            u: 1.0,
            values: vec![0.0],
            next: 0,
        };
        let specs: Vec<_> = [Method::Sprt, Method::Certain]
            .into_iter()
            .map(SequentialSpec::default_for)
            .collect();
        let run = run_shared(&mut src, &specs).unwrap();
        assert_eq!(run.states[0].m(), 132);
        assert_eq!(run.states[1].m(), 475);
        assert_eq!(run.trajectory.len(), 475);
    }

    #[test]
    fn test_kind_parses() {
        assert_eq!("two-sample".parse::<TestKind>().unwrap(), TestKind::TwoSample);
        assert_eq!("general".parse::<TestKind>().unwrap(), TestKind::General);
        assert!("paired".parse::<TestKind>().is_err());
    }
}
