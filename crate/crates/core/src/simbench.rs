//! Simulation data generators and replicated experiments.
//!
//! Study I is a logistic classification problem with six correlated normal
//! predictors; Study II is the Friedman 1 regression benchmark. Experiments
//! run every regime on a single shared permutation sequence per replicate.

use std::f64::consts::PI;
use std::io::Write;
use std::sync::OnceLock;

use nalgebra::{Matrix6, Vector6};
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::forest::{Column, Dataset, ForestConfig};
use crate::monitor::{MonitorState, SequentialSpec};
use crate::report::sig6;
use crate::seed::{stream, StreamRng};
use crate::vimp_tests::{run_shared, statistic_stream, TestKind};

/// Effect sizes of the Study I grid.
pub const STUDY1_K_GRID: [f64; 9] = [0.0, 0.125, 0.25, 0.375, 0.5, 0.625, 0.75, 0.875, 1.0];

/// Variables reported for Study I (`X1`, `X2`, `X5`), zero-based.
pub const STUDY1_VARIABLES: [usize; 3] = [0, 1, 4];

/// Variables reported for Study II (`X1`, `X3`, `X6`), zero-based.
pub const STUDY2_VARIABLES: [usize; 3] = [0, 2, 5];

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StudyISpec {
    /// Effect size of `X1`, `X2` and `X3`.
    pub k: f64,
    pub n: usize,
}

impl StudyISpec {
    pub fn coefficients(&self) -> [f64; 6] {
        [self.k, self.k, self.k, 1.0, 0.0, 0.0]
    }
}

/// Covariance of the Study I predictors.
pub fn study1_covariance() -> Matrix6<f64> {
    let mut c = Matrix6::identity();
    for (a, b) in [(1, 3), (2, 4)] {
        c[(a, b)] = 0.5;
        c[(b, a)] = 0.5;
    }
    c
}

fn study1_factor() -> &'static Matrix6<f64> {
    static FACTOR: OnceLock<Matrix6<f64>> = OnceLock::new();
    FACTOR.get_or_init(|| {
        study1_covariance()
            .cholesky()
            .expect("the Study I covariance is positive definite")
            .l()
    })
}

/// `P(Y = 1 | x) = 1 / (1 + exp(−x'β))`.
pub fn logistic_probability(x: &[f64], beta: &[f64]) -> f64 {
    let eta: f64 = x.iter().zip(beta).map(|(a, b)| a * b).sum();
    1.0 / (1.0 + (-eta).exp())
}

pub fn gen_study1<R: Rng>(spec: &StudyISpec, rng: &mut R) -> Result<Dataset> {
    if spec.n == 0 {
        return Err(Error::Config("n must be at least 1".into()));
    }
    if !spec.k.is_finite() {
        return Err(Error::Config(format!("k must be finite, got {}", spec.k)));
    }
    let l = study1_factor();
    let beta = spec.coefficients();
    let mut x = vec![Vec::with_capacity(spec.n); 6];
    let mut y = Vec::with_capacity(spec.n);
    for _ in 0..spec.n {
        let z = Vector6::from_fn(|_, _| rng.sample::<f64, _>(StandardNormal));
        let row = l * z;
        let p = logistic_probability(row.as_slice(), &beta);
        y.push(usize::from(rng.random::<f64>() < p));
        for (col, v) in x.iter_mut().zip(row.iter()) {
            col.push(*v);
        }
    }
    let mut columns: Vec<Column> = x
        .into_iter()
        .enumerate()
        .map(|(i, v)| Column::numeric(format!("X{}", i + 1), v))
        .collect();
    columns.push(Column::categorical("Y", vec!["0".into(), "1".into()], &y));
    Dataset::new(columns, "Y")
}

/// `10 sin(π x1 x2) + 20 (x3 − 0.5)² + 10 x4 + 5 x5 + ε`.
pub fn friedman1(x: &[f64], eps: f64) -> f64 {
    10.0 * (PI * x[0] * x[1]).sin() + 20.0 * (x[2] - 0.5).powi(2) + 10.0 * x[3] + 5.0 * x[4] + eps
}

pub fn gen_study2<R: Rng>(n: usize, rng: &mut R) -> Result<Dataset> {
    if n == 0 {
        return Err(Error::Config("n must be at least 1".into()));
    }
    let mut x = vec![Vec::with_capacity(n); 10];
    let mut y = Vec::with_capacity(n);
    let mut row = [0.0; 10];
    for _ in 0..n {
        row.iter_mut().for_each(|v| *v = rng.random::<f64>());
        let eps: f64 = rng.sample(StandardNormal);
        y.push(friedman1(&row, eps));
        for (col, v) in x.iter_mut().zip(row) {
            col.push(v);
        }
    }
    let mut columns: Vec<Column> = x
        .into_iter()
        .enumerate()
        .map(|(i, v)| Column::numeric(format!("X{}", i + 1), v))
        .collect();
    columns.push(Column::numeric("y", y));
    Dataset::new(columns, "y")
}

/// Configuration of a replicated experiment.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Experiment {
    pub study: String,
    /// Effect size, for Study I.
    pub k: Option<f64>,
    pub replicates: usize,
    pub forest: ForestConfig,
    pub specs: Vec<SequentialSpec>,
    pub test: TestKind,
    /// Zero-based predictor indices to test.
    pub variables: Vec<usize>,
    pub seed: u64,
}

/// Outcome of one variable in one replicate.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReplicateRecord {
    pub replicate: usize,
    pub variable: String,
    pub variable_index: usize,
    pub u: f64,
    /// The shared exceedance sequence.
    pub trajectory: Vec<bool>,
    /// Final monitor per spec, in the experiment's spec order.
    pub states: Vec<MonitorState>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentSummary {
    pub study: String,
    pub k: Option<f64>,
    pub variable: String,
    pub method: String,
    pub test: TestKind,
    pub replicates: usize,
    pub failed_replicates: usize,
    pub rejection_frequency: f64,
    pub mean_permutations: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentResult {
    pub summaries: Vec<ExperimentSummary>,
    pub records: Vec<ReplicateRecord>,
    /// Replicate indices whose data generation or testing failed.
    pub failed: Vec<usize>,
}

impl ExperimentResult {
    pub fn summary(&self, variable: &str, method: &str) -> Option<&ExperimentSummary> {
        self.summaries
            .iter()
            .find(|s| s.variable == variable && s.method == method)
    }
}

/// Run `exp.replicates` replicates. Replicate `r` generates its data from the
/// stream `(seed, r, 0)` and tests variable `j` with the stream
/// `(seed, r, 1, j)`, so any replicate can be rerun in isolation.
pub fn run_experiment<G>(generator: G, exp: &Experiment) -> Result<ExperimentResult>
where
    G: Fn(&mut StreamRng) -> Result<Dataset> + Sync,
{
    if exp.replicates == 0 {
        return Err(Error::Config("replicates must be at least 1".into()));
    }
    if exp.specs.is_empty() || exp.variables.is_empty() {
        return Err(Error::Config("an experiment needs at least one method and one variable".into()));
    }
    let outcomes: Vec<(usize, Result<Vec<ReplicateRecord>>)> = (0..exp.replicates)
        .into_par_iter()
        .map(|r| (r, run_replicate(&generator, exp, r)))
        .collect();

    let mut records = Vec::new();
    let mut failed = Vec::new();
    for (r, outcome) in outcomes {
        match outcome {
            Ok(recs) => records.extend(recs),
            Err(e) => {
                log::warn!("replicate {r} failed: {e}");
                failed.push(r);
            }
        }
    }

    let mut summaries = Vec::new();
    for &j in &exp.variables {
        let name = records
            .iter()
            .find(|rec| rec.variable_index == j)
            .map_or_else(|| format!("#{j}"), |rec| rec.variable.clone());
        for (si, spec) in exp.specs.iter().enumerate() {
            let mut rejections = 0usize;
            let mut permutations = 0usize;
            let mut count = 0usize;
            for rec in records.iter().filter(|rec| rec.variable_index == j) {
                let outcome = rec.states[si].outcome(spec)?;
                rejections += usize::from(outcome.hypothesis.rejects_null());
                permutations += outcome.permutations;
                count += 1;
            }
            let denom = count.max(1) as f64;
            summaries.push(ExperimentSummary {
                study: exp.study.clone(),
                k: exp.k,
                variable: name.clone(),
                method: spec.method().label().to_string(),
                test: exp.test,
                replicates: count,
                failed_replicates: failed.len(),
                rejection_frequency: rejections as f64 / denom,
                mean_permutations: permutations as f64 / denom,
            });
        }
    }
    Ok(ExperimentResult {
        summaries,
        records,
        failed,
    })
}

fn run_replicate<G>(generator: &G, exp: &Experiment, r: usize) -> Result<Vec<ReplicateRecord>>
where
    G: Fn(&mut StreamRng) -> Result<Dataset>,
{
    let data = generator(&mut stream(exp.seed, &[r as u64, 0]))?;
    let mut out = Vec::with_capacity(exp.variables.len());
    for &j in &exp.variables {
        let mut rng = stream(exp.seed, &[r as u64, 1, j as u64]);
        let mut source = statistic_stream(exp.test, &data, j, &exp.forest, &mut rng)?;
        let run = run_shared(source.as_mut(), &exp.specs)?;
        out.push(ReplicateRecord {
            replicate: r,
            variable: data.predictor(j).name.clone(),
            variable_index: j,
            u: run.u,
            trajectory: run.trajectory,
            states: run.states,
        });
    }
    Ok(out)
}

/// CSV keyed by (study, variable, method, k).
pub fn write_summaries_csv<W: Write>(out: W, summaries: &[ExperimentSummary]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "study",
        "variable",
        "method",
        "k",
        "test",
        "replicates",
        "failed_replicates",
        "rejection_frequency",
        "mean_permutations",
    ])?;
    for s in summaries {
        w.write_record([
            s.study.clone(),
            s.variable.clone(),
            s.method.clone(),
            s.k.map(|k| k.to_string()).unwrap_or_default(),
            s.test.to_string(),
            s.replicates.to_string(),
            s.failed_replicates.to_string(),
            sig6(s.rejection_frequency),
            sig6(s.mean_permutations),
        ])?;
    }
    w.flush()?;
    Ok(())
}
