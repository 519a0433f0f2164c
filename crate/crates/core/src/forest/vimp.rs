//! Permutation importance: per-tree VI and its forest average.

use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::dataset::{Dataset, Task};
use super::model::ForestModel;
use crate::error::{Error, Result};
use crate::seed::stream;

/// Loss `l(Y, g)` behind the importance measure.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Loss {
    /// `(y − ŷ)²`, for regression.
    SquaredError,
    /// `Σ_k (p_k − 1{y = k})²`, bounded by 2, for classification.
    Brier,
    /// 0/1 loss of the most probable class (ties go to the lowest class).
    Misclassification,
}

impl Loss {
    pub fn supports(self, task: Task) -> bool {
        match self {
            Loss::SquaredError => task == Task::Regression,
            Loss::Brier | Loss::Misclassification => task == Task::Classification,
        }
    }

    /// Loss of a single prediction. For classification, `y` is the class code
    /// and `prediction` the class-probability vector.
    pub fn evaluate(self, prediction: &[f64], y: f64) -> f64 {
        match self {
            Loss::SquaredError => {
                let r = y - prediction[0];
                r * r
            }
            Loss::Brier => {
                let c = y as usize;
                prediction
                    .iter()
                    .enumerate()
                    .map(|(k, &p)| {
                        let e = p - if k == c { 1.0 } else { 0.0 };
                        e * e
                    })
                    .sum()
            }
            Loss::Misclassification => {
                let best = prediction
                    .iter()
                    .enumerate()
                    .fold((0, f64::NEG_INFINITY), |acc, (k, &p)| if p > acc.1 { (k, p) } else { acc })
                    .0;
                if best == y as usize {
                    0.0
                } else {
                    1.0
                }
            }
        }
    }
}

impl fmt::Display for Loss {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Loss::SquaredError => "squared_error",
            Loss::Brier => "brier",
            Loss::Misclassification => "misclassification",
        })
    }
}

impl FromStr for Loss {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "squared_error" | "mse" => Ok(Loss::SquaredError),
            "brier" => Ok(Loss::Brier),
            "misclassification" => Ok(Loss::Misclassification),
            other => Err(Error::Config(format!("unknown loss '{other}'"))),
        }
    }
}

/// Forest-level permutation importance of one variable.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VimpReport {
    pub variable: String,
    pub variable_index: usize,
    /// One entry per tree with a nonempty OOB set, in tree order.
    pub per_tree_vi: Vec<f64>,
    /// Trees whose OOB set was empty.
    pub missing_trees: Vec<usize>,
    pub vimp: f64,
    pub loss: Loss,
}

/// Importance of predictor `j` in tree `t`: the increase in mean OOB loss
/// when `X_j` is permuted among the OOB rows, averaged over `nperm`
/// permutations. `None` when the tree has no OOB rows.
pub fn tree_vi<R: Rng>(
    model: &ForestModel,
    t: usize,
    j: usize,
    data: &Dataset,
    nperm: usize,
    rng: &mut R,
) -> Result<Option<f64>> {
    check_args(model, j, data, nperm)?;
    if t >= model.ntree() {
        return Err(Error::Usage(format!("tree {t} out of range")));
    }
    Ok(tree_vi_unchecked(model, t, j, data, nperm, model.loss(), rng))
}

fn check_args(model: &ForestModel, j: usize, data: &Dataset, nperm: usize) -> Result<()> {
    if j >= data.n_predictors() {
        return Err(Error::Usage(format!("predictor {j} out of range")));
    }
    if nperm == 0 {
        return Err(Error::Config("nperm must be at least 1".into()));
    }
    if data.n_rows() != model.n_rows() {
        return Err(Error::Usage("dataset does not match the fitted forest".into()));
    }
    Ok(())
}

fn tree_vi_unchecked<R: Rng>(
    model: &ForestModel,
    t: usize,
    j: usize,
    data: &Dataset,
    nperm: usize,
    loss: Loss,
    rng: &mut R,
) -> Option<f64> {
    let ft = &model.trees()[t];
    if ft.oob.is_empty() {
        return None;
    }
    // Predictions cannot change when the tree never splits on X_j.
    if !ft.tree.uses_feature(j) {
        return Some(0.0);
    }
    let y = &data.target().values;
    let xj = &data.predictor(j).values;
    let n_oob = ft.oob.len() as f64;
    let intact: f64 = ft
        .oob
        .iter()
        .map(|&r| loss.evaluate(ft.tree.predict_row(data, r as usize), y[r as usize]))
        .sum::<f64>()
        / n_oob;

    let mut shuffled: Vec<u32> = ft.oob.clone();
    let mut total = 0.0;
    for _ in 0..nperm {
        shuffled.shuffle(rng);
        let permuted: f64 = ft
            .oob
            .iter()
            .zip(&shuffled)
            .map(|(&r, &src)| {
                let r = r as usize;
                let pred = ft.tree.predict_with(|f| {
                    if f == j {
                        xj[src as usize]
                    } else {
                        data.predictor(f).values[r]
                    }
                });
                loss.evaluate(pred, y[r])
            })
            .sum::<f64>()
            / n_oob;
        total += permuted - intact;
    }
    Some(total / nperm as f64)
}

/// Permutation importance of predictor `j` averaged over the trees. Each
/// tree permutes with its own stream derived from one draw of `rng`.
pub fn forest_vimp<R: Rng>(
    model: &ForestModel,
    j: usize,
    data: &Dataset,
    nperm: usize,
    rng: &mut R,
) -> Result<VimpReport> {
    forest_vimp_with_loss(model, j, data, nperm, model.loss(), rng)
}

pub fn forest_vimp_with_loss<R: Rng>(
    model: &ForestModel,
    j: usize,
    data: &Dataset,
    nperm: usize,
    loss: Loss,
    rng: &mut R,
) -> Result<VimpReport> {
    check_args(model, j, data, nperm)?;
    if !loss.supports(model.task()) {
        return Err(Error::Config(format!("loss {loss} does not apply to {:?}", model.task())));
    }
    let base: u64 = rng.random();
    let values: Vec<Option<f64>> = (0..model.ntree())
        .into_par_iter()
        .map(|t| {
            let mut tree_rng = stream(base, &[t as u64]);
            tree_vi_unchecked(model, t, j, data, nperm, loss, &mut tree_rng)
        })
        .collect();
    let mut per_tree_vi = Vec::with_capacity(values.len());
    let mut missing_trees = Vec::new();
    for (t, v) in values.into_iter().enumerate() {
        match v {
            Some(v) => per_tree_vi.push(v),
            None => missing_trees.push(t),
        }
    }
    if per_tree_vi.is_empty() {
        return Err(Error::Fit("every tree has an empty OOB set".into()));
    }
    let vimp = per_tree_vi.iter().sum::<f64>() / per_tree_vi.len() as f64;
    Ok(VimpReport {
        variable: data.predictor(j).name.clone(),
        variable_index: j,
        per_tree_vi,
        missing_trees,
        vimp,
        loss,
    })
}
