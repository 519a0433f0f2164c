//! Forest fitting with bootstrap and out-of-bag bookkeeping.

use rand::{Rng, SeedableRng};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::dataset::{Dataset, Task};
use super::tree::{SortedColumns, Tree, TreeParams};
use super::vimp::Loss;
use crate::error::{Error, Result};
use crate::seed::{derive_seed, stream, StreamRng};

/// Hyperparameters of a random forest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForestConfig {
    pub ntree: usize,
    /// Split candidates per node; defaults to `ceil(sqrt(p))` for
    /// classification and `ceil(p/3)` for regression.
    pub mtry: Option<usize>,
    /// OOB permutations averaged per tree importance.
    pub nperm: usize,
    /// Minimum child size; defaults to 5 (regression) or 1 (classification).
    pub min_node_size: Option<usize>,
    /// Importance loss; defaults to squared error or the Brier score.
    pub loss: Option<Loss>,
    pub seed: u64,
}

impl Default for ForestConfig {
    fn default() -> Self {
        ForestConfig {
            ntree: 500,
            mtry: None,
            nperm: 1,
            min_node_size: None,
            loss: None,
            seed: 0,
        }
    }
}

impl ForestConfig {
    pub fn with_seed(&self, seed: u64) -> Self {
        ForestConfig {
            seed,
            ..self.clone()
        }
    }

    pub fn resolved_mtry(&self, data: &Dataset) -> usize {
        let p = data.n_predictors();
        self.mtry.unwrap_or_else(|| match data.task() {
            Task::Classification => (p as f64).sqrt().ceil() as usize,
            Task::Regression => p.div_ceil(3),
        })
    }

    pub fn resolved_min_node_size(&self, data: &Dataset) -> usize {
        self.min_node_size.unwrap_or(match data.task() {
            Task::Classification => 1,
            Task::Regression => 5,
        })
    }

    pub fn resolved_loss(&self, data: &Dataset) -> Loss {
        self.loss.unwrap_or(match data.task() {
            Task::Classification => Loss::Brier,
            Task::Regression => Loss::SquaredError,
        })
    }

    /// Check the configuration against `data`.
    pub fn validate(&self, data: &Dataset) -> Result<()> {
        let p = data.n_predictors();
        if p == 0 {
            return Err(Error::Config("the dataset has no predictors".into()));
        }
        if self.ntree == 0 {
            return Err(Error::Config("ntree must be at least 1".into()));
        }
        if self.nperm == 0 {
            return Err(Error::Config("nperm must be at least 1".into()));
        }
        let mtry = self.resolved_mtry(data);
        if !(1..=p).contains(&mtry) {
            return Err(Error::Config(format!("mtry must lie in 1..={p}, got {mtry}")));
        }
        let min = self.resolved_min_node_size(data);
        if min == 0 {
            return Err(Error::Config("min_node_size must be at least 1".into()));
        }
        if data.n_rows() < 2 * min {
            return Err(Error::Config(format!(
                "need at least {} rows for min_node_size {min}, got {}",
                2 * min,
                data.n_rows()
            )));
        }
        let loss = self.resolved_loss(data);
        if !loss.supports(data.task()) {
            return Err(Error::Config(format!("loss {loss:?} does not apply to {:?}", data.task())));
        }
        Ok(())
    }
}

/// One tree with its bootstrap sample and out-of-bag rows.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FittedTree {
    pub tree: Tree,
    /// Bootstrap draws in draw order (with repeats).
    pub bootstrap: Vec<u32>,
    /// Rows never drawn, ascending.
    pub oob: Vec<u32>,
    /// Seed of the tree's growth stream.
    pub seed: u64,
}

/// An immutable fitted random forest.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ForestModel {
    trees: Vec<FittedTree>,
    task: Task,
    n_classes: usize,
    n_rows: usize,
    mtry: usize,
    min_node_size: usize,
    loss: Loss,
}

/// Draw `n` bootstrap indices for tree `t` of a forest seeded with `seed`.
pub fn bootstrap_sample(seed: u64, t: usize, n: usize) -> Vec<u32> {
    let mut rng = stream(seed, &[t as u64, 0]);
    (0..n).map(|_| rng.random_range(0..n as u32)).collect()
}

/// Fit a forest of `config.ntree` trees on bootstrap samples of `data`.
pub fn fit_forest(data: &Dataset, config: &ForestConfig) -> Result<ForestModel> {
    let n = data.n_rows();
    let samples: Vec<Vec<u32>> = (0..config.ntree)
        .map(|t| bootstrap_sample(config.seed, t, n))
        .collect();
    fit_forest_with_samples(data, config, samples)
}

/// Fit a forest using the given per-tree bootstrap samples instead of
/// drawing them. Split-candidate draws still come from `config.seed`.
pub fn fit_forest_with_samples(
    data: &Dataset,
    config: &ForestConfig,
    samples: Vec<Vec<u32>>,
) -> Result<ForestModel> {
    config.validate(data)?;
    check_target(data)?;
    if samples.len() != config.ntree {
        return Err(Error::Config(format!(
            "{} bootstrap samples supplied for ntree={}",
            samples.len(),
            config.ntree
        )));
    }
    let n = data.n_rows();
    if samples.iter().flatten().any(|&r| r as usize >= n) {
        return Err(Error::Config("bootstrap sample indexes past the data".into()));
    }
    let params = TreeParams {
        mtry: config.resolved_mtry(data),
        min_node_size: config.resolved_min_node_size(data),
    };
    let sorted = SortedColumns::new(data);
    let trees = samples
        .into_par_iter()
        .enumerate()
        .map(|(t, bootstrap)| {
            let seed = derive_seed(config.seed, &[t as u64, 1]);
            let mut rng = StreamRng::seed_from_u64(seed);
            let tree = Tree::fit_sorted(data, &sorted, &bootstrap, params, &mut rng);
            let mut in_bag = vec![false; n];
            bootstrap.iter().for_each(|&r| in_bag[r as usize] = true);
            let oob = (0..n as u32).filter(|&r| !in_bag[r as usize]).collect();
            FittedTree {
                tree,
                bootstrap,
                oob,
                seed,
            }
        })
        .collect();
    Ok(ForestModel {
        trees,
        task: data.task(),
        n_classes: if data.task() == Task::Classification {
            data.n_classes()
        } else {
            0
        },
        n_rows: n,
        mtry: params.mtry,
        min_node_size: params.min_node_size,
        loss: config.resolved_loss(data),
    })
}

fn check_target(data: &Dataset) -> Result<()> {
    let y = &data.target().values;
    let first = y[0];
    if y.iter().all(|&v| v == first) {
        let what = match data.task() {
            Task::Classification => "a single class",
            Task::Regression => "zero variance",
        };
        return Err(Error::Fit(format!("target '{}' has {what}", data.target().name)));
    }
    Ok(())
}

impl ForestModel {
    pub fn trees(&self) -> &[FittedTree] {
        &self.trees
    }

    pub fn ntree(&self) -> usize {
        self.trees.len()
    }

    pub fn task(&self) -> Task {
        self.task
    }

    pub fn n_classes(&self) -> usize {
        self.n_classes
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn mtry(&self) -> usize {
        self.mtry
    }

    pub fn min_node_size(&self) -> usize {
        self.min_node_size
    }

    pub fn loss(&self) -> Loss {
        self.loss
    }

    /// Width of a prediction vector: the number of classes, or 1.
    pub fn width(&self) -> usize {
        self.n_classes.max(1)
    }

    /// Ensemble prediction, the average of the tree predictions.
    pub fn predict_with<F: Fn(usize) -> f64>(&self, x: F) -> Vec<f64> {
        let mut out = vec![0.0; self.width()];
        for ft in &self.trees {
            let p = ft.tree.predict_with(&x);
            out.iter_mut().zip(p).for_each(|(o, v)| *o += v);
        }
        let t = self.trees.len() as f64;
        out.iter_mut().for_each(|o| *o /= t);
        out
    }

    pub fn predict_row(&self, data: &Dataset, i: usize) -> Vec<f64> {
        self.predict_with(|j| data.predictor(j).values[i])
    }

    /// Out-of-bag prediction per row, averaged over the trees for which the
    /// row is out of bag. `None` for rows that are in every bootstrap.
    pub fn oob_predictions(&self, data: &Dataset) -> Vec<Option<Vec<f64>>> {
        let w = self.width();
        let mut sums = vec![vec![0.0; w]; self.n_rows];
        let mut counts = vec![0usize; self.n_rows];
        for ft in &self.trees {
            for &r in &ft.oob {
                let r = r as usize;
                let p = ft.tree.predict_row(data, r);
                sums[r].iter_mut().zip(p).for_each(|(s, v)| *s += v);
                counts[r] += 1;
            }
        }
        sums.into_iter()
            .zip(counts)
            .map(|(mut s, c)| {
                (c > 0).then(|| {
                    s.iter_mut().for_each(|v| *v /= c as f64);
                    s
                })
            })
            .collect()
    }

    /// Mean loss of the out-of-bag ensemble predictions.
    pub fn oob_loss(&self, data: &Dataset, loss: Loss) -> Result<f64> {
        let y = &data.target().values;
        let (mut total, mut n) = (0.0, 0usize);
        for (i, pred) in self.oob_predictions(data).iter().enumerate() {
            if let Some(pred) = pred {
                total += loss.evaluate(pred, y[i]);
                n += 1;
            }
        }
        if n == 0 {
            return Err(Error::Fit("no row is out of bag for any tree".into()));
        }
        Ok(total / n as f64)
    }
}
