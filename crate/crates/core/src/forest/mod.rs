//! A self-contained CART random forest with out-of-bag permutation
//! importance.

mod dataset;
mod model;
mod tree;
mod vimp;

pub use dataset::{Column, ColumnKind, ColumnType, Dataset, IngestSummary, Schema, Task};
pub use model::{
    bootstrap_sample, fit_forest, fit_forest_with_samples, FittedTree, ForestConfig, ForestModel,
};
pub use tree::{Node, SortedColumns, Tree, TreeParams, MAX_EXHAUSTIVE_LEVELS};
pub use vimp::{forest_vimp, forest_vimp_with_loss, tree_vi, Loss, VimpReport};
