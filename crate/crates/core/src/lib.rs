//! Sequential permutation testing of random forest permutation variable
//! importance (VIMP).
//!
//! The crate is organised in layers:
//!
//! - [`monitor`] is a forest-agnostic sequential decision engine. It consumes
//!   a stream of exceedance indicators `u_s >= u` and stops according to one
//!   of five regimes (SPRT, SAPT, sequential p-value, certain stopping, or the
//!   complete fixed-`M` test). It also evaluates the analytic operating
//!   characteristics of the SPRT/SAPT boundaries.
//! - [`forest`] is a self-contained CART random forest with bootstrap and
//!   out-of-bag bookkeeping, and per-tree permutation importance.
//! - [`vimp_tests`] combines the two: the general permutation test that
//!   refits a forest per permutation, and the two-sample test that resamples
//!   per-tree importances of two forests.
//! - [`simbench`] generates the logistic and Friedman 1 simulation data and
//!   runs replicated experiments with a shared permutation sequence.
//! - [`cli`] is the command-line surface used by the `seqvimp` binary.
//!
//! Runnable examples live in `examples/`; see the README for a tour.

pub mod cli;
pub mod error;
pub mod forest;
pub mod monitor;
pub mod report;
pub mod seed;
pub mod simbench;
pub mod vimp_tests;

pub use error::{Error, Result};
pub use forest::{Dataset, ForestConfig, ForestModel, Loss, Task, VimpReport};
pub use monitor::{
    Decision, Hypothesis, Method, MonitorState, OperatingCharacteristic, SequentialSpec,
    SpecParams,
};
pub use vimp_tests::{TestKind, VariableTestReport};
