//! Sequential decision engine over a stream of exceedance indicators.
//!
//! A [`MonitorState`] consumes indicators `I(u_s >= u)` one at a time and
//! applies the stopping rule of a [`SequentialSpec`]. The module knows
//! nothing about forests; anything that can produce permutation statistics
//! can drive it.

mod characteristic;
mod numeric;
mod spec;
mod state;
mod table;

pub use characteristic::{
    average_expected_permutations, effective_alpha, expected_permutations,
    operating_characteristic, power_function, pval_expected_m, pval_se_fraction,
    singular_point, solve_k, OperatingCharacteristic, K_TOLERANCE, QUADRATURE_PANELS,
    SINGULAR_OFFSET,
};
pub use numeric::{bisect_increasing, simpson};
pub use spec::{Method, SequentialSpec, SpecParams};
pub use state::{
    certain_rule, certain_stop, pval_estimate, pval_estimator_support, pval_support,
    sprt_boundaries, Boundaries, Decision, Hypothesis, MonitorState, Outcome,
};
pub use table::{
    boundary_table, characteristic_table, write_boundary_csv, write_characteristic_csv,
    BoundaryRow,
};
