//! Exact solvers for the finite process.
//!
//! Every jump raises the rank `sum x_i` by one, so the transition graph is a
//! DAG graded by rank. The forward equations are integrated level by level in
//! closed form ([`ExpPoly`]), and the embedded-chain hitting probabilities are
//! computed by the same level sweep, optionally exactly in `q`.

mod exppoly;
mod forward;
mod hitting;
mod paths;
mod shift;

pub use exppoly::ExpPoly;
pub use forward::{
    cdf, cdf_many, duality_qmoment, finite_time_dist, forward_solve, ChainState,
    ExpPolyDistribution, DEFAULT_MAX_STATES,
};
pub use hitting::{
    hitting_prob_numeric, hitting_prob_symbolic, hitting_table_symbolic, HitWeight, HittingTable,
    DEFAULT_MAX_HIT_STATES,
};
pub use paths::{path_decomposition_cdf, DEFAULT_MAX_PATHS};
pub use shift::{verify_shift, CdfCheck, HitCheck, ShiftReport};
