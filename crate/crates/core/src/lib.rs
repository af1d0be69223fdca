//! Maximum-weight many-to-one assignment with lower and upper quotas.
//!
//! Applicants take at most one post; a post is either closed or takes between
//! its lower and upper quota of applicants. The crate provides an exact
//! tree-decomposition DP, matching-based solvers for the polynomial special
//! cases, a greedy approximation, a brute-force oracle and instance
//! generators. Every solver is generic over [`Weight`].

pub mod flow;
pub mod gen;
pub mod greedy;
pub mod matching;
pub mod model;
pub mod oracle;
pub mod scalar;
pub mod special;
pub mod twdp;

pub use greedy::{approximation_factor, solve_greedy};
pub use model::{
    Algorithm, Assignment, Edge, Guarantee, Infeasible, Instance, Quota, SolveResult, Violation, MAX_EDGES, MAX_WEIGHT,
};
pub use oracle::{brute_force, OracleCaps, OracleError};
pub use scalar::Weight;
pub use special::{solve, solve_all_open, solve_degree2_posts, solve_u2, AlgorithmChoice, SolveError};
pub use twdp::{dp_solve, solve_twdp, TwdpError, TwdpOptions};

use num_rational::Ratio;

/// Integer-weighted instance, the default.
pub type IntInstance = Instance<i64>;
/// Instance with wide integer weights.
pub type WideInstance = Instance<i128>;
/// Instance with exact rational weights.
pub type RationalInstance = Instance<Ratio<i64>>;
pub type IntResult = SolveResult<i64>;
pub type RationalResult = SolveResult<Ratio<i64>>;
