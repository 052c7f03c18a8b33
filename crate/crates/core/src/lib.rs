//! Solvers for the assignment problem with conflicts (APC).
//!
//! Given an `n x n` cost matrix and pairs of edges that may not be used
//! together, find a minimum-cost perfect matching that takes at most one
//! edge from every pair.
//!
//! - [`instance`] holds the data model, text format and random generator.
//! - [`model`] builds the binary program, LP export, objective and feasibility checks.
//! - [`hungarian`] solves the conflict-free relaxation.
//! - [`exact`] is the branch-and-bound search.
//! - [`heuristic`] is greedy construction plus 2-exchange local search.
//! - [`oracle`] enumerates small instances exhaustively.
//! - [`bench`](mod@bench) runs grouped benchmarks and renders reports.

pub mod bench;
pub mod exact;
pub mod heuristic;
pub mod hungarian;
pub mod instance;
pub mod model;
pub mod oracle;
pub mod solution;

#[cfg(test)]
pub(crate) mod testutil;

pub use exact::{solve_exact, ExactConfig, SearchNode};
pub use heuristic::{construct_greedy, gap_percent, local_search, solve_heuristic, LSConfig};
pub use hungarian::{ap_lower_bound, solve_ap, MaskedCosts};
pub use instance::{generate_instance, parse_instance, validate, write_instance, ConflictPair, Edge, Instance};
pub use model::{build_model, check_feasible, evaluate, export_lp, FeasibilityReport, ModelIR};
pub use oracle::{brute_force, enumerate_feasible};
pub use solution::{Solution, SolveStatus};
