//! Satisfiability of tagged CNF with cores at source-formula granularity.

mod brute;
pub mod cdcl;
mod clock;
mod engine;

pub use brute::{enumerate_models, is_satisfiable_brute, ENUMERATION_LIMIT};
pub use engine::{
    is_core_valid, is_core_valid_with, solve, solve_subset, solve_with, Model, SatVerdict, SolveConfig,
    SolveStats,
};
