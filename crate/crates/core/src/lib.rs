//! Long, provably non-paradoxical logic premises paired with English, and
//! contradiction-evidence retrieval tasks built on top of them.
//!
//! The pipeline runs bottom-up through these modules:
//!
//! - [`logic`]: finite-domain first-order formulas, grounding to tagged CNF, TPTP export
//! - [`sat`]: CDCL solver with source-level unsat cores, plus a brute-force oracle
//! - [`forge`]: seeded grammar producing English/logic clause pairs and hypotheses
//! - [`merge`]: satisfiable merging and the size-doubling stage ladder
//! - [`evidence`]: labeling and certification of necessary and sufficient evidence
//! - [`haystack`]: size ladder, corpus padding, embedded-hypothesis variants, dataset files
//! - [`eval`]: prompts, answer parsing, Jaccard scoring, model querying and reports

pub mod error;
pub mod eval;
pub mod evidence;
pub mod forge;
pub mod haystack;
pub mod logic;
pub mod merge;
pub mod sat;
pub mod seed;
mod par;

pub use error::{Error, Result};
