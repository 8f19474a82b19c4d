//! Function-free first-order logic over a finite roster with room-guarded
//! quantifiers.

mod cnf;
mod domain;
mod formula;
mod ground;
pub mod semantics;
pub mod tptp;

pub use cnf::{GroundCnf, Lit, TaggedClause, Var, VarKind};
pub use domain::{Domain, GroundAtom};
pub use formula::{negate, Atom, Formula, Term, DEFAULT_MAX_DEPTH, IN_ROOM, MAX_AT_LEAST};
pub use ground::{ground, Grounder};
pub use tptp::emit_tptp;
