//! Seeded grammar producing English sentences paired with formulas.

mod grammar;
mod lexicon;

pub use grammar::{
    Category, CategoryWeights, Connective, Grammar, GrammarConfig, Origin, Property, Shape, SourcedClause,
    Statement,
};
pub use lexicon::{symbol_for, BinaryEntry, Lexicon, Name, PropositionEntry, UnaryEntry};
