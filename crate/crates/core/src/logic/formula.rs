use std::fmt;

use serde::{Deserialize, Serialize};

/// Reserved unary predicate guarding every quantifier.
pub const IN_ROOM: &str = "in_room";

pub const DEFAULT_MAX_DEPTH: usize = 6;

/// Largest `k` accepted by [`Formula::AtLeastK`].
pub const MAX_AT_LEAST: u8 = 3;

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Term {
    Const(String),
    /// Bound by the quantifier at this nesting level (outermost is 0).
    Var(u32),
}

impl Term {
    pub fn c(name: impl Into<String>) -> Self {
        Term::Const(name.into())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Atom {
    pub pred: String,
    pub args: Vec<Term>,
}

impl Atom {
    pub fn new(pred: impl Into<String>, args: Vec<Term>) -> Self {
        Atom {
            pred: pred.into(),
            args,
        }
    }

    pub fn arity(&self) -> usize {
        self.args.len()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Formula {
    Atom(Atom),
    Not(Box<Formula>),
    And(Vec<Formula>),
    Or(Vec<Formula>),
    Implies(Box<Formula>, Box<Formula>),
    Iff(Box<Formula>, Box<Formula>),
    ForallInRoom(Box<Formula>),
    ExistsInRoom(Box<Formula>),
    AtLeastK(u8, Box<Formula>),
}

impl Formula {
    pub fn atom(pred: impl Into<String>, args: Vec<Term>) -> Self {
        Formula::Atom(Atom::new(pred, args))
    }

    /// Propositional (arity-0) atom.
    pub fn prop(pred: impl Into<String>) -> Self {
        Formula::atom(pred, Vec::new())
    }

    pub fn unary(pred: impl Into<String>, arg: Term) -> Self {
        Formula::atom(pred, vec![arg])
    }

    pub fn binary(pred: impl Into<String>, a: Term, b: Term) -> Self {
        Formula::atom(pred, vec![a, b])
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(f: Formula) -> Self {
        Formula::Not(Box::new(f))
    }

    pub fn implies(a: Formula, b: Formula) -> Self {
        Formula::Implies(Box::new(a), Box::new(b))
    }

    pub fn iff(a: Formula, b: Formula) -> Self {
        Formula::Iff(Box::new(a), Box::new(b))
    }

    pub fn forall(body: Formula) -> Self {
        Formula::ForallInRoom(Box::new(body))
    }

    pub fn exists(body: Formula) -> Self {
        Formula::ExistsInRoom(Box::new(body))
    }

    pub fn at_least(k: u8, body: Formula) -> Self {
        Formula::AtLeastK(k, Box::new(body))
    }

    /// Atoms have depth 0, every connective or quantifier adds one.
    pub fn depth(&self) -> usize {
        match self {
            Formula::Atom(_) => 0,
            Formula::Not(f)
            | Formula::ForallInRoom(f)
            | Formula::ExistsInRoom(f)
            | Formula::AtLeastK(_, f) => 1 + f.depth(),
            Formula::And(fs) | Formula::Or(fs) => {
                1 + fs.iter().map(Formula::depth).max().unwrap_or(0)
            }
            Formula::Implies(a, b) | Formula::Iff(a, b) => 1 + a.depth().max(b.depth()),
        }
    }

    /// True for an atom or a negated atom.
    pub fn is_literal(&self) -> bool {
        match self {
            Formula::Atom(_) => true,
            Formula::Not(f) => matches!(**f, Formula::Atom(_)),
            _ => false,
        }
    }

    /// Visits every atom in the tree, left to right.
    pub fn for_each_atom<'a>(&'a self, f: &mut impl FnMut(&'a Atom)) {
        match self {
            Formula::Atom(a) => f(a),
            Formula::Not(g)
            | Formula::ForallInRoom(g)
            | Formula::ExistsInRoom(g)
            | Formula::AtLeastK(_, g) => g.for_each_atom(f),
            Formula::And(gs) | Formula::Or(gs) => gs.iter().for_each(|g| g.for_each_atom(f)),
            Formula::Implies(a, b) | Formula::Iff(a, b) => {
                a.for_each_atom(f);
                b.for_each_atom(f);
            }
        }
    }

    pub fn constants(&self) -> Vec<&str> {
        let mut out = Vec::new();
        self.for_each_atom(&mut |a| {
            for t in &a.args {
                if let Term::Const(c) = t {
                    if !out.contains(&c.as_str()) {
                        out.push(c.as_str());
                    }
                }
            }
        });
        out
    }

    /// Substitutes `name` for the variable bound at `level` and shifts deeper
    /// variables down by one, as if that binder had been removed.
    pub fn instantiate(&self, level: u32, name: &str) -> Formula {
        let sub = |t: &Term| match t {
            Term::Var(v) if *v == level => Term::c(name),
            Term::Var(v) if *v > level => Term::Var(v - 1),
            other => other.clone(),
        };
        match self {
            Formula::Atom(a) => Formula::Atom(Atom::new(a.pred.clone(), a.args.iter().map(sub).collect())),
            Formula::Not(g) => Formula::not(g.instantiate(level, name)),
            Formula::And(gs) => Formula::And(gs.iter().map(|g| g.instantiate(level, name)).collect()),
            Formula::Or(gs) => Formula::Or(gs.iter().map(|g| g.instantiate(level, name)).collect()),
            Formula::Implies(a, b) => {
                Formula::implies(a.instantiate(level, name), b.instantiate(level, name))
            }
            Formula::Iff(a, b) => Formula::iff(a.instantiate(level, name), b.instantiate(level, name)),
            Formula::ForallInRoom(g) => Formula::forall(g.instantiate(level, name)),
            Formula::ExistsInRoom(g) => Formula::exists(g.instantiate(level, name)),
            Formula::AtLeastK(k, g) => Formula::at_least(*k, g.instantiate(level, name)),
        }
    }
}

/// `Not(f)`, cancelling a double negation.
pub fn negate(f: &Formula) -> Formula {
    match f {
        Formula::Not(inner) => (**inner).clone(),
        other => Formula::not(other.clone()),
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Const(c) => f.write_str(c),
            Term::Var(v) => write!(f, "x{v}"),
        }
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.pred)?;
        if !self.args.is_empty() {
            f.write_str("(")?;
            for (i, a) in self.args.iter().enumerate() {
                if i > 0 {
                    f.write_str(",")?;
                }
                write!(f, "{a}")?;
            }
            f.write_str(")")?;
        }
        Ok(())
    }
}

impl Formula {
    fn fmt_at(&self, f: &mut fmt::Formatter<'_>, depth: u32) -> fmt::Result {
        let join = |f: &mut fmt::Formatter<'_>, gs: &[Formula], op: &str, empty: &str| {
            if gs.is_empty() {
                return f.write_str(empty);
            }
            f.write_str("(")?;
            for (i, g) in gs.iter().enumerate() {
                if i > 0 {
                    write!(f, " {op} ")?;
                }
                g.fmt_at(f, depth)?;
            }
            f.write_str(")")
        };
        match self {
            Formula::Atom(a) => write!(f, "{a}"),
            Formula::Not(g) => {
                f.write_str("~")?;
                g.fmt_at(f, depth)
            }
            Formula::And(gs) => join(f, gs, "&", "true"),
            Formula::Or(gs) => join(f, gs, "|", "false"),
            Formula::Implies(a, b) | Formula::Iff(a, b) => {
                let op = if matches!(self, Formula::Implies(..)) { "->" } else { "<->" };
                f.write_str("(")?;
                a.fmt_at(f, depth)?;
                write!(f, " {op} ")?;
                b.fmt_at(f, depth)?;
                f.write_str(")")
            }
            Formula::ForallInRoom(g) => {
                write!(f, "forall x{depth} in room. ")?;
                g.fmt_at(f, depth + 1)
            }
            Formula::ExistsInRoom(g) => {
                write!(f, "exists x{depth} in room. ")?;
                g.fmt_at(f, depth + 1)
            }
            Formula::AtLeastK(k, g) => {
                write!(f, "atleast {k} x{depth} in room. ")?;
                g.fmt_at(f, depth + 1)
            }
        }
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.fmt_at(f, 0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn a() -> Formula {
        Formula::unary("happy", Term::c("mary"))
    }

    #[test]
    fn negate_cancels_double_negation() {
        assert_eq!(negate(&Formula::not(Formula::not(a()))), Formula::not(a()));
        assert_eq!(negate(&negate(&a())), a());
        assert_eq!(negate(&Formula::not(a())), a());
    }

    #[test]
    fn negate_wraps_atoms_and_quantifiers() {
        assert_eq!(negate(&a()), Formula::not(a()));
        let q = Formula::forall(Formula::unary("brave", Term::Var(0)));
        assert_eq!(negate(&q), Formula::Not(Box::new(q.clone())));
    }

    #[test]
    fn depth_counts_connectives() {
        assert_eq!(a().depth(), 0);
        assert_eq!(Formula::not(a()).depth(), 1);
        let q = Formula::forall(Formula::implies(
            Formula::unary("happy", Term::Var(0)),
            Formula::not(Formula::unary("rich", Term::Var(0))),
        ));
        assert_eq!(q.depth(), 3);
    }

    #[test]
    fn display_is_readable() {
        let q = Formula::forall(Formula::implies(
            Formula::unary("happy", Term::Var(0)),
            Formula::unary("rich", Term::Var(0)),
        ));
        assert_eq!(q.to_string(), "forall x0 in room. (happy(x0) -> rich(x0))");
        assert_eq!(Formula::prop("tower_leans").to_string(), "tower_leans");
    }
}
