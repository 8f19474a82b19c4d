use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::ops::Not;

use serde::{Deserialize, Serialize};

use super::domain::GroundAtom;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Var(pub u32);

impl Var {
    pub fn index(self) -> usize {
        self.0 as usize
    }

    pub fn pos(self) -> Lit {
        Lit::new(self, false)
    }

    #[allow(clippy::should_implement_trait)]
    pub fn neg(self) -> Lit {
        Lit::new(self, true)
    }
}

/// A propositional literal packed as `2 * var + negated`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Lit(pub u32);

impl Lit {
    pub fn new(var: Var, negated: bool) -> Self {
        Lit(var.0 << 1 | negated as u32)
    }

    pub fn var(self) -> Var {
        Var(self.0 >> 1)
    }

    pub fn is_neg(self) -> bool {
        self.0 & 1 == 1
    }

    pub fn code(self) -> usize {
        self.0 as usize
    }

    /// DIMACS form: 1-based, sign for polarity.
    pub fn to_dimacs(self) -> i64 {
        let v = self.var().0 as i64 + 1;
        if self.is_neg() {
            -v
        } else {
            v
        }
    }
}

impl Not for Lit {
    type Output = Lit;

    fn not(self) -> Lit {
        Lit(self.0 ^ 1)
    }
}

impl fmt::Display for Lit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_dimacs())
    }
}

/// What a propositional variable stands for.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum VarKind {
    Atom(GroundAtom),
    /// Definition variable introduced while clausifying one source formula.
    Aux { source: u32, index: u32 },
}

impl fmt::Display for VarKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            VarKind::Atom(a) => write!(f, "{a}"),
            VarKind::Aux { source, index } => write!(f, "aux{source}_{index}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TaggedClause {
    pub lits: Vec<Lit>,
    /// Ids of the source formulas this clause derives from (sorted, non-empty).
    pub sources: Vec<u32>,
    /// Set for Tseitin definition clauses.
    pub definition: bool,
}

/// Named literals and the source ids of one clause.
pub type NamedClause = (Vec<(String, bool)>, Vec<u32>);

/// Grounded, clausified problem whose clauses remember their source formula.
#[derive(Clone, Debug, Default)]
pub struct GroundCnf {
    pub(crate) vars: Vec<VarKind>,
    pub(crate) atom_index: HashMap<GroundAtom, Var>,
    pub(crate) clauses: Vec<TaggedClause>,
    pub(crate) sources: BTreeSet<u32>,
}

impl GroundCnf {
    pub fn num_vars(&self) -> usize {
        self.vars.len()
    }

    pub fn vars(&self) -> &[VarKind] {
        &self.vars
    }

    pub fn var_kind(&self, v: Var) -> &VarKind {
        &self.vars[v.index()]
    }

    pub fn atom_var(&self, atom: &GroundAtom) -> Option<Var> {
        self.atom_index.get(atom).copied()
    }

    pub fn clauses(&self) -> &[TaggedClause] {
        &self.clauses
    }

    /// Every source id that was grounded, including ones that produced no clause.
    pub fn sources(&self) -> &BTreeSet<u32> {
        &self.sources
    }

    /// Keeps only clauses all of whose sources satisfy `keep`.
    pub fn restrict(&self, keep: impl Fn(u32) -> bool) -> GroundCnf {
        GroundCnf {
            vars: self.vars.clone(),
            atom_index: self.atom_index.clone(),
            clauses: self
                .clauses
                .iter()
                .filter(|c| c.sources.iter().all(|&s| keep(s)))
                .cloned()
                .collect(),
            sources: self.sources.iter().copied().filter(|&s| keep(s)).collect(),
        }
    }

    /// Clauses rendered with variable names instead of numbers, for comparing
    /// problems whose variable numbering differs.
    pub fn named_clauses(&self) -> Vec<NamedClause> {
        self.clauses
            .iter()
            .map(|c| {
                let mut lits: Vec<(String, bool)> = c
                    .lits
                    .iter()
                    .map(|l| (self.vars[l.var().index()].to_string(), !l.is_neg()))
                    .collect();
                lits.sort();
                (lits, c.sources.clone())
            })
            .collect()
    }

    /// Plain DIMACS text; each clause is preceded by a comment naming its sources.
    pub fn to_dimacs(&self) -> String {
        let mut out = format!("p cnf {} {}\n", self.vars.len(), self.clauses.len());
        for c in &self.clauses {
            let srcs: Vec<String> = c.sources.iter().map(u32::to_string).collect();
            out.push_str(&format!("c src {}\n", srcs.join(" ")));
            for l in &c.lits {
                out.push_str(&l.to_dimacs().to_string());
                out.push(' ');
            }
            out.push_str("0\n");
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn literal_packing() {
        let v = Var(7);
        assert_eq!(v.pos().var(), v);
        assert!(v.neg().is_neg());
        assert_eq!(!v.pos(), v.neg());
        assert_eq!(v.neg().to_dimacs(), -8);
    }
}
