use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use super::formula::{Formula, Term, IN_ROOM};
use crate::{Error, Result};

/// The finite universe a premise talks about.
///
/// Every constant is a person on the roster. Room membership is fixed by the
/// domain rather than asserted by a clause, so the `in_room` guard of a
/// quantifier is decided at grounding time and quantifiers range over
/// [`Domain::room`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Domain {
    roster: Vec<String>,
    room: Vec<String>,
    signature: BTreeMap<String, usize>,
}

/// A predicate applied to constants only.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct GroundAtom {
    pub pred: String,
    pub args: Vec<String>,
}

impl GroundAtom {
    pub fn new(pred: impl Into<String>, args: Vec<String>) -> Self {
        GroundAtom {
            pred: pred.into(),
            args,
        }
    }
}

impl fmt::Display for GroundAtom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.pred)?;
        if !self.args.is_empty() {
            write!(f, "({})", self.args.join(","))?;
        }
        Ok(())
    }
}

impl Domain {
    pub fn new(
        roster: Vec<String>,
        room: Vec<String>,
        signature: BTreeMap<String, usize>,
    ) -> Result<Self> {
        let mut seen = BTreeSet::new();
        for name in &roster {
            if name.is_empty() {
                return Err(Error::Domain("empty constant name".into()));
            }
            if !seen.insert(name.as_str()) {
                return Err(Error::Domain(format!("duplicate constant `{name}`")));
            }
        }
        let mut in_room = BTreeSet::new();
        for name in &room {
            if !seen.contains(name.as_str()) {
                return Err(Error::Domain(format!("room member `{name}` is not on the roster")));
            }
            if !in_room.insert(name.as_str()) {
                return Err(Error::Domain(format!("duplicate room member `{name}`")));
            }
        }
        for (pred, &arity) in &signature {
            if arity > 2 {
                return Err(Error::Domain(format!("predicate `{pred}` has arity {arity} > 2")));
            }
            if pred == IN_ROOM && arity != 1 {
                return Err(Error::Domain(format!("`{IN_ROOM}` must be unary")));
            }
        }
        Ok(Domain {
            roster,
            room,
            signature,
        })
    }

    /// Everybody on the roster is in the room.
    pub fn everyone_in_room(roster: Vec<String>, signature: BTreeMap<String, usize>) -> Result<Self> {
        let room = roster.clone();
        Domain::new(roster, room, signature)
    }

    pub fn roster(&self) -> &[String] {
        &self.roster
    }

    pub fn room(&self) -> &[String] {
        &self.room
    }

    pub fn signature(&self) -> &BTreeMap<String, usize> {
        &self.signature
    }

    pub fn is_in_room(&self, name: &str) -> bool {
        self.room.iter().any(|r| r == name)
    }

    pub fn arity(&self, pred: &str) -> Option<usize> {
        if pred == IN_ROOM {
            return Some(1);
        }
        self.signature.get(pred).copied()
    }

    pub fn has_constant(&self, name: &str) -> bool {
        self.roster.iter().any(|r| r == name)
    }

    /// Checks constants, predicates, arities, variable binding and depth.
    pub fn check(&self, formula: &Formula, max_depth: usize) -> Result<()> {
        let depth = formula.depth();
        if depth > max_depth {
            return Err(Error::Structure(format!(
                "depth {depth} exceeds the limit of {max_depth}"
            )));
        }
        self.check_at(formula, 0)
    }

    fn check_at(&self, formula: &Formula, bound: u32) -> Result<()> {
        match formula {
            Formula::Atom(a) => {
                let arity = self
                    .arity(&a.pred)
                    .ok_or_else(|| Error::UnknownPredicate(a.pred.clone()))?;
                if arity != a.args.len() {
                    return Err(Error::ArityMismatch {
                        pred: a.pred.clone(),
                        expected: arity,
                        found: a.args.len(),
                    });
                }
                for t in &a.args {
                    match t {
                        Term::Const(c) if !self.has_constant(c) => {
                            return Err(Error::UnknownConstant(c.clone()))
                        }
                        Term::Var(v) if *v >= bound => {
                            return Err(Error::Structure(format!("variable x{v} is not bound")))
                        }
                        _ => {}
                    }
                }
                Ok(())
            }
            Formula::Not(g) => self.check_at(g, bound),
            Formula::And(gs) | Formula::Or(gs) => gs.iter().try_for_each(|g| self.check_at(g, bound)),
            Formula::Implies(a, b) | Formula::Iff(a, b) => {
                self.check_at(a, bound)?;
                self.check_at(b, bound)
            }
            Formula::ForallInRoom(g) | Formula::ExistsInRoom(g) => self.check_at(g, bound + 1),
            Formula::AtLeastK(k, g) => {
                if *k == 0 || *k > super::formula::MAX_AT_LEAST {
                    return Err(Error::Structure(format!("at-least count {k} outside 1..=3")));
                }
                self.check_at(g, bound + 1)
            }
        }
    }

    /// Every ground atom over the signature, in a fixed order.
    pub fn ground_atoms(&self) -> Vec<GroundAtom> {
        let mut out = Vec::new();
        for (pred, &arity) in &self.signature {
            if pred == IN_ROOM {
                continue;
            }
            match arity {
                0 => out.push(GroundAtom::new(pred.clone(), vec![])),
                1 => {
                    for c in &self.roster {
                        out.push(GroundAtom::new(pred.clone(), vec![c.clone()]));
                    }
                }
                _ => {
                    for a in &self.roster {
                        for b in &self.roster {
                            out.push(GroundAtom::new(pred.clone(), vec![a.clone(), b.clone()]));
                        }
                    }
                }
            }
        }
        out
    }
}
