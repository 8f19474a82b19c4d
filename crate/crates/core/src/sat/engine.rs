use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::cdcl::{Budget, Outcome, Solver};
use super::clock::Stopwatch;
use crate::logic::{GroundAtom, GroundCnf, Lit, Var, VarKind};
use crate::{Error, Result};

/// Resource limits for one solve. `None` means unlimited.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SolveConfig {
    pub max_conflicts: Option<u64>,
    pub max_millis: Option<u64>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SolveStats {
    pub decisions: u64,
    pub conflicts: u64,
    pub propagations: u64,
    pub wall_ms: u64,
}

/// A satisfying assignment, indexed by CNF variable.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Model {
    values: Vec<bool>,
}

impl Model {
    pub fn new(values: Vec<bool>) -> Self {
        Model { values }
    }

    pub fn value(&self, v: Var) -> bool {
        self.values[v.index()]
    }

    pub fn lit(&self, l: Lit) -> bool {
        self.value(l.var()) != l.is_neg()
    }

    pub fn values(&self) -> &[bool] {
        &self.values
    }

    pub fn atom(&self, cnf: &GroundCnf, atom: &GroundAtom) -> Option<bool> {
        cnf.atom_var(atom).map(|v| self.value(v))
    }

    /// Truth values of the ground atoms only (definition variables dropped).
    pub fn atoms(&self, cnf: &GroundCnf) -> BTreeMap<GroundAtom, bool> {
        cnf.vars()
            .iter()
            .zip(&self.values)
            .filter_map(|(k, &b)| match k {
                VarKind::Atom(a) => Some((a.clone(), b)),
                VarKind::Aux { .. } => None,
            })
            .collect()
    }

    /// Short hex fingerprint of the atom assignment.
    pub fn digest(&self, cnf: &GroundCnf) -> String {
        let mut h = Sha256::new();
        for (atom, value) in self.atoms(cnf) {
            h.update(atom.to_string().as_bytes());
            h.update([b'=', value as u8 + b'0', b';']);
        }
        hex::encode(&h.finalize()[..16])
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SatVerdict {
    Sat(Model),
    /// Source ids whose clauses are jointly unsatisfiable (not necessarily minimal).
    Unsat(BTreeSet<u32>),
}

impl SatVerdict {
    pub fn is_sat(&self) -> bool {
        matches!(self, SatVerdict::Sat(_))
    }

    pub fn model(&self) -> Option<&Model> {
        match self {
            SatVerdict::Sat(m) => Some(m),
            SatVerdict::Unsat(_) => None,
        }
    }

    pub fn core(&self) -> Option<&BTreeSet<u32>> {
        match self {
            SatVerdict::Sat(_) => None,
            SatVerdict::Unsat(c) => Some(c),
        }
    }
}

pub fn solve(cnf: &GroundCnf) -> Result<(SatVerdict, SolveStats)> {
    solve_with(cnf, &SolveConfig::default())
}

pub fn solve_with(cnf: &GroundCnf, config: &SolveConfig) -> Result<(SatVerdict, SolveStats)> {
    solve_subset(cnf, |_| true, config)
}

/// Solves the clauses whose sources all satisfy `keep`.
///
/// Each kept source gets an activation literal guarding its clauses; all
/// activations are assumed true and the failed ones form the core.
pub fn solve_subset(
    cnf: &GroundCnf,
    keep: impl Fn(u32) -> bool,
    config: &SolveConfig,
) -> Result<(SatVerdict, SolveStats)> {
    let clock = Stopwatch::start();
    let base = cnf.num_vars();
    let active: Vec<u32> = cnf.sources().iter().copied().filter(|&s| keep(s)).collect();
    let act: BTreeMap<u32, Var> = active
        .iter()
        .enumerate()
        .map(|(i, &s)| (s, Var((base + i) as u32)))
        .collect();
    let mut solver = Solver::new(base + active.len());
    for clause in cnf.clauses() {
        if !clause.sources.iter().all(|s| act.contains_key(s)) {
            continue;
        }
        let mut lits = clause.lits.clone();
        lits.extend(clause.sources.iter().map(|s| act[s].neg()));
        solver.add_clause(&lits);
    }
    let assumptions: Vec<Lit> = active.iter().map(|s| act[s].pos()).collect();
    let budget = Budget {
        max_conflicts: config.max_conflicts,
        max_millis: config.max_millis,
    };
    let outcome = solver.solve(&assumptions, &budget);
    let stats = SolveStats {
        decisions: solver.counters.decisions,
        conflicts: solver.counters.conflicts,
        propagations: solver.counters.propagations,
        wall_ms: clock.elapsed_millis(),
    };
    let verdict = match outcome {
        Outcome::Sat(mut values) => {
            values.truncate(base);
            SatVerdict::Sat(Model::new(values))
        }
        Outcome::Unsat(failed) => {
            let by_var: BTreeMap<Var, u32> = act.iter().map(|(&s, &v)| (v, s)).collect();
            SatVerdict::Unsat(failed.iter().filter_map(|l| by_var.get(&l.var()).copied()).collect())
        }
        Outcome::Unknown => {
            return Err(Error::Unknown(format!(
                "budget exhausted after {} conflicts",
                stats.conflicts
            )))
        }
    };
    Ok((verdict, stats))
}

/// True iff the clauses sourced only from `core` are unsatisfiable.
pub fn is_core_valid(cnf: &GroundCnf, core: &BTreeSet<u32>) -> Result<bool> {
    is_core_valid_with(cnf, core, &SolveConfig::default())
}

pub fn is_core_valid_with(cnf: &GroundCnf, core: &BTreeSet<u32>, config: &SolveConfig) -> Result<bool> {
    if let Some(&id) = core.iter().find(|id| !cnf.sources().contains(id)) {
        return Err(Error::UnknownSource(id));
    }
    let (verdict, _) = solve_subset(cnf, |s| core.contains(&s), config)?;
    Ok(!verdict.is_sat())
}
