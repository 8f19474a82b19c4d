//! Finite-domain grounding and clausification.
//!
//! Quantifiers are expanded over the room, the result is pushed to negation
//! normal form with constants folded away, and then distributed into clauses.
//! A disjunction whose distribution would blow up gets its non-clausal
//! children named by fresh definition variables (one-sided Tseitin, which is
//! enough because everything is in positive position after NNF). Definition
//! clauses carry the source id of the formula they encode.

use std::collections::HashMap;

use super::cnf::{GroundCnf, Lit, TaggedClause, Var, VarKind};
use super::domain::{Domain, GroundAtom};
use super::formula::{Formula, Term, DEFAULT_MAX_DEPTH, IN_ROOM};
use crate::Result;

/// Distribution is used while the clause product stays at or below this size.
const DISTRIBUTE_LIMIT: usize = 16;

#[derive(Clone, Debug, PartialEq)]
enum Nnf {
    True,
    False,
    Lit(Lit),
    And(Vec<Nnf>),
    Or(Vec<Nnf>),
}

fn mk_and(children: Vec<Nnf>) -> Nnf {
    let mut out = Vec::with_capacity(children.len());
    for c in children {
        match c {
            Nnf::True => {}
            Nnf::False => return Nnf::False,
            Nnf::And(gs) => out.extend(gs),
            other => out.push(other),
        }
    }
    match out.len() {
        0 => Nnf::True,
        1 => out.pop().unwrap(),
        _ => Nnf::And(out),
    }
}

fn mk_or(children: Vec<Nnf>) -> Nnf {
    let mut out = Vec::with_capacity(children.len());
    for c in children {
        match c {
            Nnf::False => {}
            Nnf::True => return Nnf::True,
            Nnf::Or(gs) => out.extend(gs),
            other => out.push(other),
        }
    }
    match out.len() {
        0 => Nnf::False,
        1 => out.pop().unwrap(),
        _ => Nnf::Or(out),
    }
}

/// All `size`-element index subsets of `0..n`, in lexicographic order.
fn combinations(n: usize, size: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    if size > n {
        return out;
    }
    let mut idx: Vec<usize> = (0..size).collect();
    loop {
        out.push(idx.clone());
        let mut i = size;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if idx[i] != i + n - size {
                break;
            }
            if i == 0 {
                return out;
            }
        }
        idx[i] += 1;
        for j in i + 1..size {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

/// Incremental grounder; clone it to extend a shared prefix in several ways.
#[derive(Clone, Debug)]
pub struct Grounder<'d> {
    domain: &'d Domain,
    max_depth: usize,
    cnf: GroundCnf,
    aux_counters: HashMap<u32, u32>,
}

impl<'d> Grounder<'d> {
    pub fn new(domain: &'d Domain) -> Self {
        Grounder {
            domain,
            max_depth: DEFAULT_MAX_DEPTH,
            cnf: GroundCnf::default(),
            aux_counters: HashMap::new(),
        }
    }

    pub fn with_max_depth(mut self, max_depth: usize) -> Self {
        self.max_depth = max_depth;
        self
    }

    pub fn add(&mut self, id: u32, formula: &Formula) -> Result<()> {
        self.domain.check(formula, self.max_depth)?;
        self.cnf.sources.insert(id);
        let mut env = Vec::new();
        let nnf = self.nnf(formula, true, &mut env);
        let clauses = self.clausify(nnf, id);
        for lits in clauses {
            self.emit(lits, id, false);
        }
        Ok(())
    }

    pub fn cnf(&self) -> &GroundCnf {
        &self.cnf
    }

    pub fn finish(self) -> GroundCnf {
        self.cnf
    }

    fn atom_var(&mut self, atom: GroundAtom) -> Var {
        if let Some(&v) = self.cnf.atom_index.get(&atom) {
            return v;
        }
        let v = Var(self.cnf.vars.len() as u32);
        self.cnf.vars.push(VarKind::Atom(atom.clone()));
        self.cnf.atom_index.insert(atom, v);
        v
    }

    fn aux_var(&mut self, source: u32) -> Var {
        let counter = self.aux_counters.entry(source).or_insert(0);
        let index = *counter;
        *counter += 1;
        let v = Var(self.cnf.vars.len() as u32);
        self.cnf.vars.push(VarKind::Aux { source, index });
        v
    }

    fn emit(&mut self, mut lits: Vec<Lit>, source: u32, definition: bool) {
        lits.sort_unstable();
        lits.dedup();
        if lits.windows(2).any(|w| w[0].var() == w[1].var()) {
            return;
        }
        if lits.is_empty() {
            // Clauses are never empty: falsity becomes x & ~x on a fresh variable.
            let v = self.aux_var(source);
            for l in [v.pos(), v.neg()] {
                self.cnf.clauses.push(TaggedClause {
                    lits: vec![l],
                    sources: vec![source],
                    definition,
                });
            }
            return;
        }
        self.cnf.clauses.push(TaggedClause {
            lits,
            sources: vec![source],
            definition,
        });
    }

    fn nnf(&mut self, f: &Formula, positive: bool, env: &mut Vec<&'d str>) -> Nnf {
        let domain = self.domain;
        match f {
            Formula::Atom(a) => {
                let args: Vec<String> = a
                    .args
                    .iter()
                    .map(|t| match t {
                        Term::Const(c) => c.clone(),
                        Term::Var(v) => env[*v as usize].to_string(),
                    })
                    .collect();
                if a.pred == IN_ROOM {
                    return if domain.is_in_room(&args[0]) == positive {
                        Nnf::True
                    } else {
                        Nnf::False
                    };
                }
                let v = self.atom_var(GroundAtom::new(a.pred.clone(), args));
                Nnf::Lit(if positive { v.pos() } else { v.neg() })
            }
            Formula::Not(g) => self.nnf(g, !positive, env),
            Formula::And(gs) | Formula::Or(gs) => {
                let children = gs.iter().map(|g| self.nnf(g, positive, env)).collect();
                if matches!(f, Formula::And(_)) == positive {
                    mk_and(children)
                } else {
                    mk_or(children)
                }
            }
            Formula::Implies(a, b) => {
                let na = self.nnf(a, !positive, env);
                let nb = self.nnf(b, positive, env);
                if positive {
                    mk_or(vec![na, nb])
                } else {
                    mk_and(vec![na, nb])
                }
            }
            Formula::Iff(a, b) => {
                let (ap, an) = (self.nnf(a, true, env), self.nnf(a, false, env));
                let (bp, bn) = (self.nnf(b, true, env), self.nnf(b, false, env));
                if positive {
                    mk_and(vec![mk_or(vec![an, bp]), mk_or(vec![ap, bn])])
                } else {
                    mk_and(vec![mk_or(vec![ap, bp]), mk_or(vec![an, bn])])
                }
            }
            Formula::ForallInRoom(g) | Formula::ExistsInRoom(g) => {
                let bodies = self.instances(g, positive, env);
                if matches!(f, Formula::ForallInRoom(_)) == positive {
                    mk_and(bodies)
                } else {
                    mk_or(bodies)
                }
            }
            Formula::AtLeastK(k, g) => {
                let k = *k as usize;
                let bodies = self.instances(g, positive, env);
                let n = bodies.len();
                if positive {
                    // At least k of n: every (n-k+1)-subset has a true member.
                    if k > n {
                        return Nnf::False;
                    }
                    let subsets = combinations(n, n - k + 1);
                    mk_and(
                        subsets
                            .into_iter()
                            .map(|s| mk_or(s.into_iter().map(|i| bodies[i].clone()).collect()))
                            .collect(),
                    )
                } else {
                    // Fewer than k: every k-subset has a false member.
                    if k > n {
                        return Nnf::True;
                    }
                    mk_and(
                        combinations(n, k)
                            .into_iter()
                            .map(|s| mk_or(s.into_iter().map(|i| bodies[i].clone()).collect()))
                            .collect(),
                    )
                }
            }
        }
    }

    fn instances(&mut self, body: &Formula, positive: bool, env: &mut Vec<&'d str>) -> Vec<Nnf> {
        let domain = self.domain;
        let mut out = Vec::with_capacity(domain.room().len());
        for c in domain.room() {
            env.push(c.as_str());
            out.push(self.nnf(body, positive, env));
            env.pop();
        }
        out
    }

    fn clausify(&mut self, nnf: Nnf, source: u32) -> Vec<Vec<Lit>> {
        match nnf {
            Nnf::True => Vec::new(),
            Nnf::False => vec![Vec::new()],
            Nnf::Lit(l) => vec![vec![l]],
            Nnf::And(gs) => gs.into_iter().flat_map(|g| self.clausify(g, source)).collect(),
            Nnf::Or(gs) => {
                let mut parts: Vec<Vec<Vec<Lit>>> = Vec::with_capacity(gs.len());
                for g in gs {
                    let cs = self.clausify(g, source);
                    if cs.is_empty() {
                        return Vec::new();
                    }
                    parts.push(cs);
                }
                let product = parts
                    .iter()
                    .try_fold(1usize, |acc, p| acc.checked_mul(p.len()))
                    .unwrap_or(usize::MAX);
                if product > DISTRIBUTE_LIMIT {
                    for part in parts.iter_mut().filter(|p| p.len() > 1) {
                        let x = self.aux_var(source);
                        for mut c in std::mem::take(part) {
                            c.push(x.neg());
                            self.emit(c, source, true);
                        }
                        *part = vec![vec![x.pos()]];
                    }
                }
                let mut acc: Vec<Vec<Lit>> = vec![Vec::new()];
                for part in parts {
                    let mut next = Vec::with_capacity(acc.len() * part.len());
                    for a in &acc {
                        for c in &part {
                            let mut merged = a.clone();
                            merged.extend_from_slice(c);
                            next.push(merged);
                        }
                    }
                    acc = next;
                }
                acc
            }
        }
    }
}

/// Grounds `formulas` over `domain` into one tagged CNF.
pub fn ground(formulas: &[(u32, Formula)], domain: &Domain) -> Result<GroundCnf> {
    let mut g = Grounder::new(domain);
    for (id, f) in formulas {
        g.add(*id, f)?;
    }
    Ok(g.finish())
}

#[cfg(test)]
mod tests {
    use std::collections::BTreeMap;

    use super::*;
    use crate::Error;

    fn domain(names: &[&str], preds: &[(&str, usize)]) -> Domain {
        let sig: BTreeMap<String, usize> = preds.iter().map(|(p, a)| (p.to_string(), *a)).collect();
        Domain::everyone_in_room(names.iter().map(|s| s.to_string()).collect(), sig).unwrap()
    }

    fn var(x: u32) -> Term {
        Term::Var(x)
    }

    #[test]
    fn combinations_are_complete() {
        assert_eq!(combinations(3, 2), vec![vec![0, 1], vec![0, 2], vec![1, 2]]);
        assert_eq!(combinations(4, 4).len(), 1);
        assert_eq!(combinations(5, 0), vec![Vec::<usize>::new()]);
        assert!(combinations(2, 3).is_empty());
        assert_eq!(combinations(6, 3).len(), 20);
    }

    #[test]
    fn forall_expands_per_room_member() {
        let d = domain(&["mary", "nina"], &[("happy", 1), ("rich", 1)]);
        let f = Formula::forall(Formula::implies(
            Formula::unary("happy", var(0)),
            Formula::unary("rich", var(0)),
        ));
        let cnf = ground(&[(0, f)], &d).unwrap();
        let named = cnf.named_clauses();
        assert_eq!(named.len(), 2);
        for (lits, srcs) in &named {
            assert_eq!(srcs, &vec![0]);
            assert_eq!(lits.len(), 2);
        }
        let texts: Vec<String> = named
            .iter()
            .map(|(l, _)| l.iter().map(|(n, s)| format!("{}{n}", if *s { "" } else { "~" })).collect::<Vec<_>>().join(" "))
            .collect();
        assert!(texts.contains(&"~happy(mary) rich(mary)".to_string()));
        assert!(texts.contains(&"~happy(nina) rich(nina)".to_string()));
    }

    #[test]
    fn atoms_ground_to_units() {
        let d = domain(&["mary"], &[("happy", 1)]);
        let a = Formula::unary("happy", Term::c("mary"));
        let cnf = ground(&[(0, a.clone()), (1, Formula::not(a))], &d).unwrap();
        assert_eq!(cnf.num_vars(), 1);
        assert_eq!(cnf.clauses().len(), 2);
        assert_eq!(cnf.clauses()[0].lits, vec![Var(0).pos()]);
        assert_eq!(cnf.clauses()[0].sources, vec![0]);
        assert_eq!(cnf.clauses()[1].lits, vec![Var(0).neg()]);
        assert_eq!(cnf.clauses()[1].sources, vec![1]);
    }

    #[test]
    fn at_least_two_of_three_is_pairwise_clauses() {
        let d = domain(&["a", "b", "c"], &[("romantic", 1)]);
        let cnf = ground(&[(0, Formula::at_least(2, Formula::unary("romantic", var(0))))], &d).unwrap();
        assert_eq!(cnf.num_vars(), 3);
        assert_eq!(cnf.clauses().len(), 3);
        assert!(cnf.clauses().iter().all(|c| c.lits.len() == 2 && !c.definition));
    }

    #[test]
    fn impossible_count_is_a_contradiction() {
        let d = domain(&["a", "b"], &[("p", 1)]);
        let cnf = ground(&[(4, Formula::at_least(3, Formula::unary("p", var(0))))], &d).unwrap();
        assert_eq!(cnf.clauses().len(), 2);
        assert!(cnf.clauses().iter().all(|c| c.lits.len() == 1 && c.sources == vec![4]));
    }

    #[test]
    fn guard_on_roster_outsider_folds_away() {
        let sig = BTreeMap::from([("p".to_string(), 1)]);
        let d = Domain::new(vec!["a".into(), "b".into()], vec!["a".into()], sig).unwrap();
        let inside = ground(&[(0, Formula::unary(IN_ROOM, Term::c("a")))], &d).unwrap();
        assert!(inside.clauses().is_empty());
        assert_eq!(inside.num_vars(), 0);
        // "b is in the room" is false by construction.
        let outside = ground(&[(0, Formula::unary(IN_ROOM, Term::c("b")))], &d).unwrap();
        assert_eq!(outside.clauses().len(), 2);
    }

    #[test]
    fn wide_disjunction_introduces_definitions() {
        let d = domain(&["a", "b", "c", "d", "e"], &[("p", 1), ("q", 1)]);
        // Or of five conjunctions: 2^5 = 32 > limit.
        let f = Formula::exists(Formula::And(vec![
            Formula::unary("p", var(0)),
            Formula::unary("q", var(0)),
        ]));
        let cnf = ground(&[(0, f)], &d).unwrap();
        assert!(cnf.clauses().iter().any(|c| c.definition));
        assert!(cnf.vars().iter().any(|v| matches!(v, VarKind::Aux { source: 0, .. })));
    }

    #[test]
    fn signature_errors_propagate() {
        let d = domain(&["a"], &[("p", 1)]);
        let err = ground(&[(0, Formula::unary("p", Term::c("zz")))], &d).unwrap_err();
        assert!(matches!(err, Error::UnknownConstant(_)));
    }

    #[test]
    fn grounding_is_deterministic() {
        let d = domain(&["a", "b", "c"], &[("p", 1), ("q", 2)]);
        let fs = vec![
            (0, Formula::forall(Formula::exists(Formula::binary("q", var(0), var(1))))),
            (1, Formula::at_least(2, Formula::unary("p", var(0)))),
        ];
        let x = ground(&fs, &d).unwrap();
        let y = ground(&fs, &d).unwrap();
        assert_eq!(x.clauses(), y.clauses());
        assert_eq!(x.vars(), y.vars());
    }
}
