//! Random small instances and a model-theoretic oracle that never touches
//! the grounder or the CDCL solver.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use haystack_core::logic::{semantics, Domain, Formula, GroundAtom, Term};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Roster of 1..=3 names, a random room (possibly empty), 1..=4 predicates,
/// at most `max_atoms` ground atoms.
pub fn random_domain(rng: &mut impl Rng, max_atoms: usize) -> Domain {
    loop {
        let n = rng.random_range(1..=3);
        let roster: Vec<String> = ["ann", "bob", "cy"][..n].iter().map(|s| s.to_string()).collect();
        let room: Vec<String> = roster.iter().filter(|_| rng.random_bool(0.75)).cloned().collect();
        let preds = rng.random_range(1..=4);
        let sig: BTreeMap<String, usize> = (0..preds)
            .map(|i| (format!("p{i}"), rng.random_range(0..=2usize)))
            .collect();
        let atoms: usize = sig.values().map(|&a| n.pow(a as u32)).sum();
        if atoms <= max_atoms {
            return Domain::new(roster, room, sig).unwrap();
        }
    }
}

fn random_atom(rng: &mut impl Rng, d: &Domain, bound: u32) -> Formula {
    let preds: Vec<(&String, &usize)> = d.signature().iter().collect();
    let (pred, &arity) = preds[rng.random_range(0..preds.len())];
    let args = (0..arity)
        .map(|_| {
            if bound > 0 && rng.random_bool(0.6) {
                Term::Var(rng.random_range(0..bound))
            } else {
                Term::c(d.roster()[rng.random_range(0..d.roster().len())].clone())
            }
        })
        .collect();
    Formula::atom(pred.clone(), args)
}

pub fn random_formula(rng: &mut impl Rng, d: &Domain, depth: u32, bound: u32) -> Formula {
    if depth == 0 || rng.random_bool(0.3) {
        let a = random_atom(rng, d, bound);
        return if rng.random_bool(0.5) { Formula::not(a) } else { a };
    }
    let sub = |rng: &mut _| random_formula(rng, d, depth - 1, bound);
    match rng.random_range(0..8) {
        0 => Formula::not(sub(rng)),
        1 => Formula::And((0..rng.random_range(2..=3)).map(|_| sub(rng)).collect()),
        2 => Formula::Or((0..rng.random_range(2..=3)).map(|_| sub(rng)).collect()),
        3 => Formula::implies(sub(rng), sub(rng)),
        4 => Formula::iff(sub(rng), sub(rng)),
        q if bound < 2 => {
            let body = random_formula(rng, d, depth - 1, bound + 1);
            match q {
                5 => Formula::forall(body),
                6 => Formula::exists(body),
                _ => Formula::at_least(rng.random_range(1..=3), body),
            }
        }
        _ => Formula::Or(vec![sub(rng), sub(rng)]),
    }
}

/// `count` sourced formulas with ids 0..count.
pub fn random_instance(rng: &mut impl Rng, d: &Domain, count: usize) -> Vec<(u32, Formula)> {
    (0..count as u32)
        .map(|i| (i, random_formula(rng, d, 3, 0)))
        .collect()
}

/// Every interpretation of the domain's ground atoms, as the set of true atoms.
pub fn interpretations(d: &Domain) -> impl Iterator<Item = BTreeSet<GroundAtom>> {
    let atoms = d.ground_atoms();
    assert!(atoms.len() <= 20, "too many atoms for enumeration");
    (0u32..1 << atoms.len()).map(move |bits| {
        atoms
            .iter()
            .enumerate()
            .filter(|(i, _)| bits >> i & 1 == 1)
            .map(|(_, a)| a.clone())
            .collect()
    })
}

pub fn holds(f: &Formula, d: &Domain, truth: &BTreeSet<GroundAtom>) -> bool {
    semantics::evaluate(f, d, &|a| truth.contains(a))
}

/// Satisfiability by trying every interpretation.
pub fn semantic_sat(formulas: &[&Formula], d: &Domain) -> bool {
    interpretations(d).any(|t| formulas.iter().all(|f| holds(f, d, &t)))
}

fn collect_atoms(f: &Formula, d: &Domain, env: &mut Vec<String>, out: &mut BTreeSet<GroundAtom>) {
    match f {
        Formula::Atom(a) => {
            if a.pred == haystack_core::logic::IN_ROOM {
                return;
            }
            let args = a
                .args
                .iter()
                .map(|t| match t {
                    Term::Const(c) => c.clone(),
                    Term::Var(v) => env[*v as usize].clone(),
                })
                .collect();
            out.insert(GroundAtom::new(a.pred.clone(), args));
        }
        Formula::Not(g) => collect_atoms(g, d, env, out),
        Formula::And(gs) | Formula::Or(gs) => gs.iter().for_each(|g| collect_atoms(g, d, env, out)),
        Formula::Implies(a, b) | Formula::Iff(a, b) => {
            collect_atoms(a, d, env, out);
            collect_atoms(b, d, env, out);
        }
        Formula::ForallInRoom(g) | Formula::ExistsInRoom(g) | Formula::AtLeastK(_, g) => {
            for c in d.room() {
                env.push(c.clone());
                collect_atoms(g, d, env, out);
                env.pop();
            }
        }
    }
}

/// Ground atoms whose value can matter to `formulas`.
pub fn relevant_atoms(formulas: &[&Formula], d: &Domain) -> Vec<GroundAtom> {
    let mut out = BTreeSet::new();
    for f in formulas {
        collect_atoms(f, d, &mut Vec::new(), &mut out);
    }
    out.into_iter().collect()
}

/// Every minimal subset of `premise` (as a bit mask) that is unsatisfiable
/// together with `hypothesis`, by enumerating interpretations of the
/// relevant atoms. `None` when there are more than `max_atoms` of them.
pub fn minimal_unsat_subsets(
    premise: &[&Formula],
    hypothesis: &Formula,
    d: &Domain,
    max_atoms: usize,
) -> Option<Vec<u32>> {
    let n = premise.len();
    assert!(n <= 20);
    let mut all: Vec<&Formula> = premise.to_vec();
    all.push(hypothesis);
    let atoms = relevant_atoms(&all, d);
    if atoms.len() > max_atoms {
        return None;
    }
    // achievable[m]: some model of the hypothesis satisfies every clause in m.
    let mut achievable = vec![false; 1 << n];
    for bits in 0u64..1 << atoms.len() {
        let truth: BTreeSet<GroundAtom> = atoms
            .iter()
            .enumerate()
            .filter(|(i, _)| bits >> i & 1 == 1)
            .map(|(_, a)| a.clone())
            .collect();
        if !holds(hypothesis, d, &truth) {
            continue;
        }
        let mask = premise
            .iter()
            .enumerate()
            .filter(|(_, f)| holds(f, d, &truth))
            .fold(0u32, |m, (i, _)| m | 1 << i);
        achievable[mask as usize] = true;
    }
    // Close downwards: a subset of a satisfiable set is satisfiable.
    for bit in 0..n {
        for m in (0..1usize << n).rev() {
            if m >> bit & 1 == 0 && achievable[m | 1 << bit] {
                achievable[m] = true;
            }
        }
    }
    let minimal = (0..1u32 << n)
        .filter(|&m| !achievable[m as usize])
        .filter(|&m| (0..n).filter(|i| m >> i & 1 == 1).all(|i| achievable[(m & !(1 << i)) as usize]))
        .collect();
    Some(minimal)
}

/// Certified examples mined from small stage-0 premises (at most 20
/// clauses over a tiny vocabulary), enough for subset enumeration.
pub fn small_certified(
    wanted: usize,
    seed: u64,
) -> (
    haystack_core::forge::Grammar,
    Vec<(haystack_core::merge::StageFormula, haystack_core::evidence::CertifiedExample)>,
) {
    use haystack_core::evidence::{mine, MineConfig};
    use haystack_core::forge::{Grammar, GrammarConfig};
    use haystack_core::merge::base_formula;
    use haystack_core::sat::SolveConfig;

    let grammar = Grammar::builtin(GrammarConfig {
        seed,
        names: 3,
        unary: 3,
        binary: 1,
        propositions: 2,
        room_size: 2,
        ..GrammarConfig::default()
    })
    .unwrap();
    let cfg = MineConfig {
        hypotheses_per_premise: 24,
        seed,
        ..MineConfig::default()
    };
    let mut out = Vec::new();
    for index in 0..10_000u32 {
        if out.len() >= wanted {
            break;
        }
        let size = 12 + (index as usize % 9);
        let premise = base_formula(&grammar, index, size, seed, &SolveConfig::default()).unwrap();
        let (examples, _) = mine(std::slice::from_ref(&premise), &grammar, &cfg).unwrap();
        for e in examples {
            out.push((premise.clone(), e));
        }
    }
    out.truncate(wanted);
    (grammar, out)
}
