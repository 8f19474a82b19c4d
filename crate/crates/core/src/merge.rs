//! Satisfiable merging: concatenate two formulas, then delete clauses named
//! by unsat cores until the result is satisfiable again. Repeating this on
//! random pairs doubles the maximum formula size at every stage.

use std::collections::BTreeSet;

use rand::seq::IndexedRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::forge::{Grammar, Origin, SourcedClause};
use crate::logic::{ground, Domain, Formula};
use crate::sat::{is_core_valid_with, solve_subset, solve_with, SatVerdict, SolveConfig};
use crate::{par, seed, Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct StageConfig {
    /// Formulas per stage.
    pub k: usize,
    pub base_size: usize,
    pub max_stage: u32,
    pub seed: u64,
    pub solve: SolveConfig,
    pub self_pairing: bool,
    /// Largest tolerated fraction of failed merges in one stage.
    pub max_failure_rate: f64,
    pub workers: usize,
}

impl Default for StageConfig {
    fn default() -> Self {
        StageConfig {
            k: 16,
            base_size: 32,
            max_stage: 7,
            seed: 0,
            solve: SolveConfig {
                max_conflicts: Some(1_000_000),
                max_millis: None,
            },
            self_pairing: false,
            max_failure_rate: 0.1,
            workers: 1,
        }
    }
}

impl StageConfig {
    pub fn validate(&self) -> Result<()> {
        if self.k < 2 {
            return Err(Error::Config("at least two formulas per stage are needed".into()));
        }
        if self.base_size < 1 {
            return Err(Error::Config("base size must be at least 1".into()));
        }
        if !(0.0..=1.0).contains(&self.max_failure_rate) {
            return Err(Error::Config("failure rate must lie in [0, 1]".into()));
        }
        Ok(())
    }

    pub fn max_size(&self, stage: u32) -> usize {
        self.base_size << stage
    }
}

/// A certified-satisfiable conjunction of clauses at one ladder stage.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StageFormula {
    pub id: u32,
    pub stage: u32,
    pub clauses: Vec<SourcedClause>,
    /// Digest of the model found by the last solve.
    pub certificate: String,
}

impl StageFormula {
    pub fn len(&self) -> usize {
        self.clauses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.clauses.is_empty()
    }

    pub fn sourced(&self) -> Vec<(u32, Formula)> {
        self.clauses.iter().map(|c| (c.id, c.formula.clone())).collect()
    }
}

/// One deleted clause and the core that condemned it. Ids refer to the
/// concatenation of the two parents. Exact repeats of an earlier line are
/// dropped before solving and carry `duplicate_of` instead of a core.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Removal {
    pub step: u32,
    pub clause: u32,
    pub english: String,
    pub core: Vec<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub duplicate_of: Option<u32>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MergeLog {
    pub stage: u32,
    pub output: Option<u32>,
    pub parents: (u32, u32),
    pub seed: u64,
    pub removals: Vec<Removal>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub failure: Option<String>,
}

struct Repair {
    kept: Vec<bool>,
    removals: Vec<Removal>,
    certificate: String,
}

/// Solves, and while unsatisfiable removes one uniformly chosen core clause.
fn repair(
    clauses: &[SourcedClause],
    domain: &Domain,
    config: &SolveConfig,
    rng: &mut impl Rng,
) -> Result<Repair> {
    let sourced: Vec<(u32, Formula)> =
        clauses.iter().enumerate().map(|(i, c)| (i as u32, c.formula.clone())).collect();
    let cnf = ground(&sourced, domain)?;
    let mut kept = vec![true; clauses.len()];
    let mut removals = Vec::new();
    let mut first: std::collections::HashMap<&str, u32> = std::collections::HashMap::new();
    for (i, c) in clauses.iter().enumerate() {
        if let Some(&j) = first.get(c.english.as_str()) {
            kept[i] = false;
            removals.push(Removal {
                step: removals.len() as u32,
                clause: i as u32,
                english: c.english.clone(),
                core: Vec::new(),
                duplicate_of: Some(j),
            });
        } else {
            first.insert(&c.english, i as u32);
        }
    }
    loop {
        let (verdict, _) = solve_subset(&cnf, |s| kept[s as usize], config)?;
        match verdict {
            SatVerdict::Sat(model) => {
                return Ok(Repair {
                    kept,
                    removals,
                    certificate: model.digest(&cnf),
                })
            }
            SatVerdict::Unsat(core) => {
                let core: Vec<u32> = core.into_iter().collect();
                let Some(&victim) = core.choose(rng) else {
                    return Err(Error::Merge("empty core for an unsatisfiable formula".into()));
                };
                kept[victim as usize] = false;
                removals.push(Removal {
                    step: removals.len() as u32,
                    clause: victim,
                    english: clauses[victim as usize].english.clone(),
                    core,
                    duplicate_of: None,
                });
            }
        }
    }
}

/// A certified stage-0 formula of `size` distinct clauses. Clauses named by
/// a core are swapped for fresh draws until the conjunction is satisfiable.
pub fn base_formula(
    grammar: &Grammar,
    index: u32,
    size: usize,
    seed: u64,
    config: &SolveConfig,
) -> Result<StageFormula> {
    let stream = seed::derive(seed, &format!("base/{index}"));
    let mut clauses = grammar.generate_base_formula(size, stream)?;
    let mut surfaces: BTreeSet<String> = clauses.iter().map(|c| c.english.clone()).collect();
    let mut draw = 1u64 << 32;
    let mut rng = seed::rng_for(stream, "repair");
    for _ in 0..(10 * size + 100) {
        let fix = repair(&clauses, grammar.domain(), config, &mut rng)?;
        if fix.removals.is_empty() {
            for (i, c) in clauses.iter_mut().enumerate() {
                c.id = i as u32;
                c.stage = 0;
                c.origin = Some(Origin { base: index, index: i as u32 });
            }
            return Ok(StageFormula {
                id: index,
                stage: 0,
                clauses,
                certificate: fix.certificate,
            });
        }
        for r in &fix.removals {
            let replacement = loop {
                let c = grammar.clause_at(stream, draw);
                draw += 1;
                if !surfaces.contains(&c.english) {
                    break c;
                }
            };
            surfaces.remove(&clauses[r.clause as usize].english);
            surfaces.insert(replacement.english.clone());
            clauses[r.clause as usize] = replacement;
        }
    }
    Err(Error::Generation(format!("base formula {index} stayed unsatisfiable")))
}

pub fn base_formulas(grammar: &Grammar, stage: &StageConfig) -> Result<Vec<StageFormula>> {
    stage.validate()?;
    let ids: Vec<u32> = (0..stage.k as u32).collect();
    par::map(&ids, stage.workers, |_, &i| {
        base_formula(grammar, i, stage.base_size, stage.seed, &stage.solve)
    })
    .into_iter()
    .collect()
}

/// Merges two same-stage formulas into a satisfiable formula one stage up.
pub fn satisfiable_merge(
    a: &StageFormula,
    b: &StageFormula,
    domain: &Domain,
    seed: u64,
    config: &SolveConfig,
) -> Result<(StageFormula, Vec<Removal>)> {
    if a.stage != b.stage {
        return Err(Error::Merge(format!("stages differ: {} and {}", a.stage, b.stage)));
    }
    let joined: Vec<SourcedClause> = a.clauses.iter().chain(&b.clauses).cloned().collect();
    let fix = repair(&joined, domain, config, &mut seed::rng(seed))?;
    let stage = a.stage + 1;
    let clauses = joined
        .into_iter()
        .zip(&fix.kept)
        .filter(|(_, &k)| k)
        .enumerate()
        .map(|(i, (mut c, _))| {
            c.id = i as u32;
            c.stage = stage;
            c
        })
        .collect();
    let merged = StageFormula {
        id: 0,
        stage,
        clauses,
        certificate: fix.certificate,
    };
    Ok((merged, fix.removals))
}

/// Re-checks a merge log: every recorded core is unsatisfiable on its own,
/// contains the removed clause, and only names clauses still present.
pub fn replay_removals(
    a: &StageFormula,
    b: &StageFormula,
    removals: &[Removal],
    domain: &Domain,
    config: &SolveConfig,
) -> Result<bool> {
    let sourced: Vec<(u32, Formula)> = a
        .clauses
        .iter()
        .chain(&b.clauses)
        .enumerate()
        .map(|(i, c)| (i as u32, c.formula.clone()))
        .collect();
    let cnf = ground(&sourced, domain)?;
    let all: Vec<&SourcedClause> = a.clauses.iter().chain(&b.clauses).collect();
    let mut removed = BTreeSet::new();
    for r in removals {
        if let Some(j) = r.duplicate_of {
            let (i, j) = (r.clause as usize, j as usize);
            if j >= i || i >= all.len() || all[i].english != all[j].english || removed.contains(&(j as u32)) {
                return Ok(false);
            }
            removed.insert(r.clause);
            continue;
        }
        if !r.core.contains(&r.clause) || r.core.iter().any(|c| removed.contains(c)) {
            return Ok(false);
        }
        let core: BTreeSet<u32> = r.core.iter().copied().collect();
        if !is_core_valid_with(&cnf, &core, config)? {
            return Ok(false);
        }
        removed.insert(r.clause);
    }
    Ok(true)
}

/// Re-solves a persisted formula from scratch; true when satisfiable.
pub fn verify_formula(formula: &StageFormula, domain: &Domain, config: &SolveConfig) -> Result<bool> {
    let cnf = ground(&formula.sourced(), domain)?;
    Ok(solve_with(&cnf, config)?.0.is_sat())
}

pub struct StageResult {
    pub formulas: Vec<StageFormula>,
    pub logs: Vec<MergeLog>,
}

/// Samples `k` pairs from `current` (with replacement) and merges each.
pub fn next_stage(current: &[StageFormula], domain: &Domain, cfg: &StageConfig) -> Result<StageResult> {
    cfg.validate()?;
    let stage = current.first().map(|f| f.stage).unwrap_or(0);
    if current.len() < 2 && !cfg.self_pairing {
        return Err(Error::Merge(format!("stage {stage} has fewer than two formulas")));
    }
    let pairs: Vec<(usize, usize, u64)> = (0..cfg.k)
        .map(|j| {
            let mut rng = seed::rng_for(cfg.seed, &format!("stage/{stage}/pair/{j}"));
            let a = rng.random_range(0..current.len());
            let b = loop {
                let b = rng.random_range(0..current.len());
                if cfg.self_pairing || b != a {
                    break b;
                }
            };
            (a, b, seed::derive(cfg.seed, &format!("stage/{stage}/merge/{j}")))
        })
        .collect();
    let results = par::map(&pairs, cfg.workers, |_, &(a, b, s)| {
        satisfiable_merge(&current[a], &current[b], domain, s, &cfg.solve)
    });
    let mut formulas = Vec::new();
    let mut logs = Vec::new();
    let mut failed = 0;
    for (&(a, b, s), result) in pairs.iter().zip(results) {
        let parents = (current[a].id, current[b].id);
        match result {
            Ok((mut f, removals)) => {
                f.id = formulas.len() as u32;
                logs.push(MergeLog {
                    stage: stage + 1,
                    output: Some(f.id),
                    parents,
                    seed: s,
                    removals,
                    failure: None,
                });
                formulas.push(f);
            }
            Err(Error::Unknown(why)) => {
                failed += 1;
                logs.push(MergeLog {
                    stage: stage + 1,
                    output: None,
                    parents,
                    seed: s,
                    removals: Vec::new(),
                    failure: Some(why),
                });
            }
            Err(e) => return Err(e),
        }
    }
    if failed as f64 > cfg.max_failure_rate * cfg.k as f64 {
        return Err(Error::LadderAbort {
            stage: stage as usize + 1,
            failed,
            total: cfg.k,
        });
    }
    Ok(StageResult { formulas, logs })
}

/// Runs stages `1..=max_stage` from certified bases; `on_stage` sees each
/// stage as soon as it is complete.
pub fn run_ladder(
    bases: Vec<StageFormula>,
    domain: &Domain,
    cfg: &StageConfig,
    mut on_stage: impl FnMut(u32, &StageResult) -> Result<()>,
) -> Result<Vec<Vec<StageFormula>>> {
    cfg.validate()?;
    if bases.iter().any(|f| f.stage != 0) {
        return Err(Error::Merge("ladder bases must be stage 0".into()));
    }
    let mut stages = vec![bases];
    for i in 1..=cfg.max_stage {
        let result = next_stage(stages.last().expect("non-empty"), domain, cfg)?;
        on_stage(i, &result)?;
        stages.push(result.formulas);
    }
    Ok(stages)
}
