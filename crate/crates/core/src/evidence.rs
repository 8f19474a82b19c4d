//! Labeling premise/hypothesis pairs and certifying contradiction evidence.
//!
//! Evidence comes from the unsat core of premise ∧ hypothesis. It is kept only
//! if every member is necessary: dropping any one clause from the whole
//! premise must make the pair satisfiable. Every unsatisfiable premise subset
//! then contains all of the evidence, so the evidence is the unique minimal
//! one.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::forge::{Grammar, SourcedClause};
use crate::logic::{negate, Domain, Grounder, GroundCnf};
use crate::merge::StageFormula;
use crate::sat::{solve_subset, SatVerdict, SolveConfig};
use crate::{par, seed, Error, Result};

/// Source id reserved for the hypothesis in grounded problems.
pub const HYPOTHESIS_ID: u32 = u32::MAX;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Label {
    Contradiction,
    Entailment,
    Neutral,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Rejection {
    /// Removing this clause still leaves a contradiction.
    NotNecessary(u32),
    /// A solve ran out of budget.
    Unknown,
    Empty,
    TooMany(usize),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CertifiedExample {
    pub premise_stage: u32,
    pub premise_id: u32,
    /// Which hypothesis draw for this premise produced the example.
    pub draw: u32,
    pub hypothesis: SourcedClause,
    /// Premise clause ids, ascending.
    pub evidence: Vec<u32>,
    /// Model digest of premise ∖ {e} ∧ hypothesis, one per evidence id.
    pub certificate: Vec<String>,
}

/// The premise grounded once, ready to be paired with many hypotheses.
pub struct PreparedPremise<'d> {
    grounder: Grounder<'d>,
    surfaces: BTreeSet<String>,
    ids: BTreeSet<u32>,
}

impl<'d> PreparedPremise<'d> {
    pub fn new(clauses: &[SourcedClause], domain: &'d Domain) -> Result<Self> {
        let mut grounder = Grounder::new(domain);
        for c in clauses {
            if c.id == HYPOTHESIS_ID {
                return Err(Error::Structure("premise clause uses the reserved hypothesis id".into()));
            }
            grounder.add(c.id, &c.formula)?;
        }
        Ok(PreparedPremise {
            grounder,
            surfaces: clauses.iter().map(|c| c.english.clone()).collect(),
            ids: clauses.iter().map(|c| c.id).collect(),
        })
    }

    /// Exact-string surface filter.
    pub fn contains_surface(&self, english: &str) -> bool {
        self.surfaces.contains(english)
    }

    pub fn with(&self, hypothesis: &SourcedClause) -> Result<GroundCnf> {
        let mut g = self.grounder.clone();
        g.add(HYPOTHESIS_ID, &hypothesis.formula)?;
        Ok(g.finish())
    }

    fn with_negation(&self, hypothesis: &SourcedClause) -> Result<GroundCnf> {
        let mut g = self.grounder.clone();
        g.add(HYPOTHESIS_ID, &negate(&hypothesis.formula))?;
        Ok(g.finish())
    }

    /// Contradiction iff premise ∧ h is unsatisfiable, else entailment iff
    /// premise ∧ ¬h is, else neutral. Also returns the contradiction core.
    pub fn label(&self, hypothesis: &SourcedClause, config: &SolveConfig) -> Result<(Label, Option<BTreeSet<u32>>)> {
        let cnf = self.with(hypothesis)?;
        if let (SatVerdict::Unsat(core), _) = solve_subset(&cnf, |_| true, config)? {
            return Ok((Label::Contradiction, Some(core)));
        }
        let cnf = self.with_negation(hypothesis)?;
        match solve_subset(&cnf, |_| true, config)? {
            (SatVerdict::Unsat(_), _) => Ok((Label::Entailment, None)),
            _ => Ok((Label::Neutral, None)),
        }
    }

    /// For each evidence id, solve premise ∖ {e} ∧ h; accept iff all are SAT.
    pub fn certify(
        &self,
        hypothesis: &SourcedClause,
        evidence: &BTreeSet<u32>,
        config: &SolveConfig,
    ) -> Result<std::result::Result<Vec<String>, Rejection>> {
        if evidence.is_empty() {
            return Ok(Err(Rejection::Empty));
        }
        if let Some(&id) = evidence.iter().find(|id| !self.ids.contains(id)) {
            return Err(Error::UnknownSource(id));
        }
        let cnf = self.with(hypothesis)?;
        let mut digests = Vec::with_capacity(evidence.len());
        for &e in evidence {
            match solve_subset(&cnf, |s| s != e, config) {
                Ok((SatVerdict::Sat(model), _)) => digests.push(model.digest(&cnf)),
                Ok((SatVerdict::Unsat(_), _)) => return Ok(Err(Rejection::NotNecessary(e))),
                Err(Error::Unknown(_)) => return Ok(Err(Rejection::Unknown)),
                Err(err) => return Err(err),
            }
        }
        Ok(Ok(digests))
    }
}

pub fn label_pair(
    premise: &[SourcedClause],
    hypothesis: &SourcedClause,
    domain: &Domain,
    config: &SolveConfig,
) -> Result<Label> {
    Ok(PreparedPremise::new(premise, domain)?.label(hypothesis, config)?.0)
}

/// Premise-side ids of an unsat core of premise ∧ hypothesis.
pub fn sufficient_evidence(
    premise: &[SourcedClause],
    hypothesis: &SourcedClause,
    domain: &Domain,
    config: &SolveConfig,
) -> Result<BTreeSet<u32>> {
    let prepared = PreparedPremise::new(premise, domain)?;
    let cnf = prepared.with(hypothesis)?;
    match solve_subset(&cnf, |_| true, config)? {
        (SatVerdict::Unsat(mut core), _) => {
            core.remove(&HYPOTHESIS_ID);
            Ok(core)
        }
        _ => Err(Error::Structure("the pair is not a contradiction".into())),
    }
}

pub fn certify_necessity(
    premise: &[SourcedClause],
    hypothesis: &SourcedClause,
    evidence: &BTreeSet<u32>,
    domain: &Domain,
    config: &SolveConfig,
) -> Result<std::result::Result<Vec<String>, Rejection>> {
    PreparedPremise::new(premise, domain)?.certify(hypothesis, evidence, config)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MineConfig {
    pub hypotheses_per_premise: usize,
    /// Probability of lifting the hypothesis atom from a premise clause.
    pub reuse: f64,
    pub evidence_counts: Vec<usize>,
    pub seed: u64,
    pub solve: SolveConfig,
    pub workers: usize,
}

impl Default for MineConfig {
    fn default() -> Self {
        MineConfig {
            hypotheses_per_premise: 32,
            reuse: 0.9,
            evidence_counts: vec![1, 2, 3],
            seed: 0,
            solve: SolveConfig {
                max_conflicts: Some(1_000_000),
                max_millis: None,
            },
            workers: 1,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct MineStats {
    pub drawn: usize,
    pub surface_duplicates: usize,
    pub repeated_hypotheses: usize,
    pub contradictions: usize,
    pub entailments: usize,
    pub neutrals: usize,
    pub unknown: usize,
    pub not_necessary: usize,
    pub evidence_out_of_range: usize,
    pub certified: usize,
}

impl MineStats {
    fn add(&mut self, o: &MineStats) {
        self.drawn += o.drawn;
        self.surface_duplicates += o.surface_duplicates;
        self.repeated_hypotheses += o.repeated_hypotheses;
        self.contradictions += o.contradictions;
        self.entailments += o.entailments;
        self.neutrals += o.neutrals;
        self.unknown += o.unknown;
        self.not_necessary += o.not_necessary;
        self.evidence_out_of_range += o.evidence_out_of_range;
        self.certified += o.certified;
    }
}

fn mine_premise(
    premise: &StageFormula,
    grammar: &Grammar,
    cfg: &MineConfig,
) -> Result<(Vec<CertifiedExample>, MineStats)> {
    let prepared = PreparedPremise::new(&premise.clauses, grammar.domain())?;
    let mut stats = MineStats::default();
    let mut out = Vec::new();
    let mut tried = BTreeSet::new();
    for draw in 0..cfg.hypotheses_per_premise as u32 {
        stats.drawn += 1;
        let label = format!("mine/{}/{}/{draw}", premise.stage, premise.id);
        let hypothesis = grammar.sample_hypothesis(&premise.clauses, cfg.reuse, &mut seed::rng_for(cfg.seed, &label));
        if prepared.contains_surface(&hypothesis.english) {
            stats.surface_duplicates += 1;
            continue;
        }
        if !tried.insert(hypothesis.english.clone()) {
            stats.repeated_hypotheses += 1;
            continue;
        }
        let core = match prepared.label(&hypothesis, &cfg.solve) {
            Ok((Label::Contradiction, core)) => {
                stats.contradictions += 1;
                core.unwrap_or_default()
            }
            Ok((Label::Entailment, _)) => {
                stats.entailments += 1;
                continue;
            }
            Ok((Label::Neutral, _)) => {
                stats.neutrals += 1;
                continue;
            }
            Err(Error::Unknown(_)) => {
                stats.unknown += 1;
                continue;
            }
            Err(e) => return Err(e),
        };
        let evidence: BTreeSet<u32> = core.into_iter().filter(|&s| s != HYPOTHESIS_ID).collect();
        if !cfg.evidence_counts.contains(&evidence.len()) {
            stats.evidence_out_of_range += 1;
            continue;
        }
        match prepared.certify(&hypothesis, &evidence, &cfg.solve)? {
            Ok(certificate) => {
                stats.certified += 1;
                out.push(CertifiedExample {
                    premise_stage: premise.stage,
                    premise_id: premise.id,
                    draw,
                    hypothesis,
                    evidence: evidence.into_iter().collect(),
                    certificate,
                });
            }
            Err(Rejection::Unknown) => stats.unknown += 1,
            Err(_) => stats.not_necessary += 1,
        }
    }
    Ok((out, stats))
}

/// Samples hypotheses for every premise and keeps the certified
/// contradictions, ordered by (premise, draw).
pub fn mine(
    premises: &[StageFormula],
    grammar: &Grammar,
    cfg: &MineConfig,
) -> Result<(Vec<CertifiedExample>, MineStats)> {
    let results = par::map(premises, cfg.workers, |_, p| mine_premise(p, grammar, cfg));
    let mut examples = Vec::new();
    let mut stats = MineStats::default();
    for r in results {
        let (ex, st) = r?;
        examples.extend(ex);
        stats.add(&st);
    }
    Ok((examples, stats))
}

/// Re-checks a released example against its premise: surface filter,
/// sufficiency of the evidence alone, and necessity of every member.
pub fn audit_example(
    premise: &[SourcedClause],
    hypothesis: &SourcedClause,
    evidence: &BTreeSet<u32>,
    domain: &Domain,
    config: &SolveConfig,
) -> Result<std::result::Result<(), String>> {
    if premise.iter().any(|c| c.english == hypothesis.english) {
        return Ok(Err("hypothesis surface occurs in the premise".into()));
    }
    if !(1..=3).contains(&evidence.len()) {
        return Ok(Err(format!("{} evidence clauses", evidence.len())));
    }
    let prepared = PreparedPremise::new(premise, domain)?;
    let cnf = prepared.with(hypothesis)?;
    let (alone, _) = solve_subset(&cnf, |s| s == HYPOTHESIS_ID || evidence.contains(&s), config)?;
    if alone.is_sat() {
        return Ok(Err("evidence with the hypothesis is satisfiable".into()));
    }
    match prepared.certify(hypothesis, evidence, config)? {
        Ok(_) => Ok(Ok(())),
        Err(Rejection::NotNecessary(e)) => Ok(Err(format!("clause {e} is not necessary"))),
        Err(r) => Ok(Err(format!("{r:?}"))),
    }
}

#[cfg(test)]
mod tests {
    use std::collections::BTreeMap;

    use super::*;
    use crate::forge::GrammarConfig;
    use crate::logic::{Formula, Term};
    use crate::merge::base_formulas;
    use crate::merge::StageConfig;

    fn clause(id: u32, english: &str, formula: Formula) -> SourcedClause {
        SourcedClause {
            id,
            english: english.into(),
            formula,
            stage: 0,
            origin: None,
        }
    }

    fn intro() -> (Domain, Vec<SourcedClause>) {
        let sig = BTreeMap::from([("happy".to_string(), 1), ("rich".to_string(), 1)]);
        let d = Domain::everyone_in_room(vec!["mary".into(), "nina".into(), "paul".into()], sig).unwrap();
        let x = || Term::Var(0);
        let premise = vec![
            clause(
                0,
                "Everyone who is happy is rich.",
                Formula::forall(Formula::implies(Formula::unary("happy", x()), Formula::unary("rich", x()))),
            ),
            clause(1, "Mary is happy.", Formula::unary("happy", Term::c("mary"))),
            clause(2, "Nina is rich.", Formula::unary("rich", Term::c("nina"))),
        ];
        (d, premise)
    }

    fn rich(name: &str, positive: bool) -> SourcedClause {
        let atom = Formula::unary("rich", Term::c(name));
        clause(HYPOTHESIS_ID, name, if positive { atom } else { Formula::not(atom) })
    }

    #[test]
    fn intro_labels() {
        let (d, p) = intro();
        let cfg = SolveConfig::default();
        assert_eq!(label_pair(&p, &rich("mary", false), &d, &cfg).unwrap(), Label::Contradiction);
        assert_eq!(label_pair(&p, &rich("mary", true), &d, &cfg).unwrap(), Label::Entailment);
        assert_eq!(label_pair(&p, &rich("paul", true), &d, &cfg).unwrap(), Label::Neutral);
    }

    #[test]
    fn intro_evidence_is_certified() {
        let (d, p) = intro();
        let cfg = SolveConfig::default();
        let h = rich("mary", false);
        let ev = sufficient_evidence(&p, &h, &d, &cfg).unwrap();
        assert_eq!(ev, BTreeSet::from([0, 1]));
        let cert = certify_necessity(&p, &h, &ev, &d, &cfg).unwrap().unwrap();
        assert_eq!(cert.len(), 2);
        assert_eq!(
            certify_necessity(&p, &h, &BTreeSet::new(), &d, &cfg).unwrap(),
            Err(Rejection::Empty)
        );
        assert_eq!(audit_example(&p, &h, &ev, &d, &cfg).unwrap(), Ok(()));
    }

    #[test]
    fn redundant_evidence_is_rejected() {
        let (d, mut p) = intro();
        p.push(clause(3, "Mary is not rich.", Formula::not(Formula::unary("rich", Term::c("mary")))));
        let cfg = SolveConfig::default();
        let h = rich("mary", true);
        // Both {0,1} and {3} contradict the hypothesis, so nothing is necessary.
        let ev = BTreeSet::from([0, 1, 3]);
        assert!(matches!(certify_necessity(&p, &h, &ev, &d, &cfg).unwrap(), Err(Rejection::NotNecessary(_))));
    }

    #[test]
    fn direct_negation_is_a_singleton() {
        let (d, p) = intro();
        let h = rich("nina", false);
        let ev = sufficient_evidence(&p, &h, &d, &SolveConfig::default()).unwrap();
        assert_eq!(ev, BTreeSet::from([2]));
    }

    #[test]
    fn mining_is_deterministic_and_sound() {
        let g = Grammar::builtin(GrammarConfig {
            room_size: 4,
            ..GrammarConfig::default()
        })
        .unwrap();
        let stage = StageConfig {
            k: 3,
            base_size: 24,
            seed: 5,
            ..StageConfig::default()
        };
        let premises = base_formulas(&g, &stage).unwrap();
        let cfg = MineConfig {
            seed: 2,
            ..MineConfig::default()
        };
        let (a, stats) = mine(&premises, &g, &cfg).unwrap();
        let (b, _) = mine(&premises, &g, &cfg).unwrap();
        assert_eq!(a, b);
        assert_eq!(stats.certified, a.len());
        assert!(!a.is_empty(), "{stats:?}");
        for ex in &a {
            let premise = &premises[ex.premise_id as usize].clauses;
            let ev: BTreeSet<u32> = ex.evidence.iter().copied().collect();
            assert_eq!(audit_example(premise, &ex.hypothesis, &ev, g.domain(), &cfg.solve).unwrap(), Ok(()));
        }
    }
}
