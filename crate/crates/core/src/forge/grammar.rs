use std::collections::BTreeMap;

use rand::seq::{IndexedRandom, SliceRandom};
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::lexicon::Lexicon;
use crate::logic::{negate, Domain, Formula, Term, DEFAULT_MAX_DEPTH, IN_ROOM};
use crate::seed;
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Category {
    Fact,
    NegatedFact,
    GuardedConditional,
    GuardedBiconditional,
    Existential,
    AtLeastK,
    RelationalFact,
    PropositionalCompound,
}

impl Category {
    pub const ALL: [Category; 8] = [
        Category::Fact,
        Category::NegatedFact,
        Category::GuardedConditional,
        Category::GuardedBiconditional,
        Category::Existential,
        Category::AtLeastK,
        Category::RelationalFact,
        Category::PropositionalCompound,
    ];
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CategoryWeights {
    pub facts: f64,
    pub negated_facts: f64,
    pub guarded_conditionals: f64,
    pub guarded_biconditionals: f64,
    pub existentials: f64,
    pub at_least_k: f64,
    pub relational_facts: f64,
    pub propositional_compounds: f64,
}

impl Default for CategoryWeights {
    fn default() -> Self {
        CategoryWeights {
            facts: 1.0,
            negated_facts: 1.0,
            guarded_conditionals: 1.0,
            guarded_biconditionals: 1.0,
            existentials: 1.0,
            at_least_k: 1.0,
            relational_facts: 1.0,
            propositional_compounds: 1.0,
        }
    }
}

impl CategoryWeights {
    fn get(&self, c: Category) -> f64 {
        match c {
            Category::Fact => self.facts,
            Category::NegatedFact => self.negated_facts,
            Category::GuardedConditional => self.guarded_conditionals,
            Category::GuardedBiconditional => self.guarded_biconditionals,
            Category::Existential => self.existentials,
            Category::AtLeastK => self.at_least_k,
            Category::RelationalFact => self.relational_facts,
            Category::PropositionalCompound => self.propositional_compounds,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GrammarConfig {
    pub seed: u64,
    pub names: usize,
    pub unary: usize,
    pub binary: usize,
    pub propositions: usize,
    /// People in the room; quantifiers range over them.
    pub room_size: usize,
    /// Probability that a named person is drawn from the room rather than
    /// the whole roster.
    pub room_bias: f64,
    pub weights: CategoryWeights,
    pub max_depth: usize,
}

impl Default for GrammarConfig {
    fn default() -> Self {
        GrammarConfig {
            seed: 0,
            names: 78,
            unary: 50,
            binary: 16,
            propositions: 12,
            room_size: 16,
            room_bias: 0.75,
            weights: CategoryWeights::default(),
            max_depth: DEFAULT_MAX_DEPTH,
        }
    }
}

impl GrammarConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Config(m.to_string()));
        if self.names < 2 || self.unary < 1 || self.binary < 1 || self.propositions < 1 {
            return bad("name budget must be at least 2 and predicate budgets at least 1");
        }
        if self.room_size < 1 || self.room_size > self.names {
            return bad("room size must be between 1 and the name budget");
        }
        if !(0.0..=1.0).contains(&self.room_bias) {
            return bad("room bias must lie in [0, 1]");
        }
        let ws: Vec<f64> = Category::ALL.iter().map(|&c| self.weights.get(c)).collect();
        if ws.iter().any(|w| !w.is_finite() || *w < 0.0) || ws.iter().all(|w| *w == 0.0) {
            return bad("category weights must be non-negative and not all zero");
        }
        if self.max_depth < 3 {
            return bad("max depth must be at least 3");
        }
        Ok(())
    }
}

/// Where a clause came from: the stage-0 formula and its index there.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Origin {
    pub base: u32,
    pub index: u32,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SourcedClause {
    pub id: u32,
    pub english: String,
    pub formula: Formula,
    pub stage: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub origin: Option<Origin>,
}

/// A property of a person, possibly negated: `is rich`, `is not liked by Gary`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Property {
    Unary { pred: String, positive: bool },
    Binary { pred: String, object: String, positive: bool },
}

impl Property {
    pub fn pred(&self) -> &str {
        match self {
            Property::Unary { pred, .. } | Property::Binary { pred, .. } => pred,
        }
    }

    pub fn formula(&self, subject: Term) -> Formula {
        let (atom, positive) = match self {
            Property::Unary { pred, positive } => (Formula::unary(pred, subject), *positive),
            Property::Binary { pred, object, positive } => {
                (Formula::binary(pred, subject, Term::c(object)), *positive)
            }
        };
        if positive {
            atom
        } else {
            Formula::not(atom)
        }
    }
}

/// A closed literal: a property of a named person or a standalone proposition.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Statement {
    Person { subject: String, property: Property },
    Sentence { pred: String, positive: bool },
}

impl Statement {
    pub fn formula(&self) -> Formula {
        match self {
            Statement::Person { subject, property } => property.formula(Term::c(subject)),
            Statement::Sentence { pred, positive } => {
                if *positive {
                    Formula::prop(pred)
                } else {
                    Formula::not(Formula::prop(pred))
                }
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Connective {
    /// `"A" or "B" or both`
    Or,
    /// `"A" or "B" but not both`
    Xor,
    /// `if "A" then "B"`
    Implies,
    /// `"A" if "B" and vice versa`
    Iff,
    /// `neither "A" nor "B"`
    Nor,
}

/// Clause templates. Each renders to one English line and one formula.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Shape {
    Statement(Statement),
    /// `A and B hate each other`
    Mutual { a: String, b: String, pred: String },
    /// `everyone in the room who P Q`
    Conditional { condition: Property, consequence: Property },
    /// `not everyone in the room who P Q`
    NotAllConditional { condition: Property, consequence: Property },
    /// `everyone in the room Q if they P and vice versa`
    Biconditional { condition: Property, consequence: Property },
    /// `someone in the room P`
    Someone(Property),
    /// `not everyone in the room P`
    NotEveryone(Property),
    /// `at least two persons in the room P`, or `more than one person ...`
    AtLeast { k: u8, property: Property, more_than: bool },
    Compound { op: Connective, left: Statement, right: Statement },
    /// `it is not the case that "A"`
    NotTheCase(Statement),
    /// `Mary either P or Q but not both`
    Either { subject: String, left: Property, right: Property },
    /// `Mary neither P nor Q`
    Neither { subject: String, left: Property, right: Property },
}

impl Shape {
    pub fn formula(&self) -> Formula {
        let x = || Term::Var(0);
        match self {
            Shape::Statement(s) => s.formula(),
            Shape::Mutual { a, b, pred } => Formula::And(vec![
                Formula::binary(pred, Term::c(a), Term::c(b)),
                Formula::binary(pred, Term::c(b), Term::c(a)),
            ]),
            Shape::Conditional { condition, consequence } => {
                Formula::forall(Formula::implies(condition.formula(x()), consequence.formula(x())))
            }
            Shape::NotAllConditional { condition, consequence } => Formula::not(Formula::forall(
                Formula::implies(condition.formula(x()), consequence.formula(x())),
            )),
            Shape::Biconditional { condition, consequence } => {
                Formula::forall(Formula::iff(condition.formula(x()), consequence.formula(x())))
            }
            Shape::Someone(p) => Formula::exists(p.formula(x())),
            Shape::NotEveryone(p) => Formula::not(Formula::forall(p.formula(x()))),
            Shape::AtLeast { k, property, .. } => Formula::at_least(*k, property.formula(x())),
            Shape::Compound { op, left, right } => {
                let (l, r) = (left.formula(), right.formula());
                match op {
                    Connective::Or => Formula::Or(vec![l, r]),
                    Connective::Xor => Formula::not(Formula::iff(l, r)),
                    Connective::Implies => Formula::implies(l, r),
                    Connective::Iff => Formula::iff(l, r),
                    Connective::Nor => Formula::And(vec![negate(&l), negate(&r)]),
                }
            }
            Shape::NotTheCase(s) => Formula::not(s.formula()),
            Shape::Either { subject, left, right } => {
                let s = || Term::c(subject);
                Formula::not(Formula::iff(left.formula(s()), right.formula(s())))
            }
            Shape::Neither { subject, left, right } => {
                let s = || Term::c(subject);
                Formula::And(vec![negate(&left.formula(s())), negate(&right.formula(s()))])
            }
        }
    }
}

struct PhrasePair {
    positive: String,
    negative: String,
}

/// Lexicon, domain and realization tables for one generation run.
#[derive(Clone, Debug)]
pub struct Grammar {
    config: GrammarConfig,
    lexicon: Lexicon,
    domain: Domain,
    display: BTreeMap<String, String>,
}

impl Grammar {
    pub fn new(config: GrammarConfig, lexicon: &Lexicon) -> Result<Self> {
        config.validate()?;
        let lexicon = lexicon.truncated(config.names, config.unary, config.binary, config.propositions)?;
        let roster: Vec<String> = lexicon.names.iter().map(|n| n.symbol.clone()).collect();
        let mut rng = seed::rng_for(config.seed, "room");
        let mut picks: Vec<usize> = rand::seq::index::sample(&mut rng, roster.len(), config.room_size).into_vec();
        picks.sort_unstable();
        let room = picks.iter().map(|&i| roster[i].clone()).collect();
        let mut signature = BTreeMap::new();
        for e in &lexicon.unary {
            signature.insert(e.symbol.clone(), 1);
        }
        for e in &lexicon.binary {
            signature.insert(e.symbol.clone(), 2);
        }
        for e in &lexicon.propositions {
            signature.insert(e.symbol.clone(), 0);
        }
        let domain = Domain::new(roster, room, signature)?;
        let display = lexicon.names.iter().map(|n| (n.symbol.clone(), n.display.clone())).collect();
        Ok(Grammar {
            config,
            lexicon,
            domain,
            display,
        })
    }

    pub fn builtin(config: GrammarConfig) -> Result<Self> {
        Grammar::new(config, &Lexicon::builtin())
    }

    pub fn config(&self) -> &GrammarConfig {
        &self.config
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn lexicon(&self) -> &Lexicon {
        &self.lexicon
    }

    /// Display form of a person symbol (`mary` → `Mary`).
    pub fn name(&self, symbol: &str) -> String {
        self.display.get(symbol).cloned().unwrap_or_else(|| symbol.to_string())
    }

    fn person_phrases(&self, p: &Property) -> PhrasePair {
        match p {
            Property::Unary { pred, .. } => {
                let e = self.lexicon.unary.iter().find(|e| &e.symbol == pred);
                match e {
                    Some(e) => PhrasePair {
                        positive: e.positive.clone(),
                        negative: e.negative.clone(),
                    },
                    None => PhrasePair {
                        positive: format!("is {pred}"),
                        negative: format!("is not {pred}"),
                    },
                }
            }
            Property::Binary { pred, object, .. } => {
                let y = self.name(object);
                match self.lexicon.binary.iter().find(|e| &e.symbol == pred) {
                    Some(e) => PhrasePair {
                        positive: e.positive.replace("{y}", &y),
                        negative: e.negative.replace("{y}", &y),
                    },
                    None => PhrasePair {
                        positive: format!("is {pred} {y}"),
                        negative: format!("is not {pred} {y}"),
                    },
                }
            }
        }
    }

    pub fn verb_phrase(&self, p: &Property) -> String {
        let pair = self.person_phrases(p);
        let positive = match p {
            Property::Unary { positive, .. } | Property::Binary { positive, .. } => *positive,
        };
        if positive {
            pair.positive
        } else {
            pair.negative
        }
    }

    pub fn statement(&self, s: &Statement) -> String {
        match s {
            Statement::Person { subject, property } => {
                format!("{} {}", self.name(subject), self.verb_phrase(property))
            }
            Statement::Sentence { pred, positive } => {
                match self.lexicon.propositions.iter().find(|e| &e.symbol == pred) {
                    Some(e) if *positive => e.positive.clone(),
                    Some(e) => e.negative.clone(),
                    None if *positive => format!("{pred} holds"),
                    None => format!("{pred} does not hold"),
                }
            }
        }
    }

    pub fn render(&self, shape: &Shape) -> String {
        let q = |s: &Statement| format!("\u{201c}{}\u{201d}", self.statement(s));
        match shape {
            Shape::Statement(s) => self.statement(s),
            Shape::Mutual { a, b, pred } => {
                let phrase = self
                    .lexicon
                    .binary
                    .iter()
                    .find(|e| &e.symbol == pred)
                    .and_then(|e| e.mutual.clone())
                    .unwrap_or_else(|| format!("are {pred} each other"));
                format!("{} and {} {phrase}", self.name(a), self.name(b))
            }
            Shape::Conditional { condition, consequence } => format!(
                "everyone in the room who {} {}",
                self.verb_phrase(condition),
                self.verb_phrase(consequence)
            ),
            Shape::NotAllConditional { condition, consequence } => format!(
                "not everyone in the room who {} {}",
                self.verb_phrase(condition),
                self.verb_phrase(consequence)
            ),
            Shape::Biconditional { condition, consequence } => format!(
                "everyone in the room {} if they {} and vice versa",
                self.verb_phrase(consequence),
                self.verb_phrase(condition)
            ),
            Shape::Someone(p) => format!("someone in the room {}", self.verb_phrase(p)),
            Shape::NotEveryone(p) => format!("not everyone in the room {}", self.verb_phrase(p)),
            Shape::AtLeast { k, property, more_than } => {
                let who = match (k, more_than) {
                    (2, true) => "more than one person",
                    (1, _) => "at least one person",
                    (2, _) => "at least two persons",
                    _ => "at least three persons",
                };
                format!("{who} in the room {}", self.verb_phrase(property))
            }
            Shape::Compound { op, left, right } => match op {
                Connective::Or => format!("{} or {} or both", q(left), q(right)),
                Connective::Xor => format!("{} or {} but not both", q(left), q(right)),
                Connective::Implies => format!("if {} then {}", q(left), q(right)),
                Connective::Iff => format!("{} if {} and vice versa", q(left), q(right)),
                Connective::Nor => format!("neither {} nor {}", q(left), q(right)),
            },
            Shape::NotTheCase(s) => format!("it is not the case that {}", q(s)),
            Shape::Either { subject, left, right } => format!(
                "{} either {} or {} but not both",
                self.name(subject),
                self.verb_phrase(left),
                self.verb_phrase(right)
            ),
            Shape::Neither { subject, left, right } => format!(
                "{} neither {} nor {}",
                self.name(subject),
                self.verb_phrase(left),
                self.verb_phrase(right)
            ),
        }
    }

    /// A clause (id 0, stage 0) realizing `shape`.
    pub fn realize(&self, shape: &Shape) -> SourcedClause {
        SourcedClause {
            id: 0,
            english: self.render(shape),
            formula: shape.formula(),
            stage: 0,
            origin: None,
        }
    }

    /// The roster line: `A, B, ... are the only persons in the room.` The
    /// formula restates the fixed room membership and is always true.
    pub fn room_clause(&self, rng: &mut impl Rng) -> SourcedClause {
        let mut members: Vec<String> = self.domain.room().to_vec();
        members.shuffle(rng);
        let names: Vec<String> = members.iter().map(|m| self.name(m)).collect();
        let verb = if names.len() == 1 { "is the only person" } else { "are the only persons" };
        SourcedClause {
            id: 0,
            english: format!("{} {verb} in the room.", names.join(", ")),
            formula: Formula::And(members.iter().map(|m| Formula::unary(IN_ROOM, Term::c(m))).collect()),
            stage: 0,
            origin: None,
        }
    }

    fn person(&self, rng: &mut impl Rng) -> String {
        let pool = if rng.random_bool(self.config.room_bias) {
            self.domain.room()
        } else {
            self.domain.roster()
        };
        pool.choose(rng).expect("non-empty roster").clone()
    }

    fn other_person(&self, rng: &mut impl Rng, not: &str) -> String {
        loop {
            let p = self.person(rng);
            if p != not {
                return p;
            }
        }
    }

    fn unary_property(&self, rng: &mut impl Rng, positive: bool) -> Property {
        Property::Unary {
            pred: self.lexicon.unary.choose(rng).expect("unary budget ≥ 1").symbol.clone(),
            positive,
        }
    }

    fn binary_property(&self, rng: &mut impl Rng, subject: Option<&str>, positive: bool) -> Property {
        let pred = self.lexicon.binary.choose(rng).expect("binary budget ≥ 1").symbol.clone();
        let object = match subject {
            Some(s) => self.other_person(rng, s),
            None => self.person(rng),
        };
        Property::Binary { pred, object, positive }
    }

    /// Any property, unary or binary in proportion to the predicate budgets.
    fn property(&self, rng: &mut impl Rng, subject: Option<&str>) -> Property {
        let positive = rng.random_bool(0.5);
        let (u, b) = (self.lexicon.unary.len(), self.lexicon.binary.len());
        if rng.random_range(0..u + b) < u {
            self.unary_property(rng, positive)
        } else {
            self.binary_property(rng, subject, positive)
        }
    }

    fn property_pair(&self, rng: &mut impl Rng, subject: Option<&str>) -> (Property, Property) {
        let a = self.property(rng, subject);
        loop {
            let b = self.property(rng, subject);
            if b.pred() != a.pred() {
                return (a, b);
            }
        }
    }

    fn sentence(&self, rng: &mut impl Rng, positive: bool) -> Statement {
        Statement::Sentence {
            pred: self.lexicon.propositions.choose(rng).expect("proposition budget ≥ 1").symbol.clone(),
            positive,
        }
    }

    fn simple_statement(&self, rng: &mut impl Rng, positive: bool) -> Statement {
        let (u, p) = (self.lexicon.unary.len(), self.lexicon.propositions.len());
        if rng.random_range(0..u + p) < p {
            self.sentence(rng, positive)
        } else {
            Statement::Person {
                subject: self.person(rng),
                property: self.unary_property(rng, positive),
            }
        }
    }

    fn any_statement(&self, rng: &mut impl Rng) -> Statement {
        if rng.random_bool(0.5) {
            let positive = rng.random_bool(0.5);
            self.sentence(rng, positive)
        } else {
            let subject = self.person(rng);
            let property = self.property(rng, Some(&subject));
            Statement::Person { subject, property }
        }
    }

    pub fn sample_category(&self, rng: &mut impl Rng) -> Category {
        let w = &self.config.weights;
        let total: f64 = Category::ALL.iter().map(|&c| w.get(c)).sum();
        let mut x = rng.random_range(0.0..total);
        for &c in &Category::ALL {
            let wc = w.get(c);
            if x < wc {
                return c;
            }
            x -= wc;
        }
        *Category::ALL.iter().rev().find(|&&c| w.get(c) > 0.0).expect("validated weights")
    }

    pub fn sample_shape(&self, category: Category, rng: &mut impl Rng) -> Shape {
        match category {
            Category::Fact => Shape::Statement(self.simple_statement(rng, true)),
            Category::NegatedFact => Shape::Statement(self.simple_statement(rng, false)),
            Category::RelationalFact => {
                let subject = self.person(rng);
                let pred = self.lexicon.binary.choose(rng).expect("binary budget ≥ 1");
                if pred.mutual.is_some() && rng.random_bool(0.3) {
                    let b = self.other_person(rng, &subject);
                    return Shape::Mutual {
                        a: subject,
                        b,
                        pred: pred.symbol.clone(),
                    };
                }
                let object = self.other_person(rng, &subject);
                Shape::Statement(Statement::Person {
                    subject,
                    property: Property::Binary {
                        pred: pred.symbol.clone(),
                        object,
                        positive: rng.random_bool(0.5),
                    },
                })
            }
            Category::GuardedConditional => {
                let (condition, consequence) = self.property_pair(rng, None);
                if rng.random_bool(0.2) {
                    Shape::NotAllConditional { condition, consequence }
                } else {
                    Shape::Conditional { condition, consequence }
                }
            }
            Category::GuardedBiconditional => {
                let (condition, consequence) = self.property_pair(rng, None);
                Shape::Biconditional { condition, consequence }
            }
            Category::Existential => {
                let p = self.property(rng, None);
                if rng.random_bool(0.5) {
                    Shape::Someone(p)
                } else {
                    Shape::NotEveryone(p)
                }
            }
            Category::AtLeastK => {
                let max = (self.domain.room().len() as u8).clamp(1, 3);
                let k = rng.random_range(1..=max);
                Shape::AtLeast {
                    k,
                    property: self.property(rng, None),
                    more_than: k == 2 && rng.random_bool(0.5),
                }
            }
            Category::PropositionalCompound => {
                let roll: f64 = rng.random();
                if roll < 0.7 {
                    let op = *[
                        Connective::Or,
                        Connective::Xor,
                        Connective::Implies,
                        Connective::Iff,
                        Connective::Nor,
                    ]
                    .choose(rng)
                    .expect("non-empty");
                    let left = self.any_statement(rng);
                    let right = loop {
                        let r = self.any_statement(rng);
                        if r.formula() != left.formula() && r.formula() != negate(&left.formula()) {
                            break r;
                        }
                    };
                    Shape::Compound { op, left, right }
                } else if roll < 0.8 {
                    Shape::NotTheCase(self.any_statement(rng))
                } else {
                    let subject = self.person(rng);
                    let (left, right) = self.property_pair(rng, Some(&subject));
                    if roll < 0.9 {
                        Shape::Either { subject, left, right }
                    } else {
                        Shape::Neither { subject, left, right }
                    }
                }
            }
        }
    }

    pub fn generate_clause(&self, rng: &mut impl Rng) -> SourcedClause {
        let category = self.sample_category(rng);
        self.generate_category(category, rng)
    }

    pub fn generate_category(&self, category: Category, rng: &mut impl Rng) -> SourcedClause {
        self.realize(&self.sample_shape(category, rng))
    }

    /// The `index`-th clause of the stream for `seed`; independent of any
    /// other draw.
    pub fn clause_at(&self, seed: u64, index: u64) -> SourcedClause {
        self.generate_clause(&mut seed::rng_for(seed, &format!("clause/{index}")))
    }

    /// `n` stage-0 clauses with pairwise distinct English, ids `0..n`.
    pub fn generate_base_formula(&self, n: usize, seed: u64) -> Result<Vec<SourcedClause>> {
        if n == 0 {
            return Err(Error::Generation("a formula needs at least one clause".into()));
        }
        let budget = 20 * n as u64 + 100;
        let mut seen = std::collections::BTreeSet::new();
        let mut out = Vec::with_capacity(n);
        for draw in 0..budget {
            if out.len() == n {
                break;
            }
            let mut c = self.clause_at(seed, draw);
            if seen.insert(c.english.clone()) {
                c.id = out.len() as u32;
                out.push(c);
            }
        }
        if out.len() < n {
            return Err(Error::Generation(format!(
                "only {} distinct clauses after {budget} draws",
                out.len()
            )));
        }
        Ok(out)
    }

    /// Render a closed literal (atom or negated atom) as an English sentence.
    pub fn literal_english(&self, lit: &Formula) -> Option<String> {
        let (atom, positive) = match lit {
            Formula::Atom(a) => (a, true),
            Formula::Not(inner) => match &**inner {
                Formula::Atom(a) => (a, false),
                _ => return None,
            },
            _ => return None,
        };
        let consts: Option<Vec<&str>> = atom
            .args
            .iter()
            .map(|t| match t {
                Term::Const(c) => Some(c.as_str()),
                Term::Var(_) => None,
            })
            .collect();
        let s = match consts?.as_slice() {
            [] => Statement::Sentence {
                pred: atom.pred.clone(),
                positive,
            },
            [x] => Statement::Person {
                subject: x.to_string(),
                property: Property::Unary {
                    pred: atom.pred.clone(),
                    positive,
                },
            },
            [x, y] => Statement::Person {
                subject: x.to_string(),
                property: Property::Binary {
                    pred: atom.pred.clone(),
                    object: y.to_string(),
                    positive,
                },
            },
            _ => return None,
        };
        Some(self.statement(&s))
    }

    /// A single ground literal as hypothesis. With probability `reuse` its
    /// atom is lifted from a random premise clause (quantified variables
    /// replaced by room members); otherwise it is fresh. Polarity is uniform.
    pub fn sample_hypothesis(&self, premise: &[SourcedClause], reuse: f64, rng: &mut impl Rng) -> SourcedClause {
        let mut atom = None;
        if !premise.is_empty() && rng.random_bool(reuse) {
            // Atoms of compound clauses lead to longer evidence chains than
            // atoms of bare facts, so favor them.
            let compound: Vec<&SourcedClause> = premise.iter().filter(|c| !c.formula.is_literal()).collect();
            let clause = if !compound.is_empty() && rng.random_bool(0.75) {
                *compound.choose(rng).expect("non-empty")
            } else {
                premise.choose(rng).expect("non-empty premise")
            };
            let mut atoms = Vec::new();
            clause.formula.for_each_atom(&mut |a| {
                if a.pred != IN_ROOM {
                    atoms.push(a.clone());
                }
            });
            if let Some(a) = atoms.choose(rng) {
                let mut bound: BTreeMap<u32, String> = BTreeMap::new();
                let args = a
                    .args
                    .iter()
                    .map(|t| match t {
                        Term::Var(v) => Term::c(
                            bound
                                .entry(*v)
                                .or_insert_with(|| self.domain.room().choose(rng).expect("room").clone())
                                .clone(),
                        ),
                        c => c.clone(),
                    })
                    .collect();
                atom = Some(Formula::atom(a.pred.clone(), args));
            }
        }
        let atom = atom.unwrap_or_else(|| match self.any_statement(rng).formula() {
            Formula::Not(inner) => *inner,
            f => f,
        });
        let formula = if rng.random_bool(0.5) { atom } else { Formula::not(atom) };
        let english = self.literal_english(&formula).expect("ground literal");
        SourcedClause {
            id: 0,
            english,
            formula,
            stage: 0,
            origin: None,
        }
    }
}
