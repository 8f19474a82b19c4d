//! Dataset variants: distractor subsampling to a size ladder, corpus padding,
//! and hiding the hypothesis inside the premise.

mod io;
mod text;

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

pub use io::{read_dataset, read_jsonl, write_atomic, write_dataset, write_jsonl};
pub use text::{split_sentences, PaddingCorpus};

use crate::evidence::{audit_example, CertifiedExample};
use crate::forge::{Grammar, SourcedClause};
use crate::logic::{Domain, Formula};
use crate::merge::StageFormula;
use crate::sat::SolveConfig;
use crate::{seed, Error, Result};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Standard,
    Padded,
    Embedded,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Standard => "standard",
            Mode::Padded => "padded",
            Mode::Embedded => "embedded",
        }
    }
}

impl std::str::FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "standard" => Ok(Mode::Standard),
            "padded" => Ok(Mode::Padded),
            "embedded" => Ok(Mode::Embedded),
            _ => Err(Error::Config(format!("unknown mode `{s}`"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Line {
    pub id: String,
    pub text: String,
}

pub fn line_id(i: usize) -> String {
    format!("L{i}")
}

/// Index of an `L{i}` identifier.
pub fn line_index(id: &str) -> Option<usize> {
    let digits = id.strip_prefix('L')?;
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    digits.parse().ok()
}

/// Sorts line ids by their numeric index.
pub fn sort_ids(ids: &mut [String]) {
    ids.sort_by_key(|id| (line_index(id).unwrap_or(usize::MAX), id.clone()));
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    pub premise_stage: u32,
    pub premise_id: u32,
    pub draw: u32,
    pub seed: u64,
    /// Formula behind each line; `None` for padding sentences.
    pub formulas: Vec<Option<Formula>>,
    pub hypothesis_formula: Formula,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hypothesis_line: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub room_line: Option<usize>,
    pub domain: Domain,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HaystackExample {
    pub version: u32,
    pub id: String,
    pub mode: Mode,
    pub n: usize,
    pub k: usize,
    pub lines: Vec<Line>,
    pub hypothesis: String,
    pub gold: Vec<String>,
    pub provenance: Provenance,
    pub generator_seed: u64,
}

impl HaystackExample {
    pub fn gold_set(&self) -> BTreeSet<String> {
        self.gold.iter().cloned().collect()
    }

    /// Premise lines joined as `L{i}: text`, one per line.
    pub fn premise_text(&self) -> String {
        self.lines
            .iter()
            .map(|l| format!("{}: {}", l.id, l.text))
            .collect::<Vec<_>>()
            .join("\n")
    }

    /// Evidence count before the hypothesis line was embedded.
    pub fn evidence_count(&self) -> usize {
        self.k - usize::from(self.provenance.hypothesis_line.is_some())
    }
}

fn example_id(ex: &CertifiedExample, n: usize, mode: Mode) -> String {
    format!("s{}p{}d{}-n{n}-{}", ex.premise_stage, ex.premise_id, ex.draw, mode.as_str())
}

fn renumber(texts: Vec<String>) -> Vec<Line> {
    texts
        .into_iter()
        .enumerate()
        .map(|(i, text)| Line { id: line_id(i), text })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SubsampleOptions {
    /// Adds the "... are the only persons in the room." line.
    pub room_line: bool,
}

impl Default for SubsampleOptions {
    fn default() -> Self {
        SubsampleOptions { room_line: true }
    }
}

/// Keeps every evidence clause plus uniformly chosen distractors, in premise
/// order, for `n` lines in total (the room line counts as one).
pub fn subsample(
    example: &CertifiedExample,
    premise: &StageFormula,
    grammar: &Grammar,
    n: usize,
    seed: u64,
    options: &SubsampleOptions,
) -> Result<HaystackExample> {
    if premise.stage != example.premise_stage || premise.id != example.premise_id {
        return Err(Error::Haystack("premise does not match the example".into()));
    }
    let room = usize::from(options.room_line);
    let k = example.evidence.len();
    if n < k + room {
        return Err(Error::Haystack(format!("size {n} cannot hold {k} evidence lines")));
    }
    if n > premise.len() + room {
        return Err(Error::Haystack(format!(
            "size {n} exceeds the premise's {} clauses",
            premise.len()
        )));
    }
    let evidence: BTreeSet<u32> = example.evidence.iter().copied().collect();
    let distractors: Vec<usize> = (0..premise.len())
        .filter(|&i| !evidence.contains(&premise.clauses[i].id))
        .collect();
    let label = format!("subsample/{}/{}/{}/{n}", example.premise_stage, example.premise_id, example.draw);
    let mut rng = seed::rng_for(seed, &label);
    let take = n - k - room;
    let mut keep: Vec<usize> = rand::seq::index::sample(&mut rng, distractors.len(), take)
        .into_iter()
        .map(|i| distractors[i])
        .collect();
    keep.extend((0..premise.len()).filter(|&i| evidence.contains(&premise.clauses[i].id)));
    keep.sort_unstable();
    let mut chosen: Vec<SourcedClause> = keep.iter().map(|&i| premise.clauses[i].clone()).collect();
    let mut room_line = None;
    if options.room_line {
        let at = rng.random_range(0..=chosen.len());
        chosen.insert(at, grammar.room_clause(&mut rng));
        room_line = Some(at);
    }
    let gold: Vec<String> = chosen
        .iter()
        .enumerate()
        .filter(|(i, c)| Some(*i) != room_line && evidence.contains(&c.id))
        .map(|(i, _)| line_id(i))
        .collect();
    Ok(HaystackExample {
        version: SCHEMA_VERSION,
        id: example_id(example, n, Mode::Standard),
        mode: Mode::Standard,
        n,
        k,
        lines: renumber(chosen.iter().map(|c| c.english.clone()).collect()),
        hypothesis: example.hypothesis.english.clone(),
        gold,
        provenance: Provenance {
            premise_stage: example.premise_stage,
            premise_id: example.premise_id,
            draw: example.draw,
            seed,
            formulas: chosen.into_iter().map(|c| Some(c.formula)).collect(),
            hypothesis_formula: example.hypothesis.formula.clone(),
            hypothesis_line: None,
            room_line,
            domain: grammar.domain().clone(),
        },
        generator_seed: seed,
    })
}

/// Replaces every non-gold line with a distinct corpus sentence, in place.
pub fn pad_with_corpus(example: &HaystackExample, corpus: &PaddingCorpus, seed: u64) -> Result<HaystackExample> {
    if example.mode == Mode::Embedded {
        return Err(Error::Haystack("pad before embedding the hypothesis".into()));
    }
    let gold = example.gold_set();
    let slots: Vec<usize> = (0..example.lines.len())
        .filter(|&i| !gold.contains(&example.lines[i].id))
        .collect();
    let protected: BTreeSet<&str> = example
        .lines
        .iter()
        .filter(|l| gold.contains(&l.id))
        .map(|l| l.text.as_str())
        .chain(std::iter::once(example.hypothesis.as_str()))
        .collect();
    let mut order: Vec<usize> = (0..corpus.len()).collect();
    order.shuffle(&mut seed::rng_for(seed, &format!("pad/{}", example.id)));
    let mut used = BTreeSet::new();
    let mut picks = Vec::with_capacity(slots.len());
    for i in order {
        if picks.len() == slots.len() {
            break;
        }
        let s = corpus.sentences[i].as_str();
        if !protected.contains(s) && used.insert(s) {
            picks.push(s.to_string());
        }
    }
    if picks.len() < slots.len() {
        return Err(Error::CorpusTooSmall {
            needed: slots.len(),
            available: picks.len(),
        });
    }
    let mut out = example.clone();
    for (&slot, text) in slots.iter().zip(picks) {
        out.lines[slot].text = text;
        out.provenance.formulas[slot] = None;
    }
    out.mode = Mode::Padded;
    out.id = example.id.replace(&format!("-{}", example.mode.as_str()), "-padded");
    out.generator_seed = seed;
    Ok(out)
}

/// Inserts the hypothesis as a line at a uniform position; it joins the gold.
pub fn embed_hypothesis(example: &HaystackExample, seed: u64) -> Result<HaystackExample> {
    if example.mode == Mode::Embedded {
        return Err(Error::Haystack("hypothesis is already embedded".into()));
    }
    let at = seed::rng_for(seed, &format!("embed/{}", example.id)).random_range(0..=example.lines.len());
    Ok(embed_at(example, at, seed))
}

/// [`embed_hypothesis`] with a chosen position.
pub fn embed_at(example: &HaystackExample, at: usize, seed: u64) -> HaystackExample {
    let gold = example.gold_set();
    let mut texts: Vec<String> = example.lines.iter().map(|l| l.text.clone()).collect();
    texts.insert(at, example.hypothesis.clone());
    let shift = |i: usize| if i >= at { i + 1 } else { i };
    let mut new_gold: Vec<String> = example
        .lines
        .iter()
        .enumerate()
        .filter(|(_, l)| gold.contains(&l.id))
        .map(|(i, _)| line_id(shift(i)))
        .collect();
    new_gold.push(line_id(at));
    sort_ids(&mut new_gold);
    let mut out = example.clone();
    out.provenance.formulas.insert(at, Some(example.provenance.hypothesis_formula.clone()));
    out.provenance.hypothesis_line = Some(at);
    out.provenance.room_line = example.provenance.room_line.map(shift);
    out.lines = renumber(texts);
    out.n = out.lines.len();
    out.k = new_gold.len();
    out.gold = new_gold;
    out.id = format!(
        "{}-embedded",
        example.id.trim_end_matches(&format!("-{}", example.mode.as_str()))
    );
    out.mode = Mode::Embedded;
    out.generator_seed = seed;
    out
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Shortfall {
    pub k: usize,
    pub wanted: usize,
    pub available: usize,
}

/// Picks up to `quota` examples per evidence count from premises that can
/// fill the largest size, and subsamples each to every size.
pub fn assemble(
    examples: &[CertifiedExample],
    premises: &[StageFormula],
    grammar: &Grammar,
    sizes: &[usize],
    quota: usize,
    seed: u64,
    options: &SubsampleOptions,
) -> Result<(Vec<HaystackExample>, Vec<Shortfall>)> {
    let largest = sizes.iter().copied().max().ok_or_else(|| Error::Config("no sizes".into()))?;
    let by_key: BTreeMap<(u32, u32), &StageFormula> = premises.iter().map(|p| ((p.stage, p.id), p)).collect();
    let room = usize::from(options.room_line);
    let mut out = Vec::new();
    let mut shortfalls = Vec::new();
    let ks: BTreeSet<usize> = examples.iter().map(|e| e.evidence.len()).chain(1..=3).collect();
    for k in ks {
        let mut eligible: Vec<&CertifiedExample> = examples
            .iter()
            .filter(|e| e.evidence.len() == k)
            .filter(|e| {
                by_key
                    .get(&(e.premise_stage, e.premise_id))
                    .is_some_and(|p| p.len() + room >= largest)
            })
            .collect();
        eligible.shuffle(&mut seed::rng_for(seed, &format!("assemble/{k}")));
        if eligible.len() < quota {
            shortfalls.push(Shortfall {
                k,
                wanted: quota,
                available: eligible.len(),
            });
        }
        for ex in eligible.into_iter().take(quota) {
            let premise = by_key[&(ex.premise_stage, ex.premise_id)];
            for &n in sizes {
                out.push(subsample(ex, premise, grammar, n, seed, options)?);
            }
        }
    }
    Ok((out, shortfalls))
}

/// Structural checks plus re-certification from the recorded formulas.
/// Returns the violations found (empty when the example is sound).
pub fn audit_haystack(example: &HaystackExample, config: &SolveConfig) -> Result<Vec<String>> {
    let mut problems = Vec::new();
    let ex = example;
    if ex.version != SCHEMA_VERSION {
        problems.push(format!("schema version {}", ex.version));
    }
    if ex.n != ex.lines.len() {
        problems.push(format!("n = {} but {} lines", ex.n, ex.lines.len()));
    }
    if ex.lines.iter().enumerate().any(|(i, l)| l.id != line_id(i)) {
        problems.push("line ids are not L0.. in order".into());
    }
    if ex.lines.iter().any(|l| l.text.is_empty() || l.text.contains('\n')) {
        problems.push("empty or multi-line line text".into());
    }
    let gold = ex.gold_set();
    if gold.len() != ex.k || ex.gold.len() != ex.k {
        problems.push(format!("k = {} but {} gold ids", ex.k, ex.gold.len()));
    }
    let mut sorted = ex.gold.clone();
    sort_ids(&mut sorted);
    if sorted != ex.gold {
        problems.push("gold ids are not sorted".into());
    }
    let gold_idx: Vec<usize> = match ex.gold.iter().map(|g| line_index(g).filter(|&i| i < ex.lines.len())).collect() {
        Some(v) => v,
        None => {
            problems.push("gold id outside the premise".into());
            return Ok(problems);
        }
    };
    if ex.provenance.formulas.len() != ex.lines.len() {
        problems.push("provenance does not cover every line".into());
        return Ok(problems);
    }
    let hyp_line = ex.provenance.hypothesis_line;
    match (ex.mode, hyp_line) {
        (Mode::Embedded, Some(h)) => {
            if !gold_idx.contains(&h) || ex.lines.get(h).map(|l| &l.text) != Some(&ex.hypothesis) {
                problems.push("embedded hypothesis line is missing from the gold".into());
            }
        }
        (Mode::Embedded, None) => problems.push("embedded example without a hypothesis line".into()),
        (_, Some(_)) => problems.push("hypothesis line outside embedded mode".into()),
        _ => {}
    }
    if ex.mode == Mode::Padded
        && (0..ex.lines.len()).any(|i| !gold_idx.contains(&i) && ex.provenance.formulas[i].is_some())
    {
        problems.push("grammar distractor survived padding".into());
    }
    if gold_idx.iter().any(|&i| ex.provenance.formulas[i].is_none()) {
        problems.push("gold line without a formula".into());
    }
    if !problems.is_empty() {
        return Ok(problems);
    }
    let premise: Vec<SourcedClause> = ex
        .lines
        .iter()
        .zip(&ex.provenance.formulas)
        .enumerate()
        .filter(|(i, _)| Some(*i) != hyp_line)
        .filter_map(|(i, (line, f))| {
            f.as_ref().map(|f| SourcedClause {
                id: i as u32,
                english: line.text.clone(),
                formula: f.clone(),
                stage: 0,
                origin: None,
            })
        })
        .collect();
    let hypothesis = SourcedClause {
        id: crate::evidence::HYPOTHESIS_ID,
        english: ex.hypothesis.clone(),
        formula: ex.provenance.hypothesis_formula.clone(),
        stage: 0,
        origin: None,
    };
    let evidence: BTreeSet<u32> = gold_idx.iter().filter(|&&i| Some(i) != hyp_line).map(|&i| i as u32).collect();
    if let Err(why) = audit_example(&premise, &hypothesis, &evidence, &ex.provenance.domain, config)? {
        problems.push(why);
    }
    Ok(problems)
}
