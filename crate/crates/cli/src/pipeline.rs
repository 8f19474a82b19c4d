//! Subcommand bodies. Every step records a fingerprint of its inputs under
//! `meta/`; a rerun with the same fingerprint and intact outputs is a no-op.

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};
use std::time::Duration;

use haystack_core::eval::{
    aggregate, evaluate_output, query_model, render_prompt, to_tsv, EndpointConfig, EvalRecord, PromptRecord,
    ResponseCache, Transport,
};
use haystack_core::evidence::{audit_example, mine, CertifiedExample};
use haystack_core::forge::Grammar;
use haystack_core::haystack::{
    assemble, audit_haystack, embed_hypothesis, pad_with_corpus, read_dataset, read_jsonl, write_atomic,
    write_dataset, write_jsonl, HaystackExample, Mode, PaddingCorpus, SubsampleOptions,
};
use haystack_core::logic::Domain;
use haystack_core::merge::{base_formulas, next_stage, replay_removals, verify_formula, MergeLog, StageFormula};
use serde::{Deserialize, Serialize};
use serde_json::json;
use sha2::{Digest, Sha256};

use crate::{Failure, RunConfig};

#[derive(Debug, Serialize, Deserialize)]
struct Meta {
    step: String,
    fingerprint: String,
}

fn fingerprint(value: &serde_json::Value) -> String {
    hex::encode(Sha256::digest(value.to_string().as_bytes()))
}

fn log(msg: impl AsRef<str>) {
    eprintln!("{}", msg.as_ref());
}

pub struct Context {
    cfg: RunConfig,
}

impl Context {
    pub fn new(cfg: RunConfig) -> Self {
        Context { cfg }
    }

    pub fn config(&self) -> &RunConfig {
        &self.cfg
    }

    pub fn workdir(&self) -> &Path {
        &self.cfg.workdir
    }

    fn path(&self, rel: impl AsRef<Path>) -> PathBuf {
        self.cfg.workdir.join(rel)
    }

    pub fn stage_path(&self, stage: u32) -> PathBuf {
        self.path(format!("stages/stage-{stage}.jsonl"))
    }

    pub fn removals_path(&self, stage: u32) -> PathBuf {
        self.path(format!("stages/stage-{stage}.removals.jsonl"))
    }

    pub fn dataset_path(&self, mode: Mode) -> PathBuf {
        let dir = self.cfg.dataset_dir.as_deref().unwrap_or(&self.cfg.workdir);
        dir.join(format!("dataset-{}.jsonl", mode.as_str()))
    }

    pub fn prompts_path(&self, mode: Mode) -> PathBuf {
        self.path(format!("prompts-{}.jsonl", mode.as_str()))
    }

    pub fn eval_path(&self, name: &str, mode: Mode) -> PathBuf {
        self.path(format!("evals/{name}-{}.jsonl", mode.as_str()))
    }

    fn meta_path(&self, step: &str) -> PathBuf {
        self.path(format!("meta/{step}.json"))
    }

    /// Fingerprint recorded by `step`, or a pointer to the subcommand that
    /// produces it.
    fn upstream(&self, step: &str, command: &str) -> Result<String, Failure> {
        let path = self.meta_path(step);
        let text = std::fs::read_to_string(&path).map_err(|_| Failure::Missing {
            path: path.clone(),
            step: command.into(),
        })?;
        let meta: Meta = serde_json::from_str(&text)?;
        Ok(meta.fingerprint)
    }

    fn up_to_date(&self, step: &str, fp: &str, outputs: &[&Path]) -> bool {
        let Ok(text) = std::fs::read_to_string(self.meta_path(step)) else {
            return false;
        };
        let Ok(meta) = serde_json::from_str::<Meta>(&text) else {
            return false;
        };
        meta.fingerprint == fp && outputs.iter().all(|p| p.exists())
    }

    fn record(&self, step: &str, fp: &str) -> Result<(), Failure> {
        let meta = Meta {
            step: step.into(),
            fingerprint: fp.into(),
        };
        write_atomic(&self.meta_path(step), &serde_json::to_vec_pretty(&meta)?)?;
        Ok(())
    }

    fn require(&self, path: &Path, command: &str) -> Result<(), Failure> {
        if path.exists() {
            Ok(())
        } else {
            Err(Failure::Missing {
                path: path.into(),
                step: command.into(),
            })
        }
    }

    pub fn grammar(&self) -> Result<Grammar, Failure> {
        let lexicon = self.cfg.lexicon()?;
        Ok(Grammar::new(self.cfg.grammar_config(), &lexicon)?)
    }

    fn load_domain(&self) -> Result<Domain, Failure> {
        let path = self.path("domain.json");
        self.require(&path, "gen-base")?;
        Ok(serde_json::from_slice(&std::fs::read(&path)?)?)
    }

    fn load_stage(&self, stage: u32) -> Result<Vec<StageFormula>, Failure> {
        let path = self.stage_path(stage);
        self.require(&path, if stage == 0 { "gen-base" } else { "merge" })?;
        Ok(read_jsonl(&path)?)
    }

    fn gen_base_fingerprint(&self) -> Result<String, Failure> {
        let s = self.cfg.stage_config();
        Ok(fingerprint(&json!({
            "step": "gen-base",
            "grammar": self.cfg.grammar_config(),
            "lexicon": self.cfg.lexicon()?,
            "k": s.k,
            "base_size": s.base_size,
            "seed": s.seed,
            "solve": s.solve,
        })))
    }

    pub fn gen_base(&self) -> Result<(), Failure> {
        let fp = self.gen_base_fingerprint()?;
        let stage0 = self.stage_path(0);
        let domain = self.path("domain.json");
        if self.up_to_date("gen-base", &fp, &[&stage0, &domain]) {
            log("gen-base: up to date");
            return Ok(());
        }
        let grammar = self.grammar()?;
        let bases = base_formulas(&grammar, &self.cfg.stage_config())?;
        write_atomic(&domain, &serde_json::to_vec_pretty(grammar.domain())?)?;
        write_jsonl(&stage0, &bases)?;
        self.record("gen-base", &fp)?;
        log(format!("gen-base: {} formulas of {} clauses", bases.len(), self.cfg.stages.base_size));
        Ok(())
    }

    pub fn merge(&self) -> Result<(), Failure> {
        let mut fp = self.upstream("gen-base", "gen-base")?;
        let domain = self.load_domain()?;
        let s = self.cfg.stage_config();
        for stage in 1..=s.max_stage {
            let step = format!("merge-stage-{stage}");
            fp = fingerprint(&json!({
                "step": step,
                "upstream": fp,
                "k": s.k,
                "seed": s.seed,
                "solve": s.solve,
                "self_pairing": s.self_pairing,
                "max_failure_rate": s.max_failure_rate,
            }));
            let (out, removals) = (self.stage_path(stage), self.removals_path(stage));
            if self.up_to_date(&step, &fp, &[&out, &removals]) {
                log(format!("merge: stage {stage} up to date"));
                continue;
            }
            let current = self.load_stage(stage - 1)?;
            let result = next_stage(&current, &domain, &s)?;
            write_jsonl(&out, &result.formulas)?;
            write_jsonl(&removals, &result.logs)?;
            self.record(&step, &fp)?;
            let sizes: Vec<usize> = result.formulas.iter().map(StageFormula::len).collect();
            log(format!(
                "merge: stage {stage}: {} formulas, {}..{} clauses, {} failed merges",
                sizes.len(),
                sizes.iter().min().unwrap_or(&0),
                sizes.iter().max().unwrap_or(&0),
                result.logs.iter().filter(|l| l.failure.is_some()).count()
            ));
        }
        self.record("merge", &fp)?;
        Ok(())
    }

    fn premises(&self) -> Result<Vec<StageFormula>, Failure> {
        self.upstream("merge", "merge")?;
        self.load_stage(self.cfg.stages.max_stage)
    }

    pub fn mine(&self) -> Result<(), Failure> {
        let m = self.cfg.mine_config();
        let fp = fingerprint(&json!({
            "step": "mine",
            "upstream": self.upstream("merge", "merge")?,
            "hypotheses_per_premise": m.hypotheses_per_premise,
            "reuse": m.reuse,
            "evidence_counts": m.evidence_counts,
            "seed": m.seed,
            "solve": m.solve,
        }));
        let (out, stats_path) = (self.path("mined.jsonl"), self.path("mine-stats.json"));
        if self.up_to_date("mine", &fp, &[&out, &stats_path]) {
            log("mine: up to date");
            return Ok(());
        }
        let premises = self.premises()?;
        let grammar = self.grammar()?;
        let (examples, stats) = mine(&premises, &grammar, &m)?;
        write_jsonl(&out, &examples)?;
        write_atomic(&stats_path, &serde_json::to_vec_pretty(&stats)?)?;
        self.record("mine", &fp)?;
        let mut by_k = BTreeMap::new();
        for e in &examples {
            *by_k.entry(e.evidence.len()).or_insert(0usize) += 1;
        }
        log(format!(
            "mine: {} certified of {} drawn ({} contradictions); by evidence count {by_k:?}",
            stats.certified, stats.drawn, stats.contradictions
        ));
        Ok(())
    }

    pub fn assemble(&self) -> Result<(), Failure> {
        let seed = self.cfg.module_seed("assemble");
        let embed_seed = self.cfg.module_seed("embed");
        let fp = fingerprint(&json!({
            "step": "assemble",
            "upstream": self.upstream("mine", "mine")?,
            "sizes": self.cfg.sizes,
            "quota": self.cfg.quota,
            "room_line": self.cfg.room_line,
            "seed": seed,
            "embed_seed": embed_seed,
        }));
        let standard = self.dataset_path(Mode::Standard);
        let embedded = self.dataset_path(Mode::Embedded);
        let shortfall_path = self.path("shortfalls.json");
        if self.up_to_date("assemble", &fp, &[&standard, &embedded]) {
            log("assemble: up to date");
            return Ok(());
        }
        let premises = self.premises()?;
        let mined: Vec<CertifiedExample> = read_jsonl(&self.path("mined.jsonl"))?;
        let grammar = self.grammar()?;
        let options = SubsampleOptions {
            room_line: self.cfg.room_line,
        };
        let (examples, shortfalls) =
            assemble(&mined, &premises, &grammar, &self.cfg.sizes, self.cfg.quota, seed, &options)?;
        let embedded_examples = examples
            .iter()
            .map(|e| embed_hypothesis(e, embed_seed))
            .collect::<Result<Vec<_>, _>>()?;
        for s in &shortfalls {
            log(format!(
                "assemble: warning: {} of {} wanted examples with {} evidence(s)",
                s.available, s.wanted, s.k
            ));
        }
        write_dataset(&standard, &examples)?;
        write_dataset(&embedded, &embedded_examples)?;
        write_atomic(&shortfall_path, &serde_json::to_vec_pretty(&shortfalls)?)?;
        self.record("assemble", &fp)?;
        log(format!("assemble: {} examples per mode", examples.len()));
        Ok(())
    }

    pub fn pad(&self) -> Result<(), Failure> {
        let corpus_path = self
            .cfg
            .corpus
            .clone()
            .ok_or_else(|| Failure::Usage("no padding corpus: pass --corpus PATH or set `corpus`".into()))?;
        let bytes = std::fs::read(&corpus_path)
            .map_err(|e| Failure::Usage(format!("cannot read corpus {}: {e}", corpus_path.display())))?;
        let seed = self.cfg.module_seed("pad");
        let fp = fingerprint(&json!({
            "step": "pad",
            "upstream": self.upstream("assemble", "assemble")?,
            "corpus": hex::encode(Sha256::digest(&bytes)),
            "seed": seed,
        }));
        let out = self.dataset_path(Mode::Padded);
        if self.up_to_date("pad", &fp, &[&out]) {
            log("pad: up to date");
            return Ok(());
        }
        let corpus = PaddingCorpus::from_file(&corpus_path)?;
        let standard = read_dataset(&self.dataset_path(Mode::Standard))?;
        let padded = standard
            .iter()
            .map(|e| pad_with_corpus(e, &corpus, seed))
            .collect::<Result<Vec<_>, _>>()?;
        write_dataset(&out, &padded)?;
        self.record("pad", &fp)?;
        log(format!("pad: {} examples from {} sentences", padded.len(), corpus.len()));
        Ok(())
    }

    fn dataset_step(mode: Mode) -> &'static str {
        match mode {
            Mode::Padded => "pad",
            _ => "assemble",
        }
    }

    pub fn prompt(&self, mode: Mode) -> Result<(), Failure> {
        let step = format!("prompt-{}", mode.as_str());
        let upstream = Self::dataset_step(mode);
        let fp = fingerprint(&json!({
            "step": step,
            "upstream": self.upstream(upstream, upstream)?,
            "template": self.cfg.template,
        }));
        let out = self.prompts_path(mode);
        if self.up_to_date(&step, &fp, &[&out]) {
            log(format!("prompt: {} up to date", mode.as_str()));
            return Ok(());
        }
        let dataset = read_dataset(&self.dataset_path(mode))?;
        let prompts: Vec<PromptRecord> = dataset.iter().map(|e| render_prompt(e, self.cfg.template)).collect();
        write_jsonl(&out, &prompts)?;
        self.record(&step, &fp)?;
        log(format!("prompt: {} prompts", prompts.len()));
        Ok(())
    }

    fn load_prompts(&self, mode: Mode) -> Result<Vec<PromptRecord>, Failure> {
        self.upstream(&format!("prompt-{}", mode.as_str()), "prompt")?;
        let path = self.prompts_path(mode);
        self.require(&path, "prompt")?;
        Ok(read_jsonl(&path)?)
    }

    pub fn query(
        &self,
        mode: Mode,
        endpoint: &EndpointConfig,
        transport: &dyn Transport,
        sleep: &(dyn Fn(Duration) + Sync),
    ) -> Result<(), Failure> {
        let prompts = self.load_prompts(mode)?;
        let cache = ResponseCache::new(self.path("cache"))?;
        let records = query_model(endpoint, &prompts, transport, Some(&cache), sleep)?;
        let cached = records.iter().filter(|r| r.cached).count();
        let failed = records.iter().filter(|r| r.score.is_none()).count();
        write_jsonl(&self.eval_path(&endpoint.name, mode), &records)?;
        log(format!(
            "query: {} records ({cached} from cache, {failed} transport failures)",
            records.len()
        ));
        Ok(())
    }

    pub fn score(&self, mode: Mode, answers: &Path, model: &str) -> Result<(), Failure> {
        #[derive(Deserialize)]
        struct Answer {
            id: String,
            answer: String,
        }
        let prompts = self.load_prompts(mode)?;
        let given: Vec<Answer> =
            read_jsonl(answers).map_err(|e| Failure::Usage(format!("answers file: {e}")))?;
        let given: BTreeMap<String, String> = given.into_iter().map(|a| (a.id, a.answer)).collect();
        let mut missing = 0;
        let mut records = Vec::with_capacity(prompts.len());
        for p in &prompts {
            let raw = given.get(&p.id).map(String::as_str).unwrap_or_else(|| {
                missing += 1;
                ""
            });
            records.push(evaluate_output(p, model, raw)?);
        }
        records.sort_by(|a, b| a.id.cmp(&b.id));
        write_jsonl(&self.eval_path(model, mode), &records)?;
        if missing > 0 {
            log(format!("score: warning: {missing} prompts had no answer and score 0"));
        }
        log(format!("score: {} records", records.len()));
        Ok(())
    }

    /// Writes report.tsv from every evaluation file and returns its text.
    pub fn report(&self) -> Result<String, Failure> {
        let dir = self.path("evals");
        self.require(&dir, "query")?;
        let mut files: Vec<PathBuf> = std::fs::read_dir(&dir)?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|x| x == "jsonl"))
            .collect();
        files.sort();
        let mut records: Vec<EvalRecord> = Vec::new();
        for f in &files {
            records.extend(read_jsonl::<EvalRecord>(f)?);
        }
        let tsv = to_tsv(&aggregate(&records));
        write_atomic(&self.path("report.tsv"), tsv.as_bytes())?;
        Ok(tsv)
    }

    /// Checks everything present in the work directory. `mode` limits the
    /// dataset checks to one file.
    pub fn audit(&self, mode: Option<Mode>) -> Result<(), Failure> {
        let mut violations = Vec::new();
        let mut checked = 0usize;
        let solve = &self.cfg.solve;
        let domain_path = self.path("domain.json");
        let domain = if domain_path.exists() {
            Some(self.load_domain()?)
        } else {
            None
        };

        let mut stages: Vec<Vec<StageFormula>> = Vec::new();
        if let Some(domain) = &domain {
            let mut stage = 0;
            while self.stage_path(stage).exists() {
                let formulas = self.load_stage(stage)?;
                for f in &formulas {
                    checked += 1;
                    if f.stage != stage {
                        violations.push(format!("stage {stage} formula {}: recorded stage {}", f.id, f.stage));
                    }
                    if !verify_formula(f, domain, solve)? {
                        violations.push(format!("stage {stage} formula {}: not satisfiable", f.id));
                    }
                }
                if stage > 0 {
                    let logs: Vec<MergeLog> = read_jsonl(&self.removals_path(stage))?;
                    violations.extend(self.audit_merges(stage, &stages[stage as usize - 1], &formulas, &logs, domain)?);
                }
                stages.push(formulas);
                stage += 1;
            }
            log(format!("audit: {} stage(s) checked", stages.len()));
        }

        let mined_path = self.path("mined.jsonl");
        if let (Some(domain), true) = (&domain, mined_path.exists()) {
            let mined: Vec<CertifiedExample> = read_jsonl(&mined_path)?;
            let by_key: BTreeMap<(u32, u32), &StageFormula> =
                stages.iter().flatten().map(|f| ((f.stage, f.id), f)).collect();
            for e in &mined {
                checked += 1;
                let name = format!("mined s{}p{}d{}", e.premise_stage, e.premise_id, e.draw);
                let Some(p) = by_key.get(&(e.premise_stage, e.premise_id)) else {
                    violations.push(format!("{name}: premise not found"));
                    continue;
                };
                let evidence: BTreeSet<u32> = e.evidence.iter().copied().collect();
                if let Err(why) = audit_example(&p.clauses, &e.hypothesis, &evidence, domain, solve)? {
                    violations.push(format!("{name}: {why}"));
                }
            }
            log(format!("audit: {} mined examples checked", mined.len()));
        }

        let modes: Vec<Mode> = match mode {
            Some(m) => vec![m],
            None => vec![Mode::Standard, Mode::Embedded, Mode::Padded],
        };
        for m in modes {
            let path = self.dataset_path(m);
            if !path.exists() {
                if mode.is_some() {
                    self.require(&path, Self::dataset_step(m))?;
                }
                continue;
            }
            let dataset: Vec<HaystackExample> = match read_dataset(&path) {
                Ok(d) => d,
                Err(e) => {
                    violations.push(format!("{}: {e}", path.display()));
                    continue;
                }
            };
            let mut ids = BTreeSet::new();
            for ex in &dataset {
                checked += 1;
                if !ids.insert(ex.id.as_str()) {
                    violations.push(format!("example {}: duplicate id", ex.id));
                }
                if ex.mode != m {
                    violations.push(format!("example {}: mode {} in the {} file", ex.id, ex.mode.as_str(), m.as_str()));
                }
                for problem in audit_haystack(ex, solve)? {
                    violations.push(format!("example {}: {problem}", ex.id));
                }
            }
            log(format!("audit: {} examples in {} checked", dataset.len(), path.display()));
        }

        if checked == 0 {
            return Err(Failure::Missing {
                path: self.workdir().into(),
                step: "gen-base".into(),
            });
        }
        if violations.is_empty() {
            log(format!("audit: ok ({checked} items)"));
            Ok(())
        } else {
            Err(Failure::Audit(violations))
        }
    }

    fn audit_merges(
        &self,
        stage: u32,
        parents: &[StageFormula],
        outputs: &[StageFormula],
        logs: &[MergeLog],
        domain: &Domain,
    ) -> Result<Vec<String>, Failure> {
        let mut violations = Vec::new();
        let by_id: BTreeMap<u32, &StageFormula> = parents.iter().map(|f| (f.id, f)).collect();
        let outputs: BTreeMap<u32, &StageFormula> = outputs.iter().map(|f| (f.id, f)).collect();
        for (j, l) in logs.iter().enumerate() {
            let Some(out_id) = l.output else { continue };
            let name = format!("stage {stage} merge {j}");
            let (Some(a), Some(b)) = (by_id.get(&l.parents.0), by_id.get(&l.parents.1)) else {
                violations.push(format!("{name}: unknown parent"));
                continue;
            };
            if !replay_removals(a, b, &l.removals, domain, &self.cfg.solve)? {
                violations.push(format!("{name}: a recorded removal does not replay"));
                continue;
            }
            let removed: BTreeSet<u32> = l.removals.iter().map(|r| r.clause).collect();
            let expected: Vec<&str> = a
                .clauses
                .iter()
                .chain(&b.clauses)
                .enumerate()
                .filter(|(i, _)| !removed.contains(&(*i as u32)))
                .map(|(_, c)| c.english.as_str())
                .collect();
            match outputs.get(&out_id) {
                Some(f) if f.clauses.iter().map(|c| c.english.as_str()).eq(expected) => {}
                Some(_) => violations.push(format!("{name}: output {out_id} differs from the parents minus removals")),
                None => violations.push(format!("{name}: output {out_id} missing")),
            }
        }
        Ok(violations)
    }
}
