use std::path::{Path, PathBuf};

use haystack_core::eval::{EndpointConfig, Template};
use haystack_core::evidence::MineConfig;
use haystack_core::forge::{CategoryWeights, GrammarConfig, Lexicon};
use haystack_core::merge::StageConfig;
use haystack_core::sat::SolveConfig;
use haystack_core::seed;
use serde::{Deserialize, Serialize};

use crate::Failure;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GrammarSection {
    pub names: usize,
    pub unary: usize,
    pub binary: usize,
    pub propositions: usize,
    pub room_size: usize,
    pub room_bias: f64,
    pub max_depth: usize,
    pub weights: CategoryWeights,
    pub names_file: Option<PathBuf>,
    pub unary_file: Option<PathBuf>,
    pub binary_file: Option<PathBuf>,
    pub propositions_file: Option<PathBuf>,
}

impl Default for GrammarSection {
    fn default() -> Self {
        let g = GrammarConfig::default();
        GrammarSection {
            names: g.names,
            unary: g.unary,
            binary: g.binary,
            propositions: g.propositions,
            room_size: g.room_size,
            room_bias: g.room_bias,
            max_depth: g.max_depth,
            weights: g.weights,
            names_file: None,
            unary_file: None,
            binary_file: None,
            propositions_file: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StagesSection {
    pub k: usize,
    pub base_size: usize,
    pub max_stage: u32,
    pub self_pairing: bool,
    pub max_failure_rate: f64,
}

impl Default for StagesSection {
    fn default() -> Self {
        let s = StageConfig::default();
        StagesSection {
            k: s.k,
            base_size: s.base_size,
            max_stage: s.max_stage,
            self_pairing: s.self_pairing,
            max_failure_rate: s.max_failure_rate,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MiningSection {
    pub hypotheses_per_premise: usize,
    pub reuse: f64,
    pub evidence_counts: Vec<usize>,
}

impl Default for MiningSection {
    fn default() -> Self {
        let m = MineConfig::default();
        MiningSection {
            hypotheses_per_premise: m.hypotheses_per_premise,
            reuse: m.reuse,
            evidence_counts: m.evidence_counts,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    pub workers: usize,
    pub workdir: PathBuf,
    /// Where dataset files go; defaults to the work directory.
    pub dataset_dir: Option<PathBuf>,
    pub sizes: Vec<usize>,
    pub quota: usize,
    pub room_line: bool,
    pub template: Template,
    pub corpus: Option<PathBuf>,
    pub solve: SolveConfig,
    pub grammar: GrammarSection,
    pub stages: StagesSection,
    pub mining: MiningSection,
    pub endpoints: Vec<EndpointConfig>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            seed: 0,
            workers: 1,
            workdir: PathBuf::from("work"),
            dataset_dir: None,
            sizes: (3..=11).map(|i| 1 << i).collect(),
            quota: 200,
            room_line: true,
            template: Template::Main,
            corpus: None,
            solve: SolveConfig {
                max_conflicts: Some(1_000_000),
                max_millis: None,
            },
            grammar: GrammarSection::default(),
            stages: StagesSection::default(),
            mining: MiningSection::default(),
            endpoints: Vec::new(),
        }
    }
}

fn field(name: &str, message: &str) -> Failure {
    Failure::Usage(format!("config field `{name}`: {message}"))
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, Failure> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Failure::Usage(format!("cannot read config {}: {e}", path.display())))?;
        let mut cfg: RunConfig =
            toml::from_str(&text).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
        // Relative paths in the file are relative to the file.
        let base = path.parent().unwrap_or(Path::new("."));
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        fix(&mut cfg.workdir);
        if let Some(d) = cfg.dataset_dir.as_mut() {
            fix(d);
        }
        if let Some(c) = cfg.corpus.as_mut() {
            fix(c);
        }
        for p in [
            &mut cfg.grammar.names_file,
            &mut cfg.grammar.unary_file,
            &mut cfg.grammar.binary_file,
            &mut cfg.grammar.propositions_file,
        ]
        .into_iter()
        .flatten()
        {
            fix(p);
        }
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), Failure> {
        if self.sizes.is_empty() {
            return Err(field("sizes", "at least one size is required"));
        }
        if self.sizes.iter().any(|s| !s.is_power_of_two()) || self.sizes.windows(2).any(|w| w[0] >= w[1]) {
            return Err(field("sizes", "must be strictly increasing powers of two"));
        }
        if self.quota < 1 {
            return Err(field("quota", "must be at least 1"));
        }
        if self.workers < 1 {
            return Err(field("workers", "must be at least 1"));
        }
        if self.mining.evidence_counts.is_empty() || self.mining.evidence_counts.iter().any(|k| !(1..=3).contains(k)) {
            return Err(field("mining.evidence_counts", "values must lie in 1..=3"));
        }
        if !(0.0..=1.0).contains(&self.mining.reuse) {
            return Err(field("mining.reuse", "must lie in [0, 1]"));
        }
        if self.mining.hypotheses_per_premise < 1 {
            return Err(field("mining.hypotheses_per_premise", "must be at least 1"));
        }
        self.grammar_config()
            .validate()
            .map_err(|e| field("grammar", &e.to_string()))?;
        self.stage_config()
            .validate()
            .map_err(|e| field("stages", &e.to_string()))?;
        let mut names: Vec<&str> = self.endpoints.iter().map(|e| e.name.as_str()).collect();
        names.sort_unstable();
        if names.windows(2).any(|w| w[0] == w[1]) {
            return Err(field("endpoints", "endpoint names must be unique"));
        }
        Ok(())
    }

    pub fn module_seed(&self, label: &str) -> u64 {
        seed::derive(self.seed, label)
    }

    pub fn grammar_config(&self) -> GrammarConfig {
        let g = &self.grammar;
        GrammarConfig {
            seed: self.module_seed("grammar"),
            names: g.names,
            unary: g.unary,
            binary: g.binary,
            propositions: g.propositions,
            room_size: g.room_size,
            room_bias: g.room_bias,
            weights: g.weights.clone(),
            max_depth: g.max_depth,
        }
    }

    pub fn lexicon(&self) -> Result<Lexicon, Failure> {
        let g = &self.grammar;
        Lexicon::load(
            g.names_file.as_deref(),
            g.unary_file.as_deref(),
            g.binary_file.as_deref(),
            g.propositions_file.as_deref(),
        )
        .map_err(|e| field("grammar", &e.to_string()))
    }

    pub fn stage_config(&self) -> StageConfig {
        let s = &self.stages;
        StageConfig {
            k: s.k,
            base_size: s.base_size,
            max_stage: s.max_stage,
            seed: self.module_seed("merge"),
            solve: self.solve.clone(),
            self_pairing: s.self_pairing,
            max_failure_rate: s.max_failure_rate,
            workers: self.workers,
        }
    }

    pub fn mine_config(&self) -> MineConfig {
        MineConfig {
            hypotheses_per_premise: self.mining.hypotheses_per_premise,
            reuse: self.mining.reuse,
            evidence_counts: self.mining.evidence_counts.clone(),
            seed: self.module_seed("mine"),
            solve: self.solve.clone(),
            workers: self.workers,
        }
    }

    pub fn endpoint(&self, name: Option<&str>) -> Result<EndpointConfig, Failure> {
        match name {
            Some(n) => self
                .endpoints
                .iter()
                .find(|e| e.name == n)
                .cloned()
                .ok_or_else(|| field("endpoints", &format!("no endpoint named `{n}`"))),
            None => match self.endpoints.as_slice() {
                [only] => Ok(only.clone()),
                [] => Err(field("endpoints", "no endpoint configured")),
                _ => Err(Failure::Usage("several endpoints configured; pass --endpoint NAME".into())),
            },
        }
    }
}

/// Parses `8,16,32` or `8..256` (doubling).
pub fn parse_sizes(text: &str) -> Result<Vec<usize>, String> {
    if let Some((lo, hi)) = text.split_once("..") {
        let lo: usize = lo.trim().parse().map_err(|e| format!("bad size `{lo}`: {e}"))?;
        let hi: usize = hi.trim().parse().map_err(|e| format!("bad size `{hi}`: {e}"))?;
        if lo == 0 || !lo.is_power_of_two() {
            return Err("range start must be a power of two".into());
        }
        let mut out = Vec::new();
        let mut s = lo;
        while s <= hi {
            out.push(s);
            s *= 2;
        }
        return Ok(out);
    }
    text.split(',')
        .map(|s| s.trim().parse::<usize>().map_err(|e| format!("bad size `{s}`: {e}")))
        .collect()
}
