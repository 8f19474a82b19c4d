use serde::{Deserialize, Serialize};

use crate::haystack::{HaystackExample, Mode};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Template {
    /// Answer between `<answer>` tags.
    #[default]
    Main,
    /// Older wording asking for bare comma-separated ids.
    Appendix,
}

impl std::str::FromStr for Template {
    type Err = crate::Error;

    fn from_str(s: &str) -> crate::Result<Self> {
        match s {
            "main" => Ok(Template::Main),
            "appendix" => Ok(Template::Appendix),
            _ => Err(crate::Error::Config(format!("unknown template `{s}`"))),
        }
    }
}

const ANSWER_FORMAT: &str = "Answer directly with no explanation using comma-separated line identifiers \
between <answer> and </answer> tags. Format illustration: \"<answer>L42</answer>\".";

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PromptRecord {
    pub id: String,
    pub mode: Mode,
    pub n: usize,
    pub k: usize,
    pub evidence_count: usize,
    pub prompt: String,
    pub gold: Vec<String>,
}

pub fn prompt_text(premise: &str, hypothesis: &str, k: usize, mode: Mode, template: Template) -> String {
    match (mode, template) {
        (Mode::Embedded, _) => format!(
            "Premise:\n{premise}\nFind {k} line identifiers that logically contradict each other within the premise. {ANSWER_FORMAT}"
        ),
        (_, Template::Main) => format!(
            "Premise:\n{premise}\nHypothesis:{hypothesis}\nGiven the premise, find the {k} line identifiers explaining why the hypothesis is logically contradicted by the premise. {ANSWER_FORMAT}"
        ),
        (_, Template::Appendix) => format!(
            "Premise:\n{premise}\nHypothesis:\n{hypothesis}\n\nGiven the premise, find the {k} evidence explaining why the hypothesis is contradicted by the premise. Answer directly with no explanation and only with comma-separated line ids, e.g., \"L0,L3.\""
        ),
    }
}

pub fn render_prompt(example: &HaystackExample, template: Template) -> PromptRecord {
    PromptRecord {
        id: example.id.clone(),
        mode: example.mode,
        n: example.n,
        k: example.k,
        evidence_count: example.evidence_count(),
        prompt: prompt_text(&example.premise_text(), &example.hypothesis, example.k, example.mode, template),
        gold: example.gold.clone(),
    }
}
