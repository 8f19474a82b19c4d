//! Browser bindings: draw a small certified haystack, render its prompt, and
//! grade an answer against the gold evidence.

use haystack_core::eval::{parse_answer, render_prompt, score, Template};
use haystack_core::evidence::{mine, MineConfig};
use haystack_core::forge::{Grammar, GrammarConfig};
use haystack_core::haystack::{subsample, HaystackExample, SubsampleOptions};
use haystack_core::merge::base_formula;
use haystack_core::sat::SolveConfig;
use serde_json::json;
use wasm_bindgen::prelude::*;

const PREMISE_SIZE: usize = 24;

/// A certified example with `n` lines, as dataset JSON.
pub fn generate_example(seed: u64, n: usize) -> Result<String, String> {
    let grammar = Grammar::builtin(GrammarConfig {
        seed,
        room_size: 4,
        ..GrammarConfig::default()
    })
    .map_err(|e| e.to_string())?;
    let cfg = MineConfig {
        hypotheses_per_premise: 16,
        seed,
        ..MineConfig::default()
    };
    for index in 0..32 {
        let premise =
            base_formula(&grammar, index, PREMISE_SIZE, seed, &SolveConfig::default()).map_err(|e| e.to_string())?;
        let (examples, _) = mine(std::slice::from_ref(&premise), &grammar, &cfg).map_err(|e| e.to_string())?;
        if let Some(ex) = examples.into_iter().find(|e| e.evidence.len() < n) {
            let h = subsample(&ex, &premise, &grammar, n, seed, &SubsampleOptions::default())
                .map_err(|e| e.to_string())?;
            return serde_json::to_string(&h).map_err(|e| e.to_string());
        }
    }
    Err(format!("no certified example with fewer than {n} evidence lines for seed {seed}"))
}

fn parse_example(json: &str) -> Result<HaystackExample, String> {
    serde_json::from_str(json).map_err(|e| format!("not an example: {e}"))
}

/// `template` is "main" or "appendix".
pub fn prompt_text(example: &str, template: &str) -> Result<String, String> {
    let template = match template {
        "main" => Template::Main,
        "appendix" => Template::Appendix,
        other => return Err(format!("unknown template {other:?}")),
    };
    Ok(render_prompt(&parse_example(example)?, template).prompt)
}

/// JSON with the parsed ids, the parse status and the exact Jaccard score.
pub fn grade_answer(example: &str, answer: &str) -> Result<String, String> {
    let ex = parse_example(example)?;
    let (ids, status) = parse_answer(answer);
    let r = score(&ids, &ex.gold_set()).map_err(|e| e.to_string())?;
    Ok(json!({
        "predicted": ids,
        "gold": ex.gold,
        "status": status,
        "score": r.to_string(),
        "value": r.to_f64(),
    })
    .to_string())
}

#[wasm_bindgen]
pub fn generate(seed: u32, n: u32) -> Result<String, JsError> {
    generate_example(seed.into(), n as usize).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn prompt(example: &str, template: &str) -> Result<String, JsError> {
    prompt_text(example, template).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn grade(example: &str, answer: &str) -> Result<String, JsError> {
    grade_answer(example, answer).map_err(|e| JsError::new(&e))
}
