//! Prompts, answer parsing, Jaccard scoring, model querying and reports.

mod client;
mod prompt;
mod report;
mod score;

pub use client::{
    evaluate_output, query_model, EndpointConfig, EvalRecord, HttpResponse, RequestStyle, ResponseCache, Transport,
};
pub use prompt::{prompt_text, render_prompt, PromptRecord, Template};
pub use report::{aggregate, to_tsv, ReportRow};
pub use score::{parse_answer, score, Ratio, Status};
