//! The `haystacks` command line: seeded, checkpointed pipeline steps that
//! read and write a work directory.

use std::ffi::OsString;
use std::fmt;
use std::path::PathBuf;

use clap::{Parser, Subcommand};
use haystack_core::haystack::Mode;

pub mod config;
pub mod pipeline;
pub mod transport;

pub use config::RunConfig;

/// Failures, each mapped to a process exit code.
#[derive(Debug)]
pub enum Failure {
    /// Bad flags, config or runtime error. Exit 1.
    Usage(String),
    /// `audit` found violations. Exit 2.
    Audit(Vec<String>),
    /// A prerequisite output is missing. Exit 3.
    Missing { path: PathBuf, step: String },
}

impl Failure {
    pub fn exit_code(&self) -> i32 {
        match self {
            Failure::Usage(_) => 1,
            Failure::Audit(_) => 2,
            Failure::Missing { .. } => 3,
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Usage(m) => write!(f, "{m}"),
            Failure::Audit(v) => {
                write!(f, "audit failed with {} violation(s)", v.len())?;
                for line in v.iter().take(20) {
                    write!(f, "\n  {line}")?;
                }
                if v.len() > 20 {
                    write!(f, "\n  ... and {} more", v.len() - 20)?;
                }
                Ok(())
            }
            Failure::Missing { path, step } => {
                write!(f, "{} does not exist; run `haystacks {step}` first", path.display())
            }
        }
    }
}

impl From<haystack_core::Error> for Failure {
    fn from(e: haystack_core::Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

impl From<serde_json::Error> for Failure {
    fn from(e: serde_json::Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

#[derive(Clone, Debug)]
pub struct Sizes(pub Vec<usize>);

fn sizes_arg(s: &str) -> Result<Sizes, String> {
    config::parse_sizes(s).map(Sizes)
}

fn mode_arg(s: &str) -> Result<Mode, String> {
    s.parse().map_err(|e: haystack_core::Error| e.to_string())
}

#[derive(Debug, Parser)]
#[command(name = "haystacks", version, about = "Build and evaluate certified contradiction-retrieval haystacks")]
pub struct Cli {
    /// TOML run configuration.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long, global = true)]
    pub workers: Option<usize>,
    #[arg(long, global = true)]
    pub workdir: Option<PathBuf>,
    /// Comma list (`8,16,32`) or doubling range (`8..256`).
    #[arg(long, global = true, value_parser = sizes_arg)]
    pub sizes: Option<Sizes>,
    /// standard, padded or embedded.
    #[arg(long, global = true, value_parser = mode_arg)]
    pub mode: Option<Mode>,
    /// Plain-text file split into padding sentences.
    #[arg(long, global = true)]
    pub corpus: Option<PathBuf>,
    /// Overrides the endpoint's model, or names the answers in `score`.
    #[arg(long, global = true)]
    pub model: Option<String>,
    #[arg(long, global = true)]
    pub endpoint: Option<String>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate and certify the stage-0 formulas.
    GenBase,
    /// Run the satisfiable-merging ladder up to the last stage.
    Merge,
    /// Sample hypotheses against the last stage and certify contradictions.
    Mine,
    /// Subsample certified examples to every size (standard and embedded).
    Assemble,
    /// Replace distractors with corpus sentences.
    Pad,
    /// Render prompts for one dataset mode.
    Prompt,
    /// Send prompts to an endpoint and score the replies.
    Query,
    /// Score a file of answers given as JSON lines `{"id": .., "answer": ..}`.
    Score {
        #[arg(long)]
        answers: PathBuf,
    },
    /// Aggregate all evaluations into report.tsv.
    Report,
    /// Re-certify stages, merge logs, mined examples and datasets.
    Audit,
}

/// Loads the config file (if any) and applies flag overrides.
pub fn resolve_config(cli: &Cli) -> Result<RunConfig, Failure> {
    let mut cfg = match &cli.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    if let Some(w) = cli.workers {
        cfg.workers = w;
    }
    if let Some(w) = &cli.workdir {
        cfg.workdir = w.clone();
    }
    if let Some(Sizes(s)) = &cli.sizes {
        cfg.sizes = s.clone();
    }
    if let Some(c) = &cli.corpus {
        cfg.corpus = Some(c.clone());
    }
    cfg.validate()?;
    Ok(cfg)
}

pub fn execute(cli: &Cli) -> Result<(), Failure> {
    let cfg = resolve_config(cli)?;
    let ctx = pipeline::Context::new(cfg);
    let mode = cli.mode.unwrap_or(Mode::Standard);
    match &cli.command {
        Command::GenBase => ctx.gen_base(),
        Command::Merge => ctx.merge(),
        Command::Mine => ctx.mine(),
        Command::Assemble => ctx.assemble(),
        Command::Pad => ctx.pad(),
        Command::Prompt => ctx.prompt(mode),
        Command::Query => {
            let mut endpoint = ctx.config().endpoint(cli.endpoint.as_deref())?;
            if let Some(m) = &cli.model {
                endpoint.model = m.clone();
            }
            let transport = transport::UreqTransport::new();
            ctx.query(mode, &endpoint, &transport, &|d| std::thread::sleep(d))
        }
        Command::Score { answers } => ctx.score(mode, answers, cli.model.as_deref().unwrap_or("answers")),
        Command::Report => ctx.report().map(|tsv| print!("{tsv}")),
        Command::Audit => ctx.audit(cli.mode),
    }
}

/// Parses `args` (program name first) and runs; returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match execute(&cli) {
        Ok(()) => 0,
        Err(f) => {
            eprintln!("error: {f}");
            f.exit_code()
        }
    }
}
