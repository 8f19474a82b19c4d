//! TPTP FOF export and an adapter for running an external prover on it.

use std::fmt::Write as _;
use std::io::Read;
use std::path::PathBuf;
use std::process::{Command, Stdio};
use std::time::Duration;

use super::domain::Domain;
use super::formula::{Formula, Term, IN_ROOM};
use crate::{Error, Result};

/// Name of the axiom carrying source clause `id`.
pub fn axiom_name(id: u32) -> String {
    format!("clause_{id}")
}

fn word(s: &str) -> String {
    let mut out: String = s
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '_' { c.to_ascii_lowercase() } else { '_' })
        .collect();
    if !out.starts_with(|c: char| c.is_ascii_lowercase()) {
        out.insert_str(0, "c_");
    }
    out
}

fn term(t: &Term) -> String {
    match t {
        Term::Const(c) => word(c),
        Term::Var(v) => format!("X{v}"),
    }
}

fn formula(f: &Formula, depth: u32) -> String {
    let join = |gs: &[Formula], op: &str, empty: &str| {
        if gs.is_empty() {
            return empty.to_string();
        }
        let parts: Vec<String> = gs.iter().map(|g| formula(g, depth)).collect();
        format!("({})", parts.join(&format!(" {op} ")))
    };
    match f {
        Formula::Atom(a) => {
            if a.args.is_empty() {
                word(&a.pred)
            } else {
                let args: Vec<String> = a.args.iter().map(term).collect();
                format!("{}({})", word(&a.pred), args.join(","))
            }
        }
        Formula::Not(g) => format!("~{}", formula(g, depth)),
        Formula::And(gs) => join(gs, "&", "$true"),
        Formula::Or(gs) => join(gs, "|", "$false"),
        Formula::Implies(a, b) => format!("({} => {})", formula(a, depth), formula(b, depth)),
        Formula::Iff(a, b) => format!("({} <=> {})", formula(a, depth), formula(b, depth)),
        Formula::ForallInRoom(g) => {
            format!("(![X{depth}]: ({IN_ROOM}(X{depth}) => {}))", formula(g, depth + 1))
        }
        Formula::ExistsInRoom(g) => {
            format!("(?[X{depth}]: ({IN_ROOM}(X{depth}) & {}))", formula(g, depth + 1))
        }
        Formula::AtLeastK(k, g) => {
            // k distinct witnesses; the body is re-indexed per witness.
            let k = *k as u32;
            let names: Vec<String> = (0..k).map(|i| format!("W{depth}_{i}")).collect();
            let mut parts = Vec::new();
            for i in 0..k as usize {
                for j in i + 1..k as usize {
                    parts.push(format!("{} != {}", names[i], names[j]));
                }
            }
            for n in &names {
                parts.push(format!("{IN_ROOM}({n})"));
                let body = formula(g, depth + 1).replace(&format!("X{depth}"), n);
                parts.push(body);
            }
            format!("(?[{}]: ({}))", names.join(","), parts.join(" & "))
        }
    }
}

/// Renders a FOF problem: domain closure, constant distinctness, room
/// membership, then one axiom per source formula named by [`axiom_name`].
pub fn emit_tptp(formulas: &[(u32, Formula)], domain: &Domain) -> String {
    let mut out = String::new();
    let roster: Vec<String> = domain.roster().iter().map(|c| word(c)).collect();
    let _ = writeln!(out, "% roster: {}", domain.roster().join(", "));
    if !roster.is_empty() {
        let alts: Vec<String> = roster.iter().map(|c| format!("X = {c}")).collect();
        let _ = writeln!(out, "fof(domain_closure, axiom, ![X]: ({})).", alts.join(" | "));
    }
    if roster.len() > 1 {
        let mut neqs = Vec::new();
        for i in 0..roster.len() {
            for j in i + 1..roster.len() {
                neqs.push(format!("{} != {}", roster[i], roster[j]));
            }
        }
        let _ = writeln!(out, "fof(distinct_constants, axiom, ({})).", neqs.join(" & "));
    }
    if !roster.is_empty() {
        let members: Vec<String> = domain
            .roster()
            .iter()
            .map(|c| {
                let lit = format!("{IN_ROOM}({})", word(c));
                if domain.is_in_room(c) {
                    lit
                } else {
                    format!("~{lit}")
                }
            })
            .collect();
        let _ = writeln!(out, "fof(room, axiom, ({})).", members.join(" & "));
    }
    for (id, f) in formulas {
        let _ = writeln!(out, "fof({}, axiom, {}).", axiom_name(*id), formula(f, 0));
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ProverStatus {
    Satisfiable,
    Unsatisfiable,
    Unknown,
}

/// Runs an external TPTP prover (Vampire, E, ...) on a problem file and reads
/// its SZS status line. The timeout has no default; callers choose it.
#[derive(Clone, Debug)]
pub struct ExternalProver {
    pub program: PathBuf,
    pub args: Vec<String>,
    pub timeout: Duration,
}

impl ExternalProver {
    pub fn new(program: impl Into<PathBuf>, timeout: Duration) -> Self {
        ExternalProver {
            program: program.into(),
            args: Vec::new(),
            timeout,
        }
    }

    pub fn run(&self, problem: &str) -> Result<ProverStatus> {
        let dir = std::env::temp_dir();
        let path = dir.join(format!("haystack-{}-{:x}.p", std::process::id(), fxhash(problem)));
        std::fs::write(&path, problem)?;
        let mut child = Command::new(&self.program)
            .args(&self.args)
            .arg(&path)
            .stdout(Stdio::piped())
            .stderr(Stdio::null())
            .spawn()?;
        let start = std::time::Instant::now();
        let status = loop {
            if let Some(status) = child.try_wait()? {
                break Some(status);
            }
            if start.elapsed() > self.timeout {
                let _ = child.kill();
                let _ = child.wait();
                break None;
            }
            std::thread::sleep(Duration::from_millis(5));
        };
        if status.is_none() {
            // Grandchildren may still hold the pipe open; do not wait on them.
            let _ = std::fs::remove_file(&path);
            return Ok(ProverStatus::Unknown);
        }
        let mut stdout = String::new();
        if let Some(mut s) = child.stdout.take() {
            s.read_to_string(&mut stdout)?;
        }
        let _ = std::fs::remove_file(&path);
        Ok(parse_szs(&stdout))
    }
}

/// Reads the first `SZS status` line of prover output.
pub fn parse_szs(output: &str) -> ProverStatus {
    for line in output.lines() {
        if let Some(rest) = line.split("SZS status").nth(1) {
            let status = rest.split_whitespace().next().unwrap_or("");
            return match status {
                "Unsatisfiable" | "ContradictoryAxioms" | "Theorem" => ProverStatus::Unsatisfiable,
                "Satisfiable" | "CounterSatisfiable" => ProverStatus::Satisfiable,
                _ => ProverStatus::Unknown,
            };
        }
    }
    ProverStatus::Unknown
}

fn fxhash(s: &str) -> u64 {
    s.bytes().fold(0xcbf29ce484222325u64, |h, b| (h ^ b as u64).wrapping_mul(0x100000001b3))
}

impl ProverStatus {
    /// `Ok(true)` for satisfiable, `Ok(false)` for unsatisfiable.
    pub fn satisfiable(self) -> Result<bool> {
        match self {
            ProverStatus::Satisfiable => Ok(true),
            ProverStatus::Unsatisfiable => Ok(false),
            ProverStatus::Unknown => Err(Error::Unknown("external prover gave no verdict".into())),
        }
    }
}
