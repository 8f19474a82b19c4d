//! Line-oriented word lists for names and predicate phrases.
//!
//! Blank lines and lines starting with `#` are ignored. Predicate files use
//! `|` separated fields:
//!
//! ```text
//! unary:        symbol|positive verb phrase|negative verb phrase
//! binary:       symbol|positive phrase with {y}|negative phrase with {y}|mutual phrase (may be empty)
//! propositions: symbol|positive sentence|negative sentence
//! ```

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

const NAMES: &str = include_str!("../../lexicon/names.txt");
const UNARY: &str = include_str!("../../lexicon/unary.txt");
const BINARY: &str = include_str!("../../lexicon/binary.txt");
const PROPOSITIONS: &str = include_str!("../../lexicon/propositions.txt");

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Name {
    pub display: String,
    pub symbol: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct UnaryEntry {
    pub symbol: String,
    pub positive: String,
    pub negative: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BinaryEntry {
    pub symbol: String,
    pub positive: String,
    pub negative: String,
    /// Phrase for "A and B <mutual>", meaning the relation holds both ways.
    pub mutual: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PropositionEntry {
    pub symbol: String,
    pub positive: String,
    pub negative: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Lexicon {
    pub names: Vec<Name>,
    pub unary: Vec<UnaryEntry>,
    pub binary: Vec<BinaryEntry>,
    pub propositions: Vec<PropositionEntry>,
}

/// Lowercase identifier form of a display name.
pub fn symbol_for(display: &str) -> String {
    display
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() { c.to_ascii_lowercase() } else { '_' })
        .collect()
}

fn lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
}

fn fields<'a>(what: &str, lineno: usize, line: &'a str, min: usize, max: usize) -> Result<Vec<&'a str>> {
    let parts: Vec<&str> = line.split('|').map(str::trim).collect();
    if parts.len() < min || parts.len() > max || parts[..min].iter().any(|p| p.is_empty()) {
        return Err(Error::Config(format!(
            "{what} lexicon line {lineno}: expected {min} non-empty `|` separated fields"
        )));
    }
    Ok(parts)
}

impl Lexicon {
    pub fn builtin() -> Self {
        Lexicon::parse(NAMES, UNARY, BINARY, PROPOSITIONS).expect("bundled lexicon is well formed")
    }

    pub fn parse(names: &str, unary: &str, binary: &str, propositions: &str) -> Result<Self> {
        let names = lines(names)
            .map(|(_, l)| Name {
                display: l.to_string(),
                symbol: symbol_for(l),
            })
            .collect();
        let unary = lines(unary)
            .map(|(n, l)| {
                let f = fields("unary", n, l, 3, 3)?;
                Ok(UnaryEntry {
                    symbol: f[0].into(),
                    positive: f[1].into(),
                    negative: f[2].into(),
                })
            })
            .collect::<Result<_>>()?;
        let binary = lines(binary)
            .map(|(n, l)| {
                let f = fields("binary", n, l, 3, 4)?;
                if !f[1].contains("{y}") || !f[2].contains("{y}") {
                    return Err(Error::Config(format!("binary lexicon line {n}: phrases need a {{y}} slot")));
                }
                Ok(BinaryEntry {
                    symbol: f[0].into(),
                    positive: f[1].into(),
                    negative: f[2].into(),
                    mutual: f.get(3).filter(|m| !m.is_empty()).map(|m| m.to_string()),
                })
            })
            .collect::<Result<_>>()?;
        let propositions = lines(propositions)
            .map(|(n, l)| {
                let f = fields("proposition", n, l, 3, 3)?;
                Ok(PropositionEntry {
                    symbol: f[0].into(),
                    positive: f[1].into(),
                    negative: f[2].into(),
                })
            })
            .collect::<Result<_>>()?;
        let lex = Lexicon {
            names,
            unary,
            binary,
            propositions,
        };
        lex.check_unique()?;
        Ok(lex)
    }

    /// Bundled lists with any of the four files replaced.
    pub fn load(
        names: Option<&Path>,
        unary: Option<&Path>,
        binary: Option<&Path>,
        propositions: Option<&Path>,
    ) -> Result<Self> {
        let read = |p: Option<&Path>, default: &str| -> Result<String> {
            match p {
                Some(p) => Ok(std::fs::read_to_string(p)?),
                None => Ok(default.to_string()),
            }
        };
        Lexicon::parse(
            &read(names, NAMES)?,
            &read(unary, UNARY)?,
            &read(binary, BINARY)?,
            &read(propositions, PROPOSITIONS)?,
        )
    }

    fn check_unique(&self) -> Result<()> {
        let mut seen = std::collections::BTreeSet::new();
        for n in &self.names {
            if !seen.insert(("name", n.symbol.as_str())) {
                return Err(Error::Config(format!("duplicate name `{}`", n.display)));
            }
        }
        let preds = self
            .unary
            .iter()
            .map(|e| &e.symbol)
            .chain(self.binary.iter().map(|e| &e.symbol))
            .chain(self.propositions.iter().map(|e| &e.symbol));
        for p in preds {
            if p == crate::logic::IN_ROOM || !seen.insert(("pred", p.as_str())) {
                return Err(Error::Config(format!("duplicate or reserved predicate `{p}`")));
            }
        }
        Ok(())
    }

    /// Keeps the first `names` names and the first entries of each predicate list.
    pub fn truncated(&self, names: usize, unary: usize, binary: usize, propositions: usize) -> Result<Self> {
        let take = |what: &str, want: usize, have: usize| {
            if want > have {
                Err(Error::Config(format!("{what} budget {want} exceeds the {have} available")))
            } else {
                Ok(want)
            }
        };
        Ok(Lexicon {
            names: self.names[..take("name", names, self.names.len())?].to_vec(),
            unary: self.unary[..take("unary predicate", unary, self.unary.len())?].to_vec(),
            binary: self.binary[..take("binary predicate", binary, self.binary.len())?].to_vec(),
            propositions: self.propositions
                [..take("proposition", propositions, self.propositions.len())?]
                .to_vec(),
        })
    }
}
