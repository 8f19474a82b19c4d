use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::haystack::line_index;
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Ok,
    NoTags,
    Empty,
    MalformedTokens,
    TransportError,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Status::Ok => "ok",
            Status::NoTags => "no-tags",
            Status::Empty => "empty",
            Status::MalformedTokens => "malformed-tokens",
            Status::TransportError => "transport-error",
        }
    }
}

/// An exact non-negative fraction in lowest terms.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Ratio {
    pub num: u64,
    pub den: u64,
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

impl Ratio {
    pub fn new(num: u64, den: u64) -> Self {
        assert!(den > 0, "zero denominator");
        let g = gcd(num, den).max(1);
        Ratio {
            num: num / g,
            den: den / g,
        }
    }

    pub fn to_f64(self) -> f64 {
        self.num as f64 / self.den as f64
    }
}

impl fmt::Display for Ratio {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den == 1 {
            write!(f, "{}", self.num)
        } else {
            write!(f, "{}/{}", self.num, self.den)
        }
    }
}

/// Jaccard similarity |pred ∩ gold| / |pred ∪ gold|.
pub fn score(pred: &BTreeSet<String>, gold: &BTreeSet<String>) -> Result<Ratio> {
    if gold.is_empty() {
        return Err(Error::EmptyGold);
    }
    let inter = pred.intersection(gold).count() as u64;
    let union = pred.union(gold).count() as u64;
    Ok(Ratio::new(inter, union))
}

/// Canonical `L{i}` for a token, after trimming spaces, quotes and trailing periods.
fn line_token(token: &str) -> Option<String> {
    let t = token
        .trim()
        .trim_matches(|c| c == '"' || c == '\'' || c == '`')
        .trim_end_matches('.')
        .trim();
    line_index(t).map(|i| format!("L{i}"))
}

/// Every standalone `L{digits}` in free text.
fn scan_ids(text: &str) -> Vec<String> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let boundary_before = i == 0 || !bytes[i - 1].is_ascii_alphanumeric();
        if bytes[i] == b'L' && boundary_before {
            let mut j = i + 1;
            while j < bytes.len() && bytes[j].is_ascii_digit() {
                j += 1;
            }
            let boundary_after = j == bytes.len() || !bytes[j].is_ascii_alphanumeric();
            if j > i + 1 && boundary_after {
                if let Some(id) = line_token(&text[i..j]) {
                    out.push(id);
                }
                i = j;
                continue;
            }
        }
        i += 1;
    }
    out
}

/// Reads the first `<answer>...</answer>` span. Without tags, falls back to
/// every `L{i}` in the text. Never fails.
pub fn parse_answer(raw: &str) -> (BTreeSet<String>, Status) {
    let lower = raw.to_ascii_lowercase();
    let Some(open) = lower.find("<answer>") else {
        return (scan_ids(raw).into_iter().collect(), Status::NoTags);
    };
    let start = open + "<answer>".len();
    let end = lower[start..].find("</answer>").map_or(raw.len(), |e| start + e);
    let span = &raw[start..end];
    let tokens: Vec<&str> = span.split(',').map(str::trim).filter(|t| !t.is_empty()).collect();
    if tokens.is_empty() {
        return (BTreeSet::new(), Status::Empty);
    }
    let mut ids = BTreeSet::new();
    let mut malformed = false;
    for t in tokens {
        match line_token(t) {
            Some(id) => {
                ids.insert(id);
            }
            None => malformed = true,
        }
    }
    (ids, if malformed { Status::MalformedTokens } else { Status::Ok })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(ids: &[&str]) -> BTreeSet<String> {
        ids.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn jaccard_fixtures() {
        assert_eq!(score(&set(&["L0", "L1"]), &set(&["L0", "L1"])).unwrap(), Ratio::new(1, 1));
        assert_eq!(score(&set(&["L12"]), &set(&["L13"])).unwrap(), Ratio::new(0, 1));
        assert_eq!(score(&set(&["L80", "L87"]), &set(&["L80", "L987"])).unwrap(), Ratio::new(1, 3));
        assert_eq!(score(&set(&[]), &set(&["L1"])).unwrap().num, 0);
        assert!(matches!(score(&set(&["L1"]), &set(&[])), Err(Error::EmptyGold)));
        assert_eq!(Ratio::new(2, 6).to_string(), "1/3");
    }

    #[test]
    fn parsing() {
        assert_eq!(parse_answer("<answer>L0,L3</answer>"), (set(&["L0", "L3"]), Status::Ok));
        assert_eq!(parse_answer("L12"), (set(&["L12"]), Status::NoTags));
        assert_eq!(parse_answer("<answer></answer>"), (set(&[]), Status::Empty));
        assert_eq!(parse_answer("<answer> L4 , L7. </answer> L9"), (set(&["L4", "L7"]), Status::Ok));
        assert_eq!(parse_answer("<answer>L4, line 7</answer>"), (set(&["L4"]), Status::MalformedTokens));
        assert_eq!(parse_answer("\"L13.\""), (set(&["L13"]), Status::NoTags));
        assert_eq!(parse_answer("HELLO L2x L3"), (set(&["L3"]), Status::NoTags));
        assert_eq!(parse_answer("<ANSWER>L05</ANSWER>"), (set(&["L5"]), Status::Ok));
    }
}
