use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Words that end with a period without ending a sentence.
const ABBREVIATIONS: &[&str] = &[
    "mr", "mrs", "ms", "dr", "prof", "sr", "jr", "st", "vs", "etc", "e.g", "i.e", "inc", "ltd", "co",
    "corp", "no", "mt", "gen", "col", "lt", "sgt", "capt", "rev", "hon", "u.s", "u.k", "a.m", "p.m",
    "jan", "feb", "mar", "apr", "jun", "jul", "aug", "sep", "sept", "oct", "nov", "dec", "fig", "approx",
    "dept", "est", "vol", "cf", "al",
];

const MIN_WORDS: usize = 3;

/// Sentences available for replacing distractor lines.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PaddingCorpus {
    pub sentences: Vec<String>,
}

impl PaddingCorpus {
    pub fn from_file(path: &Path) -> Result<Self> {
        split_sentences(&std::fs::read_to_string(path)?)
    }

    pub fn len(&self) -> usize {
        self.sentences.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sentences.is_empty()
    }
}

fn is_abbreviation(before: &str) -> bool {
    let word = before
        .rsplit(|c: char| c.is_whitespace() || c == '(' || c == '"' || c == '\u{201c}')
        .next()
        .unwrap_or("");
    let word = word.trim_end_matches('.');
    if word.chars().count() == 1 && word.chars().all(|c| c.is_uppercase()) {
        return true; // an initial, as in "J. Smith"
    }
    ABBREVIATIONS.contains(&word.to_lowercase().as_str())
}

fn closing(c: char) -> bool {
    matches!(c, '"' | '\'' | ')' | ']' | '\u{201d}' | '\u{2019}')
}

/// Splits on `.`, `!` or `?` (plus closing quotes) followed by whitespace and
/// an uppercase letter, skipping known abbreviations and initials. Sentences
/// are whitespace-normalized to one line; those under three words are dropped.
pub fn split_sentences(text: &str) -> Result<PaddingCorpus> {
    let chars: Vec<(usize, char)> = text.char_indices().collect();
    let mut pieces = Vec::new();
    let mut start = 0;
    let mut i = 0;
    while i < chars.len() {
        let (pos, c) = chars[i];
        if matches!(c, '.' | '!' | '?') {
            let mut j = i + 1;
            while j < chars.len() && (matches!(chars[j].1, '.' | '!' | '?') || closing(chars[j].1)) {
                j += 1;
            }
            let mut k = j;
            while k < chars.len() && chars[k].1.is_whitespace() {
                k += 1;
            }
            let next_upper = k < chars.len() && k > j && {
                let n = chars[k].1;
                n.is_uppercase() || n.is_ascii_digit() || n == '"' || n == '\u{201c}'
            };
            if next_upper && !(c == '.' && is_abbreviation(&text[start..pos])) {
                let end = chars.get(j).map_or(text.len(), |&(p, _)| p);
                pieces.push(&text[start..end]);
                start = chars[k].0;
                i = k;
                continue;
            }
        }
        i += 1;
    }
    pieces.push(&text[start..]);
    let sentences: Vec<String> = pieces
        .into_iter()
        .map(|p| p.split_whitespace().collect::<Vec<_>>().join(" "))
        .filter(|s| s.split(' ').count() >= MIN_WORDS)
        .collect();
    if sentences.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    Ok(PaddingCorpus { sentences })
}
