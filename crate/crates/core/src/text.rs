//! Small string utilities shared by the validators and agents.

use alloc::string::String;
use alloc::vec::Vec;

/// Normalized identifier key (ASCII lowercase).
pub fn ident_key(s: &str) -> String {
    s.to_ascii_lowercase()
}

/// Levenshtein distance over chars.
pub fn edit_distance(a: &str, b: &str) -> usize {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    let mut prev: Vec<usize> = (0..=b.len()).collect();
    let mut cur = alloc::vec![0; b.len() + 1];
    for (i, ca) in a.iter().enumerate() {
        cur[0] = i + 1;
        for (j, cb) in b.iter().enumerate() {
            let sub = prev[j] + usize::from(ca != cb);
            cur[j + 1] = sub.min(prev[j + 1] + 1).min(cur[j] + 1);
        }
        core::mem::swap(&mut prev, &mut cur);
    }
    prev[b.len()]
}

/// Whitespace token count, the mock tokenizer.
pub fn whitespace_tokens(s: &str) -> u64 {
    s.split_whitespace().count() as u64
}

/// Lowercase words of a natural-language string, punctuation stripped.
pub fn words(s: &str) -> Vec<String> {
    s.split(|c: char| !(c.is_alphanumeric() || c == '_'))
        .filter(|w| !w.is_empty())
        .map(|w| w.to_lowercase())
        .collect()
}

/// `Street_address` -> `street address`.
pub fn humanize(ident: &str) -> String {
    ident.replace('_', " ").to_lowercase()
}
