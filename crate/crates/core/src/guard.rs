//! Blocklist check that keeps out-of-setting terms out of the King's story.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "verdict", content = "term", rename_all = "snake_case")]
pub enum GuardVerdict {
    Pass,
    Violation(String),
}

impl GuardVerdict {
    pub fn is_pass(&self) -> bool {
        matches!(self, GuardVerdict::Pass)
    }
}

/// Reports the first blocklisted term that occurs in `story_text` as a whole
/// word or phrase. Case-insensitive; whitespace runs in the text compare equal
/// to a single space, so "machine\n gun" still trips "machine gun".
pub fn anachronism_guard(story_text: &str, blocklist: &[String]) -> GuardVerdict {
    if blocklist.is_empty() {
        return GuardVerdict::Pass;
    }
    let text = normalize(story_text);
    for term in blocklist {
        let term = normalize(term);
        if !term.is_empty() && contains_phrase(&text, &term) {
            return GuardVerdict::Violation(term);
        }
    }
    GuardVerdict::Pass
}

fn normalize(s: &str) -> String {
    s.to_lowercase().split_whitespace().collect::<Vec<_>>().join(" ")
}

fn contains_phrase(text: &str, term: &str) -> bool {
    text.match_indices(term).any(|(start, m)| {
        let before = text[..start].chars().next_back();
        let after = text[start + m.len()..].chars().next();
        !before.is_some_and(char::is_alphabetic) && !after.is_some_and(char::is_alphabetic)
    })
}
