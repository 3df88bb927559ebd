use serde::{Deserialize, Serialize};

use super::parse::KingResponse;

pub const COMMENT_WORD_LIMIT: usize = 30;
pub const STORY_WORD_LIMIT: usize = 40;

/// Word counts of a King reply against the limits the prompt asks for.
/// Advisory only: nothing is truncated or rejected.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LimitAudit {
    pub comment_words: usize,
    pub story_words: usize,
    pub comment_over: bool,
    pub story_over: bool,
}

pub fn word_count(text: &str) -> usize {
    text.split_whitespace().count()
}

pub fn audit_limits(resp: &KingResponse) -> LimitAudit {
    let comment_words = word_count(&resp.comment);
    let story_words = word_count(&resp.story);
    LimitAudit {
        comment_words,
        story_words,
        comment_over: comment_words > COMMENT_WORD_LIMIT,
        story_over: story_words > STORY_WORD_LIMIT,
    }
}
