//! Prompting the King and making sense of what comes back.

mod audit;
mod parse;
mod prompt;
mod provider;
mod repair;

pub use audit::{audit_limits, word_count, LimitAudit, COMMENT_WORD_LIMIT, STORY_WORD_LIMIT};
pub use parse::{extract_object, parse_king_response, KingResponse, ParseFailure};
pub use prompt::{
    assemble_messages, build_system_prompt, EXAMPLE_PROMPT, RESPONSE_FORMAT, ROLE_DESCRIPTION, STORY_CONTEXT,
    SYSTEM_BLOCKS,
};
pub use provider::{ChatMessage, ChatProvider, ChatRole, GenerationParams, PromptBundle, ProviderError, ScriptedProvider};
pub use repair::{complete_with_repair, AttemptFault, Completion, GatewayError, RepairPolicy, FORMAT_CORRECTION};
