use serde::{Deserialize, Serialize};

use super::parse::{parse_king_response, KingResponse, ParseFailure};
use super::provider::{ChatMessage, ChatProvider, PromptBundle, ProviderError};
use crate::guard::{anachronism_guard, GuardVerdict};

/// Sent back to the model after a reply that broke the JSON contract.
pub const FORMAT_CORRECTION: &str = "Your last reply broke the required format. Reply again with only one JSON object with the keys \"isValid\" (boolean), \"comment\" (string) and \"story\" (string), and nothing else.";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RepairPolicy {
    pub max_retries: u32,
    /// Lowercase terms that must never appear in an accepted story.
    pub blocklist: Vec<String>,
}

impl Default for RepairPolicy {
    fn default() -> Self {
        Self { max_retries: 2, blocklist: Vec::new() }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Completion {
    pub king: KingResponse,
    /// The reply exactly as the provider sent it.
    pub raw: String,
    pub attempts: u32,
}

/// Why an individual attempt was thrown away.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum AttemptFault {
    Parse(String),
    Anachronism(String),
    Transport(String),
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum GatewayError {
    #[error("provider failed after {attempts} attempts; last fault: {last:?}")]
    ProviderFailure { attempts: u32, last: AttemptFault },
    #[error("provider deadline exceeded on attempt {attempts}")]
    Timeout { attempts: u32 },
}

/// Asks the provider for a King reply, re-asking up to `max_retries` times
/// when the reply does not parse or trips the blocklist.
///
/// Each re-ask extends the conversation with the rejected reply and a
/// correction, so the model sees what it got wrong. Transport errors are
/// retried with the unchanged conversation; a timeout ends the call.
pub fn complete_with_repair(
    provider: &dyn ChatProvider,
    bundle: &PromptBundle,
    policy: &RepairPolicy,
) -> Result<Completion, GatewayError> {
    let mut working = bundle.clone();
    let mut attempts = 0;
    let mut last = AttemptFault::Transport("no attempt made".into());

    while attempts <= policy.max_retries {
        attempts += 1;
        let raw = match provider.complete(&working) {
            Ok(raw) => raw,
            Err(ProviderError::Timeout) => return Err(GatewayError::Timeout { attempts }),
            Err(e) => {
                last = AttemptFault::Transport(e.to_string());
                continue;
            }
        };
        let correction = match parse_king_response(&raw) {
            Ok(king) => match anachronism_guard(&king.story, &policy.blocklist) {
                GuardVerdict::Pass => return Ok(Completion { king, raw, attempts }),
                GuardVerdict::Violation(term) => {
                    let note = anachronism_correction(&term);
                    last = AttemptFault::Anachronism(term);
                    note
                }
            },
            Err(failure) => {
                last = AttemptFault::Parse(failure.to_string());
                correction_for(&failure)
            }
        };
        if !raw.trim().is_empty() {
            working.messages.push(ChatMessage::assistant(raw));
        }
        working.messages.push(ChatMessage::user(correction));
    }
    tracing::warn!(attempts, ?last, "king reply unusable after retries");
    Err(GatewayError::ProviderFailure { attempts, last })
}

fn correction_for(failure: &ParseFailure) -> String {
    match failure {
        ParseFailure::EmptyStory => {
            format!("{FORMAT_CORRECTION} When isValid is true the story must not be empty.")
        }
        _ => FORMAT_CORRECTION.to_string(),
    }
}

fn anachronism_correction(term: &str) -> String {
    format!("\"{term}\" does not belong in an ancient Persian tale. Rewrite the story without it, in the same JSON format.")
}
