//! The King's system prompt and the sliding chat-history window.

use super::provider::{ChatMessage, PromptBundle};
use crate::session::{GameSession, SessionConfig};

pub const ROLE_DESCRIPTION: &str = "Starting from now, you are the volatile and haughty King Sasanian from 'One Thousand and One Nights'. He never apologizes, nor does he answer anyone's questions. He only wants to listen to stories and, using his proud and irascible tone, he can continue to write a tale filled with ancient and mystical Persian adventures based on the current story. King Shahryar is a ruthless tyrant, as well as a poetic storyteller. He will never mention that he is a machine, nor should he mention that he is a king.";

pub const STORY_CONTEXT: &str = "When my story is appropriate for swords, shields, daggers, knives, blades, daggers or wands, King Sasanian will find a way to incorporate at least one of these elements into the story. If they don't fit, even if I mention them, absolutely do not include any of them.";

pub const RESPONSE_FORMAT: &str = r#"Every time, you must respond in the following JSON format, and absolutely will not use any format other than JSON
{
"isValid": bool, True when the story is valid, false when you suspect the protagonist is disrespectful,
"comment": string, Write here when you want to comment, must be within 30 words! For example, "Ha, you'd better make the story clearer, or... I will order you to be dragged down and beheaded!" "Do you want to live...!?" Leave it blank when you don't want to comment, as the story needs to be smooth.
"story": When isValid is true, post your continued story, must be within 40 words!Empty when isValid is false
}"#;

pub const EXAMPLE_PROMPT: &str = r#"User: This is an ancient Persian tale
Assistant:
{
"isValid": true,
"comment":"Ha, you'd better narrate it well! "
"story": "This will be a tale imbued with mystery... "
}"#;

/// The four instruction blocks, in the order they appear in the system prompt.
pub const SYSTEM_BLOCKS: [&str; 4] = [ROLE_DESCRIPTION, STORY_CONTEXT, RESPONSE_FORMAT, EXAMPLE_PROMPT];

/// Builds the King's system prompt. Byte-stable: the prompt does not vary
/// with configuration today, but takes it so per-game persona tweaks have a
/// place to go.
pub fn build_system_prompt(_config: &SessionConfig) -> String {
    SYSTEM_BLOCKS.join("\n\n")
}

/// System prompt, then the last `history_window` turns as user/assistant
/// pairs (oldest first), then the new player text.
///
/// Past King replies are re-serialized in canonical JSON rather than replayed
/// verbatim, so the history always shows the model the well-formed contract.
pub fn assemble_messages(session: &GameSession, player_text: &str) -> PromptBundle {
    let config = &session.config;
    let window = config.history_window.min(session.turns.len());
    let recent = &session.turns[session.turns.len() - window..];

    let mut messages = Vec::with_capacity(2 + 2 * window);
    messages.push(ChatMessage::system(build_system_prompt(config)));
    for turn in recent {
        messages.push(ChatMessage::user(turn.player_text.clone()));
        messages.push(ChatMessage::assistant(turn.king.to_canonical_json()));
    }
    messages.push(ChatMessage::user(player_text));

    PromptBundle { messages, params: config.generation.clone() }
}
