use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ChatRole {
    System,
    User,
    Assistant,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChatMessage {
    pub role: ChatRole,
    pub content: String,
}

impl ChatMessage {
    pub fn system(content: impl Into<String>) -> Self {
        Self { role: ChatRole::System, content: content.into() }
    }

    pub fn user(content: impl Into<String>) -> Self {
        Self { role: ChatRole::User, content: content.into() }
    }

    pub fn assistant(content: impl Into<String>) -> Self {
        Self { role: ChatRole::Assistant, content: content.into() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerationParams {
    pub temperature: f64,
    pub max_tokens: u32,
    pub model: String,
}

impl Default for GenerationParams {
    fn default() -> Self {
        Self { temperature: 0.8, max_tokens: 300, model: "gpt-4".to_string() }
    }
}

/// Everything a chat provider needs for one completion.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PromptBundle {
    pub messages: Vec<ChatMessage>,
    pub params: GenerationParams,
}

impl PromptBundle {
    /// Hex SHA-256 over the canonical JSON form. Used to tag recorded exchanges.
    pub fn digest(&self) -> String {
        let json = serde_json::to_vec(self).expect("bundle serializes");
        let hash = Sha256::digest(&json);
        hash.iter().map(|b| format!("{b:02x}")).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error, Serialize, Deserialize)]
pub enum ProviderError {
    #[error("provider deadline exceeded")]
    Timeout,
    #[error("provider transport error: {0}")]
    Transport(String),
    #[error("provider script exhausted after {0} replies")]
    Exhausted(usize),
}

/// A chat-completions backend. Implementations must tolerate concurrent calls.
pub trait ChatProvider: Send + Sync {
    fn complete(&self, bundle: &PromptBundle) -> Result<String, ProviderError>;
}

impl<P: ChatProvider + ?Sized> ChatProvider for &P {
    fn complete(&self, bundle: &PromptBundle) -> Result<String, ProviderError> {
        (**self).complete(bundle)
    }
}

impl<P: ChatProvider + ?Sized> ChatProvider for Arc<P> {
    fn complete(&self, bundle: &PromptBundle) -> Result<String, ProviderError> {
        (**self).complete(bundle)
    }
}

impl<P: ChatProvider + ?Sized> ChatProvider for Box<P> {
    fn complete(&self, bundle: &PromptBundle) -> Result<String, ProviderError> {
        (**self).complete(bundle)
    }
}

/// Replays a fixed list of raw replies, one per call, ignoring the prompt.
///
/// Reply `i` goes to call `i`; calls past the end fail with
/// [`ProviderError::Exhausted`].
#[derive(Debug, Default)]
pub struct ScriptedProvider {
    replies: Vec<String>,
    cursor: AtomicUsize,
}

impl ScriptedProvider {
    pub fn new<I, S>(replies: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        Self { replies: replies.into_iter().map(Into::into).collect(), cursor: AtomicUsize::new(0) }
    }

    /// Parses a script file: a JSON array of raw reply strings.
    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        let replies: Vec<String> = serde_json::from_str(text)?;
        Ok(Self::new(replies))
    }

    pub fn calls(&self) -> usize {
        self.cursor.load(Ordering::SeqCst)
    }

    pub fn remaining(&self) -> usize {
        self.replies.len().saturating_sub(self.calls())
    }
}

impl ChatProvider for ScriptedProvider {
    fn complete(&self, _bundle: &PromptBundle) -> Result<String, ProviderError> {
        let index = self.cursor.fetch_add(1, Ordering::SeqCst);
        self.replies.get(index).cloned().ok_or(ProviderError::Exhausted(self.replies.len()))
    }
}
