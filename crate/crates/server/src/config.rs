//! TOML configuration shared by `serve` and `play`.
//!
//! ```toml
//! [providers.chat]
//! base_url = "https://api.openai.com/v1"
//! model = "gpt-4"
//! api_key_env = "OPENAI_API_KEY"
//!
//! [providers.image]
//! base_url = "http://127.0.0.1:7860"
//!
//! [game]
//! weapon_threshold = 4
//! image_size = [512, 512]
//!
//! [storage]
//! root = "sessions"
//! ```
//!
//! Secrets never live in the file: `api_key_env` names the variable that
//! holds the key.

use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Duration;

use serde::Deserialize;
use taleweaver_core::{ChatProvider, ImageService, ScriptedProvider, SessionConfig, StubImageService};

use crate::clock::SystemClock;
use crate::host::Services;
use crate::live::{OpenAiChat, SdImageService};
use crate::sim::{EchoSummarizer, Script};

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },
    #[error("invalid config {path}: {message}")]
    Parse { path: PathBuf, message: String },
    #[error("invalid game settings: {0}")]
    Invalid(String),
    #[error("environment variable {0} is not set")]
    MissingSecret(String),
    #[error("cannot load reply script {path}: {message}")]
    Script { path: PathBuf, message: String },
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    #[serde(default)]
    pub providers: Providers,
    #[serde(default)]
    pub game: Game,
    #[serde(default)]
    pub storage: Storage,
    #[serde(default)]
    pub server: Server,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Providers {
    #[serde(default)]
    pub chat: Chat,
    #[serde(default)]
    pub image: Image,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Chat {
    #[serde(default)]
    pub base_url: Option<String>,
    #[serde(default = "default_model")]
    pub model: String,
    #[serde(default)]
    pub api_key_env: Option<String>,
    /// Reply script used instead of a live endpoint.
    #[serde(default)]
    pub script: Option<PathBuf>,
    #[serde(default = "default_timeout")]
    pub timeout_secs: u64,
}

fn default_model() -> String {
    "gpt-4".into()
}

fn default_timeout() -> u64 {
    60
}

impl Default for Chat {
    fn default() -> Self {
        Self { base_url: None, model: default_model(), api_key_env: None, script: None, timeout_secs: default_timeout() }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Image {
    /// Without a base URL the offline stub generator is used.
    #[serde(default)]
    pub base_url: Option<String>,
    #[serde(default = "default_image_timeout")]
    pub timeout_secs: u64,
}

fn default_image_timeout() -> u64 {
    120
}

impl Default for Image {
    fn default() -> Self {
        Self { base_url: None, timeout_secs: default_image_timeout() }
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Game {
    pub weapon_threshold: Option<usize>,
    pub history_window: Option<usize>,
    pub style_prompt: Option<String>,
    pub horizon_ratio: Option<f64>,
    pub image_size: Option<(u32, u32)>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Storage {
    #[serde(default = "default_root")]
    pub root: PathBuf,
}

fn default_root() -> PathBuf {
    PathBuf::from("sessions")
}

impl Default for Storage {
    fn default() -> Self {
        Self { root: default_root() }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Server {
    #[serde(default = "default_bind")]
    pub bind: String,
}

fn default_bind() -> String {
    "127.0.0.1:8080".into()
}

impl Default for Server {
    fn default() -> Self {
        Self { bind: default_bind() }
    }
}

impl Config {
    /// Reads and checks a config file. Relative paths inside it resolve
    /// against the file's directory.
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read { path: path.into(), source })?;
        let mut config = Self::parse(&text).map_err(|e| match e {
            ConfigError::Parse { message, .. } => ConfigError::Parse { path: path.into(), message },
            other => other,
        })?;
        let base = path.parent().unwrap_or(Path::new("."));
        if config.storage.root.is_relative() {
            config.storage.root = base.join(&config.storage.root);
        }
        if let Some(script) = &mut config.providers.chat.script {
            if script.is_relative() {
                *script = base.join(&*script);
            }
        }
        Ok(config)
    }

    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let config: Config =
            toml::from_str(text).map_err(|e| ConfigError::Parse { path: PathBuf::new(), message: e.to_string() })?;
        config.session_config()?;
        if config.providers.chat.script.is_none() && config.providers.chat.base_url.is_none() {
            return Err(ConfigError::Invalid("providers.chat needs base_url or script".into()));
        }
        Ok(config)
    }

    /// Game defaults with the file's overrides applied.
    pub fn session_config(&self) -> Result<SessionConfig, ConfigError> {
        let mut c = SessionConfig::default();
        let g = &self.game;
        if let Some(v) = g.weapon_threshold {
            c.weapon_threshold = v;
        }
        if let Some(v) = g.history_window {
            c.history_window = v;
        }
        if let Some(v) = &g.style_prompt {
            c.style_prompt = v.clone();
        }
        if let Some(v) = g.horizon_ratio {
            c.horizon_ratio = v;
        }
        if let Some(v) = g.image_size {
            c.image_size = v;
        }
        c.generation.model = self.providers.chat.model.clone();
        c.validate().map_err(|e| ConfigError::Invalid(e.to_string()))?;
        Ok(c)
    }

    /// Builds the backends this config names.
    pub fn services(&self) -> Result<Services, ConfigError> {
        let chat_cfg = &self.providers.chat;
        let (chat, summary): (Arc<dyn ChatProvider>, Arc<dyn ChatProvider>) = match &chat_cfg.script {
            Some(path) => {
                let (king, summaries) = load_reply_script(path)?;
                let summary: Arc<dyn ChatProvider> = match summaries {
                    Some(s) => Arc::new(s),
                    None => Arc::new(EchoSummarizer),
                };
                (Arc::new(king), summary)
            }
            None => {
                let key = match &chat_cfg.api_key_env {
                    Some(var) => Some(std::env::var(var).map_err(|_| ConfigError::MissingSecret(var.clone()))?),
                    None => None,
                };
                let base = chat_cfg.base_url.clone().unwrap_or_default();
                let client: Arc<dyn ChatProvider> =
                    Arc::new(OpenAiChat::new(base, key, Duration::from_secs(chat_cfg.timeout_secs)));
                (client.clone(), client)
            }
        };
        let image: Arc<dyn ImageService> = match &self.providers.image.base_url {
            Some(url) => Arc::new(SdImageService::new(url.clone(), Duration::from_secs(self.providers.image.timeout_secs))),
            None => Arc::new(StubImageService),
        };
        Ok(Services { chat, summary, image, clock: Arc::new(SystemClock) })
    }
}

/// A reply script is either a JSON array of raw King replies or a full
/// simulation script (whose player inputs are ignored here).
pub fn load_reply_script(path: &Path) -> Result<(ScriptedProvider, Option<ScriptedProvider>), ConfigError> {
    let err = |message: String| ConfigError::Script { path: path.into(), message };
    let text = std::fs::read_to_string(path).map_err(|e| err(e.to_string()))?;
    if let Ok(replies) = serde_json::from_str::<Vec<String>>(&text) {
        return Ok((ScriptedProvider::new(replies), None));
    }
    let script = Script::from_json(&text).map_err(|e| err(e.to_string()))?;
    Ok((ScriptedProvider::new(script.provider_replies), script.summary_replies.map(ScriptedProvider::new)))
}
