//! Story history -> scene summary -> styled image prompt -> generated,
//! pixelized scene.

use serde::{Deserialize, Serialize};

use super::hint::{make_segmentation_hint_with, HintError};
use super::pixelize::{pixelize, PixelizeError};
use super::raster::Raster;
use super::reveal::{composite_with, default_play_view, RevealError};
use super::service::{ImageError, ImagePrompt, ImageService};
use crate::gateway::{word_count, ChatMessage, ChatProvider, PromptBundle, ProviderError};
use crate::session::{GameSession, SessionConfig};

pub const SUMMARY_INSTRUCTION: &str = "Summarize the environment depicted in the story above in English, ensuring the description is vivid and concentrated. No mention of protagonists or characters is allowed. Keep it within 50 words.";
pub const SUMMARY_WORD_LIMIT: usize = 50;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SceneSummary {
    pub text: String,
    pub source_turn_count: usize,
    /// Set when the summary runs past the word limit. Advisory.
    pub over_limit: bool,
}

#[derive(Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneArtifact {
    pub version: u32,
    pub raw: Raster,
    pub pixelized: Raster,
    pub reveal: f64,
}

impl std::fmt::Debug for SceneArtifact {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SceneArtifact")
            .field("version", &self.version)
            .field("size", &self.raw.size())
            .field("reveal", &self.reveal)
            .finish()
    }
}

impl SceneArtifact {
    /// The pixelized scene grown over the play view by `reveal`.
    pub fn composite(&self, config: &SessionConfig, seed: u64) -> Result<Raster, RevealError> {
        let (w, h) = self.pixelized.size();
        composite_with(&default_play_view(w, h), &self.pixelized, self.reveal, seed, config.reveal_mask)
    }
}

/// A generated scene that has not been given a version yet.
#[derive(Debug, Clone, PartialEq)]
pub struct SceneRender {
    pub summary: SceneSummary,
    pub prompt: ImagePrompt,
    pub raw: Raster,
    pub pixelized: Raster,
    pub reveal: f64,
}

#[derive(Debug, thiserror::Error)]
pub enum SceneError {
    #[error("no accepted story turns to summarize")]
    EmptyHistory,
    #[error("summary is empty")]
    EmptySummary,
    #[error("summary provider failed: {0}")]
    Provider(#[from] ProviderError),
    #[error(transparent)]
    Image(#[from] ImageError),
    #[error(transparent)]
    Hint(#[from] HintError),
    #[error(transparent)]
    Pixelize(#[from] PixelizeError),
}

/// The accepted story so far, player text and King continuation per turn.
pub fn story_history(session: &GameSession) -> Vec<String> {
    session
        .turns
        .iter()
        .filter(|t| t.king.is_valid)
        .flat_map(|t| [t.player_text.clone(), t.king.story.clone()])
        .collect()
}

pub fn summary_bundle(session: &GameSession) -> Result<PromptBundle, SceneError> {
    let history = story_history(session);
    if history.is_empty() {
        return Err(SceneError::EmptyHistory);
    }
    let content = format!("{}\n\n{SUMMARY_INSTRUCTION}", history.join("\n"));
    Ok(PromptBundle { messages: vec![ChatMessage::user(content)], params: session.config.generation.clone() })
}

/// Asks the chat model to condense the story into one environment description.
pub fn summarize_scene(session: &GameSession, provider: &dyn ChatProvider) -> Result<SceneSummary, SceneError> {
    let bundle = summary_bundle(session)?;
    let text = provider.complete(&bundle)?.trim().to_string();
    if text.is_empty() {
        return Err(SceneError::EmptySummary);
    }
    let over_limit = word_count(&text) > SUMMARY_WORD_LIMIT;
    if over_limit {
        tracing::info!(words = word_count(&text), "scene summary over word limit");
    }
    Ok(SceneSummary {
        text,
        source_turn_count: session.turns.iter().filter(|t| t.king.is_valid).count(),
        over_limit,
    })
}

/// `summary, style` in that order.
pub fn build_image_prompt(summary: &SceneSummary, config: &SessionConfig, seed: u64) -> Result<ImagePrompt, SceneError> {
    let text = summary.text.trim();
    if text.is_empty() {
        return Err(SceneError::EmptySummary);
    }
    Ok(ImagePrompt {
        positive: format!("{text}, {}", config.style_prompt),
        negative: String::new(),
        seed,
        size: config.image_size,
    })
}

/// Seed for the `version`-th scene of a session.
pub fn scene_seed(session_seed: u64, version: u32) -> u64 {
    session_seed.wrapping_add(u64::from(version))
}

/// Runs the whole pipeline against a snapshot of the session without
/// touching it; the reveal is taken from the snapshot's weapon count.
pub fn render_scene(
    session: &GameSession,
    provider: &dyn ChatProvider,
    service: &dyn ImageService,
) -> Result<SceneRender, SceneError> {
    let config = &session.config;
    let summary = summarize_scene(session, provider)?;
    let prompt = build_image_prompt(&summary, config, scene_seed(session.rng_seed, session.scene_version() + 1))?;
    let hint = make_segmentation_hint_with(config.image_size, config.horizon_ratio, config.hint_colors)?;
    let raw = service.generate(&prompt, &hint)?;
    if raw.size() != config.image_size {
        return Err(ImageError::WrongSize { got: raw.size(), want: config.image_size }.into());
    }
    let pixelized = pixelize(&raw, config.pixel_cell, config.palette_size)?;
    Ok(SceneRender { summary, prompt, raw, pixelized, reveal: session.reveal_fraction() })
}

/// Renders and installs a new scene. On failure the previous artifact stays
/// in place and the error is returned for logging; it must never fail the
/// story turn that triggered it.
pub fn refresh_scene<'s>(
    session: &'s mut GameSession,
    provider: &dyn ChatProvider,
    service: &dyn ImageService,
) -> Result<&'s SceneArtifact, SceneError> {
    let render = render_scene(session, provider, service)?;
    session.install_scene(render);
    Ok(session.scene.as_ref().expect("just installed"))
}
