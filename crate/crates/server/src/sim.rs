//! Headless scripted games: scripted King, stub images, stepping clock.

use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use taleweaver_core::gateway::{PromptBundle, ProviderError};
use taleweaver_core::imagery::SUMMARY_INSTRUCTION;
use taleweaver_core::{
    BattleOutcome, ChatProvider, Phase, ScriptedProvider, SessionConfig, SessionError, SessionId, StubImageService,
};

use crate::clock::StepClock;
use crate::host::{play_turn_and_refresh, HostError, Services, SessionHost};

/// Script file: player lines paired with raw King replies.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Script {
    pub player_inputs: Vec<String>,
    pub provider_replies: Vec<String>,
    pub image_stub_seed: u64,
    /// Replies to scene-summary prompts. Without them the summary is
    /// derived from the story itself.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub summary_replies: Option<Vec<String>>,
}

impl Script {
    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }
}

/// Deterministic summarizer: the last story line of the prompt, cut to
/// fifty words.
#[derive(Debug, Clone, Copy, Default)]
pub struct EchoSummarizer;

impl ChatProvider for EchoSummarizer {
    fn complete(&self, bundle: &PromptBundle) -> Result<String, ProviderError> {
        let content = bundle.messages.last().map(|m| m.content.as_str()).unwrap_or("");
        let story = content.strip_suffix(SUMMARY_INSTRUCTION).unwrap_or(content);
        let line = story.lines().rev().find(|l| !l.trim().is_empty()).unwrap_or("an empty land");
        Ok(line.split_whitespace().take(50).collect::<Vec<_>>().join(" "))
    }
}

/// Printed after a simulation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SimSummary {
    pub session_id: SessionId,
    pub turns: usize,
    pub rejections: usize,
    pub weapons: usize,
    pub outcome: Option<String>,
    pub phase: Phase,
}

impl SimSummary {
    pub fn finished(&self) -> bool {
        matches!(self.phase, Phase::Ended(_))
    }
}

pub fn script_services(script: &Script) -> Services {
    let summary: Arc<dyn ChatProvider> = match &script.summary_replies {
        Some(replies) => Arc::new(ScriptedProvider::new(replies.clone())),
        None => Arc::new(EchoSummarizer),
    };
    Services {
        chat: Arc::new(ScriptedProvider::new(script.provider_replies.clone())),
        summary,
        image: Arc::new(StubImageService),
        clock: Arc::new(StepClock::default()),
    }
}

/// Plays `script` to the end into `out` (which must not already hold a
/// transcript). Story turns stop at the first provider failure or when the
/// battle opens; the battle then uses weapons in the order they were found.
pub fn simulate(script: &Script, config: SessionConfig, out: &Path) -> Result<SimSummary, HostError> {
    let seed = script.image_stub_seed;
    let host = SessionHost::create(out, SessionId::from_seed(seed), seed, config, script_services(script))?;
    for input in &script.player_inputs {
        if host.snapshot().phase != Phase::Storytelling {
            break;
        }
        match play_turn_and_refresh(&host, input) {
            Ok(_) => {}
            Err(HostError::Session(SessionError::EmptyInput | SessionError::InputTooLong { .. })) => {
                tracing::info!(input, "script line skipped");
            }
            Err(HostError::Session(e)) => {
                tracing::warn!(error = %e, "story stopped");
                break;
            }
            Err(e) => return Err(e),
        }
    }
    if host.snapshot().phase == Phase::Battle {
        for weapon in host.snapshot().weapon_kinds() {
            if host.snapshot().phase != Phase::Battle {
                break;
            }
            host.battle(weapon)?;
        }
    }
    let s = host.snapshot();
    Ok(SimSummary {
        session_id: s.id,
        turns: s.turns.len(),
        rejections: s.rejections(),
        weapons: s.weapons.len(),
        outcome: match s.phase {
            Phase::Ended(BattleOutcome::Won) => Some("won".into()),
            Phase::Ended(BattleOutcome::Lost) => Some("lost".into()),
            _ => None,
        },
        phase: s.phase,
    })
}
