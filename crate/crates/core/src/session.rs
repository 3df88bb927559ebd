//! The per-player game state machine.
//!
//! `Storytelling -> Battle -> Ended(outcome)`, never backward. A story turn
//! either commits completely or leaves the session untouched.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use uuid::Uuid;

use crate::battle::{BattleConfig, BattleError, BattleEvent, BattleOutcome, BattleState};
use crate::gateway::{
    assemble_messages, audit_limits, complete_with_repair, ChatProvider, GatewayError, GenerationParams, KingResponse,
    RepairPolicy,
};
use crate::imagery::{HintColors, MaskShape, SceneArtifact, SceneRender, DEFAULT_CELL, DEFAULT_PALETTE};
use crate::weapons::{detect_weapons, Weapon, WeaponKind};

pub const DEFAULT_STYLE_PROMPT: &str = "purple, bright, Arabian night, 16bitscene, game art, Persian-style, Arabian style, retro, masterpiece, mid shot in a scene with ground, Islamic style, Islamic art";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SessionId(pub Uuid);

impl SessionId {
    pub fn random_from(bytes: [u8; 16]) -> Self {
        Self(uuid::Builder::from_random_bytes(bytes).into_uuid())
    }

    /// Stable id for seeded (scripted, replayed) sessions.
    pub fn from_seed(seed: u64) -> Self {
        let digest = Sha256::digest(seed.to_le_bytes());
        Self::random_from(digest[..16].try_into().expect("16 bytes"))
    }
}

impl fmt::Display for SessionId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

impl FromStr for SessionId {
    type Err = uuid::Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Uuid::parse_str(s).map(SessionId)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Phase {
    Storytelling,
    Battle,
    Ended(BattleOutcome),
}

impl Phase {
    pub fn as_str(self) -> &'static str {
        match self {
            Phase::Storytelling => "storytelling",
            Phase::Battle => "battle",
            Phase::Ended(BattleOutcome::Won) => "ended_won",
            Phase::Ended(BattleOutcome::Lost) => "ended_lost",
        }
    }

    fn rank(self) -> u8 {
        match self {
            Phase::Storytelling => 0,
            Phase::Battle => 1,
            Phase::Ended(_) => 2,
        }
    }

    /// Whether the state machine has an edge from `self` to `next`.
    pub fn can_become(self, next: Phase) -> bool {
        self == next || (self.rank() + 1 == next.rank())
    }
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Phase {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s {
            "storytelling" => Phase::Storytelling,
            "battle" => Phase::Battle,
            "ended_won" => Phase::Ended(BattleOutcome::Won),
            "ended_lost" => Phase::Ended(BattleOutcome::Lost),
            other => return Err(format!("unknown phase {other:?}")),
        })
    }
}

impl Serialize for Phase {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(self.as_str())
    }
}

impl<'de> Deserialize<'de> for Phase {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        String::deserialize(deserializer)?.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SessionConfig {
    pub weapon_threshold: usize,
    /// Past turns (player + King pairs) replayed to the King each call.
    pub history_window: usize,
    pub max_player_chars: usize,
    pub anachronism_blocklist: Vec<String>,
    pub style_prompt: String,
    pub image_size: (u32, u32),
    pub horizon_ratio: f64,
    pub generation: GenerationParams,
    pub max_retries: u32,
    pub battle: BattleConfig,
    pub pixel_cell: u32,
    pub palette_size: usize,
    pub hint_colors: HintColors,
    pub reveal_mask: MaskShape,
}

impl Default for SessionConfig {
    fn default() -> Self {
        Self {
            weapon_threshold: 4,
            history_window: 15,
            max_player_chars: 280,
            anachronism_blocklist: Vec::new(),
            style_prompt: DEFAULT_STYLE_PROMPT.to_string(),
            image_size: (512, 512),
            horizon_ratio: 0.6,
            generation: GenerationParams::default(),
            max_retries: 2,
            battle: BattleConfig::default(),
            pixel_cell: DEFAULT_CELL,
            palette_size: DEFAULT_PALETTE,
            hint_colors: HintColors::default(),
            reveal_mask: MaskShape::Disk,
        }
    }
}

impl SessionConfig {
    pub fn validate(&self) -> Result<(), SessionError> {
        let fail = |msg: String| Err(SessionError::InvalidConfig(msg));
        let lexicon = WeaponKind::ALL.len();
        if self.weapon_threshold == 0 || self.weapon_threshold > lexicon {
            return fail(format!("weapon_threshold {} must be in 1..={lexicon}", self.weapon_threshold));
        }
        if self.history_window == 0 {
            return fail("history_window must be at least 1".into());
        }
        if self.max_player_chars == 0 {
            return fail("max_player_chars must be at least 1".into());
        }
        if !(0.0..=1.0).contains(&self.horizon_ratio) {
            return fail(format!("horizon_ratio {} outside [0, 1]", self.horizon_ratio));
        }
        let (w, h) = self.image_size;
        if w == 0 || h == 0 {
            return fail(format!("image_size {w}x{h} is empty"));
        }
        if self.pixel_cell == 0 || self.pixel_cell > w.min(h) {
            return fail(format!("pixel_cell {} must be in 1..={}", self.pixel_cell, w.min(h)));
        }
        if self.palette_size == 0 {
            return fail("palette_size must be at least 1".into());
        }
        if !(self.generation.temperature >= 0.0) || self.generation.max_tokens == 0 {
            return fail("generation params need temperature >= 0 and max_tokens > 0".into());
        }
        if let Some(term) = self.anachronism_blocklist.iter().find(|t| **t != t.to_lowercase()) {
            return fail(format!("blocklist term {term:?} must be lowercase"));
        }
        // a turn can overshoot the threshold, so guard the largest possible arsenal
        self.battle.validate(lexicon).map_err(|e| SessionError::InvalidConfig(e.to_string()))
    }

    pub fn repair_policy(&self) -> RepairPolicy {
        RepairPolicy { max_retries: self.max_retries, blocklist: self.anachronism_blocklist.clone() }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StoryTurn {
    pub index: usize,
    pub player_text: String,
    pub king: KingResponse,
    pub weapons_gained: Vec<WeaponKind>,
    pub timestamp: DateTime<Utc>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutcomeKind {
    Continued,
    Rejected,
    Error,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TurnOutcome {
    pub kind: OutcomeKind,
    pub king: Option<KingResponse>,
    pub weapons_gained: Vec<WeaponKind>,
    pub phase_after: Phase,
    pub scene_version: Option<u32>,
}

impl TurnOutcome {
    /// Outcome record for a turn that failed and changed nothing.
    pub fn error(phase: Phase) -> Self {
        Self { kind: OutcomeKind::Error, king: None, weapons_gained: Vec::new(), phase_after: phase, scene_version: None }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SessionError {
    #[error("invalid config: {0}")]
    InvalidConfig(String),
    #[error("not allowed in phase {0}")]
    WrongPhase(Phase),
    #[error("input must be non-empty")]
    EmptyInput,
    #[error("input is {len} characters, the limit is {max}")]
    InputTooLong { len: usize, max: usize },
    #[error("the King could not answer: {0}")]
    ProviderFailure(String),
    #[error("the King took too long to answer")]
    Timeout,
    #[error(transparent)]
    Battle(#[from] BattleError),
}

impl From<GatewayError> for SessionError {
    fn from(e: GatewayError) -> Self {
        match e {
            GatewayError::Timeout { .. } => SessionError::Timeout,
            other => SessionError::ProviderFailure(other.to_string()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GameSession {
    pub id: SessionId,
    pub phase: Phase,
    pub turns: Vec<StoryTurn>,
    /// Collected weapons in acquisition order, one per kind.
    pub weapons: Vec<Weapon>,
    pub scene: Option<SceneArtifact>,
    pub rng_seed: u64,
    pub config: SessionConfig,
    pub battle: Option<BattleState>,
}

/// What one battle action did to the session.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BattleReport {
    pub events: Vec<BattleEvent>,
    pub outcome: Option<BattleOutcome>,
    pub phase_after: Phase,
}

impl GameSession {
    pub fn new(config: SessionConfig, seed: u64) -> Result<Self, SessionError> {
        Self::with_id(SessionId::from_seed(seed), config, seed)
    }

    pub fn with_id(id: SessionId, config: SessionConfig, seed: u64) -> Result<Self, SessionError> {
        config.validate()?;
        Ok(Self {
            id,
            phase: Phase::Storytelling,
            turns: Vec::new(),
            weapons: Vec::new(),
            scene: None,
            rng_seed: seed,
            config,
            battle: None,
        })
    }

    pub fn collected(&self) -> BTreeSet<WeaponKind> {
        self.weapons.iter().map(|w| w.kind).collect()
    }

    pub fn weapon_kinds(&self) -> Vec<WeaponKind> {
        self.weapons.iter().map(|w| w.kind).collect()
    }

    /// The trimmed player text, if it is acceptable for a story turn.
    pub fn validate_input<'a>(&self, player_text: &'a str) -> Result<&'a str, SessionError> {
        if self.phase != Phase::Storytelling {
            return Err(SessionError::WrongPhase(self.phase));
        }
        let text = player_text.trim();
        if text.is_empty() {
            return Err(SessionError::EmptyInput);
        }
        let len = text.chars().count();
        if len > self.config.max_player_chars {
            return Err(SessionError::InputTooLong { len, max: self.config.max_player_chars });
        }
        Ok(text)
    }

    /// Plays one storytelling turn: the King judges the player's text and,
    /// if he accepts it, continues the tale. Weapons named in his story (and
    /// only there) are collected; reaching the threshold opens the battle.
    ///
    /// On error the session is left exactly as it was.
    pub fn advance_story(
        &mut self,
        player_text: &str,
        provider: &dyn ChatProvider,
        now: DateTime<Utc>,
    ) -> Result<TurnOutcome, SessionError> {
        let text = self.validate_input(player_text)?;
        let bundle = assemble_messages(self, text);
        let completion = complete_with_repair(provider, &bundle, &self.config.repair_policy())?;
        let king = completion.king;

        let audit = audit_limits(&king);
        if audit.comment_over || audit.story_over {
            tracing::info!(?audit, session = %self.id, "king reply over word limits");
        }

        let index = self.turns.len();
        let gained = if king.is_valid { detect_weapons(&king.story, &self.collected()) } else { Vec::new() };

        let mut weapons = self.weapons.clone();
        weapons.extend(gained.iter().map(|&kind| Weapon { kind, turn: index }));
        let phase_after = next_phase(self.phase, weapons.len(), self.config.weapon_threshold);
        let battle = if phase_after == Phase::Battle && self.battle.is_none() {
            Some(BattleState::new(weapons.iter().map(|w| w.kind), self.config.battle.clone())?)
        } else {
            self.battle.clone()
        };

        // commit
        self.turns.push(StoryTurn {
            index,
            player_text: text.to_string(),
            king: king.clone(),
            weapons_gained: gained.clone(),
            timestamp: now,
        });
        self.weapons = weapons;
        self.phase = phase_after;
        self.battle = battle;

        Ok(TurnOutcome {
            kind: if king.is_valid { OutcomeKind::Continued } else { OutcomeKind::Rejected },
            king: Some(king),
            weapons_gained: gained,
            phase_after,
            scene_version: None,
        })
    }

    /// The phase the session should be in given its weapons. Idempotent.
    pub fn check_phase_transition(&self) -> Phase {
        next_phase(self.phase, self.weapons.len(), self.config.weapon_threshold)
    }

    pub fn reveal_fraction(&self) -> f64 {
        reveal_fraction(self.weapons.len(), self.config.weapon_threshold)
    }

    /// Strikes the King with `weapon`. Ends the session when the battle ends.
    pub fn battle_action(&mut self, weapon: WeaponKind) -> Result<BattleReport, SessionError> {
        if self.phase != Phase::Battle {
            return Err(SessionError::WrongPhase(self.phase));
        }
        let battle = self.battle.as_mut().ok_or(SessionError::WrongPhase(self.phase))?;
        let before = battle.turn_log.len();
        battle.use_weapon(weapon)?;
        let events = battle.turn_log[before..].to_vec();
        let outcome = battle.outcome;
        if let Some(outcome) = outcome {
            self.phase = Phase::Ended(outcome);
        }
        Ok(BattleReport { events, outcome, phase_after: self.phase })
    }

    /// Installs a finished scene render as the next artifact version.
    pub fn install_scene(&mut self, render: SceneRender) -> u32 {
        let version = self.scene.as_ref().map_or(1, |s| s.version + 1);
        self.scene = Some(SceneArtifact { version, raw: render.raw, pixelized: render.pixelized, reveal: render.reveal });
        version
    }

    pub fn scene_version(&self) -> u32 {
        self.scene.as_ref().map_or(0, |s| s.version)
    }

    pub fn rejections(&self) -> usize {
        self.turns.iter().filter(|t| !t.king.is_valid).count()
    }
}

fn next_phase(phase: Phase, weapon_count: usize, threshold: usize) -> Phase {
    match phase {
        Phase::Storytelling if weapon_count >= threshold => Phase::Battle,
        other => other,
    }
}

/// `min(1, weapons / threshold)`.
pub fn reveal_fraction(weapon_count: usize, threshold: usize) -> f64 {
    if threshold == 0 {
        return 1.0;
    }
    (weapon_count as f64 / threshold as f64).min(1.0)
}
