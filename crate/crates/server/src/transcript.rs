//! Append-only transcript records. One JSON object per line on disk.

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use taleweaver_core::gateway::ProviderError;
use taleweaver_core::{BattleEvent, GameSession, Phase, SessionConfig, SessionId, TurnOutcome, WeaponKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Purpose {
    King,
    Summary,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "payload", rename_all = "snake_case")]
pub enum RecordKind {
    SessionCreated {
        session_id: SessionId,
        seed: u64,
        config: SessionConfig,
    },
    PlayerInput {
        text: String,
    },
    ProviderExchange {
        purpose: Purpose,
        request_hash: String,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        reply: Option<String>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        error: Option<ProviderError>,
    },
    TurnCommitted {
        outcome: TurnOutcome,
    },
    SceneRefreshed {
        version: u32,
        reveal: f64,
        summary: String,
    },
    BattleEvent {
        /// The weapon of the player action this event belongs to.
        weapon: WeaponKind,
        event: BattleEvent,
    },
    PhaseChanged {
        from: Phase,
        to: Phase,
    },
}

impl RecordKind {
    pub fn name(&self) -> &'static str {
        match self {
            RecordKind::SessionCreated { .. } => "session_created",
            RecordKind::PlayerInput { .. } => "player_input",
            RecordKind::ProviderExchange { .. } => "provider_exchange",
            RecordKind::TurnCommitted { .. } => "turn_committed",
            RecordKind::SceneRefreshed { .. } => "scene_refreshed",
            RecordKind::BattleEvent { .. } => "battle_event",
            RecordKind::PhaseChanged { .. } => "phase_changed",
        }
    }

    /// Records the play screen reacts to; these are pushed to stream clients.
    pub fn is_frame(&self) -> bool {
        matches!(
            self,
            RecordKind::TurnCommitted { .. }
                | RecordKind::SceneRefreshed { .. }
                | RecordKind::PhaseChanged { .. }
                | RecordKind::BattleEvent { .. }
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TranscriptRecord {
    pub seq: u64,
    pub timestamp: DateTime<Utc>,
    #[serde(flatten)]
    pub kind: RecordKind,
}

/// Wire frame for stream clients: `{type, seq, payload}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Frame {
    #[serde(rename = "type")]
    pub kind: String,
    pub seq: u64,
    pub payload: serde_json::Value,
}

impl From<&TranscriptRecord> for Frame {
    fn from(record: &TranscriptRecord) -> Self {
        let mut value = serde_json::to_value(&record.kind).expect("record serializes");
        let payload = value.get_mut("payload").map(serde_json::Value::take).unwrap_or_default();
        Frame { kind: record.kind.name().to_string(), seq: record.seq, payload }
    }
}

/// Full session state plus the last transcript seq it reflects.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionSnapshot {
    pub transcript_seq: u64,
    pub session: GameSession,
}
