//! Rebuilds a session from its transcript, with recorded provider replies
//! standing in for live calls.

use std::path::Path;

use taleweaver_core::battle::Actor;
use taleweaver_core::imagery::{pixelize, SceneArtifact};
use taleweaver_core::{GameSession, OutcomeKind};

use crate::recorder::{Exchange, ReplayProvider};
use crate::store::{load_raw_scene, load_snapshot, load_transcript, StoreError};
use crate::transcript::{Purpose, RecordKind, TranscriptRecord};

#[derive(Debug, thiserror::Error)]
pub enum ReplayError {
    #[error("corrupt transcript at seq {seq}: {reason}")]
    CorruptTranscript { seq: u64, reason: String },
    #[error(transparent)]
    Store(StoreError),
}

impl From<StoreError> for ReplayError {
    fn from(e: StoreError) -> Self {
        match e {
            StoreError::CorruptTranscript { seq, reason } => ReplayError::CorruptTranscript { seq, reason },
            other => ReplayError::Store(other),
        }
    }
}

fn corrupt(seq: u64, reason: impl Into<String>) -> ReplayError {
    ReplayError::CorruptTranscript { seq, reason: reason.into() }
}

/// Replays the whole transcript in `dir`.
pub fn replay_dir(dir: &Path) -> Result<GameSession, ReplayError> {
    let records = load_transcript(dir)?;
    replay_records(&records, None, dir)
}

/// Loads the snapshot in `dir` and replays only the records after it.
pub fn replay_from_snapshot(dir: &Path) -> Result<GameSession, ReplayError> {
    let snapshot = load_snapshot(dir)?;
    let records = load_transcript(dir)?;
    let start = snapshot.transcript_seq as usize + 1;
    if start > records.len() {
        return Err(corrupt(records.len() as u64, "snapshot is ahead of the transcript"));
    }
    replay_records(&records[start..], Some(snapshot.session), dir)
}

/// Replays `records` on top of `base`, or from scratch when `base` is
/// `None` (then the first record must be `SessionCreated`). Scene records
/// read their raw image from `dir`.
pub fn replay_records(
    records: &[TranscriptRecord],
    base: Option<GameSession>,
    dir: &Path,
) -> Result<GameSession, ReplayError> {
    let mut iter = records.iter().peekable();
    let mut session = match base {
        Some(s) => s,
        None => match iter.next() {
            Some(TranscriptRecord { kind: RecordKind::SessionCreated { session_id, seed, config }, seq, .. }) => {
                GameSession::with_id(*session_id, config.clone(), *seed).map_err(|e| corrupt(*seq, e.to_string()))?
            }
            Some(r) => return Err(corrupt(r.seq, format!("expected session_created, found {}", r.kind.name()))),
            None => return Err(corrupt(0, "missing session_created")),
        },
    };

    while let Some(record) = iter.next() {
        let seq = record.seq;
        match &record.kind {
            RecordKind::SessionCreated { .. } => return Err(corrupt(seq, "second session_created")),
            RecordKind::PlayerInput { text } => {
                let mut exchanges = Vec::new();
                let outcome = loop {
                    let Some(next) = iter.next() else {
                        return Err(corrupt(seq, "turn without turn_committed"));
                    };
                    match &next.kind {
                        RecordKind::ProviderExchange { purpose: Purpose::King, request_hash, reply, error } => {
                            let result = match (reply, error) {
                                (Some(r), None) => Ok(r.clone()),
                                (None, Some(e)) => Err(e.clone()),
                                _ => return Err(corrupt(next.seq, "exchange needs exactly one of reply and error")),
                            };
                            exchanges.push(Exchange { request_hash: request_hash.clone(), result });
                        }
                        RecordKind::ProviderExchange { purpose: Purpose::Summary, .. } => {}
                        RecordKind::TurnCommitted { outcome } => break (next.seq, outcome),
                        other => return Err(corrupt(next.seq, format!("unexpected {} inside a turn", other.name()))),
                    }
                };
                let (commit_seq, recorded) = outcome;
                let provider = ReplayProvider::new(exchanges);
                let before = session.clone();
                let result = session.advance_story(text, &provider, record.timestamp);
                provider.finish().map_err(|reason| corrupt(seq, reason))?;
                match result {
                    Ok(outcome) if &outcome == recorded => {}
                    Ok(outcome) => {
                        return Err(corrupt(commit_seq, format!("turn replayed as {:?}, recorded {:?}", outcome.kind, recorded.kind)))
                    }
                    Err(_) if recorded.kind == OutcomeKind::Error && session == before => {}
                    Err(e) => return Err(corrupt(commit_seq, format!("turn failed on replay: {e}"))),
                }
            }
            RecordKind::ProviderExchange { purpose: Purpose::Summary, .. } => {}
            RecordKind::ProviderExchange { purpose: Purpose::King, .. } => {
                return Err(corrupt(seq, "king exchange outside a turn"))
            }
            RecordKind::TurnCommitted { .. } => return Err(corrupt(seq, "turn_committed without player_input")),
            RecordKind::PhaseChanged { to, .. } => {
                if session.phase != *to {
                    return Err(corrupt(seq, format!("phase is {}, record says {to}", session.phase)));
                }
            }
            RecordKind::SceneRefreshed { version, reveal, .. } => {
                if *version != session.scene_version() + 1 {
                    return Err(corrupt(seq, format!("scene version {version} after {}", session.scene_version())));
                }
                let raw = load_raw_scene(dir, *version).map_err(|e| corrupt(seq, e.to_string()))?;
                let pixelized = pixelize(&raw, session.config.pixel_cell, session.config.palette_size)
                    .map_err(|e| corrupt(seq, e.to_string()))?;
                session.scene = Some(SceneArtifact { version: *version, raw, pixelized, reveal: *reveal });
            }
            RecordKind::BattleEvent { weapon, event } => {
                if event.actor != Actor::Player {
                    return Err(corrupt(seq, "king event without a player action"));
                }
                let report = session.battle_action(*weapon).map_err(|e| corrupt(seq, e.to_string()))?;
                if report.events[0] != *event {
                    return Err(corrupt(seq, "battle event differs on replay"));
                }
                for expected in &report.events[1..] {
                    match iter.next() {
                        Some(TranscriptRecord { kind: RecordKind::BattleEvent { event, .. }, .. }) if event == expected => {}
                        Some(r) => return Err(corrupt(r.seq, "battle event differs on replay")),
                        None => return Err(corrupt(seq, "battle action cut short")),
                    }
                }
            }
        }
    }
    Ok(session)
}
