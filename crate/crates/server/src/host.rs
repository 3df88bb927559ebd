//! One live session: a single writer over the transcript plus a committed
//! state that readers clone cheaply.

use std::path::PathBuf;
use std::sync::atomic::{AtomicBool, AtomicU64, Ordering};
use std::sync::{Arc, Mutex, MutexGuard, RwLock};

use taleweaver_core::imagery::{render_scene, SceneError};
use taleweaver_core::session::BattleReport;
use taleweaver_core::{
    ChatProvider, GameSession, ImageService, Raster, SessionConfig, SessionError, SessionId, TurnOutcome, WeaponKind,
};
use tokio::sync::broadcast;

use crate::clock::Clock;
use crate::recorder::RecordingProvider;
use crate::replay::{replay_dir, ReplayError};
use crate::store::{load_transcript, SessionLog, StoreError};
use crate::transcript::{Frame, Purpose, RecordKind, SessionSnapshot, TranscriptRecord};

/// External collaborators of a session.
#[derive(Clone)]
pub struct Services {
    /// Answers King prompts.
    pub chat: Arc<dyn ChatProvider>,
    /// Answers scene-summary prompts; usually the same backend as `chat`.
    pub summary: Arc<dyn ChatProvider>,
    pub image: Arc<dyn ImageService>,
    pub clock: Arc<dyn Clock>,
}

#[derive(Debug, thiserror::Error)]
pub enum HostError {
    #[error("another turn is in flight for this session")]
    Busy,
    #[error(transparent)]
    Session(#[from] SessionError),
    #[error(transparent)]
    Store(#[from] StoreError),
    #[error(transparent)]
    Replay(#[from] ReplayError),
    #[error("scene refresh failed: {0}")]
    Scene(#[from] SceneError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct TurnReport {
    pub outcome: TurnOutcome,
    /// Set when the turn reached a weapon milestone; pass it to
    /// [`SessionHost::refresh`].
    pub refresh: Option<u64>,
}

struct Writer {
    log: SessionLog,
    installed_gen: u64,
}

pub struct SessionHost {
    writer: Mutex<Writer>,
    committed: RwLock<Arc<GameSession>>,
    busy: AtomicBool,
    requested_gen: AtomicU64,
    services: Services,
    frames: broadcast::Sender<Frame>,
}

struct BusyGuard<'a>(&'a AtomicBool);

impl Drop for BusyGuard<'_> {
    fn drop(&mut self) {
        self.0.store(false, Ordering::SeqCst);
    }
}

impl SessionHost {
    /// Starts a fresh session in `dir`.
    pub fn create(
        dir: impl Into<PathBuf>,
        id: SessionId,
        seed: u64,
        config: SessionConfig,
        services: Services,
    ) -> Result<Self, HostError> {
        let session = GameSession::with_id(id, config.clone(), seed)?;
        let log = SessionLog::create(dir)?;
        let host = Self::assemble(log, session, services);
        {
            let mut w = host.lock_writer();
            let now = host.services.clock.now();
            host.append_all(&mut w, now, vec![RecordKind::SessionCreated { session_id: id, seed, config }])?;
            w.log.write_snapshot(&SessionSnapshot { transcript_seq: 0, session: (*host.snapshot()).clone() })?;
        }
        Ok(host)
    }

    /// Reopens a session directory, rebuilding state from its transcript.
    pub fn open(dir: impl Into<PathBuf>, services: Services) -> Result<Self, HostError> {
        let dir = dir.into();
        let session = replay_dir(&dir)?;
        let (log, _) = SessionLog::reopen(&dir)?;
        Ok(Self::assemble(log, session, services))
    }

    fn assemble(log: SessionLog, session: GameSession, services: Services) -> Self {
        let (frames, _) = broadcast::channel(256);
        Self {
            writer: Mutex::new(Writer { log, installed_gen: 0 }),
            committed: RwLock::new(Arc::new(session)),
            busy: AtomicBool::new(false),
            requested_gen: AtomicU64::new(0),
            services,
            frames,
        }
    }

    pub fn dir(&self) -> PathBuf {
        self.lock_writer().log.dir().to_path_buf()
    }

    /// The latest committed state.
    pub fn snapshot(&self) -> Arc<GameSession> {
        self.committed.read().unwrap_or_else(|e| e.into_inner()).clone()
    }

    pub fn subscribe(&self) -> broadcast::Receiver<Frame> {
        self.frames.subscribe()
    }

    pub fn transcript(&self) -> Result<Vec<TranscriptRecord>, HostError> {
        let w = self.lock_writer();
        Ok(load_transcript(w.log.dir())?)
    }

    /// The pixelized scene composited over the play view, if one exists.
    pub fn scene_image(&self) -> Option<Raster> {
        let s = self.snapshot();
        let scene = s.scene.as_ref()?;
        scene.composite(&s.config, s.rng_seed).ok()
    }

    /// Plays one story turn. Every provider call is recorded and the turn is
    /// durable in the transcript before this returns, including failed
    /// turns. Input rejected by validation records nothing.
    pub fn play_turn(&self, text: &str) -> Result<TurnReport, HostError> {
        let _busy = self.claim()?;
        let base = self.snapshot();
        base.validate_input(text)?;

        let mut next = (*base).clone();
        let now = self.services.clock.now();
        let recorder = RecordingProvider::new(&*self.services.chat, Purpose::King);
        let result = next.advance_story(text, &recorder, now);

        let outcome = match &result {
            Ok(o) => o.clone(),
            Err(_) => TurnOutcome::error(base.phase),
        };
        let mut records = vec![RecordKind::PlayerInput { text: text.to_string() }];
        records.extend(recorder.into_records());
        records.push(RecordKind::TurnCommitted { outcome: outcome.clone() });
        if result.is_ok() && next.phase != base.phase {
            records.push(RecordKind::PhaseChanged { from: base.phase, to: next.phase });
        }

        {
            let mut w = self.lock_writer();
            let next = result.is_ok().then_some(next);
            self.commit(&mut w, now, records, next)?;
        }
        let outcome = result?;
        let refresh = (!outcome.weapons_gained.is_empty()).then(|| self.requested_gen.fetch_add(1, Ordering::SeqCst) + 1);
        Ok(TurnReport { outcome, refresh })
    }

    /// Strikes the King with `weapon`.
    pub fn battle(&self, weapon: WeaponKind) -> Result<BattleReport, HostError> {
        let _busy = self.claim()?;
        let base = self.snapshot();
        let mut next = (*base).clone();
        let report = next.battle_action(weapon)?;
        let mut records: Vec<RecordKind> =
            report.events.iter().map(|&event| RecordKind::BattleEvent { weapon, event }).collect();
        if next.phase != base.phase {
            records.push(RecordKind::PhaseChanged { from: base.phase, to: next.phase });
        }
        let mut w = self.lock_writer();
        let now = self.services.clock.now();
        self.commit(&mut w, now, records, Some(next))?;
        Ok(report)
    }

    /// Renders a scene for milestone `generation` and installs it unless a
    /// newer milestone has already been installed. Returns the installed
    /// version, or `None` when superseded.
    pub fn refresh(&self, generation: u64) -> Result<Option<u32>, HostError> {
        let base = self.snapshot();
        let recorder = RecordingProvider::new(&*self.services.summary, Purpose::Summary);
        let render = render_scene(&base, &recorder, &*self.services.image);
        let exchanges = recorder.into_records();
        let render = render?;

        let mut w = self.lock_writer();
        if generation <= w.installed_gen {
            tracing::debug!(generation, installed = w.installed_gen, "scene render superseded");
            return Ok(None);
        }
        let mut next = (*self.snapshot()).clone();
        let summary = render.summary.text.clone();
        let reveal = render.reveal;
        let version = next.install_scene(render);
        let scene = next.scene.as_ref().expect("installed");
        w.log.write_scene(version, &scene.raw, &scene.pixelized)?;
        let mut records = exchanges;
        records.push(RecordKind::SceneRefreshed { version, reveal, summary });
        let now = self.services.clock.now();
        self.commit_raw(&mut w, now, records, Some(next))?;
        w.installed_gen = generation;
        Ok(Some(version))
    }

    fn claim(&self) -> Result<BusyGuard<'_>, HostError> {
        self.busy
            .compare_exchange(false, true, Ordering::SeqCst, Ordering::SeqCst)
            .map(|_| BusyGuard(&self.busy))
            .map_err(|_| HostError::Busy)
    }

    fn lock_writer(&self) -> MutexGuard<'_, Writer> {
        self.writer.lock().unwrap_or_else(|e| e.into_inner())
    }

    /// Appends `records`, then installs `next` (keeping whatever scene is
    /// current, since refreshes may have landed meanwhile) and snapshots.
    fn commit(
        &self,
        w: &mut Writer,
        now: chrono::DateTime<chrono::Utc>,
        records: Vec<RecordKind>,
        next: Option<GameSession>,
    ) -> Result<(), HostError> {
        let next = next.map(|mut n| {
            n.scene = self.snapshot().scene.clone();
            n
        });
        self.commit_raw(w, now, records, next)
    }

    fn commit_raw(
        &self,
        w: &mut Writer,
        now: chrono::DateTime<chrono::Utc>,
        records: Vec<RecordKind>,
        next: Option<GameSession>,
    ) -> Result<(), HostError> {
        let appended = self.append_all(w, now, records)?;
        if let Some(next) = next {
            *self.committed.write().unwrap_or_else(|e| e.into_inner()) = Arc::new(next);
        }
        let seq = w.log.last_seq().unwrap_or(0);
        w.log.write_snapshot(&SessionSnapshot { transcript_seq: seq, session: (*self.snapshot()).clone() })?;
        for record in appended.iter().filter(|r| r.kind.is_frame()) {
            // no subscribers is fine
            let _ = self.frames.send(Frame::from(record));
        }
        Ok(())
    }

    fn append_all(
        &self,
        w: &mut Writer,
        now: chrono::DateTime<chrono::Utc>,
        records: Vec<RecordKind>,
    ) -> Result<Vec<TranscriptRecord>, HostError> {
        let mut out = Vec::with_capacity(records.len());
        for kind in records {
            let record = TranscriptRecord { seq: w.log.next_seq(), timestamp: now, kind };
            w.log.append(&record)?;
            out.push(record);
        }
        Ok(out)
    }
}

/// Plays a turn and, when it hits a milestone, refreshes the scene inline.
/// Refresh failures are logged and never fail the turn.
pub fn play_turn_and_refresh(host: &SessionHost, text: &str) -> Result<TurnOutcome, HostError> {
    let report = host.play_turn(text)?;
    let mut outcome = report.outcome;
    if let Some(generation) = report.refresh {
        match host.refresh(generation) {
            Ok(version) => outcome.scene_version = version,
            Err(e) => tracing::warn!(error = %e, "scene refresh failed"),
        }
    }
    Ok(outcome)
}
