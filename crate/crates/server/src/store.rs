//! Per-session directory layout:
//!
//! ```text
//! <dir>/transcript.jsonl     one TranscriptRecord per line, seq from 0
//! <dir>/snapshot.json        latest SessionSnapshot
//! <dir>/scene_v{n}.png       pixelized scene, version n
//! <dir>/scene_v{n}_raw.png   generator output for version n
//! ```

use std::fs::{self, File, OpenOptions};
use std::io::{self, BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use taleweaver_core::{Raster, SessionId};

use crate::transcript::{SessionSnapshot, TranscriptRecord};

pub const TRANSCRIPT_FILE: &str = "transcript.jsonl";
pub const SNAPSHOT_FILE: &str = "snapshot.json";

#[derive(Debug, thiserror::Error)]
pub enum StoreError {
    #[error("storage failure at {path}: {source}")]
    Storage { path: PathBuf, source: io::Error },
    #[error("sequence gap: expected seq {expected}, got {got}")]
    SequenceGap { expected: u64, got: u64 },
    #[error("corrupt transcript at seq {seq}: {reason}")]
    CorruptTranscript { seq: u64, reason: String },
    #[error("session directory {0} already holds a transcript")]
    AlreadyExists(PathBuf),
    #[error("encode: {0}")]
    Encode(String),
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> StoreError + '_ {
    move |source| StoreError::Storage { path: path.to_path_buf(), source }
}

pub fn scene_path(dir: &Path, version: u32) -> PathBuf {
    dir.join(format!("scene_v{version}.png"))
}

pub fn raw_scene_path(dir: &Path, version: u32) -> PathBuf {
    dir.join(format!("scene_v{version}_raw.png"))
}

/// Root directory holding one subdirectory per session.
#[derive(Debug, Clone)]
pub struct SessionStore {
    root: PathBuf,
}

impl SessionStore {
    pub fn new(root: impl Into<PathBuf>) -> Self {
        Self { root: root.into() }
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn session_dir(&self, id: SessionId) -> PathBuf {
        self.root.join(id.to_string())
    }
}

/// Appender for one session's transcript. Every append is synced to disk
/// before it returns.
#[derive(Debug)]
pub struct SessionLog {
    dir: PathBuf,
    file: File,
    next_seq: u64,
}

impl SessionLog {
    /// Starts a new transcript in `dir`, creating the directory.
    pub fn create(dir: impl Into<PathBuf>) -> Result<Self, StoreError> {
        let dir = dir.into();
        fs::create_dir_all(&dir).map_err(io_err(&dir))?;
        let path = dir.join(TRANSCRIPT_FILE);
        if path.exists() && fs::metadata(&path).map_err(io_err(&path))?.len() > 0 {
            return Err(StoreError::AlreadyExists(dir));
        }
        let file = OpenOptions::new().create(true).append(true).open(&path).map_err(io_err(&path))?;
        Ok(Self { dir, file, next_seq: 0 })
    }

    /// Reopens an existing transcript for further appends.
    pub fn reopen(dir: impl Into<PathBuf>) -> Result<(Self, Vec<TranscriptRecord>), StoreError> {
        let dir = dir.into();
        let records = load_transcript(&dir)?;
        let path = dir.join(TRANSCRIPT_FILE);
        let file = OpenOptions::new().append(true).open(&path).map_err(io_err(&path))?;
        let next_seq = records.len() as u64;
        Ok((Self { dir, file, next_seq }, records))
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn next_seq(&self) -> u64 {
        self.next_seq
    }

    /// Seq of the newest record, if any.
    pub fn last_seq(&self) -> Option<u64> {
        self.next_seq.checked_sub(1)
    }

    /// Appends a record whose `seq` must be exactly the next one.
    pub fn append(&mut self, record: &TranscriptRecord) -> Result<u64, StoreError> {
        if record.seq != self.next_seq {
            return Err(StoreError::SequenceGap { expected: self.next_seq, got: record.seq });
        }
        let mut line = serde_json::to_vec(record).map_err(|e| StoreError::Encode(e.to_string()))?;
        line.push(b'\n');
        let path = self.dir.join(TRANSCRIPT_FILE);
        self.file.write_all(&line).map_err(io_err(&path))?;
        self.file.sync_data().map_err(io_err(&path))?;
        self.next_seq += 1;
        Ok(record.seq)
    }

    pub fn write_snapshot(&self, snapshot: &SessionSnapshot) -> Result<(), StoreError> {
        let bytes = serde_json::to_vec(snapshot).map_err(|e| StoreError::Encode(e.to_string()))?;
        write_atomic(&self.dir.join(SNAPSHOT_FILE), &bytes)
    }

    pub fn write_scene(&self, version: u32, raw: &Raster, pixelized: &Raster) -> Result<(), StoreError> {
        let enc = |r: &Raster| r.to_png().map_err(|e| StoreError::Encode(e.to_string()));
        write_atomic(&raw_scene_path(&self.dir, version), &enc(raw)?)?;
        write_atomic(&scene_path(&self.dir, version), &enc(pixelized)?)
    }
}

fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), StoreError> {
    let tmp = path.with_extension("tmp");
    {
        let mut f = File::create(&tmp).map_err(io_err(&tmp))?;
        f.write_all(bytes).map_err(io_err(&tmp))?;
        f.sync_data().map_err(io_err(&tmp))?;
    }
    fs::rename(&tmp, path).map_err(io_err(path))
}

/// Reads and frames a transcript: every line must parse and seqs must run
/// 0, 1, 2, ... A missing or empty transcript is corrupt at seq 0.
pub fn load_transcript(dir: &Path) -> Result<Vec<TranscriptRecord>, StoreError> {
    let path = dir.join(TRANSCRIPT_FILE);
    let file = match File::open(&path) {
        Ok(f) => f,
        Err(e) if e.kind() == io::ErrorKind::NotFound => {
            return Err(StoreError::CorruptTranscript { seq: 0, reason: "no transcript".into() })
        }
        Err(e) => return Err(io_err(&path)(e)),
    };
    let mut records = Vec::new();
    for line in BufReader::new(file).split(b'\n') {
        let line = line.map_err(io_err(&path))?;
        let seq = records.len() as u64;
        let record: TranscriptRecord = serde_json::from_slice(&line)
            .map_err(|e| StoreError::CorruptTranscript { seq, reason: format!("unreadable record: {e}") })?;
        if record.seq != seq {
            return Err(StoreError::CorruptTranscript { seq, reason: format!("record carries seq {}", record.seq) });
        }
        records.push(record);
    }
    Ok(records)
}

pub fn load_snapshot(dir: &Path) -> Result<SessionSnapshot, StoreError> {
    let path = dir.join(SNAPSHOT_FILE);
    let bytes = fs::read(&path).map_err(io_err(&path))?;
    serde_json::from_slice(&bytes)
        .map_err(|e| StoreError::CorruptTranscript { seq: 0, reason: format!("unreadable snapshot: {e}") })
}

pub fn load_raw_scene(dir: &Path, version: u32) -> Result<Raster, StoreError> {
    let path = raw_scene_path(dir, version);
    let bytes = fs::read(&path).map_err(io_err(&path))?;
    Raster::from_png(&bytes).map_err(|e| StoreError::Encode(e.to_string()))
}
