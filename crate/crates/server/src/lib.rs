//! Session persistence, transcript replay, scripted simulation and the
//! HTTP/WebSocket service for taleweaver.

pub mod api;
pub mod clock;
pub mod config;
pub mod host;
pub mod live;
pub mod recorder;
pub mod replay;
pub mod sim;
pub mod store;
pub mod transcript;

pub use clock::{Clock, StepClock, SystemClock};
pub use config::{Config, ConfigError};
pub use host::{play_turn_and_refresh, HostError, Services, SessionHost, TurnReport};
pub use replay::{replay_dir, replay_from_snapshot, ReplayError};
pub use sim::{simulate, EchoSummarizer, Script, SimSummary};
pub use store::{SessionLog, SessionStore, StoreError};
pub use transcript::{Frame, Purpose, RecordKind, SessionSnapshot, TranscriptRecord};
