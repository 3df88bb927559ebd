//! Engine for a storytelling game narrated by an LLM "King".
//!
//! The player tells a story; the King judges it and continues it in a fixed
//! JSON contract. Weapons the King names materialize in the player's
//! inventory, each new weapon grows a generated scene over the play view,
//! and once enough weapons are gathered the session moves to a short battle
//! the player is guaranteed to win by using everything they collected.
//!
//! Model access goes through [`gateway::ChatProvider`] and
//! [`imagery::ImageService`]; both have deterministic stand-ins so whole
//! games can be run and replayed offline.

pub mod battle;
pub mod gateway;
pub mod guard;
pub mod imagery;
pub mod session;
pub mod weapons;

pub use battle::{battle_turn, start_battle, BattleConfig, BattleError, BattleEvent, BattleOutcome, BattleState};
pub use gateway::{ChatProvider, KingResponse, ScriptedProvider};
pub use guard::{anachronism_guard, GuardVerdict};
pub use imagery::{ImageService, Raster, SceneArtifact, StubImageService};
pub use session::{
    reveal_fraction, GameSession, OutcomeKind, Phase, SessionConfig, SessionError, SessionId, StoryTurn, TurnOutcome,
};
pub use weapons::{detect_weapons, Weapon, WeaponKind};
