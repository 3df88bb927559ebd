//! Turn-based duel against the King.
//!
//! The King's hit points are the exact sum of the player's weapon damage, and
//! the King's fixed counterattack can land at most `n - 1` times before the
//! last weapon falls. A config where `player_hp0 > king_attack * (n - 1)`
//! therefore guarantees that a player who uses every weapon wins.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::session::{GameSession, Phase};
use crate::weapons::WeaponKind;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BattleConfig {
    pub player_hp0: u32,
    pub king_attack: u32,
    pub weapon_damage: BTreeMap<WeaponKind, u32>,
}

impl Default for BattleConfig {
    fn default() -> Self {
        Self {
            player_hp0: 100,
            king_attack: 10,
            weapon_damage: WeaponKind::ALL.into_iter().map(|k| (k, 30)).collect(),
        }
    }
}

impl BattleConfig {
    pub fn damage(&self, kind: WeaponKind) -> u32 {
        self.weapon_damage.get(&kind).copied().unwrap_or(0)
    }

    /// Checks that a player holding `weapon_count` weapons cannot lose by
    /// using them all.
    pub fn validate(&self, weapon_count: usize) -> Result<(), BattleError> {
        if self.player_hp0 == 0 || self.king_attack == 0 {
            return Err(BattleError::UnsafeConfig("player_hp0 and king_attack must be positive".into()));
        }
        let worst = u64::from(self.king_attack) * weapon_count.saturating_sub(1) as u64;
        if u64::from(self.player_hp0) <= worst {
            return Err(BattleError::UnsafeConfig(format!(
                "player_hp0 {} must exceed king_attack {} x {} counterattacks",
                self.player_hp0,
                self.king_attack,
                weapon_count.saturating_sub(1)
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BattleOutcome {
    Won,
    Lost,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Actor {
    Player,
    King,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "action", rename_all = "snake_case")]
pub enum BattleDetail {
    UseWeapon { weapon: WeaponKind, damage: u32 },
    Counterattack { damage: u32 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BattleEvent {
    pub actor: Actor,
    pub detail: BattleDetail,
    /// (player_hp, king_hp) after the event.
    pub hp_after: (u32, u32),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BattleState {
    pub player_hp: u32,
    pub king_hp: u32,
    /// Weapon -> used flag.
    pub arsenal: BTreeMap<WeaponKind, bool>,
    pub turn_log: Vec<BattleEvent>,
    pub outcome: Option<BattleOutcome>,
    pub config: BattleConfig,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum BattleError {
    #[error("battle requires the battle phase, session is in {0:?}")]
    WrongPhase(Phase),
    #[error("{0} was already used")]
    WeaponAlreadyUsed(WeaponKind),
    #[error("{0} is not in the arsenal")]
    WeaponNotOwned(WeaponKind),
    #[error("the battle is over")]
    BattleOver,
    #[error("unsafe battle config: {0}")]
    UnsafeConfig(String),
}

impl BattleState {
    /// Opens a battle with every listed weapon unused.
    pub fn new(weapons: impl IntoIterator<Item = WeaponKind>, config: BattleConfig) -> Result<Self, BattleError> {
        let arsenal: BTreeMap<WeaponKind, bool> = weapons.into_iter().map(|k| (k, false)).collect();
        config.validate(arsenal.len())?;
        let king_hp = arsenal.keys().map(|&k| config.damage(k)).sum();
        Ok(Self { player_hp: config.player_hp0, king_hp, arsenal, turn_log: Vec::new(), outcome: None, config })
    }

    pub fn unused(&self) -> impl Iterator<Item = WeaponKind> + '_ {
        self.arsenal.iter().filter(|(_, used)| !**used).map(|(&k, _)| k)
    }

    /// Strikes with `weapon`; if the King survives he hits back.
    pub fn use_weapon(&mut self, weapon: WeaponKind) -> Result<(), BattleError> {
        if self.outcome.is_some() {
            return Err(BattleError::BattleOver);
        }
        match self.arsenal.get_mut(&weapon) {
            None => return Err(BattleError::WeaponNotOwned(weapon)),
            Some(true) => return Err(BattleError::WeaponAlreadyUsed(weapon)),
            Some(used) => *used = true,
        }

        let damage = self.config.damage(weapon);
        self.king_hp = self.king_hp.saturating_sub(damage);
        self.turn_log.push(BattleEvent {
            actor: Actor::Player,
            detail: BattleDetail::UseWeapon { weapon, damage },
            hp_after: (self.player_hp, self.king_hp),
        });

        if self.king_hp == 0 {
            self.outcome = Some(BattleOutcome::Won);
            return Ok(());
        }

        let damage = self.config.king_attack;
        self.player_hp = self.player_hp.saturating_sub(damage);
        self.turn_log.push(BattleEvent {
            actor: Actor::King,
            detail: BattleDetail::Counterattack { damage },
            hp_after: (self.player_hp, self.king_hp),
        });
        if self.player_hp == 0 {
            self.outcome = Some(BattleOutcome::Lost);
        }
        Ok(())
    }

    /// Re-derives the final state from the opening state and the event log.
    pub fn replay_log(&self) -> Result<BattleState, BattleError> {
        let mut state = BattleState::new(self.arsenal.keys().copied(), self.config.clone())?;
        for event in &self.turn_log {
            if let BattleDetail::UseWeapon { weapon, .. } = event.detail {
                state.use_weapon(weapon)?;
            }
        }
        Ok(state)
    }
}

/// Opens the battle for a session that has reached the battle phase.
pub fn start_battle(session: &GameSession, config: &BattleConfig) -> Result<BattleState, BattleError> {
    if session.phase != Phase::Battle {
        return Err(BattleError::WrongPhase(session.phase));
    }
    BattleState::new(session.weapons.iter().map(|w| w.kind), config.clone())
}

/// Pure form of [`BattleState::use_weapon`].
pub fn battle_turn(state: &BattleState, weapon: WeaponKind) -> Result<BattleState, BattleError> {
    let mut next = state.clone();
    next.use_weapon(weapon)?;
    Ok(next)
}
