//! The weapon lexicon and keyword materialization.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// One of the six weapon kinds the King can weave into a story.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WeaponKind {
    Sword,
    Shield,
    Dagger,
    Knife,
    Blade,
    Wand,
}

impl WeaponKind {
    pub const ALL: [WeaponKind; 6] = [
        WeaponKind::Sword,
        WeaponKind::Shield,
        WeaponKind::Dagger,
        WeaponKind::Knife,
        WeaponKind::Blade,
        WeaponKind::Wand,
    ];

    pub fn singular(self) -> &'static str {
        match self {
            WeaponKind::Sword => "sword",
            WeaponKind::Shield => "shield",
            WeaponKind::Dagger => "dagger",
            WeaponKind::Knife => "knife",
            WeaponKind::Blade => "blade",
            WeaponKind::Wand => "wand",
        }
    }

    pub fn plural(self) -> &'static str {
        match self {
            WeaponKind::Sword => "swords",
            WeaponKind::Shield => "shields",
            WeaponKind::Dagger => "daggers",
            WeaponKind::Knife => "knives",
            WeaponKind::Blade => "blades",
            WeaponKind::Wand => "wands",
        }
    }

    /// Maps a lowercase word to the kind it names, if any.
    pub fn from_surface(word: &str) -> Option<WeaponKind> {
        WeaponKind::ALL
            .into_iter()
            .find(|k| k.singular() == word || k.plural() == word)
    }
}

impl fmt::Display for WeaponKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.singular())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown weapon {0:?}")]
pub struct UnknownWeapon(pub String);

impl FromStr for WeaponKind {
    type Err = UnknownWeapon;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        WeaponKind::from_surface(&s.trim().to_lowercase()).ok_or_else(|| UnknownWeapon(s.to_string()))
    }
}

/// A collected weapon and the story turn that materialized it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Weapon {
    pub kind: WeaponKind,
    pub turn: usize,
}

/// Finds weapon kinds named in `story_text` that have not been collected yet.
///
/// A surface form (singular or plural) matches only as a whole word: any
/// letter directly before or after it breaks the match, so "swordsman" does
/// not count. Matching is case-insensitive. Kinds come back in order of first
/// occurrence, each at most once.
pub fn detect_weapons(story_text: &str, already_collected: &BTreeSet<WeaponKind>) -> Vec<WeaponKind> {
    let lowered = story_text.to_lowercase();
    let mut found = Vec::new();
    for word in lowered.split(|c: char| !c.is_alphabetic()) {
        if word.is_empty() {
            continue;
        }
        if let Some(kind) = WeaponKind::from_surface(word) {
            if !already_collected.contains(&kind) && !found.contains(&kind) {
                found.push(kind);
            }
        }
    }
    found
}
