//! Line-oriented terminal game.

use std::io::{BufRead, Write};
use std::path::Path;

use taleweaver_core::battle::{Actor, BattleDetail};
use taleweaver_core::{BattleOutcome, OutcomeKind, Phase, SessionConfig, SessionError, SessionId, WeaponKind};
use taleweaver_server::{play_turn_and_refresh, HostError, Services, SessionHost};

use crate::{fail, Failure, GAME_FAILURE, USAGE};

const INTRO: &str = "\
You are Shahrzad. Each night you tell the King a story; if he likes it, he
continues it. Weapons named in his tales become yours. Collect enough and
face him in battle.";

fn io(e: std::io::Error) -> Failure {
    fail(GAME_FAILURE, e)
}

pub fn run(
    root: &Path,
    seed: u64,
    config: SessionConfig,
    services: Services,
    mut input: impl BufRead,
    mut out: impl Write,
) -> Result<(), Failure> {
    let id = SessionId::from_seed(seed);
    let dir = root.join(id.to_string());
    let host = SessionHost::create(&dir, id, seed, config, services).map_err(|e| fail(USAGE, e))?;
    writeln!(out, "{INTRO}\n\nsession {id} ({})\n", dir.display()).map_err(io)?;

    let mut line = String::new();
    let mut read = |out: &mut dyn Write, prompt: &str| -> Result<Option<String>, Failure> {
        write!(out, "{prompt}").map_err(io)?;
        out.flush().map_err(io)?;
        line.clear();
        if input.read_line(&mut line).map_err(io)? == 0 {
            return Ok(None);
        }
        Ok(Some(line.trim_end_matches(['\n', '\r']).to_string()))
    };

    while host.snapshot().phase == Phase::Storytelling {
        let Some(text) = read(&mut out, "> ")? else {
            return Err(fail(GAME_FAILURE, "input ended before the game did"));
        };
        let outcome = match play_turn_and_refresh(&host, &text) {
            Ok(o) => o,
            Err(HostError::Session(e @ (SessionError::EmptyInput | SessionError::InputTooLong { .. }))) => {
                writeln!(out, "{e}").map_err(io)?;
                continue;
            }
            Err(e) => return Err(fail(GAME_FAILURE, e)),
        };
        let king = outcome.king.as_ref().expect("committed turns carry a reply");
        match outcome.kind {
            OutcomeKind::Rejected => writeln!(out, "The King frowns: {}", king.comment).map_err(io)?,
            _ => {
                if !king.comment.is_empty() {
                    writeln!(out, "King: {}", king.comment).map_err(io)?;
                }
                writeln!(out, "{}", king.story).map_err(io)?;
            }
        }
        for w in &outcome.weapons_gained {
            writeln!(out, "* You obtained a {w}!").map_err(io)?;
        }
        let s = host.snapshot();
        if let Some(v) = outcome.scene_version {
            writeln!(out, "* The world takes shape (scene v{v}, {:.0}% revealed)", s.reveal_fraction() * 100.0).map_err(io)?;
        }
        if !outcome.weapons_gained.is_empty() {
            writeln!(out, "* Weapons: {}/{}", s.weapons.len(), s.config.weapon_threshold).map_err(io)?;
        }
    }

    writeln!(out, "\nThe King rises from his throne. The battle begins!").map_err(io)?;
    while host.snapshot().phase == Phase::Battle {
        let s = host.snapshot();
        let battle = s.battle.as_ref().expect("battle phase has a battle");
        let choices: Vec<String> = battle.unused().map(|w| w.to_string()).collect();
        writeln!(out, "You {} hp, King {} hp. Weapons: {}", battle.player_hp, battle.king_hp, choices.join(", ")).map_err(io)?;
        let Some(text) = read(&mut out, "weapon> ")? else {
            return Err(fail(GAME_FAILURE, "input ended before the battle did"));
        };
        let weapon: WeaponKind = match text.trim().parse() {
            Ok(w) => w,
            Err(_) => {
                writeln!(out, "choose one of: {}", choices.join(", ")).map_err(io)?;
                continue;
            }
        };
        let report = match host.battle(weapon) {
            Ok(r) => r,
            Err(HostError::Session(e)) => {
                writeln!(out, "{e}").map_err(io)?;
                continue;
            }
            Err(e) => return Err(fail(GAME_FAILURE, e)),
        };
        for event in &report.events {
            match (event.actor, event.detail) {
                (Actor::Player, BattleDetail::UseWeapon { weapon, damage }) => {
                    writeln!(out, "You strike with the {weapon} for {damage}.").map_err(io)?
                }
                (_, BattleDetail::Counterattack { damage }) => writeln!(out, "The King strikes back for {damage}.").map_err(io)?,
                (actor, detail) => writeln!(out, "{actor:?}: {detail:?}").map_err(io)?,
            }
        }
    }
    match host.snapshot().phase {
        Phase::Ended(BattleOutcome::Won) => {
            writeln!(out, "The King falls. You are free.").map_err(io)?;
            Ok(())
        }
        _ => {
            writeln!(out, "You have fallen.").map_err(io)?;
            Err(fail(GAME_FAILURE, ""))
        }
    }
}
