//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any fails. Fully offline: scripted King, stub images.

use std::collections::BTreeSet;
use std::fs;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use taleweaver_core::battle::BattleDetail;
use taleweaver_core::gateway::{assemble_messages, build_system_prompt, parse_king_response, ChatRole, ParseFailure};
use taleweaver_core::imagery::{
    build_image_prompt, composite_with, pixelize, refresh_scene, DiskMask, MaskShape, Raster, RevealMask, ScatterMask,
    SceneSummary, SUMMARY_INSTRUCTION,
};
use taleweaver_core::{
    detect_weapons, BattleConfig, BattleOutcome, BattleState, GameSession, KingResponse, Phase,
    ScriptedProvider, SessionConfig, StubImageService, WeaponKind,
};
use taleweaver_server::store::{load_snapshot, TRANSCRIPT_FILE};
use taleweaver_server::{replay_dir, simulate, EchoSummarizer, Script};

const GOLDEN: &str = include_str!("../fixtures/golden_script.json");

type Verdict = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn main() {
    let criteria: Vec<(&str, fn() -> Verdict)> = vec![
        ("golden end-to-end game", golden_game),
        ("parser totality and robustness", parser_robustness),
        ("detection oracle equivalence", detection_oracle),
        ("pixelizer properties", pixelizer_properties),
        ("reveal nesting", reveal_nesting),
        ("battle guarantee", battle_guarantee),
        ("replay determinism", replay_determinism),
        ("prompt fidelity", prompt_fidelity),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        let verdict = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|p| {
            let msg = p.downcast_ref::<String>().cloned().or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()));
            Err(format!("panicked: {}", msg.unwrap_or_default()))
        });
        match verdict {
            Ok(detail) => println!("PASS  {name}: {detail}"),
            Err(why) => {
                failed += 1;
                println!("FAIL  {name}: {why}");
            }
        }
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}

// ---------------------------------------------------------------------------

fn golden_game() -> Verdict {
    let script = Script::from_json(GOLDEN).map_err(|e| e.to_string())?;
    let started = Instant::now();
    let mut s = GameSession::new(SessionConfig::default(), script.image_stub_seed).map_err(|e| e.to_string())?;
    let king = ScriptedProvider::new(script.provider_replies.clone());
    let mut refreshes = 0;
    for (i, text) in script.player_inputs.iter().enumerate() {
        let now = chrono::DateTime::from_timestamp(i as i64, 0).unwrap();
        let outcome = s.advance_story(text, &king, now).map_err(|e| format!("turn {i}: {e}"))?;
        if !outcome.weapons_gained.is_empty() {
            refresh_scene(&mut s, &EchoSummarizer, &StubImageService).map_err(|e| e.to_string())?;
            refreshes += 1;
        }
    }
    ensure(s.phase == Phase::Battle, || format!("phase after story {}", s.phase))?;
    for w in s.weapon_kinds() {
        s.battle_action(w).map_err(|e| e.to_string())?;
    }
    let elapsed = started.elapsed();

    let battle = s.battle.as_ref().ok_or("no battle state")?;
    ensure(s.turns.len() >= 6, || format!("{} turns", s.turns.len()))?;
    ensure(s.rejections() >= 1, || "no rejected turn".into())?;
    ensure(s.weapons.len() == 4, || format!("{} weapons", s.weapons.len()))?;
    ensure(battle.unused().count() == 0, || "weapons left unused".into())?;
    ensure(s.phase == Phase::Ended(BattleOutcome::Won), || format!("phase {}", s.phase))?;
    ensure(s.reveal_fraction() == 1.0, || format!("reveal {}", s.reveal_fraction()))?;
    ensure(battle.player_hp == 70, || format!("player_hp {}", battle.player_hp))?;
    ensure(refreshes == 4 && s.scene_version() == 4, || format!("{refreshes} refreshes"))?;
    ensure(elapsed.as_secs_f64() < 1.0, || format!("took {elapsed:?}"))?;

    // the same game through the persisted path
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let persisted = Instant::now();
    let summary = simulate(&script, SessionConfig::default(), dir.path()).map_err(|e| e.to_string())?;
    let persisted = persisted.elapsed();
    ensure(summary.weapons == 4 && summary.outcome.as_deref() == Some("won"), || format!("simulate gave {summary:?}"))?;

    Ok(format!(
        "{} turns, {} rejected, 4 weapons, won at player_hp 70, reveal 1.0; {:.0} ms in memory, {:.0} ms persisted",
        s.turns.len(),
        s.rejections(),
        elapsed.as_secs_f64() * 1e3,
        persisted.as_secs_f64() * 1e3
    ))
}

// ---------------------------------------------------------------------------

fn parser_corpus() -> Vec<(&'static str, String, Result<KingResponse, ParseFailure>)> {
    let ok = |c: &str, s: &str| Ok(KingResponse::accept(c, s));
    let body = r#"{"isValid": true, "comment": "Go on.", "story": "The sands whispered."}"#;
    let good = || ok("Go on.", "The sands whispered.");
    vec![
        ("canonical", body.to_string(), good()),
        ("json fence", format!("```json\n{body}\n```"), good()),
        ("bare fence", format!("```\n{body}\n```"), good()),
        ("prose prefix", format!("Very well, here is my answer: {body}"), good()),
        ("prose suffix", format!("{body}\nNow leave me."), good()),
        ("prose and fence", format!("Listen.\n```json\n{body}\n```\nThat is all."), good()),
        ("pretty printed", "{\n  \"isValid\": true,\n  \"comment\": \"Go on.\",\n  \"story\": \"The sands whispered.\"\n}".into(), good()),
        ("string true", r#"{"isValid": "true", "comment": "Go on.", "story": "The sands whispered."}"#.into(), good()),
        ("string FALSE", r#"{"isValid": "FALSE", "comment": "Insolence!", "story": "ignored"}"#.into(), Ok(KingResponse::reject("Insolence!"))),
        ("python literals", "{'isValid': True, 'comment': None, 'story': 'A lamp burned.'}".into(), ok("", "A lamp burned.")),
        ("missing comment", r#"{"isValid": true, "story": "A lamp burned."}"#.into(), ok("", "A lamp burned.")),
        ("missing story on reject", r#"{"isValid": false, "comment": "Do you want to live...!?"}"#.into(), Ok(KingResponse::reject("Do you want to live...!?"))),
        ("null comment", r#"{"isValid": true, "comment": null, "story": "A lamp burned."}"#.into(), ok("", "A lamp burned.")),
        (
            "missing comma",
            "{\n\"isValid\": true,\n\"comment\":\"Ha, you'd better narrate it well! \"\n\"story\": \"This will be a tale imbued with mystery... \"\n}".into(),
            ok("Ha, you'd better narrate it well! ", "This will be a tale imbued with mystery... "),
        ),
        ("trailing comma", r#"{"isValid": true, "comment": "", "story": "A lamp burned.",}"#.into(), ok("", "A lamp burned.")),
        ("bare keys", r#"{isValid: true, comment: "", story: "A lamp burned."}"#.into(), ok("", "A lamp burned.")),
        ("raw newline in string", "{\"isValid\": true, \"comment\": \"\", \"story\": \"Line one.\nLine two.\"}".into(), ok("", "Line one.\nLine two.")),
        ("decoy braces first", format!("Rules {{none}} apply. {body}"), good()),
        ("missing isValid", r#"{"comment": "Hm.", "story": "A lamp burned."}"#.into(), Err(ParseFailure::MissingIsValid)),
        ("null isValid", r#"{"isValid": null, "story": "A lamp burned."}"#.into(), Err(ParseFailure::MissingIsValid)),
        ("numeric isValid", r#"{"isValid": 1, "story": "A lamp burned."}"#.into(), Err(ParseFailure::BadIsValid("1".into()))),
        ("word isValid", r#"{"isValid": "maybe", "story": "A lamp burned."}"#.into(), Err(ParseFailure::BadIsValid("\"maybe\"".into()))),
        ("numeric story", r#"{"isValid": true, "story": 42}"#.into(), Err(ParseFailure::BadField("story"))),
        ("array comment", r#"{"isValid": true, "comment": ["a"], "story": "x"}"#.into(), Err(ParseFailure::BadField("comment"))),
        ("valid with empty story", r#"{"isValid": true, "comment": "Hm.", "story": "  "}"#.into(), Err(ParseFailure::EmptyStory)),
        ("no object", "The King stares at you in silence.".into(), Err(ParseFailure::NoObject)),
        ("truncated", r#"{"isValid": true, "comment": "", "story": "The sands"#.into(), Err(ParseFailure::NoObject)),
        ("empty reply", String::new(), Err(ParseFailure::NoObject)),
    ]
}

fn parser_robustness() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    const FUZZ: usize = 100_000;
    let alphabet = b"{}[]\":,'\\ \ntruefalsnul0123456789isValidcommentstory";
    for i in 0..FUZZ {
        let len = rng.random_range(0..96);
        let bytes: Vec<u8> = if i % 2 == 0 {
            (0..len).map(|_| rng.random()).collect()
        } else {
            (0..len).map(|_| alphabet[rng.random_range(0..alphabet.len())]).collect()
        };
        let text = String::from_utf8_lossy(&bytes);
        catch_unwind(|| parse_king_response(&text)).map(drop).map_err(|_| format!("parser panicked on {bytes:?}"))?;
    }
    // hostile nesting stays bounded
    let deep = "{\"a\":".repeat(10_000);
    catch_unwind(|| parse_king_response(&deep)).map(drop).map_err(|_| "parser panicked on deep nesting".to_string())?;

    let corpus = parser_corpus();
    let mut wrong = Vec::new();
    for (name, raw, expected) in &corpus {
        let got = parse_king_response(raw);
        if &got != expected {
            wrong.push(format!("{name}: got {got:?}"));
        }
    }
    ensure(corpus.len() >= 25, || format!("corpus has only {} cases", corpus.len()))?;
    ensure(wrong.is_empty(), || wrong.join("; "))?;
    Ok(format!("{FUZZ} fuzz inputs without a panic; {}/{} corpus cases exact", corpus.len(), corpus.len()))
}

// ---------------------------------------------------------------------------

const FORMS: [(&str, WeaponKind); 12] = [
    ("sword", WeaponKind::Sword),
    ("swords", WeaponKind::Sword),
    ("shield", WeaponKind::Shield),
    ("shields", WeaponKind::Shield),
    ("dagger", WeaponKind::Dagger),
    ("daggers", WeaponKind::Dagger),
    ("knife", WeaponKind::Knife),
    ("knives", WeaponKind::Knife),
    ("blade", WeaponKind::Blade),
    ("blades", WeaponKind::Blade),
    ("wand", WeaponKind::Wand),
    ("wands", WeaponKind::Wand),
];

/// Every occurrence of every surface form with no letter touching it,
/// kinds ordered by earliest position.
fn brute_force(text: &str, have: &BTreeSet<WeaponKind>) -> Vec<WeaponKind> {
    let lower = text.to_lowercase();
    let mut hits: Vec<(usize, WeaponKind)> = Vec::new();
    for (form, kind) in FORMS {
        for (pos, _) in lower.match_indices(form) {
            let before = lower[..pos].chars().next_back();
            let after = lower[pos + form.len()..].chars().next();
            if before.is_some_and(char::is_alphabetic) || after.is_some_and(char::is_alphabetic) {
                continue;
            }
            hits.push((pos, kind));
        }
    }
    hits.sort();
    let mut out = Vec::new();
    for (_, k) in hits {
        if !have.contains(&k) && !out.contains(&k) {
            out.push(k);
        }
    }
    out
}

fn detection_oracle() -> Verdict {
    const NEAR: [&str; 12] = [
        "swordsman", "Swordplay", "shieldwall", "bladed", "wandered", "knifes", "daggery", "unsheathed", "wands2",
        "sandstorm", "SWORD-", "über",
    ];
    const SEP: [&str; 9] = [" ", ", ", ".", "-", "_", "'", "\n", "", "é"];
    let mut rng = ChaCha8Rng::seed_from_u64(1001);
    let mut disagreements = Vec::new();
    let mut with_hits = 0;
    for _ in 0..1000 {
        let mut text = String::new();
        for _ in 0..rng.random_range(0..18) {
            let word = if rng.random_bool(0.45) {
                let form = FORMS[rng.random_range(0..FORMS.len())].0;
                if rng.random_bool(0.3) { form.to_uppercase() } else { form.to_string() }
            } else {
                NEAR[rng.random_range(0..NEAR.len())].to_string()
            };
            text.push_str(&word);
            text.push_str(SEP[rng.random_range(0..SEP.len())]);
        }
        let have: BTreeSet<WeaponKind> = WeaponKind::ALL.into_iter().filter(|_| rng.random_bool(0.2)).collect();
        let expected = brute_force(&text, &have);
        with_hits += usize::from(!expected.is_empty());
        if detect_weapons(&text, &have) != expected {
            disagreements.push(text);
        }
    }
    ensure(detect_weapons("the swordsman", &BTreeSet::new()).is_empty(), || "swordsman matched".into())?;
    ensure(disagreements.is_empty(), || format!("{} disagreements, first {:?}", disagreements.len(), disagreements[0]))?;
    Ok(format!("1000 texts ({with_hits} with weapons), 0 disagreements"))
}

// ---------------------------------------------------------------------------

fn random_image(rng: &mut ChaCha8Rng) -> Raster {
    let (w, h) = (rng.random_range(1..48), rng.random_range(1..48));
    // a mix of noisy and few-color images
    let colors: Vec<[u8; 3]> = (0..rng.random_range(1..12)).map(|_| rng.random()).collect();
    let noisy = rng.random_bool(0.5);
    Raster::from_fn(w, h, |_, _| if noisy { rng.random() } else { colors[rng.random_range(0..colors.len())] }).unwrap()
}

fn pixelizer_properties() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    for i in 0..200 {
        let img = random_image(&mut rng);
        let cell = rng.random_range(1..=img.width().min(img.height()));
        let palette = rng.random_range(1..40);
        let a = pixelize(&img, cell, palette).map_err(|e| e.to_string())?;
        let b = pixelize(&img, cell, palette).map_err(|e| e.to_string())?;
        ensure(a.size() == img.size(), || format!("image {i}: size changed"))?;
        ensure(a.distinct_colors() <= palette, || format!("image {i}: {} colors > {palette}", a.distinct_colors()))?;
        ensure(a.as_rgb() == b.as_rgb() && a.to_png().unwrap() == b.to_png().unwrap(), || format!("image {i}: nondeterministic"))?;
        let ample = img.distinct_colors() + rng.random_range(0..5);
        ensure(pixelize(&img, 1, ample).unwrap() == img, || format!("image {i}: not identity at cell 1"))?;
    }
    let checker = Raster::from_fn(4, 4, |x, y| if (x + y) % 2 == 0 { [0, 0, 0] } else { [255, 255, 255] }).unwrap();
    let out = pixelize(&checker, 2, 32).unwrap();
    // each 2x2 block holds two black and two white: (0+0+255+255+2)/4 = 128
    ensure(out.pixels().all(|p| p == [128, 128, 128]), || "checkerboard is not uniform 128".into())?;
    Ok("200 random images: size kept, palette bound, deterministic, identity at cell 1; 4x4 checkerboard exact".into())
}

// ---------------------------------------------------------------------------

fn reveal_nesting() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for i in 0..100 {
        let size = (rng.random_range(1..80), rng.random_range(1..80));
        let (a, b): (f64, f64) = (rng.random(), rng.random());
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        let scatter = ScatterMask { seed: rng.random() };
        for y in 0..size.1 {
            for x in 0..size.0 {
                for mask in [&DiskMask as &dyn RevealMask, &scatter] {
                    if mask.revealed(x, y, size, lo) && !mask.revealed(x, y, size, hi) {
                        return Err(format!("sample {i}: ({x},{y}) shown at {lo} but hidden at {hi}"));
                    }
                }
            }
        }
        let play = Raster::from_fn(size.0, size.1, |x, y| [x as u8, y as u8, 3]).unwrap();
        let scene = Raster::from_fn(size.0, size.1, |x, y| [y as u8, 200, x as u8]).unwrap();
        for shape in [MaskShape::Disk, MaskShape::Scatter] {
            let none = composite_with(&play, &scene, 0.0, i, shape).unwrap();
            let all = composite_with(&play, &scene, 1.0, i, shape).unwrap();
            ensure(none.as_rgb() == play.as_rgb(), || format!("sample {i}: fraction 0 differs from play view"))?;
            ensure(all.as_rgb() == scene.as_rgb(), || format!("sample {i}: fraction 1 differs from scene"))?;
        }
    }
    Ok("100 samples nested for disk and scatter masks; fractions 0 and 1 byte-exact".into())
}

// ---------------------------------------------------------------------------

fn permutations(items: &[WeaponKind]) -> Vec<Vec<WeaponKind>> {
    if items.len() <= 1 {
        return vec![items.to_vec()];
    }
    (0..items.len())
        .flat_map(|i| {
            let mut rest = items.to_vec();
            let head = rest.remove(i);
            permutations(&rest).into_iter().map(move |mut tail| {
                tail.insert(0, head);
                tail
            })
        })
        .collect()
}

fn battle_guarantee() -> Verdict {
    let four = [WeaponKind::Sword, WeaponKind::Shield, WeaponKind::Dagger, WeaponKind::Wand];
    let orders = permutations(&four);
    ensure(orders.len() == 24, || format!("{} orderings", orders.len()))?;
    for order in &orders {
        let mut b = BattleState::new(four, BattleConfig::default()).map_err(|e| e.to_string())?;
        for &w in order {
            b.use_weapon(w).map_err(|e| e.to_string())?;
        }
        ensure(b.outcome == Some(BattleOutcome::Won), || format!("{order:?} ended {:?}", b.outcome))?;
        ensure(b.player_hp == 70, || format!("{order:?}: player_hp {}", b.player_hp))?;
        let counters = b.turn_log.iter().filter(|e| matches!(e.detail, BattleDetail::Counterattack { .. })).count();
        ensure(counters == 3, || format!("{order:?}: {counters} counterattacks"))?;
    }

    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let mut rejected = 0;
    for _ in 0..2000 {
        let n = rng.random_range(1..=6);
        let attack = rng.random_range(1..40);
        let hp = match rng.random_range(0..3) {
            0 => attack * (n as u32 - 1), // boundary: must be rejected
            1 => attack * (n as u32 - 1) + 1,
            _ => rng.random_range(1..250),
        };
        let config = BattleConfig {
            player_hp0: hp,
            king_attack: attack,
            weapon_damage: WeaponKind::ALL.into_iter().map(|k| (k, rng.random_range(1..60))).collect(),
        };
        let safe = hp > attack * (n as u32 - 1);
        let accepted = config.validate(n).is_ok();
        ensure(accepted == safe, || format!("hp {hp}, attack {attack}, n {n}: accepted={accepted}"))?;
        rejected += usize::from(!accepted);
    }
    Ok(format!("24/24 orderings won at player_hp 70; validator matched the bound on 2000 configs ({rejected} rejected)"))
}

// ---------------------------------------------------------------------------

fn random_script(rng: &mut ChaCha8Rng) -> Script {
    let turns = rng.random_range(1..14);
    let mut inputs = Vec::new();
    let mut replies = Vec::new();
    for _ in 0..turns {
        inputs.push(match rng.random_range(0..10) {
            0 => "   ".to_string(),
            1 => "x".repeat(300),
            _ => format!("The caravan reached oasis {}.", rng.random_range(0..100)),
        });
        let picks: Vec<&str> = (0..rng.random_range(1..3)).map(|_| FORMS[rng.random_range(0..FORMS.len())].0).collect();
        let story = format!("In the dunes lay a {}.", picks.join(" and a "));
        let reply = match rng.random_range(0..7) {
            0 => KingResponse::reject("Do you want to live...!?").to_canonical_json(),
            1 => KingResponse::accept("", "The stars turned overhead.").to_canonical_json(),
            2 => "the King mutters darkly".to_string(),
            3 => format!("```json\n{}\n```", KingResponse::accept("Hm.", story).to_canonical_json()),
            _ => KingResponse::accept("Go on.", story).to_canonical_json(),
        };
        replies.push(reply);
        if rng.random_bool(0.2) {
            replies.push(KingResponse::accept("", "A wand glowed.").to_canonical_json());
        }
    }
    let summary_replies = rng
        .random_bool(0.3)
        .then(|| (0..rng.random_range(0..6)).map(|i| format!("scene number {i} under a violet sky")).collect());
    Script { player_inputs: inputs, provider_replies: replies, image_stub_seed: rng.random(), summary_replies }
}

fn replay_determinism() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let root = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut ended = 0;
    let mut failed_turns = 0;
    for game in 0..50 {
        let script = random_script(&mut rng);
        let config = SessionConfig {
            image_size: (48, 32),
            weapon_threshold: rng.random_range(1..=5),
            history_window: rng.random_range(1..16),
            max_retries: rng.random_range(0..3),
            ..Default::default()
        };
        let dir = root.path().join(format!("g{game}"));
        let summary = simulate(&script, config.clone(), &dir).map_err(|e| format!("game {game}: {e}"))?;
        ended += usize::from(summary.finished());
        let live = load_snapshot(&dir).map_err(|e| format!("game {game}: {e}"))?.session;
        let replayed = replay_dir(&dir).map_err(|e| format!("game {game}: {e}"))?;
        ensure(replayed == live, || format!("game {game}: replay differs from live session"))?;
        let (a, b) = (serde_json::to_vec(&replayed).unwrap(), serde_json::to_vec(&live).unwrap());
        ensure(a == b, || format!("game {game}: serialized bytes differ"))?;
        failed_turns += fs::read_to_string(dir.join(TRANSCRIPT_FILE)).unwrap().matches(r#""kind":"error""#).count();

        // and a second run writes the same bytes
        let again = root.path().join(format!("g{game}-again"));
        simulate(&script, config, &again).map_err(|e| e.to_string())?;
        ensure(same_files(&dir, &again), || format!("game {game}: second run wrote different files"))?;
    }
    Ok(format!("50 games ({ended} finished, {failed_turns} failed turns) replay deep-equal and byte-equal"))
}

fn same_files(a: &Path, b: &Path) -> bool {
    let list = |d: &Path| {
        let mut v: Vec<(String, Vec<u8>)> = fs::read_dir(d)
            .unwrap()
            .map(|e| e.unwrap())
            .map(|e| (e.file_name().to_string_lossy().into_owned(), fs::read(e.path()).unwrap()))
            .collect();
        v.sort();
        v
    };
    list(a) == list(b)
}

// ---------------------------------------------------------------------------

const ROLE: &str = "Starting from now, you are the volatile and haughty King Sasanian from 'One Thousand and One Nights'. He never apologizes, nor does he answer anyone's questions. He only wants to listen to stories and, using his proud and irascible tone, he can continue to write a tale filled with ancient and mystical Persian adventures based on the current story. King Shahryar is a ruthless tyrant, as well as a poetic storyteller. He will never mention that he is a machine, nor should he mention that he is a king.";
const CONTEXT: &str = "When my story is appropriate for swords, shields, daggers, knives, blades, daggers or wands, King Sasanian will find a way to incorporate at least one of these elements into the story. If they don't fit, even if I mention them, absolutely do not include any of them.";
const FORMAT: &str = "Every time, you must respond in the following JSON format, and absolutely will not use any format other than JSON\n{\n\"isValid\": bool, True when the story is valid, false when you suspect the protagonist is disrespectful,\n\"comment\": string, Write here when you want to comment, must be within 30 words! For example, \"Ha, you'd better make the story clearer, or... I will order you to be dragged down and beheaded!\" \"Do you want to live...!?\" Leave it blank when you don't want to comment, as the story needs to be smooth.\n\"story\": When isValid is true, post your continued story, must be within 40 words!Empty when isValid is false\n}";
const EXAMPLE: &str = "User: This is an ancient Persian tale\nAssistant:\n{\n\"isValid\": true,\n\"comment\":\"Ha, you'd better narrate it well! \"\n\"story\": \"This will be a tale imbued with mystery... \"\n}";
const SUMMARY: &str = "Summarize the environment depicted in the story above in English, ensuring the description is vivid and concentrated. No mention of protagonists or characters is allowed. Keep it within 50 words.";
const SCENE: &str = "A desolate wilderness filled with harsh terrains storms through the realm, untouched by outside influence. Amidst the bleak wilderness, hidden valleys filled with lush, exotic vegetation and adventurous trails, dominate the landscape";
const STYLE_HEAD: &str = "purple, bright, Arabian night, 16bitscene, game art, Persian-style, Arabian style, retro, masterpiece,";
const STYLE_TAIL: &str = "mid shot in a scene with ground, Islamic style, Islamic art";

fn prompt_fidelity() -> Verdict {
    let config = SessionConfig::default();
    let system = build_system_prompt(&config);
    let mut at = 0;
    for (name, block) in [("role", ROLE), ("context", CONTEXT), ("format", FORMAT), ("example", EXAMPLE)] {
        let pos = system[at..].find(block).ok_or_else(|| format!("{name} block missing or out of order"))?;
        at += pos + block.len();
    }

    let session = GameSession::new(config.clone(), 1).unwrap();
    let bundle = assemble_messages(&session, "This is an ancient Persian tale");
    ensure(bundle.messages[0].role == ChatRole::System && bundle.messages[0].content == system, || "system message".into())?;

    ensure(SUMMARY_INSTRUCTION == SUMMARY, || "summary instruction differs".into())?;
    let mut s = session.clone();
    let king = ScriptedProvider::new([KingResponse::accept("", "A tale.").to_canonical_json()]);
    s.advance_story("once", &king, chrono::DateTime::from_timestamp(0, 0).unwrap()).unwrap();
    let summary_bundle = taleweaver_core::imagery::summary_bundle(&s).unwrap();
    ensure(summary_bundle.messages.last().unwrap().content.ends_with(SUMMARY), || "summary prompt does not end with the instruction".into())?;

    let summary = SceneSummary { text: SCENE.into(), source_turn_count: 1, over_limit: false };
    let prompt = build_image_prompt(&summary, &config, 0).unwrap();
    ensure(prompt.positive.starts_with(&format!("{SCENE}, ")), || "image prompt does not lead with the summary".into())?;
    let style = &prompt.positive[SCENE.len() + 2..];
    ensure(style == config.style_prompt, || "style does not follow the summary".into())?;
    ensure(style.starts_with(STYLE_HEAD) && style.ends_with(STYLE_TAIL), || format!("style prompt {style:?}"))?;
    Ok("system prompt holds role, context, format, example verbatim in order; image prompt = summary, then style".into())
}
