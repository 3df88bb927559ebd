use taleweaver_core::imagery::default_play_view;
use taleweaver_core::WeaponKind;
use taleweaver_web::{parse_reply, pixelize_rgba, reveal_rgba};

fn gradient(w: u32, h: u32) -> Vec<u8> {
    (0..h).flat_map(|y| (0..w).flat_map(move |x| [(x * 7) as u8, (y * 5) as u8, 90, 255])).collect()
}

#[test]
fn pixelize_keeps_shape_and_bounds_palette() {
    let out = pixelize_rgba(&gradient(30, 20), 30, 20, 4, 6).unwrap();
    assert_eq!(out.len(), 30 * 20 * 4);
    assert!(out.chunks_exact(4).all(|p| p[3] == 255));
    let colors: std::collections::BTreeSet<_> = out.chunks_exact(4).map(|p| [p[0], p[1], p[2]]).collect();
    assert!(colors.len() <= 6);
}

#[test]
fn pixelize_rejects_wrong_buffer() {
    assert!(pixelize_rgba(&[0; 11], 2, 2, 1, 4).unwrap_err().contains("16 RGBA bytes"));
}

#[test]
fn reveal_endpoints() {
    let scene = gradient(40, 24);
    assert_eq!(reveal_rgba(&scene, 40, 24, 1.0, false, 0).unwrap(), scene);
    assert_eq!(reveal_rgba(&scene, 40, 24, 0.0, true, 9).unwrap(), default_play_view(40, 24).to_rgba());
    let half = reveal_rgba(&scene, 40, 24, 0.5, false, 0).unwrap();
    assert_ne!(half, scene);
    // the center shows first
    let at = |buf: &[u8], x: usize, y: usize| buf[(y * 40 + x) * 4..][..4].to_vec();
    assert_eq!(at(&half, 20, 12), at(&scene, 20, 12));
}

#[test]
fn parse_reply_reports_weapons() {
    let r = parse_reply("```json\n{\"isValid\": true, \"comment\": \"\", \"story\": \"A sword and a wand.\"}\n```", "wand");
    assert!(r.ok);
    assert_eq!(r.weapons, vec![WeaponKind::Sword]);
    let bad = parse_reply("silence", "");
    assert!(!bad.ok);
    assert!(bad.error.unwrap().contains("no balanced JSON object"));
    let rejected = parse_reply(r#"{"isValid": false, "comment": "No.", "story": "a sword"}"#, "");
    assert!(rejected.ok && rejected.weapons.is_empty());
}
