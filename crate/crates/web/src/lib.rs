//! wasm-bindgen surface for the static demo in `www/`. The plain functions
//! work on RGBA buffers (what a canvas hands out) and are testable natively;
//! the `bindings` module wraps them for JavaScript.

use std::collections::BTreeSet;

use serde::Serialize;
use taleweaver_core::gateway::parse_king_response;
use taleweaver_core::imagery::{composite_with, default_play_view, pixelize, MaskShape, Raster};
use taleweaver_core::{detect_weapons, KingResponse, WeaponKind};

fn from_rgba(rgba: &[u8], width: u32, height: u32) -> Result<Raster, String> {
    let expected = width as usize * height as usize * 4;
    if rgba.len() != expected {
        return Err(format!("expected {expected} RGBA bytes for {width}x{height}, got {}", rgba.len()));
    }
    let rgb = rgba.chunks_exact(4).flat_map(|p| [p[0], p[1], p[2]]).collect();
    Raster::from_rgb(width, height, rgb).map_err(|e| e.to_string())
}

/// Pixel-art pass: block averaging at `cell`, then at most `palette` colors.
pub fn pixelize_rgba(rgba: &[u8], width: u32, height: u32, cell: u32, palette: usize) -> Result<Vec<u8>, String> {
    let image = from_rgba(rgba, width, height)?;
    Ok(pixelize(&image, cell, palette).map_err(|e| e.to_string())?.to_rgba())
}

/// The play screen with `fraction` of the scene showing through.
pub fn reveal_rgba(scene: &[u8], width: u32, height: u32, fraction: f64, scatter: bool, seed: u64) -> Result<Vec<u8>, String> {
    let scene = from_rgba(scene, width, height)?;
    let shape = if scatter { MaskShape::Scatter } else { MaskShape::Disk };
    let out = composite_with(&default_play_view(width, height), &scene, fraction, seed, shape).map_err(|e| e.to_string())?;
    Ok(out.to_rgba())
}

#[derive(Debug, Serialize)]
pub struct ParsedReply {
    pub ok: bool,
    pub response: Option<KingResponse>,
    pub error: Option<String>,
    /// Weapons the story would grant, given what is already owned.
    pub weapons: Vec<WeaponKind>,
}

/// Parse a raw King reply the way the game does and list the weapons its
/// story would grant. `owned` is a comma-separated list of weapon names.
pub fn parse_reply(raw: &str, owned: &str) -> ParsedReply {
    let have: BTreeSet<WeaponKind> = owned.split(',').filter_map(|w| w.trim().parse().ok()).collect();
    match parse_king_response(raw) {
        Ok(r) => {
            let weapons = if r.is_valid { detect_weapons(&r.story, &have) } else { Vec::new() };
            ParsedReply { ok: true, response: Some(r), error: None, weapons }
        }
        Err(e) => ParsedReply { ok: false, response: None, error: Some(e.to_string()), weapons: Vec::new() },
    }
}

mod bindings {
    use wasm_bindgen::prelude::*;

    #[wasm_bindgen(js_name = pixelize)]
    pub fn pixelize(rgba: &[u8], width: u32, height: u32, cell: u32, palette: usize) -> Result<Vec<u8>, JsError> {
        super::pixelize_rgba(rgba, width, height, cell, palette).map_err(|e| JsError::new(&e))
    }

    #[wasm_bindgen(js_name = reveal)]
    pub fn reveal(scene: &[u8], width: u32, height: u32, fraction: f64, scatter: bool, seed: u64) -> Result<Vec<u8>, JsError> {
        super::reveal_rgba(scene, width, height, fraction, scatter, seed).map_err(|e| JsError::new(&e))
    }

    /// JSON text: `{ok, response, error, weapons}`.
    #[wasm_bindgen(js_name = parseReply)]
    pub fn parse_reply(raw: &str, owned: &str) -> String {
        serde_json::to_string(&super::parse_reply(raw, owned)).expect("reply serializes")
    }
}
