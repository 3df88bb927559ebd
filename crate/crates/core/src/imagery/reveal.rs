//! Compositing the story world over the play view as weapons accumulate.

use serde::{Deserialize, Serialize};

use super::raster::Raster;

/// Decides which pixels show the scene at a given reveal fraction.
///
/// Implementations must be nested: if a pixel is revealed at `f` it is
/// revealed at every `f' >= f`. Nothing is revealed at 0, everything at 1.
pub trait RevealMask {
    fn revealed(&self, x: u32, y: u32, size: (u32, u32), fraction: f64) -> bool;
}

/// A disk growing from the image center; radius = fraction x half diagonal.
#[derive(Debug, Clone, Copy, Default)]
pub struct DiskMask;

impl RevealMask for DiskMask {
    fn revealed(&self, x: u32, y: u32, (w, h): (u32, u32), fraction: f64) -> bool {
        let (w, h) = (f64::from(w), f64::from(h));
        let dx = f64::from(x) + 0.5 - w / 2.0;
        let dy = f64::from(y) + 0.5 - h / 2.0;
        let radius = fraction * (w * w + h * h).sqrt() / 2.0;
        // pixel centers sit strictly inside the half diagonal, so 1.0 covers all
        (dx * dx + dy * dy).sqrt() < radius
    }
}

/// Seeded scatter: each pixel gets a fixed threshold in [0, 1) and appears
/// once the fraction passes it.
#[derive(Debug, Clone, Copy)]
pub struct ScatterMask {
    pub seed: u64,
}

impl RevealMask for ScatterMask {
    fn revealed(&self, x: u32, y: u32, _size: (u32, u32), fraction: f64) -> bool {
        let h = splitmix64(self.seed ^ (u64::from(x) << 32 | u64::from(y)));
        let threshold = (h >> 11) as f64 / (1u64 << 53) as f64;
        threshold < fraction
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MaskShape {
    #[default]
    Disk,
    Scatter,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum RevealError {
    #[error("play view is {0:?} but scene is {1:?}")]
    DimensionMismatch((u32, u32), (u32, u32)),
}

/// Scene pixel where the disk mask admits it, play-view pixel elsewhere.
/// `seed` only matters for seeded mask shapes; see [`composite_with`].
pub fn composite_reveal(play_view: &Raster, scene: &Raster, fraction: f64, seed: u64) -> Result<Raster, RevealError> {
    composite_with(play_view, scene, fraction, seed, MaskShape::Disk)
}

pub fn composite_with(
    play_view: &Raster,
    scene: &Raster,
    fraction: f64,
    seed: u64,
    shape: MaskShape,
) -> Result<Raster, RevealError> {
    match shape {
        MaskShape::Disk => composite_masked(play_view, scene, fraction, &DiskMask),
        MaskShape::Scatter => composite_masked(play_view, scene, fraction, &ScatterMask { seed }),
    }
}

pub fn composite_masked(
    play_view: &Raster,
    scene: &Raster,
    fraction: f64,
    mask: &dyn RevealMask,
) -> Result<Raster, RevealError> {
    let size = play_view.size();
    if size != scene.size() {
        return Err(RevealError::DimensionMismatch(size, scene.size()));
    }
    let fraction = fraction.clamp(0.0, 1.0);
    let mut out = play_view.clone();
    for y in 0..size.1 {
        for x in 0..size.0 {
            if mask.revealed(x, y, size, fraction) {
                out.set(x, y, scene.get(x, y));
            }
        }
    }
    Ok(out)
}

/// The stand-in play screen the scene grows over: a night-sky gradient above
/// a sand floor, with a faint tile grid.
pub fn default_play_view(width: u32, height: u32) -> Raster {
    let floor = height * 3 / 4;
    Raster::from_fn(width.max(1), height.max(1), |x, y| {
        let grid = x % 32 == 0 || y % 32 == 0;
        let base = if y < floor {
            let t = y * 60 / floor.max(1);
            [(20 + t) as u8, 12, (48 + t) as u8]
        } else {
            [150, 118, 80]
        };
        if grid {
            base.map(|c| c.saturating_add(12))
        } else {
            base
        }
    })
    .expect("non-empty size")
}
