use serde::{Deserialize, Serialize};

use super::raster::{Raster, RasterError, Rgb};

pub const DEFAULT_SKY: Rgb = [230, 230, 6];
pub const DEFAULT_GROUND: Rgb = [140, 120, 240];

/// Segmentation label colors for the sky/ground guide image.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct HintColors {
    pub sky: Rgb,
    pub ground: Rgb,
}

impl Default for HintColors {
    fn default() -> Self {
        Self { sky: DEFAULT_SKY, ground: DEFAULT_GROUND }
    }
}

/// Two flat bands telling the image model where the horizon sits.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SegmentationHint {
    pub raster: Raster,
    pub horizon_row: u32,
}

#[derive(Debug, thiserror::Error)]
pub enum HintError {
    #[error("horizon ratio {0} outside [0, 1]")]
    BadRatio(f64),
    #[error(transparent)]
    Raster(#[from] RasterError),
}

pub fn horizon_row(height: u32, horizon_ratio: f64) -> u32 {
    ((horizon_ratio * f64::from(height)).round() as u32).min(height)
}

/// Rows above the horizon row are sky, the rest ground.
pub fn make_segmentation_hint(size: (u32, u32), horizon_ratio: f64) -> Result<SegmentationHint, HintError> {
    make_segmentation_hint_with(size, horizon_ratio, HintColors::default())
}

pub fn make_segmentation_hint_with(
    (width, height): (u32, u32),
    horizon_ratio: f64,
    colors: HintColors,
) -> Result<SegmentationHint, HintError> {
    if !(0.0..=1.0).contains(&horizon_ratio) {
        return Err(HintError::BadRatio(horizon_ratio));
    }
    let horizon = horizon_row(height, horizon_ratio);
    let raster = Raster::from_fn(width, height, |_, y| if y < horizon { colors.sky } else { colors.ground })?;
    Ok(SegmentationHint { raster, horizon_row: horizon })
}
