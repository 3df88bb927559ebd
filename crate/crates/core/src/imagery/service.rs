use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::hint::SegmentationHint;
use super::raster::{Raster, RasterError, Rgb};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ImagePrompt {
    pub positive: String,
    pub negative: String,
    pub seed: u64,
    pub size: (u32, u32),
}

impl ImagePrompt {
    pub fn digest(&self) -> [u8; 32] {
        let mut h = Sha256::new();
        h.update(self.positive.as_bytes());
        h.update([0]);
        h.update(self.negative.as_bytes());
        h.finalize().into()
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ImageError {
    #[error("image service deadline exceeded")]
    Timeout,
    #[error("image service error: {0}")]
    Service(String),
    #[error("image service returned {got:?}, expected {want:?}")]
    WrongSize { got: (u32, u32), want: (u32, u32) },
    #[error(transparent)]
    Raster(#[from] RasterError),
}

/// A text-to-image backend guided by a sky/ground segmentation hint.
pub trait ImageService: Send + Sync {
    fn generate(&self, prompt: &ImagePrompt, hint: &SegmentationHint) -> Result<Raster, ImageError>;
}

impl<S: ImageService + ?Sized> ImageService for &S {
    fn generate(&self, prompt: &ImagePrompt, hint: &SegmentationHint) -> Result<Raster, ImageError> {
        (**self).generate(prompt, hint)
    }
}

impl<S: ImageService + ?Sized> ImageService for std::sync::Arc<S> {
    fn generate(&self, prompt: &ImagePrompt, hint: &SegmentationHint) -> Result<Raster, ImageError> {
        (**self).generate(prompt, hint)
    }
}

/// Offline stand-in: a two-band gradient split at the hint's horizon, with
/// colors and grain drawn from the prompt digest and seed.
#[derive(Debug, Clone, Copy, Default)]
pub struct StubImageService;

impl ImageService for StubImageService {
    fn generate(&self, prompt: &ImagePrompt, hint: &SegmentationHint) -> Result<Raster, ImageError> {
        let digest = prompt.digest();
        let mut state = u64::from_le_bytes(digest[..8].try_into().expect("8 bytes")) ^ prompt.seed;
        let mut next_color = || -> Rgb {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            let b = state.to_le_bytes();
            [b[5], b[6], b[7]]
        };
        let (sky_top, sky_low, ground_near, ground_far) = (next_color(), next_color(), next_color(), next_color());
        let grain_seed = prompt.seed.rotate_left(17) ^ u64::from(digest[8]);

        let (width, height) = prompt.size;
        let horizon = hint.horizon_row.min(height);
        Ok(Raster::from_fn(width, height, |x, y| {
            let (from, to, t) = if y < horizon {
                (sky_top, sky_low, f64::from(y) / f64::from(horizon.max(1)))
            } else {
                (ground_far, ground_near, f64::from(y - horizon) / f64::from((height - horizon).max(1)))
            };
            let grain = (hash2(grain_seed, x, y) % 17) as f64 - 8.0;
            std::array::from_fn(|c| {
                let v = f64::from(from[c]) + (f64::from(to[c]) - f64::from(from[c])) * t + grain;
                v.round().clamp(0.0, 255.0) as u8
            })
        })?)
    }
}

fn hash2(seed: u64, x: u32, y: u32) -> u64 {
    let mut z = seed ^ (u64::from(x) << 32 | u64::from(y));
    z = (z ^ (z >> 33)).wrapping_mul(0xff51afd7ed558ccd);
    z = (z ^ (z >> 33)).wrapping_mul(0xc4ceb9fe1a85ec53);
    z ^ (z >> 33)
}
