//! Scene imagery: summary prompt, segmentation hint, generation,
//! pixelization and the progressive reveal.

mod hint;
mod pixelize;
mod raster;
mod reveal;
mod scene;
mod service;

pub use hint::{
    horizon_row, make_segmentation_hint, make_segmentation_hint_with, HintColors, HintError, SegmentationHint,
    DEFAULT_GROUND, DEFAULT_SKY,
};
pub use pixelize::{median_cut, pixelize, PixelizeError, DEFAULT_CELL, DEFAULT_PALETTE};
pub use raster::{Raster, RasterError, Rgb};
pub use reveal::{
    composite_masked, composite_reveal, composite_with, default_play_view, DiskMask, MaskShape, RevealError,
    RevealMask, ScatterMask,
};
pub use scene::{
    build_image_prompt, refresh_scene, render_scene, scene_seed, story_history, summarize_scene, summary_bundle,
    SceneArtifact, SceneError, SceneRender, SceneSummary, SUMMARY_INSTRUCTION, SUMMARY_WORD_LIMIT,
};
pub use service::{ImageError, ImagePrompt, ImageService, StubImageService};
