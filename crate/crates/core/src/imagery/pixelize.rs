//! Pixel-art post-processing: block-mean downsampling followed by median-cut
//! palette quantization. Fully deterministic.

use std::collections::BTreeMap;

use super::raster::{Raster, Rgb};

pub const DEFAULT_CELL: u32 = 8;
pub const DEFAULT_PALETTE: usize = 32;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PixelizeError {
    #[error("cell size {cell} must be in 1..={max}")]
    BadCell { cell: u32, max: u32 },
    #[error("palette size must be at least 1")]
    BadPalette,
}

/// Replaces each `cell`x`cell` block (edge blocks may be smaller) with its
/// mean color, then reduces the block colors to at most `palette_size` with
/// median cut. Output has the input's dimensions.
pub fn pixelize(image: &Raster, cell: u32, palette_size: usize) -> Result<Raster, PixelizeError> {
    let (width, height) = image.size();
    let max = width.min(height);
    if cell == 0 || cell > max {
        return Err(PixelizeError::BadCell { cell, max });
    }
    if palette_size == 0 {
        return Err(PixelizeError::BadPalette);
    }

    let cols = width.div_ceil(cell);
    let rows = height.div_ceil(cell);
    let means: Vec<Rgb> = (0..rows)
        .flat_map(|by| (0..cols).map(move |bx| (bx, by)))
        .map(|(bx, by)| block_mean(image, bx * cell, by * cell, cell))
        .collect();

    let palette = median_cut(&means, palette_size);

    let mut out = image.clone();
    for by in 0..rows {
        for bx in 0..cols {
            let color = palette[&means[(by * cols + bx) as usize]];
            for y in by * cell..((by + 1) * cell).min(height) {
                for x in bx * cell..((bx + 1) * cell).min(width) {
                    out.set(x, y, color);
                }
            }
        }
    }
    Ok(out)
}

/// Per-channel mean, rounded half up.
fn block_mean(image: &Raster, x0: u32, y0: u32, cell: u32) -> Rgb {
    let x1 = (x0 + cell).min(image.width());
    let y1 = (y0 + cell).min(image.height());
    let mut sum = [0u64; 3];
    for y in y0..y1 {
        for x in x0..x1 {
            let p = image.get(x, y);
            for c in 0..3 {
                sum[c] += u64::from(p[c]);
            }
        }
    }
    let n = u64::from((x1 - x0) * (y1 - y0));
    sum.map(|s| ((s + n / 2) / n) as u8)
}

type Bucket = Vec<(Rgb, u64)>;

/// Maps every input color to its palette entry.
///
/// Works on distinct colors weighted by count. The box with the widest
/// channel range is split next (earliest box wins ties), along its widest
/// channel (R, then G, then B on ties), at the lower median. Each final box
/// is represented by its count-weighted mean.
pub fn median_cut(colors: &[Rgb], palette_size: usize) -> BTreeMap<Rgb, Rgb> {
    let mut counts: BTreeMap<Rgb, u64> = BTreeMap::new();
    for &c in colors {
        *counts.entry(c).or_default() += 1;
    }
    let mut boxes: Vec<Bucket> = vec![counts.into_iter().collect()];

    while boxes.len() < palette_size {
        let widest = boxes
            .iter()
            .enumerate()
            .map(|(i, b)| (i, widest_channel(b)))
            .filter(|(_, (_, range))| *range > 0)
            .fold(None::<(usize, (usize, u8))>, |best, cur| match best {
                Some(b) if b.1 .1 >= cur.1 .1 => Some(b),
                _ => Some(cur),
            });
        let Some((index, (channel, _))) = widest else { break };

        let mut bucket = std::mem::take(&mut boxes[index]);
        bucket.sort_by_key(|(c, _)| (c[channel], *c));
        let upper = bucket.split_off((bucket.len() - 1) / 2 + 1);
        boxes[index] = bucket;
        boxes.push(upper);
    }

    let mut map = BTreeMap::new();
    for bucket in &boxes {
        let rep = weighted_mean(bucket);
        for (c, _) in bucket {
            map.insert(*c, rep);
        }
    }
    map
}

fn widest_channel(bucket: &Bucket) -> (usize, u8) {
    let mut best = (0, 0);
    for channel in 0..3 {
        let lo = bucket.iter().map(|(c, _)| c[channel]).min().unwrap_or(0);
        let hi = bucket.iter().map(|(c, _)| c[channel]).max().unwrap_or(0);
        if hi - lo > best.1 {
            best = (channel, hi - lo);
        }
    }
    best
}

fn weighted_mean(bucket: &Bucket) -> Rgb {
    let total: u64 = bucket.iter().map(|(_, n)| n).sum();
    let mut sum = [0u64; 3];
    for (c, n) in bucket {
        for ch in 0..3 {
            sum[ch] += u64::from(c[ch]) * n;
        }
    }
    sum.map(|s| ((s + total / 2) / total) as u8)
}
