use base64::engine::general_purpose::STANDARD as BASE64;
use base64::Engine;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use std::sync::{Arc, OnceLock};

pub type Rgb = [u8; 3];

/// An 8-bit RGB image, row-major.
#[derive(Clone)]
pub struct Raster {
    width: u32,
    height: u32,
    data: Vec<u8>,
    /// Encoded PNG, filled on first use and dropped on mutation.
    png: OnceLock<Arc<[u8]>>,
}

impl PartialEq for Raster {
    fn eq(&self, other: &Self) -> bool {
        (self.width, self.height) == (other.width, other.height) && self.data == other.data
    }
}

impl Eq for Raster {}

#[derive(Debug, thiserror::Error)]
pub enum RasterError {
    #[error("raster must be at least 1x1, got {0}x{1}")]
    Empty(u32, u32),
    #[error("buffer holds {got} bytes, {want} expected")]
    BufferSize { got: usize, want: usize },
    #[error("png encode: {0}")]
    Encode(#[from] png::EncodingError),
    #[error("png decode: {0}")]
    Decode(#[from] png::DecodingError),
    #[error("unsupported png layout {0:?}/{1:?}")]
    Layout(png::ColorType, png::BitDepth),
    #[error("base64: {0}")]
    Base64(#[from] base64::DecodeError),
}

impl Raster {
    pub fn filled(width: u32, height: u32, color: Rgb) -> Result<Self, RasterError> {
        if width == 0 || height == 0 {
            return Err(RasterError::Empty(width, height));
        }
        let data = color.repeat(width as usize * height as usize);
        Ok(Self { width, height, data, png: OnceLock::new() })
    }

    pub fn from_rgb(width: u32, height: u32, data: Vec<u8>) -> Result<Self, RasterError> {
        if width == 0 || height == 0 {
            return Err(RasterError::Empty(width, height));
        }
        let want = width as usize * height as usize * 3;
        if data.len() != want {
            return Err(RasterError::BufferSize { got: data.len(), want });
        }
        Ok(Self { width, height, data, png: OnceLock::new() })
    }

    pub fn from_fn(width: u32, height: u32, mut f: impl FnMut(u32, u32) -> Rgb) -> Result<Self, RasterError> {
        let mut r = Self::filled(width, height, [0; 3])?;
        for y in 0..height {
            for x in 0..width {
                r.set(x, y, f(x, y));
            }
        }
        Ok(r)
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn size(&self) -> (u32, u32) {
        (self.width, self.height)
    }

    pub fn as_rgb(&self) -> &[u8] {
        &self.data
    }

    fn offset(&self, x: u32, y: u32) -> usize {
        debug_assert!(x < self.width && y < self.height);
        (y as usize * self.width as usize + x as usize) * 3
    }

    pub fn get(&self, x: u32, y: u32) -> Rgb {
        let i = self.offset(x, y);
        [self.data[i], self.data[i + 1], self.data[i + 2]]
    }

    pub fn set(&mut self, x: u32, y: u32, color: Rgb) {
        let i = self.offset(x, y);
        self.png = OnceLock::new();
        self.data[i..i + 3].copy_from_slice(&color);
    }

    pub fn pixels(&self) -> impl Iterator<Item = Rgb> + '_ {
        self.data.chunks_exact(3).map(|c| [c[0], c[1], c[2]])
    }

    pub fn distinct_colors(&self) -> usize {
        let mut colors: Vec<Rgb> = self.pixels().collect();
        colors.sort_unstable();
        colors.dedup();
        colors.len()
    }

    /// RGBA bytes, alpha 255, for canvas `ImageData`.
    pub fn to_rgba(&self) -> Vec<u8> {
        self.pixels().flat_map(|[r, g, b]| [r, g, b, 255]).collect()
    }

    /// Deterministic PNG encoding: same pixels, same bytes.
    pub fn to_png(&self) -> Result<Vec<u8>, RasterError> {
        if let Some(bytes) = self.png.get() {
            return Ok(bytes.to_vec());
        }
        let bytes = self.encode_png()?;
        let _ = self.png.set(bytes.as_slice().into());
        Ok(bytes)
    }

    fn encode_png(&self) -> Result<Vec<u8>, RasterError> {
        let mut out = Vec::new();
        {
            let mut encoder = png::Encoder::new(&mut out, self.width, self.height);
            encoder.set_color(png::ColorType::Rgb);
            encoder.set_depth(png::BitDepth::Eight);
            encoder.set_compression(png::Compression::Balanced);
            let mut writer = encoder.write_header()?;
            writer.write_image_data(&self.data)?;
        }
        Ok(out)
    }

    pub fn from_png(bytes: &[u8]) -> Result<Self, RasterError> {
        let mut decoder = png::Decoder::new(std::io::Cursor::new(bytes));
        decoder.set_transformations(png::Transformations::EXPAND | png::Transformations::STRIP_16);
        let mut reader = decoder.read_info()?;
        let mut buf = vec![0; reader.output_buffer_size().unwrap_or(0)];
        let info = reader.next_frame(&mut buf)?;
        buf.truncate(info.buffer_size());
        let data = match info.color_type {
            png::ColorType::Rgb => buf,
            png::ColorType::Rgba => buf.chunks_exact(4).flat_map(|c| [c[0], c[1], c[2]]).collect(),
            png::ColorType::Grayscale => buf.iter().flat_map(|&v| [v, v, v]).collect(),
            png::ColorType::GrayscaleAlpha => buf.chunks_exact(2).flat_map(|c| [c[0], c[0], c[0]]).collect(),
            other => return Err(RasterError::Layout(other, info.bit_depth)),
        };
        Self::from_rgb(info.width, info.height, data)
    }

    pub fn to_base64_png(&self) -> Result<String, RasterError> {
        Ok(BASE64.encode(self.to_png()?))
    }

    pub fn from_base64_png(text: &str) -> Result<Self, RasterError> {
        Self::from_png(&BASE64.decode(text.trim())?)
    }
}

impl std::fmt::Debug for Raster {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Raster({}x{})", self.width, self.height)
    }
}

impl Serialize for Raster {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let text = self.to_base64_png().map_err(serde::ser::Error::custom)?;
        serializer.serialize_str(&text)
    }
}

impl<'de> Deserialize<'de> for Raster {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let text = String::deserialize(deserializer)?;
        Raster::from_base64_png(&text).map_err(serde::de::Error::custom)
    }
}
