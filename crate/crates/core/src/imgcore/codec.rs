use std::io::Cursor;
use std::path::Path;
use std::str::FromStr;

use image::codecs::jpeg::JpegEncoder;
use image::codecs::png::PngEncoder;
use image::{DynamicImage, ExtendedColorType, ImageEncoder, ImageFormat};

use super::{ColorSpace, ImageBuffer, ImageError};

/// Encoded output format for written images.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Png,
    /// Baseline JPEG at the given quality (1-100).
    Jpeg { quality: u8 },
}

impl OutputFormat {
    pub fn extension(self) -> &'static str {
        match self {
            OutputFormat::Png => "png",
            OutputFormat::Jpeg { .. } => "jpg",
        }
    }
}

impl FromStr for OutputFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "png" => Ok(OutputFormat::Png),
            "jpeg" | "jpg" => Ok(OutputFormat::Jpeg { quality: 90 }),
            other => Err(format!("unknown output format '{other}' (expected png or jpeg)")),
        }
    }
}

/// True if `header` starts with a PNG or JPEG signature.
pub fn is_supported_header(header: &[u8]) -> bool {
    matches!(
        image::guess_format(header),
        Ok(ImageFormat::Png | ImageFormat::Jpeg)
    )
}

/// Decodes an 8-bit PNG or JPEG. Grayscale sources stay single-channel,
/// everything else is converted to RGB (alpha is dropped).
pub fn decode(bytes: &[u8]) -> Result<ImageBuffer, ImageError> {
    let format = image::guess_format(bytes).map_err(|_| ImageError::UnsupportedFormat)?;
    if !matches!(format, ImageFormat::Png | ImageFormat::Jpeg) {
        return Err(ImageError::UnsupportedFormat);
    }
    let decoded = image::load_from_memory_with_format(bytes, format)
        .map_err(|e| ImageError::CorruptData(e.to_string()))?;
    Ok(from_dynamic(decoded))
}

fn from_dynamic(img: DynamicImage) -> ImageBuffer {
    let (w, h) = (img.width() as usize, img.height() as usize);
    let gray = matches!(
        img,
        DynamicImage::ImageLuma8(_)
            | DynamicImage::ImageLumaA8(_)
            | DynamicImage::ImageLuma16(_)
            | DynamicImage::ImageLumaA16(_)
    );
    if gray {
        let raw = img.into_luma8().into_raw();
        let data = raw.into_iter().map(|v| f64::from(v) / 255.0).collect();
        ImageBuffer::from_parts(w, h, ColorSpace::Gray, data)
    } else {
        let raw = img.into_rgb8().into_raw();
        let data = raw.into_iter().map(|v| f64::from(v) / 255.0).collect();
        ImageBuffer::from_parts(w, h, ColorSpace::Rgb, data)
    }
}

fn quantize(v: f64) -> u8 {
    (v.clamp(0.0, 1.0) * 255.0).round() as u8
}

/// Encodes an RGB or GRAY buffer. Values are clamped and rounded to 8 bits.
pub fn encode(img: &ImageBuffer, format: OutputFormat) -> Result<Vec<u8>, ImageError> {
    let color = match img.colorspace() {
        ColorSpace::Rgb => ExtendedColorType::Rgb8,
        ColorSpace::Gray => ExtendedColorType::L8,
        ColorSpace::Decorrelated => {
            return Err(ImageError::WrongColorspace {
                expected: ColorSpace::Rgb,
                found: ColorSpace::Decorrelated,
            })
        }
    };
    let raw: Vec<u8> = img.data().iter().map(|&v| quantize(v)).collect();
    let (w, h) = (img.width() as u32, img.height() as u32);
    let mut out = Cursor::new(Vec::new());
    let res = match format {
        OutputFormat::Png => PngEncoder::new(&mut out).write_image(&raw, w, h, color),
        OutputFormat::Jpeg { quality } => {
            JpegEncoder::new_with_quality(&mut out, quality.clamp(1, 100))
                .write_image(&raw, w, h, color)
        }
    };
    res.map_err(|e| ImageError::Encode(e.to_string()))?;
    Ok(out.into_inner())
}

pub fn load(path: &Path) -> Result<ImageBuffer, ImageError> {
    let bytes = std::fs::read(path).map_err(|source| ImageError::Io {
        path: path.display().to_string(),
        source,
    })?;
    decode(&bytes)
}

/// Encodes and writes atomically (temp file + rename) so a partially written
/// image is never observed at `path`.
pub fn save(img: &ImageBuffer, path: &Path, format: OutputFormat) -> Result<(), ImageError> {
    let bytes = encode(img, format)?;
    let io_err = |source| ImageError::Io {
        path: path.display().to_string(),
        source,
    };
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent).map_err(io_err)?;
    }
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".partial");
    let tmp = std::path::PathBuf::from(tmp);
    std::fs::write(&tmp, bytes).map_err(io_err)?;
    std::fs::rename(&tmp, path).map_err(io_err)
}
