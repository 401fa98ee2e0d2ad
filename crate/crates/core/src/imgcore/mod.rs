//! Raster container and the pixel-level operations every other module builds on.
//!
//! Intensities are stored as `f64` normalized to `[0, 1]` for RGB and GRAY
//! buffers. Pixels are interleaved (`r, g, b, r, g, b, ...`) in row-major order.

mod codec;
mod color;
mod resize;

pub use codec::{decode, encode, is_supported_header, load, save, OutputFormat};
pub use color::{decorrelated_to_rgb, rgb_to_decorrelated, to_grayscale, to_rgb, LUMA_WEIGHTS};
pub use resize::resize;

use thiserror::Error;

/// Errors raised by image decoding, encoding and pixel transforms.
#[derive(Debug, Error)]
pub enum ImageError {
    #[error("unsupported image format")]
    UnsupportedFormat,
    #[error("corrupt image data: {0}")]
    CorruptData(String),
    #[error("zero dimension requested ({width}x{height})")]
    ZeroDimension { width: usize, height: usize },
    #[error("expected {expected:?} colorspace, found {found:?}")]
    WrongColorspace {
        expected: ColorSpace,
        found: ColorSpace,
    },
    #[error("invalid buffer: {0}")]
    InvalidBuffer(String),
    #[error("encode failed: {0}")]
    Encode(String),
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

/// Color-space tag carried by every [`ImageBuffer`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ColorSpace {
    Rgb,
    Gray,
    /// Log-domain opponent space used for statistical color transfer.
    Decorrelated,
}

impl ColorSpace {
    pub fn channels(self) -> usize {
        match self {
            ColorSpace::Gray => 1,
            ColorSpace::Rgb | ColorSpace::Decorrelated => 3,
        }
    }
}

/// Decoded raster with interleaved channels.
#[derive(Debug, Clone, PartialEq)]
pub struct ImageBuffer {
    width: usize,
    height: usize,
    colorspace: ColorSpace,
    data: Vec<f64>,
}

impl ImageBuffer {
    /// Builds a buffer, checking length and value-range invariants.
    pub fn new(
        width: usize,
        height: usize,
        colorspace: ColorSpace,
        data: Vec<f64>,
    ) -> Result<Self, ImageError> {
        if width == 0 || height == 0 {
            return Err(ImageError::ZeroDimension { width, height });
        }
        let expected = width * height * colorspace.channels();
        if data.len() != expected {
            return Err(ImageError::InvalidBuffer(format!(
                "data length {} does not match {}x{}x{}",
                data.len(),
                width,
                height,
                colorspace.channels()
            )));
        }
        if let Some(bad) = data.iter().find(|v| !v.is_finite()) {
            return Err(ImageError::InvalidBuffer(format!(
                "non-finite intensity {bad}"
            )));
        }
        if colorspace != ColorSpace::Decorrelated {
            if let Some(bad) = data.iter().find(|v| !(0.0..=1.0).contains(*v)) {
                return Err(ImageError::InvalidBuffer(format!(
                    "intensity {bad} outside [0, 1]"
                )));
            }
        }
        Ok(Self {
            width,
            height,
            colorspace,
            data,
        })
    }

    /// Constant-valued buffer; `value` is repeated for every pixel.
    pub fn filled(
        width: usize,
        height: usize,
        colorspace: ColorSpace,
        value: &[f64],
    ) -> Result<Self, ImageError> {
        if value.len() != colorspace.channels() {
            return Err(ImageError::InvalidBuffer(format!(
                "fill value has {} channels, {:?} needs {}",
                value.len(),
                colorspace,
                colorspace.channels()
            )));
        }
        let data = value
            .iter()
            .copied()
            .cycle()
            .take(width * height * value.len())
            .collect();
        Self::new(width, height, colorspace, data)
    }

    /// Builds a buffer from a per-pixel closure returning one value per channel.
    pub fn from_fn<F>(
        width: usize,
        height: usize,
        colorspace: ColorSpace,
        mut f: F,
    ) -> Result<Self, ImageError>
    where
        F: FnMut(usize, usize, usize) -> f64,
    {
        let ch = colorspace.channels();
        let mut data = Vec::with_capacity(width * height * ch);
        for y in 0..height {
            for x in 0..width {
                for c in 0..ch {
                    data.push(f(x, y, c));
                }
            }
        }
        Self::new(width, height, colorspace, data)
    }

    // Skips range validation; callers guarantee the invariants.
    pub(crate) fn from_parts(
        width: usize,
        height: usize,
        colorspace: ColorSpace,
        data: Vec<f64>,
    ) -> Self {
        debug_assert_eq!(data.len(), width * height * colorspace.channels());
        Self {
            width,
            height,
            colorspace,
            data,
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn channels(&self) -> usize {
        self.colorspace.channels()
    }

    pub fn colorspace(&self) -> ColorSpace {
        self.colorspace
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    pub fn pixel_count(&self) -> usize {
        self.width * self.height
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize, c: usize) -> f64 {
        self.data[(y * self.width + x) * self.channels() + c]
    }

    /// Copies one channel out as a contiguous plane.
    pub fn channel(&self, c: usize) -> Vec<f64> {
        let ch = self.channels();
        self.data.iter().skip(c).step_by(ch).copied().collect()
    }

    /// Reassembles planes into an interleaved buffer.
    pub fn from_planes(
        width: usize,
        height: usize,
        colorspace: ColorSpace,
        planes: &[Vec<f64>],
    ) -> Result<Self, ImageError> {
        if planes.len() != colorspace.channels() {
            return Err(ImageError::InvalidBuffer(format!(
                "{} planes given for {:?}",
                planes.len(),
                colorspace
            )));
        }
        let n = width * height;
        if planes.iter().any(|p| p.len() != n) {
            return Err(ImageError::InvalidBuffer("plane length mismatch".into()));
        }
        let mut data = Vec::with_capacity(n * planes.len());
        for i in 0..n {
            for p in planes {
                data.push(p[i]);
            }
        }
        Self::new(width, height, colorspace, data)
    }

    /// Returns a copy with every value clamped to `[0, 1]`.
    pub fn clamped(&self) -> Self {
        Self::from_parts(
            self.width,
            self.height,
            self.colorspace,
            self.data.iter().map(|v| v.clamp(0.0, 1.0)).collect(),
        )
    }

    /// Maximum absolute per-value difference; `None` when shapes differ.
    pub fn max_abs_diff(&self, other: &ImageBuffer) -> Option<f64> {
        if self.width != other.width
            || self.height != other.height
            || self.channels() != other.channels()
        {
            return None;
        }
        Some(
            self.data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max),
        )
    }
}

/// Per-channel mean and population standard deviation.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelStats {
    pub mean: Vec<f64>,
    pub stddev: Vec<f64>,
}

impl ChannelStats {
    /// Two-pass moments of every channel of `img`.
    pub fn of(img: &ImageBuffer) -> Self {
        let ch = img.channels();
        let n = img.pixel_count() as f64;
        let mut mean = vec![0.0; ch];
        for px in img.data.chunks_exact(ch) {
            for (m, v) in mean.iter_mut().zip(px) {
                *m += v;
            }
        }
        mean.iter_mut().for_each(|m| *m /= n);
        let mut var = vec![0.0; ch];
        for px in img.data.chunks_exact(ch) {
            for c in 0..ch {
                let d = px[c] - mean[c];
                var[c] += d * d;
            }
        }
        let stddev = var.into_iter().map(|v| (v / n).sqrt()).collect();
        Self { mean, stddev }
    }
}
