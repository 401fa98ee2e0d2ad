//! 64-bit DCT perceptual hash.
//!
//! An image is reduced to 32x32 luma, transformed with an orthonormal 2-D
//! DCT, and the 8x8 lowest-frequency block is thresholded against the median
//! of its 63 AC coefficients. Bit `i = 8u + v` of the block is stored at
//! position `63 - i`, so the DC bit is the most significant bit.

mod dct;
pub mod hashfile;

pub use dct::{dct2, DctMatrix, DctSpectrum};

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::imgcore::{self, ImageBuffer, ImageError};

/// Side length of the low-resolution grid fed to the DCT.
pub const PREHASH_SIZE: usize = 32;
/// Side length of the retained low-frequency block.
pub const BLOCK_SIZE: usize = 8;
/// Coefficients within this distance of the median count as ties (bit 0).
pub const TIE_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum PhashError {
    #[error("DCT input must be square, got {width}x{height}")]
    NotSquare { width: usize, height: usize },
    #[error("DCT input must be single-channel grayscale")]
    NotGray,
    #[error("DCT input must be at least 8x8, got {0}x{0}")]
    TooSmall(usize),
    #[error(transparent)]
    Image(#[from] ImageError),
    #[error("invalid hash string '{0}': expected 16 hex characters")]
    InvalidHex(String),
}

/// 64-bit structural fingerprint of one image.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PerceptualHash(pub u64);

impl PerceptualHash {
    /// Whether block coefficient `i = 8u + v` was above the median.
    pub fn bit(self, i: usize) -> bool {
        assert!(i < 64, "bit index {i} out of range");
        (self.0 >> (63 - i)) & 1 == 1
    }

    pub fn count_ones(self) -> u32 {
        self.0.count_ones()
    }

    pub fn to_hex(self) -> String {
        format!("{:016x}", self.0)
    }
}

impl fmt::Display for PerceptualHash {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:016x}", self.0)
    }
}

impl FromStr for PerceptualHash {
    type Err = PhashError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s.len() != 16 || !s.bytes().all(|b| b.is_ascii_hexdigit()) {
            return Err(PhashError::InvalidHex(s.to_string()));
        }
        u64::from_str_radix(s, 16)
            .map(PerceptualHash)
            .map_err(|_| PhashError::InvalidHex(s.to_string()))
    }
}

/// Number of differing bits.
#[inline]
pub fn hamming(a: PerceptualHash, b: PerceptualHash) -> u32 {
    (a.0 ^ b.0).count_ones()
}

/// Thresholds a row-major 8x8 coefficient block into a hash.
pub fn hash_from_block(block: &[f64]) -> PerceptualHash {
    assert_eq!(block.len(), BLOCK_SIZE * BLOCK_SIZE);
    let mut ac: Vec<f64> = block[1..].to_vec();
    ac.sort_by(|a, b| a.total_cmp(b));
    let median = ac[ac.len() / 2];
    let bits = block.iter().enumerate().fold(0u64, |acc, (i, &c)| {
        if c - median > TIE_TOLERANCE {
            acc | (1u64 << (63 - i))
        } else {
            acc
        }
    });
    PerceptualHash(bits)
}

/// Perceptual hash of any RGB or GRAY image.
pub fn compute_hash(img: &ImageBuffer) -> Result<PerceptualHash, PhashError> {
    let gray = imgcore::to_grayscale(img);
    let small = imgcore::resize(&gray, PREHASH_SIZE, PREHASH_SIZE)?;
    let block = dct::dct2_block(&small, BLOCK_SIZE)?;
    Ok(hash_from_block(&block))
}

/// Decodes `bytes` and hashes the result.
pub fn hash_bytes(bytes: &[u8]) -> Result<PerceptualHash, PhashError> {
    compute_hash(&imgcore::decode(bytes)?)
}
