use std::f64::consts::PI;
use std::sync::LazyLock;

use super::PhashError;
use crate::imgcore::{ColorSpace, ImageBuffer};

/// Orthonormal DCT-II basis: row `k` holds `c(k) * cos(pi * (2n + 1) * k / 2N)`.
#[derive(Debug, Clone)]
pub struct DctMatrix {
    n: usize,
    a: Vec<f64>,
}

impl DctMatrix {
    pub fn new(n: usize) -> Self {
        let mut a = vec![0.0; n * n];
        let nf = n as f64;
        for k in 0..n {
            let scale = if k == 0 { (1.0 / nf).sqrt() } else { (2.0 / nf).sqrt() };
            for i in 0..n {
                a[k * n + i] = scale * (PI * (2.0 * i as f64 + 1.0) * k as f64 / (2.0 * nf)).cos();
            }
        }
        Self { n, a }
    }

    pub fn size(&self) -> usize {
        self.n
    }

    /// Top-left `keep x keep` block of `A * g * A^T` for a row-major `n x n` input.
    pub(crate) fn forward_block(&self, g: &[f64], keep: usize) -> Vec<f64> {
        let n = self.n;
        debug_assert!(keep <= n && g.len() == n * n);
        // rows of A * g
        let mut ag = vec![0.0; keep * n];
        for u in 0..keep {
            let arow = &self.a[u * n..(u + 1) * n];
            let out = &mut ag[u * n..(u + 1) * n];
            for (x, &w) in arow.iter().enumerate() {
                let grow = &g[x * n..(x + 1) * n];
                for (o, &v) in out.iter_mut().zip(grow) {
                    *o += w * v;
                }
            }
        }
        let mut t = vec![0.0; keep * keep];
        for u in 0..keep {
            let row = &ag[u * n..(u + 1) * n];
            for v in 0..keep {
                let arow = &self.a[v * n..(v + 1) * n];
                t[u * keep + v] = row.iter().zip(arow).map(|(p, q)| p * q).sum();
            }
        }
        t
    }

    /// `A^T * t * A`, the inverse of the full forward transform.
    pub(crate) fn inverse(&self, t: &[f64]) -> Vec<f64> {
        let n = self.n;
        let mut at_t = vec![0.0; n * n];
        for x in 0..n {
            for u in 0..n {
                let w = self.a[u * n + x];
                let trow = &t[u * n..(u + 1) * n];
                let out = &mut at_t[x * n..(x + 1) * n];
                for (o, &v) in out.iter_mut().zip(trow) {
                    *o += w * v;
                }
            }
        }
        let mut g = vec![0.0; n * n];
        for x in 0..n {
            for y in 0..n {
                g[x * n + y] = (0..n).map(|v| at_t[x * n + v] * self.a[v * n + y]).sum();
            }
        }
        g
    }
}

static DCT32: LazyLock<DctMatrix> = LazyLock::new(|| DctMatrix::new(32));

pub(crate) fn matrix_for(n: usize) -> std::borrow::Cow<'static, DctMatrix> {
    if n == 32 {
        std::borrow::Cow::Borrowed(&*DCT32)
    } else {
        std::borrow::Cow::Owned(DctMatrix::new(n))
    }
}

/// Square grid of DCT coefficients; `(0, 0)` is the DC term.
#[derive(Debug, Clone, PartialEq)]
pub struct DctSpectrum {
    size: usize,
    coeffs: Vec<f64>,
}

impl DctSpectrum {
    pub fn size(&self) -> usize {
        self.size
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn get(&self, u: usize, v: usize) -> f64 {
        self.coeffs[u * self.size + v]
    }

    pub fn energy(&self) -> f64 {
        self.coeffs.iter().map(|c| c * c).sum()
    }

    /// Reconstructs the spatial grid (row-major, `size x size`).
    pub fn inverse(&self) -> Vec<f64> {
        matrix_for(self.size).inverse(&self.coeffs)
    }
}

fn check_input(img: &ImageBuffer) -> Result<usize, PhashError> {
    if img.colorspace() != ColorSpace::Gray {
        return Err(PhashError::NotGray);
    }
    if img.width() != img.height() {
        return Err(PhashError::NotSquare {
            width: img.width(),
            height: img.height(),
        });
    }
    if img.width() < 8 {
        return Err(PhashError::TooSmall(img.width()));
    }
    Ok(img.width())
}

/// Orthonormal 2-D DCT-II of a square grayscale buffer.
pub fn dct2(img: &ImageBuffer) -> Result<DctSpectrum, PhashError> {
    let n = check_input(img)?;
    let coeffs = matrix_for(n).forward_block(img.data(), n);
    Ok(DctSpectrum { size: n, coeffs })
}

// Same arithmetic as `dct2`, restricted to the low-frequency block.
pub(crate) fn dct2_block(img: &ImageBuffer, keep: usize) -> Result<Vec<f64>, PhashError> {
    let n = check_input(img)?;
    Ok(matrix_for(n).forward_block(img.data(), keep))
}
