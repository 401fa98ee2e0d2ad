use std::sync::LazyLock;

use nalgebra::Matrix3;

use super::{ColorSpace, ImageBuffer, ImageError};

/// BT.601 luma weights for R, G, B.
pub const LUMA_WEIGHTS: [f64; 3] = [0.299, 0.587, 0.114];

/// Offset added before the logarithm so that black stays finite.
const LOG_OFFSET: f64 = 1.0 / 255.0;

// RGB -> LMS cone response, rows rescaled to sum to one so that achromatic
// input maps to L = M = S and therefore to zero chroma.
static RGB_TO_LMS: LazyLock<Matrix3<f64>> = LazyLock::new(|| {
    let m = Matrix3::new(
        0.3811, 0.5783, 0.0402, //
        0.1967, 0.7244, 0.0782, //
        0.0241, 0.1288, 0.8444,
    );
    let mut out = m;
    for r in 0..3 {
        let s: f64 = m.row(r).sum();
        for c in 0..3 {
            out[(r, c)] = m[(r, c)] / s;
        }
    }
    out
});

static LMS_TO_RGB: LazyLock<Matrix3<f64>> = LazyLock::new(|| {
    RGB_TO_LMS
        .try_inverse()
        .expect("cone response matrix is invertible")
});

// Orthonormal opponent transform: achromatic, yellow-blue, red-green.
static OPPONENT: LazyLock<Matrix3<f64>> = LazyLock::new(|| {
    let a = 1.0 / 3f64.sqrt();
    let b = 1.0 / 6f64.sqrt();
    let c = 1.0 / 2f64.sqrt();
    Matrix3::new(
        a, a, a, //
        b, b, -2.0 * b, //
        c, -c, 0.0,
    )
});

fn expect_space(img: &ImageBuffer, expected: ColorSpace) -> Result<(), ImageError> {
    if img.colorspace() != expected {
        return Err(ImageError::WrongColorspace {
            expected,
            found: img.colorspace(),
        });
    }
    Ok(())
}

/// Single-channel luma. GRAY input is returned unchanged.
pub fn to_grayscale(img: &ImageBuffer) -> ImageBuffer {
    match img.colorspace() {
        ColorSpace::Gray => img.clone(),
        _ => {
            let [wr, wg, wb] = LUMA_WEIGHTS;
            let data = img
                .data()
                .chunks_exact(3)
                .map(|p| (wr * p[0] + wg * p[1] + wb * p[2]).clamp(0.0, 1.0))
                .collect();
            ImageBuffer::from_parts(img.width(), img.height(), ColorSpace::Gray, data)
        }
    }
}

/// Promotes GRAY to RGB by channel replication; RGB is returned unchanged.
pub fn to_rgb(img: &ImageBuffer) -> Result<ImageBuffer, ImageError> {
    match img.colorspace() {
        ColorSpace::Rgb => Ok(img.clone()),
        ColorSpace::Gray => {
            let data = img.data().iter().flat_map(|&v| [v, v, v]).collect();
            Ok(ImageBuffer::from_parts(
                img.width(),
                img.height(),
                ColorSpace::Rgb,
                data,
            ))
        }
        ColorSpace::Decorrelated => Err(ImageError::WrongColorspace {
            expected: ColorSpace::Rgb,
            found: ColorSpace::Decorrelated,
        }),
    }
}

/// RGB to the log-opponent space. Channel 0 is achromatic, 1 and 2 are chroma.
pub fn rgb_to_decorrelated(img: &ImageBuffer) -> Result<ImageBuffer, ImageError> {
    expect_space(img, ColorSpace::Rgb)?;
    let m = *RGB_TO_LMS;
    let o = *OPPONENT;
    let mut data = Vec::with_capacity(img.data().len());
    for p in img.data().chunks_exact(3) {
        let lms = m * nalgebra::Vector3::new(p[0], p[1], p[2]);
        let log = lms.map(|v| (v + LOG_OFFSET).ln());
        let out = o * log;
        data.extend_from_slice(out.as_slice());
    }
    Ok(ImageBuffer::from_parts(
        img.width(),
        img.height(),
        ColorSpace::Decorrelated,
        data,
    ))
}

/// Inverse of [`rgb_to_decorrelated`], clamping the result into `[0, 1]`.
pub fn decorrelated_to_rgb(img: &ImageBuffer) -> Result<ImageBuffer, ImageError> {
    expect_space(img, ColorSpace::Decorrelated)?;
    let inv = *LMS_TO_RGB;
    let ot = OPPONENT.transpose();
    let mut data = Vec::with_capacity(img.data().len());
    for p in img.data().chunks_exact(3) {
        let log = ot * nalgebra::Vector3::new(p[0], p[1], p[2]);
        let lms = log.map(|v| v.exp() - LOG_OFFSET);
        let rgb = inv * lms;
        data.extend(rgb.iter().map(|v| v.clamp(0.0, 1.0)));
    }
    Ok(ImageBuffer::from_parts(
        img.width(),
        img.height(),
        ColorSpace::Rgb,
        data,
    ))
}
