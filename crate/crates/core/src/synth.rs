//! Deterministic procedural images for fixtures and benchmarks.
//!
//! [`natural_image`] composes a sky/ground gradient, smooth value noise,
//! a handful of flat-shaded shapes and light grain, which gives the 1/f-ish
//! spectrum and hard edges that perceptual hashing is meant for.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::imgcore::{ColorSpace, ImageBuffer};

fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(stream);
    r
}

fn random_color(rng: &mut ChaCha8Rng) -> [f64; 3] {
    [rng.random(), rng.random(), rng.random()]
}

/// Smooth noise: a random `cells x cells` lattice, bilinearly interpolated.
fn value_noise(rng: &mut ChaCha8Rng, w: usize, h: usize, cells: usize) -> Vec<f64> {
    let g = cells + 1;
    let lattice: Vec<f64> = (0..g * g).map(|_| rng.random::<f64>() * 2.0 - 1.0).collect();
    let mut out = Vec::with_capacity(w * h);
    for y in 0..h {
        let fy = y as f64 / h as f64 * cells as f64;
        let (y0, ty) = (fy.floor() as usize, fy.fract());
        for x in 0..w {
            let fx = x as f64 / w as f64 * cells as f64;
            let (x0, tx) = (fx.floor() as usize, fx.fract());
            let at = |xi: usize, yi: usize| lattice[yi.min(cells) * g + xi.min(cells)];
            let top = at(x0, y0) * (1.0 - tx) + at(x0 + 1, y0) * tx;
            let bot = at(x0, y0 + 1) * (1.0 - tx) + at(x0 + 1, y0 + 1) * tx;
            out.push(top * (1.0 - ty) + bot * ty);
        }
    }
    out
}

enum Shape {
    Rect { x0: f64, y0: f64, x1: f64, y1: f64 },
    Ellipse { cx: f64, cy: f64, rx: f64, ry: f64 },
}

impl Shape {
    fn random(rng: &mut ChaCha8Rng) -> Self {
        if rng.random_bool(0.5) {
            let x0: f64 = rng.random_range(-0.1..0.9);
            let y0: f64 = rng.random_range(-0.1..0.9);
            Shape::Rect {
                x0,
                y0,
                x1: x0 + rng.random_range(0.08..0.6),
                y1: y0 + rng.random_range(0.08..0.7),
            }
        } else {
            Shape::Ellipse {
                cx: rng.random(),
                cy: rng.random(),
                rx: rng.random_range(0.05..0.35),
                ry: rng.random_range(0.05..0.35),
            }
        }
    }

    fn contains(&self, u: f64, v: f64) -> bool {
        match *self {
            Shape::Rect { x0, y0, x1, y1 } => u >= x0 && u < x1 && v >= y0 && v < y1,
            Shape::Ellipse { cx, cy, rx, ry } => {
                let (du, dv) = ((u - cx) / rx, (v - cy) / ry);
                du * du + dv * dv <= 1.0
            }
        }
    }
}

/// Structured RGB image; the same `seed` always yields the same pixels.
/// Geometry is defined in normalized coordinates, so sizes only change sampling.
pub fn natural_image(seed: u64, w: usize, h: usize) -> ImageBuffer {
    let mut rng = rng_for(seed, 0);
    let top = random_color(&mut rng);
    let bottom = random_color(&mut rng);
    let angle: f64 = rng.random_range(0.0..std::f64::consts::TAU);
    let (dx, dy) = (angle.cos(), angle.sin());
    let noise_amp: f64 = rng.random_range(0.1..0.3);
    let cells = rng.random_range(2..6);
    let shapes: Vec<(Shape, [f64; 3])> = (0..rng.random_range(3..8))
        .map(|_| (Shape::random(&mut rng), random_color(&mut rng)))
        .collect();
    // noise is sampled on a fixed grid and resampled so it is size independent
    let noise_grid = 64;
    let noise = value_noise(&mut rng, noise_grid, noise_grid, cells);
    let tint = random_color(&mut rng);

    let mut grain = rng_for(seed, 1);
    ImageBuffer::from_fn(w, h, ColorSpace::Rgb, |x, y, c| {
        let u = (x as f64 + 0.5) / w as f64;
        let v = (y as f64 + 0.5) / h as f64;
        let t = ((u - 0.5) * dx + (v - 0.5) * dy + 0.5).clamp(0.0, 1.0);
        let mut val = top[c] * (1.0 - t) + bottom[c] * t;
        for (shape, color) in &shapes {
            if shape.contains(u, v) {
                val = color[c];
            }
        }
        let gx = ((u * noise_grid as f64) as usize).min(noise_grid - 1);
        let gy = ((v * noise_grid as f64) as usize).min(noise_grid - 1);
        val += noise_amp * noise[gy * noise_grid + gx] * (0.5 + tint[c]);
        val += (grain.random::<f64>() - 0.5) * 0.02;
        val.clamp(0.0, 1.0)
    })
    .expect("synthetic pixels are in range")
}

/// Independent uniform noise in every channel.
pub fn noise_image(seed: u64, w: usize, h: usize) -> ImageBuffer {
    let mut rng = rng_for(seed, 2);
    ImageBuffer::from_fn(w, h, ColorSpace::Rgb, |_, _, _| rng.random::<f64>())
        .expect("uniform samples are in range")
}

/// Photometric signature of a synthetic domain.
#[derive(Debug, Clone, Copy)]
pub struct DomainLook {
    pub gain: [f64; 3],
    pub offset: [f64; 3],
    pub gamma: f64,
}

impl DomainLook {
    /// Warm, high-contrast rendering.
    pub const WARM: DomainLook = DomainLook {
        gain: [1.1, 0.85, 0.55],
        offset: [0.05, 0.02, 0.0],
        gamma: 0.8,
    };
    /// Cool, hazy rendering.
    pub const COOL: DomainLook = DomainLook {
        gain: [0.55, 0.75, 0.9],
        offset: [0.05, 0.1, 0.15],
        gamma: 1.3,
    };

    pub fn apply(&self, img: &ImageBuffer) -> ImageBuffer {
        ImageBuffer::from_fn(img.width(), img.height(), ColorSpace::Rgb, |x, y, c| {
            let v = img.get(x, y, c).powf(self.gamma);
            (v * self.gain[c] + self.offset[c]).clamp(0.0, 1.0)
        })
        .expect("clamped")
    }
}

/// Shifts content by (`dx`, `dy`) pixels, repeating edge pixels into the gap.
pub fn translate(img: &ImageBuffer, dx: isize, dy: isize) -> ImageBuffer {
    let (w, h) = (img.width() as isize, img.height() as isize);
    ImageBuffer::from_fn(img.width(), img.height(), img.colorspace(), |x, y, c| {
        let sx = (x as isize - dx).clamp(0, w - 1) as usize;
        let sy = (y as isize - dy).clamp(0, h - 1) as usize;
        img.get(sx, sy, c)
    })
    .expect("same shape")
}
