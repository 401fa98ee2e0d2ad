use super::{ImageBuffer, ImageError};

/// Resampling taps for one output coordinate.
struct Taps {
    start: usize,
    weights: Vec<f64>,
}

// Triangle (bilinear) kernel on pixel centers. When shrinking, the kernel is
// widened by the scale factor so every source pixel contributes.
fn taps(len_in: usize, len_out: usize) -> Vec<Taps> {
    let scale = len_in as f64 / len_out as f64;
    let support = scale.max(1.0);
    (0..len_out)
        .map(|i| {
            let center = (i as f64 + 0.5) * scale;
            let lo = ((center - support).floor().max(0.0)) as usize;
            let hi = ((center + support).ceil() as usize).min(len_in);
            let mut weights: Vec<f64> = (lo..hi)
                .map(|j| {
                    let d = ((j as f64 + 0.5) - center) / support;
                    (1.0 - d.abs()).max(0.0)
                })
                .collect();
            let total: f64 = weights.iter().sum();
            weights.iter_mut().for_each(|w| *w /= total);
            Taps { start: lo, weights }
        })
        .collect()
}

/// Bilinear resample to `w` x `h`, keeping the channel count and colorspace.
pub fn resize(img: &ImageBuffer, w: usize, h: usize) -> Result<ImageBuffer, ImageError> {
    if w == 0 || h == 0 {
        return Err(ImageError::ZeroDimension {
            width: w,
            height: h,
        });
    }
    if w == img.width() && h == img.height() {
        return Ok(img.clone());
    }
    let ch = img.channels();
    let (sw, sh) = (img.width(), img.height());
    let src = img.data();

    let xt = taps(sw, w);
    let mut horiz = vec![0.0; w * sh * ch];
    for y in 0..sh {
        let row = &src[y * sw * ch..(y + 1) * sw * ch];
        let out = &mut horiz[y * w * ch..(y + 1) * w * ch];
        for (x, t) in xt.iter().enumerate() {
            for (k, wt) in t.weights.iter().enumerate() {
                let base = (t.start + k) * ch;
                for c in 0..ch {
                    out[x * ch + c] += wt * row[base + c];
                }
            }
        }
    }

    let yt = taps(sh, h);
    let mut data = vec![0.0; w * h * ch];
    let stride = w * ch;
    for (y, t) in yt.iter().enumerate() {
        let out = &mut data[y * stride..(y + 1) * stride];
        for (k, wt) in t.weights.iter().enumerate() {
            let row = &horiz[(t.start + k) * stride..(t.start + k + 1) * stride];
            for (o, v) in out.iter_mut().zip(row) {
                *o += wt * v;
            }
        }
    }
    if img.colorspace() != super::ColorSpace::Decorrelated {
        data.iter_mut().for_each(|v| *v = v.clamp(0.0, 1.0));
    }
    Ok(ImageBuffer::from_parts(w, h, img.colorspace(), data))
}
