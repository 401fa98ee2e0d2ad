use super::{require_rgb, RestyleError};
use crate::imgcore::{ColorSpace, ImageBuffer};

const BINS: usize = 256;

fn bin(v: f64) -> usize {
    (v.clamp(0.0, 1.0) * 255.0).round() as usize
}

fn cumulative(values: impl Iterator<Item = f64>) -> ([u64; BINS], u64) {
    let mut counts = [0u64; BINS];
    for v in values {
        counts[bin(v)] += 1;
    }
    let mut cdf = [0u64; BINS];
    let mut acc = 0;
    for (c, n) in cdf.iter_mut().zip(counts) {
        acc += n;
        *c = acc;
    }
    (cdf, acc)
}

// Each content bin is sent to the style bin holding the quantile at the
// midpoint of the content bin's CDF interval. Comparisons stay in integers.
fn channel_lut(content: &[u64; BINS], n_c: u64, style: &[u64; BINS], n_s: u64) -> [u8; BINS] {
    let mut lut = [0u8; BINS];
    let mut j = 0usize;
    for b in 0..BINS {
        let prev = if b == 0 { 0 } else { content[b - 1] };
        // midpoint (prev + cur) / (2 n_c) <= style[j] / n_s
        let lhs = (u128::from(prev) + u128::from(content[b])) * u128::from(n_s);
        while j < BINS - 1 && lhs > 2 * u128::from(style[j]) * u128::from(n_c) {
            j += 1;
        }
        lut[b] = j as u8;
    }
    lut
}

/// Per-channel histogram specification of `content` onto `style` (256 bins).
pub fn histogram_match(content: &ImageBuffer, style: &ImageBuffer) -> Result<ImageBuffer, RestyleError> {
    require_rgb(content)?;
    require_rgb(style)?;
    let luts: Vec<[u8; BINS]> = (0..3)
        .map(|ch| {
            let (cc, nc) = cumulative(content.data().iter().skip(ch).step_by(3).copied());
            let (sc, ns) = cumulative(style.data().iter().skip(ch).step_by(3).copied());
            channel_lut(&cc, nc, &sc, ns)
        })
        .collect();
    let data = content
        .data()
        .chunks_exact(3)
        .flat_map(|p| (0..3).map(|ch| f64::from(luts[ch][bin(p[ch])]) / 255.0).collect::<Vec<_>>())
        .collect();
    Ok(ImageBuffer::new(
        content.width(),
        content.height(),
        ColorSpace::Rgb,
        data,
    )?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth;

    fn bimodal(lo: f64, hi: f64) -> ImageBuffer {
        ImageBuffer::from_fn(16, 16, ColorSpace::Rgb, |x, _, _| if x < 8 { lo } else { hi }).unwrap()
    }

    #[test]
    fn bimodal_maps_onto_bimodal() {
        let out = histogram_match(&bimodal(0.1, 0.9), &bimodal(0.2, 0.8)).unwrap();
        for (i, v) in out.data().iter().enumerate() {
            let x = (i / 3) % 16;
            let expect = if x < 8 { 0.2 } else { 0.8 };
            assert!((v - expect).abs() <= 1.0 / 255.0, "pixel {i}: {v}");
        }
    }

    #[test]
    fn self_match_is_quantization_only() {
        let img = synth::natural_image(3, 40, 30);
        let out = histogram_match(&img, &img).unwrap();
        assert!(out.max_abs_diff(&img).unwrap() <= 1.0 / 255.0);
    }

    #[test]
    fn mapping_is_monotone() {
        let c = synth::natural_image(5, 32, 32);
        let s = synth::natural_image(6, 20, 28);
        let out = histogram_match(&c, &s).unwrap();
        for ch in 0..3 {
            let mut pairs: Vec<(f64, f64)> = c.channel(ch).into_iter().zip(out.channel(ch)).collect();
            pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
            assert!(pairs.windows(2).all(|w| w[0].1 <= w[1].1));
        }
    }
}
