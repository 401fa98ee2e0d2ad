//! Photometric restyling backends.
//!
//! Every backend takes a content image and a style image and returns an RGB
//! image with the content's structure and the style's color statistics:
//!
//! * `STATS` - per-channel mean/stddev transfer in the decorrelated space
//! * `HIST` - per-channel 256-bin histogram specification in RGB
//! * `FREQ` - `STATS`, then the content's high-frequency luminance is put back

mod blur;
mod config;
mod histogram;

pub use blur::box_blur;
pub use config::{Backend, RestyleConfig};
pub use histogram::histogram_match;

use std::path::Path;

use thiserror::Error;

use crate::imgcore::{
    self, decorrelated_to_rgb, rgb_to_decorrelated, ChannelStats, ColorSpace, ImageBuffer,
    ImageError,
};

/// Channels whose standard deviation is below this are treated as constant.
pub const DEGENERATE_STDDEV: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum RestyleError {
    #[error(transparent)]
    Image(#[from] ImageError),
    #[error("restyle config error: {0}")]
    Config(String),
    #[error("content and style must be RGB, got {0:?}")]
    NotRgb(ColorSpace),
    #[error("backend {0} cannot be used here")]
    WrongBackend(Backend),
}

/// Who was restyled with what, and how.
#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct Provenance {
    pub content_id: String,
    pub style_id: String,
    pub backend: Backend,
    pub config_digest: String,
}

fn require_rgb(img: &ImageBuffer) -> Result<(), RestyleError> {
    match img.colorspace() {
        ColorSpace::Rgb => Ok(()),
        other => Err(RestyleError::NotRgb(other)),
    }
}

/// Affine moment transfer in the decorrelated space, returned before the
/// conversion back to RGB (and therefore before clamping).
pub fn stats_transfer_decorrelated(
    content: &ImageBuffer,
    style: &ImageBuffer,
    cfg: &RestyleConfig,
) -> Result<ImageBuffer, RestyleError> {
    require_rgb(content)?;
    require_rgb(style)?;
    let c = rgb_to_decorrelated(content)?;
    let s = rgb_to_decorrelated(style)?;
    let cs = ChannelStats::of(&c);
    let ss = ChannelStats::of(&s);
    let maps: Vec<(f64, f64, f64)> = (0..3)
        .map(|ch| {
            if cs.stddev[ch] < DEGENERATE_STDDEV {
                (0.0, 0.0, ss.mean[ch])
            } else {
                let ratio = (ss.stddev[ch] / cs.stddev[ch]).clamp(cfg.ratio_min, cfg.ratio_max);
                (cs.mean[ch], ratio, ss.mean[ch])
            }
        })
        .collect();
    let data = c
        .data()
        .chunks_exact(3)
        .flat_map(|p| {
            let m = &maps;
            (0..3).map(move |ch| {
                let (mu_c, ratio, mu_s) = m[ch];
                (p[ch] - mu_c) * ratio + mu_s
            })
        })
        .collect();
    Ok(ImageBuffer::new(
        c.width(),
        c.height(),
        ColorSpace::Decorrelated,
        data,
    )?)
}

/// Mean/stddev color transfer with the default ratio limits.
pub fn color_stats_transfer(
    content: &ImageBuffer,
    style: &ImageBuffer,
) -> Result<ImageBuffer, RestyleError> {
    let d = stats_transfer_decorrelated(content, style, &RestyleConfig::default())?;
    Ok(decorrelated_to_rgb(&d)?)
}

/// Replaces the high-frequency part of `transferred`'s achromatic channel with
/// the content's, then restores the channel's own mean and stddev.
///
/// Both inputs are decorrelated and share dimensions.
pub fn reimpose_detail(
    transferred: &ImageBuffer,
    content: &ImageBuffer,
    radius: usize,
) -> Result<ImageBuffer, RestyleError> {
    for img in [transferred, content] {
        if img.colorspace() != ColorSpace::Decorrelated {
            return Err(ImageError::WrongColorspace {
                expected: ColorSpace::Decorrelated,
                found: img.colorspace(),
            }
            .into());
        }
    }
    let (w, h) = (content.width(), content.height());
    if transferred.width() != w || transferred.height() != h {
        return Err(ImageError::InvalidBuffer("detail source and target differ in size".into()).into());
    }
    let t_lum = transferred.channel(0);
    let c_lum = content.channel(0);
    let t_low = box_blur(&t_lum, w, h, radius);
    let c_low = box_blur(&c_lum, w, h, radius);
    let mixed: Vec<f64> = t_low
        .iter()
        .zip(&c_lum)
        .zip(&c_low)
        .map(|((tl, c), cl)| tl + (c - cl))
        .collect();

    let n = mixed.len() as f64;
    let target_mean = t_lum.iter().sum::<f64>() / n;
    let target_std = (t_lum.iter().map(|v| (v - target_mean).powi(2)).sum::<f64>() / n).sqrt();
    let mean = mixed.iter().sum::<f64>() / n;
    let std = (mixed.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n).sqrt();
    let lum: Vec<f64> = if std < DEGENERATE_STDDEV {
        vec![target_mean; mixed.len()]
    } else {
        let gain = target_std / std;
        mixed.iter().map(|v| (v - mean) * gain + target_mean).collect()
    };
    let planes = [lum, transferred.channel(1), transferred.channel(2)];
    Ok(ImageBuffer::from_planes(w, h, ColorSpace::Decorrelated, &planes)?)
}

/// FREQ backend, before conversion back to RGB.
pub fn frequency_blend_decorrelated(
    content: &ImageBuffer,
    style: &ImageBuffer,
    cfg: &RestyleConfig,
) -> Result<ImageBuffer, RestyleError> {
    let transferred = stats_transfer_decorrelated(content, style, cfg)?;
    let c = rgb_to_decorrelated(content)?;
    reimpose_detail(&transferred, &c, cfg.lowpass_radius)
}

pub fn frequency_blend(
    content: &ImageBuffer,
    style: &ImageBuffer,
    cfg: &RestyleConfig,
) -> Result<ImageBuffer, RestyleError> {
    if cfg.backend != Backend::Freq {
        return Err(RestyleError::WrongBackend(cfg.backend));
    }
    let d = frequency_blend_decorrelated(content, style, cfg)?;
    Ok(decorrelated_to_rgb(&d)?)
}

/// Dispatches to the configured backend. Both images must be RGB.
pub fn restyle(
    content: &ImageBuffer,
    style: &ImageBuffer,
    cfg: &RestyleConfig,
) -> Result<ImageBuffer, RestyleError> {
    cfg.validate()?;
    require_rgb(content)?;
    require_rgb(style)?;
    match cfg.backend {
        Backend::Freq => frequency_blend(content, style, cfg),
        Backend::Stats => {
            let mut d = stats_transfer_decorrelated(content, style, cfg)?;
            if cfg.detail_preserve {
                d = reimpose_detail(&d, &rgb_to_decorrelated(content)?, cfg.lowpass_radius)?;
            }
            Ok(decorrelated_to_rgb(&d)?)
        }
        Backend::Hist => {
            let out = histogram_match(content, style)?;
            if cfg.detail_preserve {
                let d = reimpose_detail(
                    &rgb_to_decorrelated(&out)?,
                    &rgb_to_decorrelated(content)?,
                    cfg.lowpass_radius,
                )?;
                Ok(decorrelated_to_rgb(&d)?)
            } else {
                Ok(out)
            }
        }
    }
}

/// Loads both images (GRAY is promoted to RGB), restyles, and records provenance.
/// Sample ids are the paths as given.
pub fn restyle_one(
    content_path: &Path,
    style_path: &Path,
    cfg: &RestyleConfig,
) -> Result<(ImageBuffer, Provenance), RestyleError> {
    cfg.validate()?;
    let content = imgcore::to_rgb(&imgcore::load(content_path)?)?;
    let style = imgcore::to_rgb(&imgcore::load(style_path)?)?;
    let out = restyle(&content, &style, cfg)?;
    let prov = Provenance {
        content_id: content_path.display().to_string(),
        style_id: style_path.display().to_string(),
        backend: cfg.backend,
        config_digest: cfg.digest(),
    };
    Ok((out, prov))
}
