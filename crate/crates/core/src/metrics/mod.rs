//! Domain-alignment and structure-preservation diagnostics.
//!
//! `domain_gap` is the Fréchet distance between Gaussians fitted to pooled
//! decorrelated pixel statistics. It is a pixel-statistics proxy, not a
//! deep-feature distance. `structure_preservation` is the Pearson correlation
//! of luminance gradient magnitudes.

mod report;
mod stats;

pub use report::{match_quality_report, MatchQualityReport, ModeSummary, Report, ReportRow};
pub use stats::{corpus_stats, corpus_stats_parallel, corpus_stats_paths, DomainStats, Pooling, StatsAccumulator};

use nalgebra::{Matrix3, SymmetricEigen, Vector3};
use thiserror::Error;

use crate::imgcore::{to_grayscale, ImageBuffer, ImageError};

/// Tolerance for asymmetry and negative eigenvalues in covariance inputs.
pub const PSD_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum MetricsError {
    #[error("corpus is empty")]
    EmptyCorpus,
    #[error("covariance is not symmetric positive semi-definite: {0}")]
    NonPsd(String),
    #[error("images differ in size: {0}x{1} vs {2}x{3}")]
    DimensionMismatch(usize, usize, usize, usize),
    #[error("unknown sample id '{0}'")]
    UnknownId(String),
    #[error(transparent)]
    Image(#[from] ImageError),
    #[error("worker pool: {0}")]
    Pool(String),
}

fn checked_eigen(cov: &[[f64; 3]; 3], which: &str) -> Result<SymmetricEigen<f64, nalgebra::U3>, MetricsError> {
    for i in 0..3 {
        for j in 0..3 {
            if !cov[i][j].is_finite() || (cov[i][j] - cov[j][i]).abs() > PSD_TOLERANCE {
                return Err(MetricsError::NonPsd(format!("{which} is not symmetric")));
            }
        }
    }
    let m = Matrix3::from_fn(|i, j| cov[i][j]);
    let eig = m.symmetric_eigen();
    if let Some(l) = eig.eigenvalues.iter().find(|&&l| l < -PSD_TOLERANCE) {
        return Err(MetricsError::NonPsd(format!("{which} has eigenvalue {l}")));
    }
    Ok(eig)
}

fn psd_sqrt(eig: &SymmetricEigen<f64, nalgebra::U3>) -> Matrix3<f64> {
    let d = Matrix3::from_diagonal(&eig.eigenvalues.map(|l| l.max(0.0).sqrt()));
    eig.eigenvectors * d * eig.eigenvectors.transpose()
}

/// `|mu_a - mu_b|^2 + tr(C_a + C_b - 2 (C_a C_b)^(1/2))`.
///
/// The cross term uses `tr((C_a C_b)^(1/2)) = tr((S C_b S)^(1/2))` with
/// `S = C_a^(1/2)`, which keeps every square root symmetric.
pub fn domain_gap(a: &DomainStats, b: &DomainStats) -> Result<f64, MetricsError> {
    let ea = checked_eigen(&a.cov, "first covariance")?;
    checked_eigen(&b.cov, "second covariance")?;
    let s = psd_sqrt(&ea);
    let cb = Matrix3::from_fn(|i, j| b.cov[i][j]);
    let inner = s * cb * s;
    let inner = (inner + inner.transpose()) * 0.5;
    let cross: f64 = inner
        .symmetric_eigenvalues()
        .iter()
        .map(|l| l.max(0.0).sqrt())
        .sum();
    let dm = Vector3::from(a.mean) - Vector3::from(b.mean);
    let trace_a: f64 = (0..3).map(|i| a.cov[i][i]).sum();
    let trace_b: f64 = (0..3).map(|i| b.cov[i][i]).sum();
    Ok((dm.norm_squared() + trace_a + trace_b - 2.0 * cross).max(0.0))
}

/// Central-difference gradient magnitude of a plane, edges replicated.
pub fn gradient_magnitude(plane: &[f64], w: usize, h: usize) -> Vec<f64> {
    let at = |x: isize, y: isize| {
        let x = x.clamp(0, w as isize - 1) as usize;
        let y = y.clamp(0, h as isize - 1) as usize;
        plane[y * w + x]
    };
    let mut out = Vec::with_capacity(w * h);
    for y in 0..h as isize {
        for x in 0..w as isize {
            let gx = (at(x + 1, y) - at(x - 1, y)) * 0.5;
            let gy = (at(x, y + 1) - at(x, y - 1)) * 0.5;
            out.push((gx * gx + gy * gy).sqrt());
        }
    }
    out
}

fn pearson(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        let (dx, dy) = (x - ma, y - mb);
        sab += dx * dy;
        saa += dx * dx;
        sbb += dy * dy;
    }
    let flat_a = saa.sqrt() <= 1e-12 * n.sqrt();
    let flat_b = sbb.sqrt() <= 1e-12 * n.sqrt();
    match (flat_a, flat_b) {
        (true, true) => 1.0,
        (true, false) | (false, true) => 0.0,
        _ => (sab / (saa.sqrt() * sbb.sqrt())).clamp(-1.0, 1.0),
    }
}

/// Correlation of luminance gradient magnitudes, in `[-1, 1]`.
///
/// Two flat images score 1; exactly one flat image scores 0.
pub fn structure_preservation(content: &ImageBuffer, restyled: &ImageBuffer) -> Result<f64, MetricsError> {
    if content.width() != restyled.width() || content.height() != restyled.height() {
        return Err(MetricsError::DimensionMismatch(
            content.width(),
            content.height(),
            restyled.width(),
            restyled.height(),
        ));
    }
    let (w, h) = (content.width(), content.height());
    let gc = gradient_magnitude(to_grayscale(content).data(), w, h);
    let gr = gradient_magnitude(to_grayscale(restyled).data(), w, h);
    Ok(pearson(&gc, &gr))
}
