use std::path::PathBuf;

use rayon::prelude::*;

use super::MetricsError;
use crate::imgcore::{load, rgb_to_decorrelated, to_rgb, ColorSpace, ImageBuffer};
use crate::matcher::worker_pool;

/// Gaussian summary of decorrelated-space pixels.
#[derive(Debug, Clone, PartialEq)]
pub struct DomainStats {
    pub mean: [f64; 3],
    /// Population covariance.
    pub cov: [[f64; 3]; 3],
    /// Pixels (pooled) or images (per-image) summarized.
    pub count: u64,
}

/// How pixels of several images are combined.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Pooling {
    /// All pixels of all images form one sample.
    #[default]
    Pooled,
    /// Unweighted average of per-image means and covariances.
    PerImage,
}

/// Count, mean and co-moment matrix; merges with Chan's pairwise update.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct StatsAccumulator {
    n: u64,
    mean: [f64; 3],
    m2: [[f64; 3]; 3],
}

#[derive(Default, Clone, Copy)]
struct Neumaier {
    sum: f64,
    c: f64,
}

impl Neumaier {
    fn add(&mut self, v: f64) {
        let t = self.sum + v;
        if self.sum.abs() >= v.abs() {
            self.c += (self.sum - t) + v;
        } else {
            self.c += (v - t) + self.sum;
        }
        self.sum = t;
    }

    fn total(self) -> f64 {
        self.sum + self.c
    }
}

impl StatsAccumulator {
    /// Two-pass statistics of one decorrelated (or any 3-channel) image.
    pub fn from_pixels(img: &ImageBuffer) -> Self {
        assert_eq!(img.channels(), 3, "three channels required");
        let n = img.pixel_count() as u64;
        if n == 0 {
            return Self::default();
        }
        let mut sums = [Neumaier::default(); 3];
        for p in img.data().chunks_exact(3) {
            for c in 0..3 {
                sums[c].add(p[c]);
            }
        }
        let mean = sums.map(|s| s.total() / n as f64);
        let mut acc = [[Neumaier::default(); 3]; 3];
        for p in img.data().chunks_exact(3) {
            let d = [p[0] - mean[0], p[1] - mean[1], p[2] - mean[2]];
            for i in 0..3 {
                for j in i..3 {
                    acc[i][j].add(d[i] * d[j]);
                }
            }
        }
        let mut m2 = [[0.0; 3]; 3];
        for i in 0..3 {
            for j in i..3 {
                m2[i][j] = acc[i][j].total();
                m2[j][i] = m2[i][j];
            }
        }
        Self { n, mean, m2 }
    }

    pub fn count(&self) -> u64 {
        self.n
    }

    pub fn merge(&mut self, other: &StatsAccumulator) {
        if other.n == 0 {
            return;
        }
        if self.n == 0 {
            *self = other.clone();
            return;
        }
        let (na, nb) = (self.n as f64, other.n as f64);
        let n = na + nb;
        let delta: [f64; 3] = std::array::from_fn(|c| other.mean[c] - self.mean[c]);
        for i in 0..3 {
            for j in 0..3 {
                self.m2[i][j] += other.m2[i][j] + delta[i] * delta[j] * na * nb / n;
            }
        }
        for c in 0..3 {
            self.mean[c] += delta[c] * nb / n;
        }
        self.n += other.n;
    }

    pub fn finish(&self) -> Result<DomainStats, MetricsError> {
        if self.n == 0 {
            return Err(MetricsError::EmptyCorpus);
        }
        let n = self.n as f64;
        Ok(DomainStats {
            mean: self.mean,
            cov: self.m2.map(|row| row.map(|v| v / n)),
            count: self.n,
        })
    }
}

fn partial(img: &ImageBuffer) -> Result<StatsAccumulator, MetricsError> {
    let rgb = match img.colorspace() {
        ColorSpace::Rgb => rgb_to_decorrelated(img)?,
        ColorSpace::Gray => rgb_to_decorrelated(&to_rgb(img)?)?,
        ColorSpace::Decorrelated => img.clone(),
    };
    Ok(StatsAccumulator::from_pixels(&rgb))
}

// Partials are always merged left to right, so the result does not depend on
// how they were computed.
fn combine(parts: Vec<StatsAccumulator>, pooling: Pooling) -> Result<DomainStats, MetricsError> {
    if parts.is_empty() {
        return Err(MetricsError::EmptyCorpus);
    }
    match pooling {
        Pooling::Pooled => {
            let mut acc = StatsAccumulator::default();
            for p in &parts {
                acc.merge(p);
            }
            acc.finish()
        }
        Pooling::PerImage => {
            let mut mean = [Neumaier::default(); 3];
            let mut cov = [[Neumaier::default(); 3]; 3];
            for p in &parts {
                let s = p.finish()?;
                for i in 0..3 {
                    mean[i].add(s.mean[i]);
                    for j in 0..3 {
                        cov[i][j].add(s.cov[i][j]);
                    }
                }
            }
            let m = parts.len() as f64;
            Ok(DomainStats {
                mean: mean.map(|s| s.total() / m),
                cov: cov.map(|row| row.map(|s| s.total() / m)),
                count: parts.len() as u64,
            })
        }
    }
}

/// Statistics of RGB, gray or decorrelated images in decorrelated space.
pub fn corpus_stats(images: &[ImageBuffer], pooling: Pooling) -> Result<DomainStats, MetricsError> {
    let parts = images.iter().map(partial).collect::<Result<Vec<_>, _>>()?;
    combine(parts, pooling)
}

/// Same result as [`corpus_stats`], with per-image work spread over `workers` threads.
pub fn corpus_stats_parallel(
    images: &[ImageBuffer],
    pooling: Pooling,
    workers: usize,
) -> Result<DomainStats, MetricsError> {
    let pool = worker_pool(workers).map_err(|e| MetricsError::Pool(e.to_string()))?;
    let parts = pool.install(|| images.par_iter().map(partial).collect::<Result<Vec<_>, _>>())?;
    combine(parts, pooling)
}

/// Loads and summarizes image files without holding them all in memory.
pub fn corpus_stats_paths(
    paths: &[PathBuf],
    pooling: Pooling,
    workers: usize,
) -> Result<DomainStats, MetricsError> {
    let pool = worker_pool(workers).map_err(|e| MetricsError::Pool(e.to_string()))?;
    let parts = pool.install(|| {
        paths
            .par_iter()
            .map(|p| partial(&load(p)?))
            .collect::<Result<Vec<_>, _>>()
    })?;
    combine(parts, pooling)
}
