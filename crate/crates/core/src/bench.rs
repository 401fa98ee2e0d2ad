//! Built-in throughput benchmark for hashing and Hamming search.
//!
//! Targets are informational: results below them are reported, not failed.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::imgcore::{encode, OutputFormat};
use crate::matcher::{build_index, worker_pool, MatchError};
use crate::phash::{compute_hash, hash_bytes, PerceptualHash};
use crate::synth;

/// Images per second for 512x512 inputs.
pub const HASH_TARGET: f64 = 200.0;
/// Hash comparisons per second during a K-NN scan.
pub const SCAN_TARGET: f64 = 50e6;

#[derive(Debug, Clone)]
pub struct BenchConfig {
    pub images: usize,
    pub image_size: usize,
    pub index_size: usize,
    pub queries: usize,
    pub k: usize,
    pub workers: usize,
}

impl Default for BenchConfig {
    fn default() -> Self {
        Self {
            images: 64,
            image_size: 512,
            index_size: 100_000,
            queries: 400,
            k: 5,
            workers: crate::pipeline::default_workers(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct BenchReport {
    pub config: BenchConfig,
    /// Hashing decoded buffers.
    pub hash_per_sec: f64,
    /// Decoding PNG bytes and hashing.
    pub decode_hash_per_sec: f64,
    pub scan_cmp_per_sec: f64,
}

impl BenchReport {
    pub fn hash_target_met(&self) -> bool {
        self.decode_hash_per_sec >= HASH_TARGET
    }

    pub fn scan_target_met(&self) -> bool {
        self.scan_cmp_per_sec >= SCAN_TARGET
    }

    pub fn to_text(&self) -> String {
        let verdict = |ok: bool| if ok { "met" } else { "below target" };
        let c = &self.config;
        format!(
            "workers = {}\n\
             hash_images = {} ({}x{})\n\
             hash_per_sec = {:.1}\n\
             decode_hash_per_sec = {:.1} (target {HASH_TARGET}: {})\n\
             scan_index = {}, queries = {}, k = {}\n\
             scan_cmp_per_sec = {:.3e} (target {SCAN_TARGET:.0e}: {})\n",
            c.workers,
            c.images,
            c.image_size,
            c.image_size,
            self.hash_per_sec,
            self.decode_hash_per_sec,
            verdict(self.hash_target_met()),
            c.index_size,
            c.queries,
            c.k,
            self.scan_cmp_per_sec,
            verdict(self.scan_target_met()),
        )
    }
}

pub fn run_bench(cfg: &BenchConfig) -> Result<BenchReport, MatchError> {
    let pool = worker_pool(cfg.workers)?;
    let images: Vec<_> = pool.install(|| {
        (0..cfg.images as u64)
            .into_par_iter()
            .map(|i| synth::natural_image(i, cfg.image_size, cfg.image_size))
            .collect()
    });
    let encoded: Vec<Vec<u8>> = pool.install(|| {
        images
            .par_iter()
            .map(|img| encode(img, OutputFormat::Png).expect("synthetic images encode"))
            .collect()
    });

    let t = Instant::now();
    let hashes: Vec<PerceptualHash> = pool.install(|| {
        images
            .par_iter()
            .map(|img| compute_hash(img).expect("synthetic images hash"))
            .collect()
    });
    let hash_per_sec = hashes.len() as f64 / t.elapsed().as_secs_f64();

    let t = Instant::now();
    let n = pool.install(|| {
        encoded
            .par_iter()
            .filter(|b| hash_bytes(b).is_ok())
            .count()
    });
    let decode_hash_per_sec = n as f64 / t.elapsed().as_secs_f64();

    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let index = build_index((0..cfg.index_size).map(|i| (i.to_string(), PerceptualHash(rng.random()))))?;
    let queries: Vec<PerceptualHash> = (0..cfg.queries).map(|_| PerceptualHash(rng.random())).collect();
    let t = Instant::now();
    let found: usize = pool.install(|| queries.par_iter().map(|&q| index.nearest(q, cfg.k).len()).sum());
    let elapsed = t.elapsed().as_secs_f64();
    debug_assert_eq!(found, cfg.queries * cfg.k.min(cfg.index_size));
    let scan_cmp_per_sec = (cfg.queries * cfg.index_size) as f64 / elapsed;

    Ok(BenchReport {
        config: cfg.clone(),
        hash_per_sec,
        decode_hash_per_sec,
        scan_cmp_per_sec,
    })
}
