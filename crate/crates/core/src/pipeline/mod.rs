//! End-to-end dataset enrichment: ingest, hash, match, restyle, merge.
//!
//! Every run leaves these files in `out_dir`:
//!
//! | file | contents |
//! |------|----------|
//! | `source.hashes`, `style.hashes` | `<id>\t<hex hash>` per decodable input |
//! | `matches.tsv` | `<source>\t<rank>\t<style>\t<distance or NA>\t<mode>` |
//! | `restyled/<source id>__k<rank>.<ext>` | restyled images |
//! | `manifest.jsonl` | every sample and skipped input, see [`manifest`] |
//! | `report.txt`, `metrics.csv` | counts and diagnostics |
//!
//! Manifest ids are namespaced by role (`source/...`, `style/...`,
//! `restyled/...`); hash and match files use ids relative to their corpus.

mod config;
mod ingest;
pub mod manifest;
mod run;
mod verify;

pub use config::{default_workers, PipelineConfig};
pub use ingest::{ingest, LabelIndex};
pub use manifest::{Manifest, Phase, Role, Sample, SampleProvenance, SkipRecord};
pub use run::{hash_directory, run, HashedDirectory, RunSummary, MANIFEST, MATCHES, REPORT_CSV, REPORT_TEXT, RESTYLED_DIR, SOURCE_HASHES, STYLE_HASHES};
pub use verify::{verify, VerifyReport};

use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::imgcore::ImageError;
use crate::matcher::MatchError;
use crate::metrics::{corpus_stats_paths, domain_gap, MetricsError, Pooling, Report};
use crate::phash::hashfile::HashFileError;
use manifest::ManifestError;

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("config error: {0}")]
    Config(String),
    #[error("directory not found: {}", .0.display())]
    MissingDir(PathBuf),
    #[error("output directory {} overlaps input directory {}", out.display(), input.display())]
    Overlap { input: PathBuf, out: PathBuf },
    #[error("style corpus has no decodable images")]
    NoStyles,
    #[error("unknown subset '{0}' (expected source, style, restyled or z)")]
    UnknownSubset(String),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Manifest(#[from] ManifestError),
    #[error(transparent)]
    Match(#[from] MatchError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
    #[error(transparent)]
    HashFile(#[from] HashFileError),
    #[error(transparent)]
    Image(#[from] ImageError),
}

impl PipelineError {
    /// Errors caused by the configuration rather than by processing.
    pub fn is_config(&self) -> bool {
        matches!(
            self,
            PipelineError::Config(_) | PipelineError::MissingDir(_) | PipelineError::Overlap { .. }
        )
    }
}

/// Writes `bytes` atomically, leaving the file untouched if it already holds them.
pub fn write_if_changed(path: &Path, bytes: &[u8]) -> Result<(), PipelineError> {
    if std::fs::read(path).is_ok_and(|old| old == bytes) {
        return Ok(());
    }
    let io = |source| PipelineError::Io {
        path: path.display().to_string(),
        source,
    };
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent).map_err(io)?;
    }
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".partial");
    std::fs::write(&tmp, bytes).map_err(io)?;
    std::fs::rename(&tmp, path).map_err(io)
}

/// Image paths of a named manifest subset: a role name, or `z` for sources plus restyled.
pub fn subset_paths(m: &Manifest, manifest_dir: &Path, subset: &str) -> Result<Vec<PathBuf>, PipelineError> {
    let roles: &[Role] = match subset {
        "source" => &[Role::Source],
        "style" => &[Role::Style],
        "restyled" => &[Role::Restyled],
        "z" => &[Role::Source, Role::Restyled],
        other => return Err(PipelineError::UnknownSubset(other.to_string())),
    };
    Ok(m.samples
        .iter()
        .filter(|s| roles.contains(&s.role))
        .map(|s| manifest::resolve(manifest_dir, &s.path))
        .collect())
}

/// Domain statistics of two manifest subsets and the gap between them.
pub fn compare_subsets(
    manifest_path: &Path,
    a: &str,
    b: &str,
    pooling: Pooling,
    workers: usize,
) -> Result<Report, PipelineError> {
    let m = Manifest::read_path(manifest_path)?;
    let dir = manifest_path.parent().unwrap_or(Path::new("."));
    let pa = subset_paths(&m, dir, a)?;
    let pb = subset_paths(&m, dir, b)?;
    let sa = corpus_stats_paths(&pa, pooling, workers)?;
    let sb = corpus_stats_paths(&pb, pooling, workers)?;
    let mut r = Report::default();
    r.push("images", a, "", pa.len() as f64);
    r.push("images", b, "", pb.len() as f64);
    for (name, s) in [(a, &sa), (b, &sb)] {
        for c in 0..3 {
            r.push("mean", name, &format!("c{c}"), s.mean[c]);
        }
        r.push("cov_trace", name, "", (0..3).map(|c| s.cov[c][c]).sum());
    }
    r.push("domain_gap", a, b, domain_gap(&sa, &sb)?);
    Ok(r)
}
