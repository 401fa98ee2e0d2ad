use std::collections::HashMap;
use std::path::{Path, PathBuf};

use log::{info, warn};
use rayon::prelude::*;
use sha2::{Digest, Sha256};

use super::config::PipelineConfig;
use super::ingest::{ingest, LabelIndex};
use super::manifest::{resolve, Manifest, Phase, Role, Sample, SampleProvenance, SkipRecord};
use super::{write_if_changed, PipelineError};
use crate::imgcore::{decode, load, save, to_rgb, ImageBuffer};
use crate::matcher::{build_index, match_corpus, matchfile, worker_pool, HashIndex, MatchSet};
use crate::metrics::{
    corpus_stats_paths, domain_gap, match_quality_report, structure_preservation, Pooling, Report,
};
use crate::phash::{compute_hash, hashfile, PerceptualHash};
use crate::restyle::restyle;

pub const SOURCE_HASHES: &str = "source.hashes";
pub const STYLE_HASHES: &str = "style.hashes";
pub const MATCHES: &str = "matches.tsv";
pub const MANIFEST: &str = "manifest.jsonl";
pub const REPORT_TEXT: &str = "report.txt";
pub const REPORT_CSV: &str = "metrics.csv";
pub const RESTYLED_DIR: &str = "restyled";

/// Result of a completed run. Individual failures are in `manifest.skipped`.
#[derive(Debug, Clone)]
pub struct RunSummary {
    pub manifest: Manifest,
    pub report: Report,
    /// Restyled outputs written by this run.
    pub generated: usize,
    /// Restyled outputs kept from a previous run with a matching digest.
    pub reused: usize,
}

impl RunSummary {
    pub fn failures(&self) -> Vec<&SkipRecord> {
        self.manifest.failures().collect()
    }

    /// Size of the enriched set (sources plus restyled samples).
    pub fn enriched_len(&self) -> usize {
        self.manifest.enriched().count()
    }
}

struct Hashed {
    id: String,
    path: PathBuf,
    hash: PerceptualHash,
    file_digest: String,
}

fn absolute(p: &Path) -> PathBuf {
    p.canonicalize()
        .or_else(|_| std::path::absolute(p))
        .unwrap_or_else(|_| p.to_path_buf())
}

fn check_layout(cfg: &PipelineConfig) -> Result<(), PipelineError> {
    let mut inputs = vec![&cfg.source_dir, &cfg.style_dir];
    inputs.extend(cfg.label_dir.as_ref());
    for dir in &inputs {
        if !dir.is_dir() {
            return Err(PipelineError::MissingDir(dir.to_path_buf()));
        }
    }
    let out = absolute(&cfg.out_dir);
    for dir in inputs {
        let input = absolute(dir);
        if out.starts_with(&input) || input.starts_with(&out) {
            return Err(PipelineError::Overlap {
                input: dir.clone(),
                out: cfg.out_dir.clone(),
            });
        }
    }
    Ok(())
}

fn hash_sample(s: &Sample) -> Result<Hashed, String> {
    let path = PathBuf::from(&s.path);
    let bytes = std::fs::read(&path).map_err(|e| format!("unreadable: {e}"))?;
    let img = decode(&bytes).map_err(|e| e.to_string())?;
    let hash = compute_hash(&img).map_err(|e| e.to_string())?;
    Ok(Hashed {
        id: s.id.clone(),
        path,
        hash,
        file_digest: hex::encode(Sha256::digest(&bytes)),
    })
}

fn hash_corpus(m: &Manifest, pool: &rayon::ThreadPool) -> (Vec<Hashed>, Vec<SkipRecord>) {
    let results: Vec<Result<Hashed, String>> = pool.install(|| m.samples.par_iter().map(hash_sample).collect());
    let mut ok = Vec::new();
    let mut failed = Vec::new();
    for (s, r) in m.samples.iter().zip(results) {
        match r {
            Ok(h) => ok.push(h),
            Err(reason) => failed.push(SkipRecord {
                id: s.id.clone(),
                path: s.path.clone(),
                role: s.role,
                phase: Phase::Hash,
                reason,
            }),
        }
    }
    (ok, failed)
}

/// Hashes of a directory's images plus the inputs that were skipped.
pub type HashedDirectory = (Vec<(String, PerceptualHash)>, Vec<SkipRecord>);

/// Hashes every image under `dir`, in ingest order. Ingest skips and decode
/// failures are returned alongside the hashes.
pub fn hash_directory(dir: &Path, workers: usize) -> Result<HashedDirectory, PipelineError> {
    let pool = worker_pool(workers)?;
    let m = ingest(dir, Role::Source)?;
    let (ok, failed) = hash_corpus(&m, &pool);
    let mut skipped = m.skipped;
    skipped.extend(failed);
    Ok((hash_entries(&ok), skipped))
}

fn z_id(role: Role, id: &str) -> String {
    format!("{}/{id}", role.prefix())
}

fn output_digest(cfg: &PipelineConfig, content: &Hashed, style: &Hashed, rank: usize) -> String {
    let mut h = Sha256::new();
    h.update(format!(
        "restyle:{}\nformat:{}\ncontent:{}:{}\nstyle:{}:{}\nrank:{rank}\n",
        cfg.restyle.digest(),
        cfg.format_tag(),
        content.id,
        content.file_digest,
        style.id,
        style.file_digest,
    ));
    hex::encode(h.finalize())
}

struct RestyleTask<'a> {
    cfg: &'a PipelineConfig,
    styles: &'a HashMap<&'a str, &'a Hashed>,
    prior: &'a HashMap<String, String>,
}

enum Outcome {
    Made(Sample),
    Reused(Sample),
    Failed(SkipRecord),
}

impl RestyleTask<'_> {
    fn source(&self, src: &Hashed, label: Option<&str>, set: &MatchSet) -> Vec<Outcome> {
        let mut content: Option<Result<ImageBuffer, String>> = None;
        let ext = self.cfg.output_format.extension();
        let mut out = Vec::with_capacity(set.matches.len());
        for (i, m) in set.matches.iter().enumerate() {
            let rank = i + 1;
            let rel = format!("{RESTYLED_DIR}/{}__k{rank}.{ext}", src.id);
            let style = self.styles[m.style_id.as_str()];
            let digest = output_digest(self.cfg, src, style, rank);
            let sample = Sample {
                id: rel.clone(),
                path: rel.clone(),
                role: Role::Restyled,
                label_path: label.map(str::to_string),
                provenance: Some(SampleProvenance {
                    content_id: z_id(Role::Source, &src.id),
                    style_id: z_id(Role::Style, &style.id),
                    backend: self.cfg.restyle.backend,
                    rank,
                    digest: digest.clone(),
                }),
            };
            let target = self.cfg.out_dir.join(&rel);
            if self.prior.get(&rel) == Some(&digest) && target.is_file() {
                out.push(Outcome::Reused(sample));
                continue;
            }
            let c = content.get_or_insert_with(|| {
                load(&src.path)
                    .and_then(|i| to_rgb(&i))
                    .map_err(|e| format!("content: {e}"))
            });
            let made = c.as_ref().map_err(String::clone).and_then(|c| {
                let s = load(&style.path)
                    .and_then(|i| to_rgb(&i))
                    .map_err(|e| format!("style: {e}"))?;
                let img = restyle(c, &s, &self.cfg.restyle).map_err(|e| e.to_string())?;
                save(&img, &target, self.cfg.output_format).map_err(|e| e.to_string())
            });
            out.push(match made {
                Ok(()) => Outcome::Made(sample),
                Err(reason) => Outcome::Failed(SkipRecord {
                    id: rel,
                    path: target.display().to_string(),
                    role: Role::Restyled,
                    phase: Phase::Restyle,
                    reason,
                }),
            });
        }
        out
    }
}

fn prior_digests(path: &Path) -> HashMap<String, String> {
    if !path.is_file() {
        return HashMap::new();
    }
    match Manifest::read_path(path) {
        Ok(m) => m
            .samples
            .into_iter()
            .filter_map(|s| s.provenance.map(|p| (s.id, p.digest)))
            .collect(),
        Err(e) => {
            warn!("ignoring unreadable previous manifest {}: {e}", path.display());
            HashMap::new()
        }
    }
}

fn hash_entries(h: &[Hashed]) -> Vec<(String, PerceptualHash)> {
    h.iter().map(|h| (h.id.clone(), h.hash)).collect()
}

/// Ingest, hash, match, restyle and merge, writing every artifact under `out_dir`.
///
/// Per-sample decode or restyle failures are recorded in the manifest and
/// never abort the run. Outputs whose digest matches the previous manifest
/// and whose file still exists are not regenerated.
pub fn run(cfg: &PipelineConfig) -> Result<RunSummary, PipelineError> {
    cfg.validate()?;
    check_layout(cfg)?;
    let pool = worker_pool(cfg.workers)?;
    let labels = cfg
        .label_dir
        .as_deref()
        .map(|d| LabelIndex::build(&absolute(d)))
        .transpose()?;

    // absolute input paths keep the manifest valid from any working directory
    let sources = ingest(&absolute(&cfg.source_dir), Role::Source)?;
    let styles = ingest(&absolute(&cfg.style_dir), Role::Style)?;
    info!("ingested {} sources, {} styles", sources.len(), styles.len());

    let (src_hashed, src_failed) = hash_corpus(&sources, &pool);
    let (sty_hashed, sty_failed) = hash_corpus(&styles, &pool);
    info!("hashed {} sources, {} styles", src_hashed.len(), sty_hashed.len());
    if sty_hashed.is_empty() && !src_hashed.is_empty() {
        return Err(PipelineError::NoStyles);
    }
    if sty_hashed.len() < cfg.k {
        warn!("only {} styles available for k = {}; using all of them", sty_hashed.len(), cfg.k);
    }

    std::fs::create_dir_all(&cfg.out_dir).map_err(|source| PipelineError::Io {
        path: cfg.out_dir.display().to_string(),
        source,
    })?;
    let src_entries = hash_entries(&src_hashed);
    let sty_entries = hash_entries(&sty_hashed);
    write_if_changed(&cfg.out_dir.join(SOURCE_HASHES), hashfile::to_string(&src_entries)?.as_bytes())?;
    write_if_changed(&cfg.out_dir.join(STYLE_HASHES), hashfile::to_string(&sty_entries)?.as_bytes())?;

    let index: HashIndex = build_index(sty_entries.iter().cloned())?;
    let sets = if src_entries.is_empty() {
        Vec::new()
    } else {
        match_corpus(&src_entries, &index, cfg.mode, cfg.k, cfg.seed, cfg.workers)?
    };
    write_if_changed(&cfg.out_dir.join(MATCHES), matchfile::to_string(&sets).as_bytes())?;
    info!("matched {} sources ({} mode, k = {})", sets.len(), cfg.mode, cfg.k);

    let manifest_path = cfg.out_dir.join(MANIFEST);
    let prior = prior_digests(&manifest_path);
    let style_map: HashMap<&str, &Hashed> = sty_hashed.iter().map(|h| (h.id.as_str(), h)).collect();
    let source_labels: Vec<Option<String>> = src_hashed
        .iter()
        .map(|h| {
            labels
                .as_ref()
                .and_then(|l| l.lookup(&h.id))
                .map(|p| p.display().to_string())
        })
        .collect();
    let task = RestyleTask {
        cfg,
        styles: &style_map,
        prior: &prior,
    };
    let outcomes: Vec<Vec<Outcome>> = pool.install(|| {
        src_hashed
            .par_iter()
            .zip(&source_labels)
            .zip(&sets)
            .map(|((src, label), set)| task.source(src, label.as_deref(), set))
            .collect()
    });

    let mut manifest = Manifest::default();
    for (h, label) in src_hashed.iter().zip(&source_labels) {
        manifest.samples.push(Sample {
            id: z_id(Role::Source, &h.id),
            path: h.path.display().to_string(),
            role: Role::Source,
            label_path: label.clone(),
            provenance: None,
        });
    }
    for h in &sty_hashed {
        manifest.samples.push(Sample {
            id: z_id(Role::Style, &h.id),
            path: h.path.display().to_string(),
            role: Role::Style,
            label_path: None,
            provenance: None,
        });
    }
    let (mut generated, mut reused) = (0, 0);
    let mut restyle_failed = Vec::new();
    for o in outcomes.into_iter().flatten() {
        match o {
            Outcome::Made(s) => {
                generated += 1;
                manifest.samples.push(s);
            }
            Outcome::Reused(s) => {
                reused += 1;
                manifest.samples.push(s);
            }
            Outcome::Failed(f) => restyle_failed.push(f),
        }
    }
    for (role, skips) in [(Role::Source, sources.skipped), (Role::Style, styles.skipped)] {
        manifest.skipped.extend(skips.into_iter().map(|mut s| {
            s.id = z_id(role, &s.id);
            s
        }));
    }
    for mut f in src_failed.into_iter().chain(sty_failed) {
        f.id = z_id(f.role, &f.id);
        manifest.skipped.push(f);
    }
    manifest.skipped.extend(restyle_failed);
    manifest.check_unique_ids()?;
    write_if_changed(&manifest_path, manifest.to_jsonl().as_bytes())?;
    info!("restyled: {generated} written, {reused} reused; |Z| = {}", manifest.enriched().count());

    let mut report = count_report(&manifest);
    if cfg.metrics {
        report.extend(metrics_report(cfg, &manifest, &sets, &src_entries, &index, &pool)?);
    }
    write_if_changed(&cfg.out_dir.join(REPORT_TEXT), report.to_text().as_bytes())?;
    write_if_changed(&cfg.out_dir.join(REPORT_CSV), report.to_csv().as_bytes())?;
    Ok(RunSummary {
        manifest,
        report,
        generated,
        reused,
    })
}

fn count_report(m: &Manifest) -> Report {
    let mut r = Report::default();
    for role in [Role::Source, Role::Style, Role::Restyled] {
        r.push("samples", role.prefix(), "", m.with_role(role).count() as f64);
    }
    r.push("samples", "z", "", m.enriched().count() as f64);
    r.push("skipped_inputs", "ingest", "", m.skipped.iter().filter(|s| !s.is_failure()).count() as f64);
    r.push("failures", "all", "", m.failures().count() as f64);
    r
}

fn metrics_report(
    cfg: &PipelineConfig,
    m: &Manifest,
    sets: &[MatchSet],
    sources: &[(String, PerceptualHash)],
    index: &HashIndex,
    pool: &rayon::ThreadPool,
) -> Result<Report, PipelineError> {
    let mut r = match_quality_report(sets, sources, index)?.to_report();
    let paths = |roles: &[Role]| -> Vec<PathBuf> {
        m.samples
            .iter()
            .filter(|s| roles.contains(&s.role))
            .map(|s| resolve(&cfg.out_dir, &s.path))
            .collect()
    };
    let style_paths = paths(&[Role::Style]);
    if style_paths.is_empty() {
        return Ok(r);
    }
    let style = corpus_stats_paths(&style_paths, Pooling::Pooled, cfg.workers)?;
    for (name, roles) in [
        ("source", &[Role::Source][..]),
        ("restyled", &[Role::Restyled][..]),
        ("z", &[Role::Source, Role::Restyled][..]),
    ] {
        let p = paths(roles);
        if p.is_empty() {
            continue;
        }
        let stats = corpus_stats_paths(&p, Pooling::Pooled, cfg.workers)?;
        r.push("domain_gap", name, "style", domain_gap(&stats, &style)?);
    }

    let pairs: Vec<(PathBuf, PathBuf)> = m
        .with_role(Role::Restyled)
        .filter_map(|s| {
            let content = m.get(&s.provenance.as_ref()?.content_id)?;
            Some((PathBuf::from(&content.path), resolve(&cfg.out_dir, &s.path)))
        })
        .collect();
    if !pairs.is_empty() {
        let scores: Vec<f64> = pool.install(|| {
            pairs
                .par_iter()
                .map(|(c, o)| {
                    let c = load(c)?;
                    let o = load(o)?;
                    Ok::<_, PipelineError>(structure_preservation(&c, &o)?)
                })
                .collect::<Result<_, _>>()
        })?;
        let mean = scores.iter().sum::<f64>() / scores.len() as f64;
        let min = scores.iter().copied().fold(f64::INFINITY, f64::min);
        r.push("structure_preservation_mean", "source", "restyled", mean);
        r.push("structure_preservation_min", "source", "restyled", min);
    }
    Ok(r)
}
