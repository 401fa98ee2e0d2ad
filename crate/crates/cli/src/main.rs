//! `datarestyle` command-line interface. Every verb is a thin wrapper over
//! the library; progress goes to stderr, data to files or stdout.
//!
//! Exit codes: 0 success, 1 bad arguments, configuration or any error that
//! stops the command, 2 completed with failures (or a failed verification).

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use log::{info, warn};

use datarestyle::bench::{run_bench, BenchConfig};
use datarestyle::imgcore::{save, OutputFormat};
use datarestyle::matcher::{build_index, match_corpus, matchfile, MatchMode, DEFAULT_K};
use datarestyle::metrics::Pooling;
use datarestyle::phash::hashfile;
use datarestyle::pipeline::{
    self, compare_subsets, default_workers, hash_directory, verify, PipelineConfig,
};
use datarestyle::restyle::{restyle_one, Backend, RestyleConfig};

#[derive(Parser)]
#[command(name = "datarestyle", version, about = "Perceptual-hash matched dataset restyling")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Ph,
    Rs,
}

impl From<ModeArg> for MatchMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Ph => MatchMode::Ph,
            ModeArg::Rs => MatchMode::Rs,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum BackendArg {
    Stats,
    Hist,
    Freq,
}

impl From<BackendArg> for Backend {
    fn from(b: BackendArg) -> Self {
        match b {
            BackendArg::Stats => Backend::Stats,
            BackendArg::Hist => Backend::Hist,
            BackendArg::Freq => Backend::Freq,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Png,
    Jpeg,
}

#[derive(Subcommand)]
enum Command {
    /// Hash every image under a directory into a hash file.
    Hash {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = default_workers())]
        workers: usize,
    },
    /// Select styles for each source from two hash files.
    Match {
        #[arg(long)]
        source_hashes: PathBuf,
        #[arg(long)]
        style_hashes: PathBuf,
        #[arg(long, value_enum, default_value = "ph")]
        mode: ModeArg,
        #[arg(long, default_value_t = DEFAULT_K)]
        k: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = default_workers())]
        workers: usize,
    },
    /// Restyle one content image with one style image.
    Restyle {
        #[arg(long)]
        content: PathBuf,
        #[arg(long)]
        style: PathBuf,
        #[arg(long, value_enum, default_value = "stats")]
        backend: BackendArg,
        /// Re-impose content luminance detail (STATS and HIST).
        #[arg(long)]
        detail_preserve: bool,
        #[arg(long)]
        lowpass_radius: Option<usize>,
        /// Output image; `.jpg`/`.jpeg` selects JPEG, anything else PNG.
        #[arg(long)]
        out: PathBuf,
    },
    /// Run the full pipeline from a TOML config.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        source_dir: Option<PathBuf>,
        #[arg(long)]
        style_dir: Option<PathBuf>,
        #[arg(long)]
        out_dir: Option<PathBuf>,
        #[arg(long)]
        label_dir: Option<PathBuf>,
        #[arg(long, value_enum)]
        mode: Option<ModeArg>,
        #[arg(long)]
        k: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        workers: Option<usize>,
        #[arg(long, value_enum)]
        backend: Option<BackendArg>,
        #[arg(long, value_enum)]
        output_format: Option<FormatArg>,
        /// Skip the domain-gap and structure diagnostics.
        #[arg(long)]
        no_metrics: bool,
    },
    /// Domain statistics and gap between two manifest subsets
    /// (source, style, restyled or z).
    Stats {
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long = "subset", num_args = 1, required = true)]
        subsets: Vec<String>,
        /// Average per-image statistics instead of pooling pixels.
        #[arg(long)]
        per_image: bool,
        /// Print `metric,subset_a,subset_b,value` CSV instead of key-value text.
        #[arg(long)]
        csv: bool,
        #[arg(long, default_value_t = default_workers())]
        workers: usize,
    },
    /// Check a manifest's references, files and provenance.
    Verify {
        #[arg(long)]
        manifest: PathBuf,
    },
    /// Measure hashing and Hamming-scan throughput.
    Bench {
        #[arg(long, default_value_t = 64)]
        images: usize,
        #[arg(long, default_value_t = 100_000)]
        index_size: usize,
        #[arg(long, default_value_t = 400)]
        queries: usize,
        #[arg(long, default_value_t = default_workers())]
        workers: usize,
    },
}

enum Status {
    Ok,
    Failures,
}

fn format_for(path: &Path) -> OutputFormat {
    match path.extension().and_then(|e| e.to_str()).map(str::to_ascii_lowercase).as_deref() {
        Some("jpg" | "jpeg") => OutputFormat::Jpeg { quality: 90 },
        _ => OutputFormat::Png,
    }
}

fn hash(input: &Path, out: &Path, workers: usize) -> Result<Status> {
    let (entries, skipped) = hash_directory(input, workers)?;
    let text = hashfile::to_string(&entries)?;
    pipeline::write_if_changed(out, text.as_bytes())?;
    info!("hashed {} images into {}", entries.len(), out.display());
    let mut status = Status::Ok;
    for s in &skipped {
        if s.is_failure() {
            warn!("failed {}: {}", s.path, s.reason);
            status = Status::Failures;
        } else {
            info!("skipped {}: {}", s.path, s.reason);
        }
    }
    Ok(status)
}

fn run_pipeline(cfg: PipelineConfig) -> Result<Status> {
    cfg.validate()?;
    let summary = pipeline::run(&cfg)?;
    print!("{}", summary.report.to_text());
    let failures = summary.failures();
    for f in &failures {
        warn!("failed {} ({:?}): {}", f.id, f.phase, f.reason);
    }
    info!(
        "|Z| = {} ({} restyled written, {} reused, {} failures)",
        summary.enriched_len(),
        summary.generated,
        summary.reused,
        failures.len()
    );
    Ok(if failures.is_empty() { Status::Ok } else { Status::Failures })
}

fn execute(cmd: Command) -> Result<Status> {
    match cmd {
        Command::Hash { input, out, workers } => hash(&input, &out, workers),
        Command::Match {
            source_hashes,
            style_hashes,
            mode,
            k,
            seed,
            out,
            workers,
        } => {
            let sources = hashfile::read_path(&source_hashes)
                .with_context(|| format!("reading {}", source_hashes.display()))?;
            let styles = hashfile::read_path(&style_hashes)
                .with_context(|| format!("reading {}", style_hashes.display()))?;
            let index = build_index(styles)?;
            let sets = match_corpus(&sources, &index, mode.into(), k, seed, workers)?;
            pipeline::write_if_changed(&out, matchfile::to_string(&sets).as_bytes())?;
            info!("wrote {} match sets to {}", sets.len(), out.display());
            Ok(Status::Ok)
        }
        Command::Restyle {
            content,
            style,
            backend,
            detail_preserve,
            lowpass_radius,
            out,
        } => {
            let mut cfg = RestyleConfig::with_backend(backend.into());
            cfg.detail_preserve = detail_preserve;
            if let Some(r) = lowpass_radius {
                cfg.lowpass_radius = r;
            }
            let (img, prov) = restyle_one(&content, &style, &cfg)?;
            save(&img, &out, format_for(&out))?;
            info!("{} + {} -> {} ({})", prov.content_id, prov.style_id, out.display(), prov.backend);
            Ok(Status::Ok)
        }
        Command::Run {
            config,
            source_dir,
            style_dir,
            out_dir,
            label_dir,
            mode,
            k,
            seed,
            workers,
            backend,
            output_format,
            no_metrics,
        } => {
            let mut cfg = PipelineConfig::load(&config)?;
            if let Some(d) = source_dir {
                cfg.source_dir = d;
            }
            if let Some(d) = style_dir {
                cfg.style_dir = d;
            }
            if let Some(d) = out_dir {
                cfg.out_dir = d;
            }
            if let Some(d) = label_dir {
                cfg.label_dir = Some(d);
            }
            if let Some(m) = mode {
                cfg.mode = m.into();
            }
            if let Some(k) = k {
                cfg.k = k;
            }
            if let Some(s) = seed {
                cfg.seed = s;
            }
            if let Some(w) = workers {
                cfg.workers = w;
            }
            if let Some(b) = backend {
                cfg.restyle.backend = b.into();
            }
            match output_format {
                Some(FormatArg::Png) => cfg.output_format = OutputFormat::Png,
                Some(FormatArg::Jpeg) if !matches!(cfg.output_format, OutputFormat::Jpeg { .. }) => {
                    cfg.output_format = OutputFormat::Jpeg { quality: 90 }
                }
                _ => {}
            }
            if no_metrics {
                cfg.metrics = false;
            }
            run_pipeline(cfg)
        }
        Command::Stats {
            manifest,
            subsets,
            per_image,
            csv,
            workers,
        } => {
            if subsets.len() != 2 {
                bail!("stats needs exactly two --subset values, got {}", subsets.len());
            }
            let pooling = if per_image { Pooling::PerImage } else { Pooling::Pooled };
            let report = compare_subsets(&manifest, &subsets[0], &subsets[1], pooling, workers)?;
            print!("{}", if csv { report.to_csv() } else { report.to_text() });
            Ok(Status::Ok)
        }
        Command::Verify { manifest } => {
            let report = verify(&manifest);
            print!("{}", report.to_text());
            Ok(if report.passed() { Status::Ok } else { Status::Failures })
        }
        Command::Bench {
            images,
            index_size,
            queries,
            workers,
        } => {
            let cfg = BenchConfig {
                images,
                index_size,
                queries,
                workers,
                ..BenchConfig::default()
            };
            print!("{}", run_bench(&cfg)?.to_text());
            Ok(Status::Ok)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info"))
        .format_timestamp(None)
        .init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match execute(cli.command) {
        Ok(Status::Ok) => ExitCode::SUCCESS,
        Ok(Status::Failures) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
