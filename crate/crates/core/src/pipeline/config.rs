use std::path::{Path, PathBuf};

use serde::Deserialize;

use super::PipelineError;
use crate::imgcore::OutputFormat;
use crate::matcher::{MatchMode, DEFAULT_K};
use crate::restyle::RestyleConfig;

/// Everything a pipeline run depends on.
///
/// Loaded from TOML; relative directories are resolved against the config
/// file's directory.
///
/// ```toml
/// source_dir = "gta/images"
/// style_dir = "cityscapes/images"
/// out_dir = "enriched"
/// label_dir = "gta/labels"  # optional
/// mode = "ph"               # or "rs"
/// k = 5
/// seed = 0
/// workers = 8
/// output_format = "png"     # or "jpeg" (with jpeg_quality)
/// metrics = true
///
/// [restyle]
/// backend = "freq"
/// ```
#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    pub source_dir: PathBuf,
    pub style_dir: PathBuf,
    pub out_dir: PathBuf,
    pub label_dir: Option<PathBuf>,
    pub mode: MatchMode,
    pub k: usize,
    pub seed: u64,
    pub workers: usize,
    pub output_format: OutputFormat,
    pub metrics: bool,
    pub restyle: RestyleConfig,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    source_dir: PathBuf,
    style_dir: PathBuf,
    out_dir: PathBuf,
    label_dir: Option<PathBuf>,
    mode: Option<MatchMode>,
    k: Option<usize>,
    seed: Option<u64>,
    workers: Option<usize>,
    output_format: Option<String>,
    jpeg_quality: Option<u8>,
    metrics: Option<bool>,
    #[serde(default)]
    restyle: RestyleConfig,
}

pub fn default_workers() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

impl PipelineConfig {
    /// Config with defaults for everything except the three directories.
    pub fn new(source_dir: impl Into<PathBuf>, style_dir: impl Into<PathBuf>, out_dir: impl Into<PathBuf>) -> Self {
        Self {
            source_dir: source_dir.into(),
            style_dir: style_dir.into(),
            out_dir: out_dir.into(),
            label_dir: None,
            mode: MatchMode::Ph,
            k: DEFAULT_K,
            seed: 0,
            workers: default_workers(),
            output_format: OutputFormat::Png,
            metrics: true,
            restyle: RestyleConfig::default(),
        }
    }

    pub fn from_toml(text: &str, base_dir: &Path) -> Result<Self, PipelineError> {
        let raw: RawConfig = toml::from_str(text).map_err(|e| PipelineError::Config(e.message().to_string()))?;
        let resolve = |p: PathBuf| if p.is_absolute() { p } else { base_dir.join(p) };
        let output_format = match raw.output_format.as_deref() {
            None => OutputFormat::Png,
            Some(s) => s.parse().map_err(PipelineError::Config)?,
        };
        let output_format = match (output_format, raw.jpeg_quality) {
            (OutputFormat::Jpeg { .. }, Some(q)) => OutputFormat::Jpeg { quality: q },
            (OutputFormat::Png, Some(_)) => {
                return Err(PipelineError::Config("jpeg_quality requires output_format = \"jpeg\"".into()))
            }
            (f, None) => f,
        };
        let mut cfg = Self::new(resolve(raw.source_dir), resolve(raw.style_dir), resolve(raw.out_dir));
        cfg.label_dir = raw.label_dir.map(resolve);
        cfg.mode = raw.mode.unwrap_or(MatchMode::Ph);
        cfg.k = raw.k.unwrap_or(DEFAULT_K);
        cfg.seed = raw.seed.unwrap_or(0);
        cfg.workers = raw.workers.unwrap_or_else(default_workers);
        cfg.output_format = output_format;
        cfg.metrics = raw.metrics.unwrap_or(true);
        cfg.restyle = raw.restyle;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, PipelineError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| PipelineError::Config(format!("cannot read {}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new("."));
        Self::from_toml(&text, base)
    }

    /// Value checks that need no filesystem access.
    pub fn validate(&self) -> Result<(), PipelineError> {
        if self.k < 1 {
            return Err(PipelineError::Config("k must be >= 1".into()));
        }
        if self.workers < 1 {
            return Err(PipelineError::Config("workers must be >= 1".into()));
        }
        if let OutputFormat::Jpeg { quality } = self.output_format {
            if !(1..=100).contains(&quality) {
                return Err(PipelineError::Config(format!("jpeg_quality must be in 1..=100, got {quality}")));
            }
        }
        self.restyle
            .validate()
            .map_err(|e| PipelineError::Config(e.to_string()))
    }

    /// Identifies the output encoding inside restyle digests.
    pub(crate) fn format_tag(&self) -> String {
        match self.output_format {
            OutputFormat::Png => "png".into(),
            OutputFormat::Jpeg { quality } => format!("jpeg-q{quality}"),
        }
    }
}
