use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::RestyleError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Backend {
    Stats,
    Hist,
    Freq,
}

impl fmt::Display for Backend {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Backend::Stats => "stats",
            Backend::Hist => "hist",
            Backend::Freq => "freq",
        })
    }
}

impl FromStr for Backend {
    type Err = RestyleError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "stats" => Ok(Backend::Stats),
            "hist" => Ok(Backend::Hist),
            "freq" => Ok(Backend::Freq),
            other => Err(RestyleError::Config(format!(
                "unknown backend '{other}' (expected stats, hist or freq)"
            ))),
        }
    }
}

/// Backend selection and its tuning knobs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RestyleConfig {
    pub backend: Backend,
    /// Re-impose content luminance detail after STATS or HIST (FREQ always does).
    pub detail_preserve: bool,
    /// Box-blur radius separating low from high frequencies.
    pub lowpass_radius: usize,
    /// Lower bound on the style/content stddev ratio.
    pub ratio_min: f64,
    /// Upper bound on the style/content stddev ratio.
    pub ratio_max: f64,
}

impl Default for RestyleConfig {
    fn default() -> Self {
        Self {
            backend: Backend::Stats,
            detail_preserve: false,
            lowpass_radius: 8,
            ratio_min: 0.1,
            ratio_max: 10.0,
        }
    }
}

impl RestyleConfig {
    pub fn with_backend(backend: Backend) -> Self {
        Self {
            backend,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<(), RestyleError> {
        if self.lowpass_radius < 1 {
            return Err(RestyleError::Config("lowpass_radius must be >= 1".into()));
        }
        if !(self.ratio_min > 0.0 && self.ratio_min <= self.ratio_max && self.ratio_max.is_finite()) {
            return Err(RestyleError::Config(format!(
                "ratio bounds must satisfy 0 < ratio_min <= ratio_max, got [{}, {}]",
                self.ratio_min, self.ratio_max
            )));
        }
        Ok(())
    }

    /// Parses a TOML table with the fields of this struct.
    pub fn from_toml(text: &str) -> Result<Self, RestyleError> {
        let cfg: Self = toml::from_str(text).map_err(|e| RestyleError::Config(e.message().to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Canonical text form; the digest is taken over this.
    pub fn canonical(&self) -> String {
        format!(
            "backend={};detail_preserve={};lowpass_radius={};ratio_min={:?};ratio_max={:?}",
            self.backend, self.detail_preserve, self.lowpass_radius, self.ratio_min, self.ratio_max
        )
    }

    /// Hex SHA-256 of [`canonical`](Self::canonical).
    pub fn digest(&self) -> String {
        hex::encode(Sha256::digest(self.canonical().as_bytes()))
    }
}
