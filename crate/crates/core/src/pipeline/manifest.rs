//! JSON-lines dataset manifest.
//!
//! The first line is a header, `{"format":"restyle-manifest","version":1}`.
//! Every following line is one record tagged by `"record"`: a `sample` or a
//! `skip` (an input that was excluded, with the reason).

use std::collections::HashSet;
use std::fmt;
use std::io::BufRead;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::restyle::Backend;

pub const MANIFEST_FORMAT: &str = "restyle-manifest";
pub const MANIFEST_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum ManifestError {
    #[error("missing or invalid manifest header")]
    Header,
    #[error("unsupported manifest version {0}")]
    Version(u32),
    #[error("line {line}: {reason}")]
    Parse { line: usize, reason: String },
    #[error("duplicate sample id '{0}'")]
    DuplicateId(String),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Role {
    Source,
    Style,
    Restyled,
}

impl Role {
    /// Prefix that namespaces sample ids of this role in a merged manifest.
    pub fn prefix(self) -> &'static str {
        match self {
            Role::Source => "source",
            Role::Style => "style",
            Role::Restyled => "restyled",
        }
    }
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.prefix())
    }
}

/// Where a restyled sample came from.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SampleProvenance {
    pub content_id: String,
    pub style_id: String,
    pub backend: Backend,
    /// 1-based position of the style in the source's match list.
    pub rank: usize,
    /// Digest of everything the output depends on; drives resumption.
    pub digest: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sample {
    pub id: String,
    pub path: String,
    pub role: Role,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label_path: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub provenance: Option<SampleProvenance>,
}

/// Processing stage at which an input was dropped.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Phase {
    Ingest,
    Hash,
    Restyle,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SkipRecord {
    pub id: String,
    pub path: String,
    pub role: Role,
    pub phase: Phase,
    pub reason: String,
}

impl SkipRecord {
    /// Ingest skips filter out non-image files; later phases are failures.
    pub fn is_failure(&self) -> bool {
        self.phase != Phase::Ingest
    }
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "record", rename_all = "lowercase")]
enum Record {
    Sample(Sample),
    Skip(SkipRecord),
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Header {
    format: String,
    version: u32,
}

/// Ordered samples plus skipped inputs.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Manifest {
    pub samples: Vec<Sample>,
    pub skipped: Vec<SkipRecord>,
}

impl Manifest {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn get(&self, id: &str) -> Option<&Sample> {
        self.samples.iter().find(|s| s.id == id)
    }

    pub fn with_role(&self, role: Role) -> impl Iterator<Item = &Sample> {
        self.samples.iter().filter(move |s| s.role == role)
    }

    /// The enriched training set: sources and their restyled versions.
    pub fn enriched(&self) -> impl Iterator<Item = &Sample> {
        self.samples.iter().filter(|s| s.role != Role::Style)
    }

    pub fn failures(&self) -> impl Iterator<Item = &SkipRecord> {
        self.skipped.iter().filter(|s| s.is_failure())
    }

    pub fn check_unique_ids(&self) -> Result<(), ManifestError> {
        let mut seen = HashSet::new();
        for s in &self.samples {
            if !seen.insert(s.id.as_str()) {
                return Err(ManifestError::DuplicateId(s.id.clone()));
            }
        }
        Ok(())
    }

    pub fn to_jsonl(&self) -> String {
        let header = Header {
            format: MANIFEST_FORMAT.into(),
            version: MANIFEST_VERSION,
        };
        let mut out = serde_json::to_string(&header).expect("header serializes");
        out.push('\n');
        let records = self
            .samples
            .iter()
            .cloned()
            .map(Record::Sample)
            .chain(self.skipped.iter().cloned().map(Record::Skip));
        for r in records {
            out.push_str(&serde_json::to_string(&r).expect("record serializes"));
            out.push('\n');
        }
        out
    }

    pub fn read<R: BufRead>(input: R) -> Result<Self, ManifestError> {
        let mut lines = input.lines().enumerate();
        let header: Header = match lines.next() {
            Some((_, Ok(line))) => serde_json::from_str(&line).map_err(|_| ManifestError::Header)?,
            Some((_, Err(source))) => {
                return Err(ManifestError::Io {
                    path: "<input>".into(),
                    source,
                })
            }
            None => return Err(ManifestError::Header),
        };
        if header.format != MANIFEST_FORMAT {
            return Err(ManifestError::Header);
        }
        if header.version != MANIFEST_VERSION {
            return Err(ManifestError::Version(header.version));
        }
        let mut m = Manifest::default();
        for (i, line) in lines {
            let line = line.map_err(|source| ManifestError::Io {
                path: "<input>".into(),
                source,
            })?;
            if line.is_empty() {
                continue;
            }
            let record: Record = serde_json::from_str(&line).map_err(|e| ManifestError::Parse {
                line: i + 1,
                reason: e.to_string(),
            })?;
            match record {
                Record::Sample(s) => m.samples.push(s),
                Record::Skip(s) => m.skipped.push(s),
            }
        }
        m.check_unique_ids()?;
        Ok(m)
    }

    pub fn read_path(path: &Path) -> Result<Self, ManifestError> {
        let file = std::fs::File::open(path).map_err(|source| ManifestError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::read(std::io::BufReader::new(file))
    }
}

/// Resolves a manifest path; relative entries are relative to the manifest's directory.
pub fn resolve(manifest_dir: &Path, path: &str) -> PathBuf {
    let p = Path::new(path);
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        manifest_dir.join(p)
    }
}
