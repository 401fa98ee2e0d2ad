//! Corpus hash files: one `<sample-id>\t<hex-hash>` line per sample, LF endings.

use std::io::{BufRead, Write};

use super::PerceptualHash;

#[derive(Debug, thiserror::Error)]
pub enum HashFileError {
    #[error("line {line}: {reason}")]
    Parse { line: usize, reason: String },
    #[error("sample id {0:?} contains a tab or newline")]
    InvalidId(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub fn write<W: Write>(out: &mut W, entries: &[(String, PerceptualHash)]) -> Result<(), HashFileError> {
    for (id, hash) in entries {
        if id.contains(['\t', '\n', '\r']) {
            return Err(HashFileError::InvalidId(id.clone()));
        }
        writeln!(out, "{id}\t{hash}")?;
    }
    Ok(())
}

pub fn to_string(entries: &[(String, PerceptualHash)]) -> Result<String, HashFileError> {
    let mut buf = Vec::new();
    write(&mut buf, entries)?;
    Ok(String::from_utf8(buf).expect("ids and hex are utf-8"))
}

pub fn read<R: BufRead>(input: R) -> Result<Vec<(String, PerceptualHash)>, HashFileError> {
    let mut out = Vec::new();
    for (i, line) in input.lines().enumerate() {
        let line = line?;
        if line.is_empty() {
            continue;
        }
        let parse_err = |reason: String| HashFileError::Parse { line: i + 1, reason };
        let (id, hex) = line
            .split_once('\t')
            .ok_or_else(|| parse_err("missing tab separator".into()))?;
        let hash = hex.parse().map_err(|e: super::PhashError| parse_err(e.to_string()))?;
        out.push((id.to_string(), hash));
    }
    Ok(out)
}

pub fn read_path(path: &std::path::Path) -> Result<Vec<(String, PerceptualHash)>, HashFileError> {
    let f = std::fs::File::open(path)?;
    read(std::io::BufReader::new(f))
}
