//! Match files: `<source-id>\t<rank>\t<style-id>\t<distance|NA>\t<mode>` per
//! line, ranks starting at 1, LF endings.

use std::io::{BufRead, Write};

use super::{MatchMode, MatchSet, StyleMatch};

#[derive(Debug, thiserror::Error)]
pub enum MatchFileError {
    #[error("line {line}: {reason}")]
    Parse { line: usize, reason: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub fn write<W: Write>(out: &mut W, sets: &[MatchSet]) -> std::io::Result<()> {
    for set in sets {
        for (rank, m) in set.matches.iter().enumerate() {
            let dist = m
                .distance
                .map_or_else(|| "NA".to_string(), |d| d.to_string());
            writeln!(
                out,
                "{}\t{}\t{}\t{}\t{}",
                set.source_id,
                rank + 1,
                m.style_id,
                dist,
                set.mode
            )?;
        }
    }
    Ok(())
}

pub fn to_string(sets: &[MatchSet]) -> String {
    let mut buf = Vec::new();
    write(&mut buf, sets).expect("writing to a Vec cannot fail");
    String::from_utf8(buf).expect("match file is utf-8")
}

/// Parses a match file. Consecutive lines with the same source id form one
/// [`MatchSet`]; its `k` is the number of lines read for it.
pub fn read<R: BufRead>(input: R) -> Result<Vec<MatchSet>, MatchFileError> {
    let mut sets: Vec<MatchSet> = Vec::new();
    for (i, line) in input.lines().enumerate() {
        let line = line?;
        if line.is_empty() {
            continue;
        }
        let err = |reason: &str| MatchFileError::Parse {
            line: i + 1,
            reason: reason.to_string(),
        };
        let fields: Vec<&str> = line.split('\t').collect();
        let [source, rank, style, dist, mode] = fields[..] else {
            return Err(err("expected 5 tab-separated fields"));
        };
        let rank: usize = rank.parse().map_err(|_| err("bad rank"))?;
        let distance = match dist {
            "NA" => None,
            d => Some(
                d.parse::<u32>()
                    .ok()
                    .filter(|&d| d <= 64)
                    .ok_or_else(|| err("bad distance"))?,
            ),
        };
        let mode: MatchMode = mode.parse().map_err(|e: String| err(&e))?;
        let new_group = sets.last().is_none_or(|s| s.source_id != source);
        if new_group {
            sets.push(MatchSet {
                source_id: source.to_string(),
                mode,
                k: 0,
                matches: Vec::new(),
            });
        }
        let set = sets.last_mut().expect("group exists");
        if set.mode != mode {
            return Err(err("mode changes within one source"));
        }
        if rank != set.matches.len() + 1 {
            return Err(err("ranks must be consecutive from 1"));
        }
        set.matches.push(StyleMatch {
            style_id: style.to_string(),
            distance,
        });
        set.k = set.matches.len();
    }
    Ok(sets)
}

pub fn read_path(path: &std::path::Path) -> Result<Vec<MatchSet>, MatchFileError> {
    let f = std::fs::File::open(path)?;
    read(std::io::BufReader::new(f))
}
