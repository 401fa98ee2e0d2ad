use std::collections::HashMap;
use std::path::Path;

use rayon::prelude::*;

use super::manifest::{resolve, Manifest, Role, Sample};
use crate::imgcore::load;

/// Problems found in a manifest; empty means it passed.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct VerifyReport {
    pub checked: usize,
    pub problems: Vec<String>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.problems.is_empty()
    }

    pub fn to_text(&self) -> String {
        let mut s = format!(
            "checked = {}\nproblems = {}\nstatus = {}\n",
            self.checked,
            self.problems.len(),
            if self.passed() { "pass" } else { "fail" }
        );
        for p in &self.problems {
            s.push_str("problem: ");
            s.push_str(p);
            s.push('\n');
        }
        s
    }
}

fn check_links(m: &Manifest, s: &Sample, problems: &mut Vec<String>) {
    let by_id: HashMap<&str, &Sample> = m.samples.iter().map(|s| (s.id.as_str(), s)).collect();
    match (s.role, &s.provenance) {
        (Role::Restyled, None) => problems.push(format!("{}: restyled sample has no provenance", s.id)),
        (Role::Restyled, Some(p)) => {
            match by_id.get(p.content_id.as_str()) {
                Some(c) if c.role == Role::Source => {
                    if c.label_path != s.label_path {
                        problems.push(format!("{}: label_path differs from source {}", s.id, c.id));
                    }
                }
                _ => problems.push(format!("{}: content_id {} is not a source sample", s.id, p.content_id)),
            }
            if !matches!(by_id.get(p.style_id.as_str()), Some(t) if t.role == Role::Style) {
                problems.push(format!("{}: style_id {} is not a style sample", s.id, p.style_id));
            }
            if p.rank == 0 {
                problems.push(format!("{}: rank must be >= 1", s.id));
            }
            if p.digest.is_empty() {
                problems.push(format!("{}: empty digest", s.id));
            }
        }
        (_, Some(_)) => problems.push(format!("{}: only restyled samples carry provenance", s.id)),
        (_, None) => {}
    }
}

/// Checks id uniqueness, references, label inheritance, and that every file
/// exists and decodes. Never fails; problems are collected in the report.
pub fn verify(manifest_path: &Path) -> VerifyReport {
    let m = match Manifest::read_path(manifest_path) {
        Ok(m) => m,
        Err(e) => {
            return VerifyReport {
                checked: 0,
                problems: vec![format!("{}: {e}", manifest_path.display())],
            }
        }
    };
    let dir = manifest_path.parent().unwrap_or(Path::new("."));
    let mut problems = Vec::new();
    for s in &m.samples {
        check_links(&m, s, &mut problems);
    }
    let file_problems: Vec<Vec<String>> = m
        .samples
        .par_iter()
        .map(|s| {
            let mut p = Vec::new();
            let path = resolve(dir, &s.path);
            if !path.is_file() {
                p.push(format!("{}: missing file {}", s.id, path.display()));
            } else if let Err(e) = load(&path) {
                p.push(format!("{}: cannot decode {}: {e}", s.id, path.display()));
            }
            if let Some(label) = &s.label_path {
                let lp = resolve(dir, label);
                if !lp.is_file() {
                    p.push(format!("{}: missing label {}", s.id, lp.display()));
                }
            }
            p
        })
        .collect();
    problems.extend(file_problems.into_iter().flatten());
    VerifyReport {
        checked: m.samples.len(),
        problems,
    }
}
