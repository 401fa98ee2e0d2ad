use std::collections::BTreeMap;
use std::io::Read;
use std::path::{Path, PathBuf};

use walkdir::WalkDir;

use super::manifest::{Manifest, Phase, Role, Sample, SkipRecord};
use super::PipelineError;
use crate::imgcore::is_supported_header;

/// Relative path with `/` separators, or `None` if it is not valid UTF-8.
fn relative_id(root: &Path, path: &Path) -> Option<String> {
    let rel = path.strip_prefix(root).ok()?;
    let parts: Option<Vec<&str>> = rel.components().map(|c| c.as_os_str().to_str()).collect();
    Some(parts?.join("/"))
}

fn files_under(dir: &Path) -> Result<Vec<(String, PathBuf)>, PipelineError> {
    if !dir.is_dir() {
        return Err(PipelineError::MissingDir(dir.to_path_buf()));
    }
    let mut out = Vec::new();
    for entry in WalkDir::new(dir).follow_links(true) {
        let entry = entry.map_err(|e| PipelineError::Io {
            path: dir.display().to_string(),
            source: e.into(),
        })?;
        if !entry.file_type().is_file() {
            continue;
        }
        let path = entry.into_path();
        let id = match relative_id(dir, &path) {
            Some(id) => id,
            None => path.strip_prefix(dir).unwrap_or(&path).to_string_lossy().into_owned(),
        };
        out.push((id, path));
    }
    out.sort();
    Ok(out)
}

fn sniff(path: &Path) -> Result<bool, std::io::Error> {
    let mut header = Vec::with_capacity(16);
    std::fs::File::open(path)?.take(16).read_to_end(&mut header)?;
    Ok(is_supported_header(&header))
}

/// Lists a directory tree as samples of `role`, sorted by relative path.
///
/// Files that are not PNG/JPEG by their leading bytes, that cannot be read, or
/// whose relative path cannot be used as an id become skip records.
pub fn ingest(dir: &Path, role: Role) -> Result<Manifest, PipelineError> {
    let mut m = Manifest::default();
    for (id, path) in files_under(dir)? {
        let skip = |reason: String| SkipRecord {
            id: id.clone(),
            path: path.display().to_string(),
            role,
            phase: Phase::Ingest,
            reason,
        };
        if relative_id(dir, &path).is_none() || id.contains(['\t', '\n', '\r']) {
            m.skipped.push(skip("path is not usable as a sample id".into()));
            continue;
        }
        match sniff(&path) {
            Ok(true) => m.samples.push(Sample {
                id,
                path: path.display().to_string(),
                role,
                label_path: None,
                provenance: None,
            }),
            Ok(false) => m.skipped.push(skip("unsupported format".into())),
            Err(e) => m.skipped.push(skip(format!("unreadable: {e}"))),
        }
    }
    Ok(m)
}

/// Finds label files by relative parent directory and file stem.
pub struct LabelIndex {
    by_key: BTreeMap<String, PathBuf>,
}

fn label_key(id: &str) -> String {
    let (parent, name) = id.rsplit_once('/').unwrap_or(("", id));
    let stem = Path::new(name)
        .file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or(name);
    format!("{parent}/{stem}")
}

impl LabelIndex {
    pub fn build(dir: &Path) -> Result<Self, PipelineError> {
        let mut by_key = BTreeMap::new();
        // files are sorted, so the first file per key is the lexicographic minimum
        for (id, path) in files_under(dir)? {
            by_key.entry(label_key(&id)).or_insert(path);
        }
        Ok(Self { by_key })
    }

    /// Label for the sample with relative id `id`: same parent, same stem, any extension.
    pub fn lookup(&self, id: &str) -> Option<&Path> {
        self.by_key.get(&label_key(id)).map(PathBuf::as_path)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::imgcore::{save, ColorSpace, ImageBuffer, OutputFormat};

    fn write_png(path: &Path) {
        let img = ImageBuffer::filled(4, 4, ColorSpace::Rgb, &[0.1, 0.5, 0.9]).unwrap();
        save(&img, path, OutputFormat::Png).unwrap();
    }

    #[test]
    fn empty_dir_gives_empty_manifest() {
        let dir = tempfile::tempdir().unwrap();
        let m = ingest(dir.path(), Role::Source).unwrap();
        assert!(m.is_empty() && m.skipped.is_empty());
    }

    #[test]
    fn filters_non_images_and_sorts_recursively() {
        let dir = tempfile::tempdir().unwrap();
        write_png(&dir.path().join("b.png"));
        write_png(&dir.path().join("a/z.png"));
        std::fs::write(dir.path().join("notes.txt"), "hello").unwrap();
        let m = ingest(dir.path(), Role::Style).unwrap();
        let ids: Vec<_> = m.samples.iter().map(|s| s.id.as_str()).collect();
        assert_eq!(ids, ["a/z.png", "b.png"]);
        assert!(m.samples.iter().all(|s| s.role == Role::Style));
        assert_eq!(m.skipped.len(), 1);
        assert_eq!(m.skipped[0].id, "notes.txt");
        assert_eq!(m.skipped[0].phase, Phase::Ingest);
        assert_eq!(m, ingest(dir.path(), Role::Style).unwrap());
    }

    #[test]
    fn missing_dir_errors() {
        let dir = tempfile::tempdir().unwrap();
        assert!(matches!(
            ingest(&dir.path().join("nope"), Role::Source),
            Err(PipelineError::MissingDir(_))
        ));
    }

    #[test]
    fn label_lookup_by_parent_and_stem() {
        let dir = tempfile::tempdir().unwrap();
        for f in ["a/x.txt", "a/x.json", "y.png", "b/x.txt"] {
            let p = dir.path().join(f);
            std::fs::create_dir_all(p.parent().unwrap()).unwrap();
            std::fs::write(p, "l").unwrap();
        }
        let idx = LabelIndex::build(dir.path()).unwrap();
        assert_eq!(idx.lookup("a/x.png").unwrap(), dir.path().join("a/x.json"));
        assert_eq!(idx.lookup("y.jpg").unwrap(), dir.path().join("y.png"));
        assert!(idx.lookup("x.png").is_none());
    }
}
