use std::path::{Path, PathBuf};

use datarestyle::imgcore::{save, OutputFormat};
use datarestyle::metrics::Pooling;
use datarestyle::pipeline::{
    compare_subsets, run, verify, Manifest, Phase, PipelineConfig, PipelineError, Role, MANIFEST, MATCHES,
    REPORT_CSV, SOURCE_HASHES, STYLE_HASHES,
};
use datarestyle::restyle::Backend;
use datarestyle::synth::{self, DomainLook};
use tempfile::TempDir;

struct Fixture {
    root: TempDir,
}

impl Fixture {
    fn new(sources: u64, styles: u64) -> Self {
        let root = tempfile::tempdir().unwrap();
        let f = Fixture { root };
        for s in 0..sources {
            let img = DomainLook::WARM.apply(&synth::natural_image(s, 48, 40));
            save(&img, &f.src().join(format!("s{s:02}.png")), OutputFormat::Png).unwrap();
        }
        for s in 0..styles {
            let img = DomainLook::COOL.apply(&synth::natural_image(900 + s, 40, 48));
            save(&img, &f.sty().join(format!("t{s:02}.png")), OutputFormat::Png).unwrap();
        }
        f
    }

    fn src(&self) -> PathBuf {
        self.root.path().join("src")
    }

    fn sty(&self) -> PathBuf {
        self.root.path().join("sty")
    }

    fn out(&self) -> PathBuf {
        self.root.path().join("out")
    }

    fn config(&self, k: usize) -> PipelineConfig {
        let mut cfg = PipelineConfig::new(self.src(), self.sty(), self.out());
        cfg.k = k;
        cfg.workers = 2;
        cfg
    }
}

fn read_all(out: &Path) -> Vec<Vec<u8>> {
    [MANIFEST, MATCHES, SOURCE_HASHES, STYLE_HASHES, REPORT_CSV]
        .iter()
        .map(|f| std::fs::read(out.join(f)).unwrap())
        .collect()
}

#[test]
fn small_run_counts_and_references() {
    let f = Fixture::new(2, 3);
    let summary = run(&f.config(2)).unwrap();
    let m = &summary.manifest;
    assert_eq!(summary.enriched_len(), 6);
    assert_eq!(m.with_role(Role::Style).count(), 3);
    for s in m.with_role(Role::Restyled) {
        let p = s.provenance.as_ref().unwrap();
        assert_eq!(m.get(&p.content_id).unwrap().role, Role::Source);
        assert_eq!(m.get(&p.style_id).unwrap().role, Role::Style);
        assert!(f.out().join(&s.path).is_file());
    }
    assert!(verify(&f.out().join(MANIFEST)).passed());
    assert_eq!(summary.report.get("samples", "z", ""), Some(6.0));
    assert!(summary.report.get("domain_gap", "restyled", "style").unwrap() < summary.report.get("domain_gap", "source", "style").unwrap());
}

#[test]
fn deleting_one_output_regenerates_only_that_file() {
    let f = Fixture::new(3, 4);
    let cfg = f.config(2);
    let first = run(&cfg).unwrap();
    assert_eq!(first.generated, 6);
    let before = read_all(&f.out());
    let victim = first.manifest.with_role(Role::Restyled).nth(3).unwrap().path.clone();
    std::fs::remove_file(f.out().join(&victim)).unwrap();
    let second = run(&cfg).unwrap();
    assert_eq!((second.generated, second.reused), (1, 5));
    assert!(f.out().join(&victim).is_file());
    assert_eq!(read_all(&f.out()), before);
}

#[test]
fn changing_the_backend_regenerates_everything() {
    let f = Fixture::new(2, 3);
    let mut cfg = f.config(2);
    run(&cfg).unwrap();
    cfg.restyle.backend = Backend::Hist;
    let second = run(&cfg).unwrap();
    assert_eq!((second.generated, second.reused), (4, 0));
    assert!(second
        .manifest
        .with_role(Role::Restyled)
        .all(|s| s.provenance.as_ref().unwrap().backend == Backend::Hist));
}

#[test]
fn bad_inputs_are_recorded_not_fatal() {
    let f = Fixture::new(3, 3);
    std::fs::write(f.src().join("readme.txt"), "not an image").unwrap();
    // PNG signature followed by garbage
    std::fs::write(f.src().join("s99.png"), b"\x89PNG\r\n\x1a\nbroken").unwrap();
    let summary = run(&f.config(2)).unwrap();
    let m = &summary.manifest;
    assert_eq!(summary.enriched_len(), 9);
    let failures = summary.failures();
    assert_eq!(failures.len(), 1);
    assert_eq!(failures[0].id, "source/s99.png");
    assert_eq!(failures[0].phase, Phase::Hash);
    let ingest: Vec<_> = m.skipped.iter().filter(|s| s.phase == Phase::Ingest).collect();
    assert_eq!(ingest.len(), 1);
    assert_eq!(ingest[0].id, "source/readme.txt");
    assert!(verify(&f.out().join(MANIFEST)).passed());
}

#[test]
fn k_larger_than_style_pool_uses_every_style() {
    let f = Fixture::new(2, 3);
    let summary = run(&f.config(5)).unwrap();
    assert_eq!(summary.enriched_len(), 2 + 2 * 3);
}

#[test]
fn labels_are_inherited() {
    let f = Fixture::new(2, 3);
    let labels = f.root.path().join("labels");
    std::fs::create_dir_all(&labels).unwrap();
    std::fs::write(labels.join("s00.txt"), "road").unwrap();
    let mut cfg = f.config(2);
    cfg.label_dir = Some(labels.clone());
    let m = run(&cfg).unwrap().manifest;
    let label = labels.join("s00.txt").display().to_string();
    assert_eq!(m.get("source/s00.png").unwrap().label_path.as_deref(), Some(label.as_str()));
    assert!(m.get("source/s01.png").unwrap().label_path.is_none());
    for s in m.with_role(Role::Restyled) {
        let src = m.get(&s.provenance.as_ref().unwrap().content_id).unwrap();
        assert_eq!(s.label_path, src.label_path);
    }
}

#[test]
fn layout_errors_abort_before_work() {
    let f = Fixture::new(1, 1);
    let mut cfg = f.config(1);
    cfg.out_dir = f.src().join("out");
    let err = run(&cfg).unwrap_err();
    assert!(matches!(err, PipelineError::Overlap { .. }) && err.is_config());
    assert!(!cfg.out_dir.exists());

    let mut cfg = f.config(1);
    cfg.style_dir = f.root.path().join("missing");
    assert!(matches!(run(&cfg), Err(PipelineError::MissingDir(_))));
    assert!(!f.out().exists());

    let mut cfg = f.config(1);
    cfg.k = 0;
    assert!(matches!(run(&cfg), Err(PipelineError::Config(_))));
}

#[test]
fn verify_reports_missing_files_and_provenance() {
    let f = Fixture::new(2, 2);
    let summary = run(&f.config(1)).unwrap();
    let manifest_path = f.out().join(MANIFEST);
    let victim = summary.manifest.with_role(Role::Restyled).next().unwrap().path.clone();
    std::fs::remove_file(f.out().join(&victim)).unwrap();
    let report = verify(&manifest_path);
    assert!(!report.passed());
    assert!(report.problems.iter().any(|p| p.contains(&victim)));

    let mut m = Manifest::read_path(&manifest_path).unwrap();
    for s in m.samples.iter_mut().filter(|s| s.role == Role::Restyled) {
        s.provenance = None;
    }
    let edited = f.root.path().join("edited.jsonl");
    std::fs::write(&edited, m.to_jsonl()).unwrap();
    assert!(verify(&edited).problems.iter().any(|p| p.contains("no provenance")));

    assert!(!verify(&f.root.path().join("nope.jsonl")).passed());
}

#[test]
fn config_file_paths_are_relative_to_the_file() {
    let f = Fixture::new(2, 2);
    let cfg_path = f.root.path().join("run.toml");
    std::fs::write(
        &cfg_path,
        "source_dir = \"src\"\nstyle_dir = \"sty\"\nout_dir = \"out\"\nk = 1\nworkers = 1\noutput_format = \"jpeg\"\n\n[restyle]\nbackend = \"freq\"\n",
    )
    .unwrap();
    let cfg = PipelineConfig::load(&cfg_path).unwrap();
    let summary = run(&cfg).unwrap();
    assert_eq!(summary.enriched_len(), 4);
    assert!(summary.manifest.with_role(Role::Restyled).all(|s| s.path.ends_with(".jpg")));
    assert!(verify(&f.out().join(MANIFEST)).passed());
}

#[test]
fn subsets_can_be_compared_from_a_manifest() {
    let f = Fixture::new(3, 3);
    run(&f.config(2)).unwrap();
    let manifest = f.out().join(MANIFEST);
    let a = compare_subsets(&manifest, "source", "style", Pooling::Pooled, 2).unwrap();
    let b = compare_subsets(&manifest, "restyled", "style", Pooling::Pooled, 2).unwrap();
    assert!(b.get("domain_gap", "restyled", "style").unwrap() < a.get("domain_gap", "source", "style").unwrap());
    assert_eq!(a.get("images", "source", ""), Some(3.0));
    assert!(matches!(
        compare_subsets(&manifest, "target", "style", Pooling::Pooled, 1),
        Err(PipelineError::UnknownSubset(_))
    ));
}

#[test]
fn empty_source_corpus_gives_empty_enrichment() {
    let f = Fixture::new(0, 2);
    std::fs::create_dir_all(f.src()).unwrap();
    let summary = run(&f.config(2)).unwrap();
    assert_eq!(summary.enriched_len(), 0);
    assert!(verify(&f.out().join(MANIFEST)).passed());
}
