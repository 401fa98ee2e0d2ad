use std::collections::HashMap;
use std::fmt::Write as _;

use super::MetricsError;
use crate::matcher::{style_reuse, HashIndex, MatchMode, MatchSet};
use crate::phash::{hamming, PerceptualHash};

/// One `metric,subset_a,subset_b,value` row.
#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow {
    pub metric: String,
    pub subset_a: String,
    pub subset_b: String,
    pub value: f64,
}

/// Ordered collection of metric rows with text and CSV renderings.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Report {
    pub rows: Vec<ReportRow>,
}

impl Report {
    pub fn push(&mut self, metric: &str, a: &str, b: &str, value: f64) {
        self.rows.push(ReportRow {
            metric: metric.to_string(),
            subset_a: a.to_string(),
            subset_b: b.to_string(),
            value,
        });
    }

    pub fn extend(&mut self, other: Report) {
        self.rows.extend(other.rows);
    }

    pub fn get(&self, metric: &str, a: &str, b: &str) -> Option<f64> {
        self.rows
            .iter()
            .find(|r| r.metric == metric && r.subset_a == a && r.subset_b == b)
            .map(|r| r.value)
    }

    /// `metric[subset_a,subset_b] = value`, one per line.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for r in &self.rows {
            let _ = writeln!(s, "{}[{},{}] = {}", r.metric, r.subset_a, r.subset_b, fmt_value(r.value));
        }
        s
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("metric,subset_a,subset_b,value\n");
        for r in &self.rows {
            let _ = writeln!(s, "{},{},{},{}", r.metric, r.subset_a, r.subset_b, fmt_value(r.value));
        }
        s
    }
}

fn fmt_value(v: f64) -> String {
    if v.fract() == 0.0 && v.abs() < 1e15 {
        format!("{v:.0}")
    } else {
        format!("{v:.9}")
    }
}

/// Distance summary for one selection mode.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeSummary {
    pub mode: MatchMode,
    pub sets: usize,
    pub count: usize,
    pub mean: f64,
    pub p50: u32,
    pub p90: u32,
    pub max: u32,
    /// `histogram[d]` = selections at Hamming distance `d`.
    pub histogram: Vec<u64>,
    pub styles_used: usize,
    pub max_reuse: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MatchQualityReport {
    pub modes: Vec<ModeSummary>,
    /// Selections per style across all sets, in index order.
    pub reuse: Vec<(String, usize)>,
}

impl MatchQualityReport {
    pub fn mode(&self, mode: MatchMode) -> Option<&ModeSummary> {
        self.modes.iter().find(|m| m.mode == mode)
    }

    pub fn to_report(&self) -> Report {
        let mut r = Report::default();
        for m in &self.modes {
            let mode = m.mode.to_string();
            r.push("match_sets", &mode, "style", m.sets as f64);
            r.push("match_count", &mode, "style", m.count as f64);
            r.push("match_distance_mean", &mode, "style", m.mean);
            r.push("match_distance_p50", &mode, "style", f64::from(m.p50));
            r.push("match_distance_p90", &mode, "style", f64::from(m.p90));
            r.push("match_distance_max", &mode, "style", f64::from(m.max));
            r.push("styles_used", &mode, "style", m.styles_used as f64);
            r.push("style_max_reuse", &mode, "style", m.max_reuse as f64);
            for (d, &n) in m.histogram.iter().enumerate().filter(|(_, &n)| n > 0) {
                r.push("match_distance_hist", &mode, &d.to_string(), n as f64);
            }
        }
        r
    }
}

// Nearest-rank percentile of sorted values.
fn percentile(sorted: &[u32], p: f64) -> u32 {
    if sorted.is_empty() {
        return 0;
    }
    let rank = (p * sorted.len() as f64).ceil().max(1.0) as usize;
    sorted[rank.min(sorted.len()) - 1]
}

/// Scores every selection against its source hash. Stored PH distances are
/// used as-is; random selections are scored post hoc.
pub fn match_quality_report(
    sets: &[MatchSet],
    source_hashes: &[(String, PerceptualHash)],
    index: &HashIndex,
) -> Result<MatchQualityReport, MetricsError> {
    let sources: HashMap<&str, PerceptualHash> = source_hashes.iter().map(|(id, h)| (id.as_str(), *h)).collect();
    let mut modes = Vec::new();
    for mode in [MatchMode::Ph, MatchMode::Rs] {
        let of_mode: Vec<MatchSet> = sets.iter().filter(|s| s.mode == mode).cloned().collect();
        if of_mode.is_empty() {
            continue;
        }
        let mut dists = Vec::new();
        for set in &of_mode {
            let q = *sources
                .get(set.source_id.as_str())
                .ok_or_else(|| MetricsError::UnknownId(set.source_id.clone()))?;
            for m in &set.matches {
                let h = index
                    .hash_of(&m.style_id)
                    .ok_or_else(|| MetricsError::UnknownId(m.style_id.clone()))?;
                dists.push(m.distance.unwrap_or_else(|| hamming(q, h)));
            }
        }
        let mut histogram = vec![0u64; 65];
        for &d in &dists {
            histogram[d as usize] += 1;
        }
        let reuse = style_reuse(index, &of_mode);
        let mean = if dists.is_empty() {
            0.0
        } else {
            dists.iter().map(|&d| f64::from(d)).sum::<f64>() / dists.len() as f64
        };
        dists.sort_unstable();
        modes.push(ModeSummary {
            mode,
            sets: of_mode.len(),
            count: dists.len(),
            mean,
            p50: percentile(&dists, 0.5),
            p90: percentile(&dists, 0.9),
            max: dists.last().copied().unwrap_or(0),
            histogram,
            styles_used: reuse.iter().filter(|(_, n)| *n > 0).count(),
            max_reuse: reuse.iter().map(|(_, n)| *n).max().unwrap_or(0),
        });
    }
    Ok(MatchQualityReport {
        modes,
        reuse: style_reuse(index, sets),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matcher::{build_index, match_corpus};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_pairs(prefix: &str, n: usize, seed: u64) -> Vec<(String, PerceptualHash)> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n).map(|i| (format!("{prefix}{i}"), PerceptualHash(rng.random()))).collect()
    }

    #[test]
    fn ph_mean_equals_stored_mean_and_beats_rs() {
        let styles = random_pairs("t", 200, 1);
        let sources = random_pairs("s", 50, 2);
        let index = build_index(styles).unwrap();
        let ph = match_corpus(&sources, &index, MatchMode::Ph, 5, 0, 2).unwrap();
        let rs = match_corpus(&sources, &index, MatchMode::Rs, 5, 7, 2).unwrap();
        let all: Vec<_> = ph.iter().chain(&rs).cloned().collect();
        let rep = match_quality_report(&all, &sources, &index).unwrap();
        let stored: Vec<u32> = ph.iter().flat_map(|s| s.matches.iter().map(|m| m.distance.unwrap())).collect();
        let stored_mean = stored.iter().sum::<u32>() as f64 / stored.len() as f64;
        let p = rep.mode(MatchMode::Ph).unwrap();
        assert!((p.mean - stored_mean).abs() < 1e-12);
        assert_eq!(p.count, 250);
        assert_eq!(p.histogram.iter().sum::<u64>(), 250);
        assert!(p.mean < rep.mode(MatchMode::Rs).unwrap().mean);
        assert_eq!(rep.reuse.iter().map(|(_, n)| n).sum::<usize>(), 500);
    }

    #[test]
    fn identical_hashes_give_zero_distances() {
        let styles: Vec<_> = (0..10).map(|i| (format!("t{i}"), PerceptualHash(0xABCD))).collect();
        let sources = vec![("s0".to_string(), PerceptualHash(0xABCD))];
        let index = build_index(styles).unwrap();
        let mut sets = match_corpus(&sources, &index, MatchMode::Ph, 3, 0, 1).unwrap();
        sets.extend(match_corpus(&sources, &index, MatchMode::Rs, 3, 0, 1).unwrap());
        let rep = match_quality_report(&sets, &sources, &index).unwrap();
        for m in &rep.modes {
            assert_eq!(m.mean, 0.0);
            assert_eq!(m.max, 0);
            assert_eq!(m.histogram[0], 3);
        }
    }

    #[test]
    fn unknown_ids_are_rejected() {
        let index = build_index(random_pairs("t", 5, 3)).unwrap();
        let sources = random_pairs("s", 2, 4);
        let sets = match_corpus(&sources, &index, MatchMode::Ph, 2, 0, 1).unwrap();
        assert!(matches!(
            match_quality_report(&sets, &sources[..1], &index),
            Err(MetricsError::UnknownId(id)) if id == "s1"
        ));
        let mut bad = sets.clone();
        bad[0].matches[0].style_id = "zz".into();
        assert!(matches!(
            match_quality_report(&bad, &sources, &index),
            Err(MetricsError::UnknownId(id)) if id == "zz"
        ));
    }

    #[test]
    fn percentiles_use_nearest_rank() {
        let v = [1, 2, 3, 4, 5, 6, 7, 8, 9, 10];
        assert_eq!(percentile(&v, 0.5), 5);
        assert_eq!(percentile(&v, 0.9), 9);
        assert_eq!(percentile(&[4], 0.9), 4);
    }

    #[test]
    fn report_renders_text_and_csv() {
        let mut r = Report::default();
        r.push("domain_gap", "source", "style", 0.25);
        r.push("count", "z", "", 3.0);
        assert_eq!(r.to_text(), "domain_gap[source,style] = 0.250000000\ncount[z,] = 3\n");
        assert_eq!(
            r.to_csv(),
            "metric,subset_a,subset_b,value\ndomain_gap,source,style,0.250000000\ncount,z,,3\n"
        );
        assert_eq!(r.get("count", "z", ""), Some(3.0));
    }
}
