//! Style selection: exact Hamming K-NN over perceptual hashes (PH) or seeded
//! random sampling without replacement (RS).

pub mod matchfile;

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::phash::{hamming, PerceptualHash};

/// K used when none is configured.
pub const DEFAULT_K: usize = 5;

#[derive(Debug, Error)]
pub enum MatchError {
    #[error("duplicate sample id '{0}'")]
    DuplicateId(String),
    #[error("style index is empty")]
    EmptyIndex,
    #[error("k must be at least 1")]
    InvalidK,
    #[error("could not build worker pool: {0}")]
    Pool(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MatchMode {
    /// Perceptual-hash nearest neighbours.
    Ph,
    /// Random selection.
    Rs,
}

impl fmt::Display for MatchMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MatchMode::Ph => "ph",
            MatchMode::Rs => "rs",
        })
    }
}

impl FromStr for MatchMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "ph" => Ok(MatchMode::Ph),
            "rs" => Ok(MatchMode::Rs),
            other => Err(format!("unknown match mode '{other}' (expected ph or rs)")),
        }
    }
}

/// Accumulates entries; [`HashIndexBuilder::freeze`] produces the queryable index.
#[derive(Debug, Default)]
pub struct HashIndexBuilder {
    ids: Vec<String>,
    hashes: Vec<u64>,
    seen: HashSet<String>,
}

impl HashIndexBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, id: impl Into<String>, hash: PerceptualHash) -> Result<(), MatchError> {
        let id = id.into();
        if !self.seen.insert(id.clone()) {
            return Err(MatchError::DuplicateId(id));
        }
        self.ids.push(id);
        self.hashes.push(hash.0);
        Ok(())
    }

    pub fn freeze(self) -> HashIndex {
        let positions = self
            .ids
            .iter()
            .enumerate()
            .map(|(i, id)| (id.clone(), i))
            .collect();
        HashIndex {
            ids: self.ids,
            hashes: self.hashes,
            positions,
        }
    }
}

/// Immutable (id, hash) collection in insertion order.
#[derive(Debug, Clone)]
pub struct HashIndex {
    ids: Vec<String>,
    hashes: Vec<u64>,
    positions: HashMap<String, usize>,
}

/// One scan result: position in the index and its distance to the query.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Neighbor {
    pub position: usize,
    pub distance: u32,
}

impl HashIndex {
    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn id(&self, position: usize) -> &str {
        &self.ids[position]
    }

    pub fn hash(&self, position: usize) -> PerceptualHash {
        PerceptualHash(self.hashes[position])
    }

    pub fn position(&self, id: &str) -> Option<usize> {
        self.positions.get(id).copied()
    }

    pub fn hash_of(&self, id: &str) -> Option<PerceptualHash> {
        self.position(id).map(|p| self.hash(p))
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, PerceptualHash)> {
        self.ids
            .iter()
            .zip(&self.hashes)
            .map(|(id, &h)| (id.as_str(), PerceptualHash(h)))
    }

    /// Distance from `query` to every entry, in insertion order.
    pub fn distances(&self, query: PerceptualHash) -> Vec<u8> {
        self.hashes
            .iter()
            .map(|&h| (h ^ query.0).count_ones() as u8)
            .collect()
    }

    /// The `min(k, len)` closest entries, ordered by (distance, insertion order).
    ///
    /// Full scan followed by a counting selection over the 65 possible
    /// distances, so the result is exact and ties resolve deterministically.
    pub fn nearest(&self, query: PerceptualHash, k: usize) -> Vec<Neighbor> {
        let k = k.min(self.len());
        if k == 0 {
            return Vec::new();
        }
        let dists = self.distances(query);
        let mut counts = [0usize; 65];
        for &d in &dists {
            counts[d as usize] += 1;
        }
        // distance bucket that holds the k-th neighbour
        let mut below = 0;
        let mut cutoff = 64;
        for (d, &c) in counts.iter().enumerate() {
            if below + c >= k {
                cutoff = d;
                break;
            }
            below += c;
        }
        let mut slot = [0usize; 65];
        let mut acc = 0;
        for d in 0..=cutoff {
            slot[d] = acc;
            acc += counts[d];
        }
        let mut quota = k - below;
        let mut out = vec![Neighbor { position: 0, distance: 0 }; k];
        for (position, &d) in dists.iter().enumerate() {
            let d = d as usize;
            if d < cutoff || (d == cutoff && quota > 0) {
                if d == cutoff {
                    quota -= 1;
                }
                out[slot[d]] = Neighbor {
                    position,
                    distance: d as u32,
                };
                slot[d] += 1;
            }
        }
        out
    }
}

/// Builds a frozen index from (id, hash) pairs, keeping their order.
pub fn build_index<I, S>(pairs: I) -> Result<HashIndex, MatchError>
where
    I: IntoIterator<Item = (S, PerceptualHash)>,
    S: Into<String>,
{
    let mut b = HashIndexBuilder::new();
    for (id, h) in pairs {
        b.insert(id, h)?;
    }
    Ok(b.freeze())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StyleMatch {
    pub style_id: String,
    /// Hamming distance; `None` for random selections.
    pub distance: Option<u32>,
}

/// The styles selected for one source sample.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MatchSet {
    pub source_id: String,
    pub mode: MatchMode,
    pub k: usize,
    pub matches: Vec<StyleMatch>,
}

/// Exact Hamming K-NN for one query.
pub fn knn(
    index: &HashIndex,
    source_id: &str,
    query: PerceptualHash,
    k: usize,
) -> Result<MatchSet, MatchError> {
    if k == 0 {
        return Err(MatchError::InvalidK);
    }
    if index.is_empty() {
        return Err(MatchError::EmptyIndex);
    }
    let matches = index
        .nearest(query, k)
        .into_iter()
        .map(|n| StyleMatch {
            style_id: index.id(n.position).to_string(),
            distance: Some(n.distance),
        })
        .collect();
    Ok(MatchSet {
        source_id: source_id.to_string(),
        mode: MatchMode::Ph,
        k,
        matches,
    })
}

// Per-source stream: the global seed and the id are hashed into a ChaCha key,
// so a selection never depends on which other sources were processed.
fn source_rng(seed: u64, source_id: &str) -> ChaCha20Rng {
    let mut h = Sha256::new();
    h.update(seed.to_le_bytes());
    h.update((source_id.len() as u64).to_le_bytes());
    h.update(source_id.as_bytes());
    let digest = h.finalize();
    let mut key = [0u8; 32];
    key.copy_from_slice(&digest);
    ChaCha20Rng::from_seed(key)
}

/// `min(k, len)` distinct styles drawn without replacement.
pub fn random_select(
    index: &HashIndex,
    source_id: &str,
    k: usize,
    seed: u64,
) -> Result<MatchSet, MatchError> {
    if k == 0 {
        return Err(MatchError::InvalidK);
    }
    if index.is_empty() {
        return Err(MatchError::EmptyIndex);
    }
    let n = index.len();
    let take = k.min(n);
    let mut rng = source_rng(seed, source_id);
    let mut perm: Vec<usize> = (0..n).collect();
    for i in 0..take {
        let j = rng.random_range(i..n);
        perm.swap(i, j);
    }
    let matches = perm[..take]
        .iter()
        .map(|&p| StyleMatch {
            style_id: index.id(p).to_string(),
            distance: None,
        })
        .collect();
    Ok(MatchSet {
        source_id: source_id.to_string(),
        mode: MatchMode::Rs,
        k,
        matches,
    })
}

/// Builds a rayon pool with exactly `workers` threads.
pub fn worker_pool(workers: usize) -> Result<rayon::ThreadPool, MatchError> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| MatchError::Pool(e.to_string()))
}

/// One [`MatchSet`] per source, in source order, independent of `workers`.
pub fn match_corpus(
    sources: &[(String, PerceptualHash)],
    index: &HashIndex,
    mode: MatchMode,
    k: usize,
    seed: u64,
    workers: usize,
) -> Result<Vec<MatchSet>, MatchError> {
    if k == 0 {
        return Err(MatchError::InvalidK);
    }
    if index.is_empty() {
        return Err(MatchError::EmptyIndex);
    }
    let pool = worker_pool(workers)?;
    pool.install(|| {
        sources
            .par_iter()
            .map(|(id, h)| match mode {
                MatchMode::Ph => knn(index, id, *h, k),
                MatchMode::Rs => random_select(index, id, k, seed),
            })
            .collect()
    })
}

/// How many match sets selected each style, in index order (unused styles included).
pub fn style_reuse(index: &HashIndex, sets: &[MatchSet]) -> Vec<(String, usize)> {
    let mut counts = vec![0usize; index.len()];
    for m in sets.iter().flat_map(|s| &s.matches) {
        if let Some(p) = index.position(&m.style_id) {
            counts[p] += 1;
        }
    }
    index
        .iter()
        .zip(counts)
        .map(|((id, _), c)| (id.to_string(), c))
        .collect()
}

/// Post-hoc Hamming distance of every selection to its source hash.
pub fn scored_distances(
    set: &MatchSet,
    source_hash: PerceptualHash,
    index: &HashIndex,
) -> Option<Vec<u32>> {
    set.matches
        .iter()
        .map(|m| index.hash_of(&m.style_id).map(|h| hamming(source_hash, h)))
        .collect()
}
