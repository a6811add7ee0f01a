//! Deterministic key sets and query streams.
//!
//! Both are driven by the same primitive stream: output `j` is the
//! finalizer applied to `seed + j * GOLDEN_GAMMA`. Identical specs produce
//! bit-identical keys and queries on every platform; no RNG state leaks
//! between runs.

use crate::keyspace::{mix64, Key, GOLDEN_GAMMA};
use crate::{Error, Result};
use std::collections::HashSet;

/// Salt mixed into the seed for the query stream so the key and query
/// streams of one run never overlap.
const QUERY_STREAM_SALT: u64 = 0xA5A5_A5A5_A5A5_A5A5;

/// Query distribution over the stored keys. Every generated query targets a
/// stored key; the workloads measure successful lookups only.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum QueryMode {
    Uniform,
    Hotspot,
}

impl QueryMode {
    pub fn as_str(self) -> &'static str {
        match self {
            QueryMode::Uniform => "uniform",
            QueryMode::Hotspot => "hotspot",
        }
    }
}

impl std::fmt::Display for QueryMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for QueryMode {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "uniform" => Ok(QueryMode::Uniform),
            "hotspot" => Ok(QueryMode::Hotspot),
            other => Err(format!("unknown query mode `{other}`")),
        }
    }
}

/// One cell of the workload grid. `hot_fraction` / `hot_weight` only apply
/// to hotspot mode: by default 90% of queries land on the first 10% of the
/// key set.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WorkloadSpec {
    pub m_requested: usize,
    pub load_factor: f64,
    pub query_multiplier: usize,
    pub mode: QueryMode,
    pub seed: u64,
    pub hot_fraction: f64,
    pub hot_weight: f64,
}

impl WorkloadSpec {
    pub fn new(
        m_requested: usize,
        load_factor: f64,
        query_multiplier: usize,
        mode: QueryMode,
        seed: u64,
    ) -> Self {
        assert!(load_factor > 0.0 && load_factor <= 1.0);
        assert!(query_multiplier >= 1);
        WorkloadSpec {
            m_requested,
            load_factor,
            query_multiplier,
            mode,
            seed,
            hot_fraction: 0.10,
            hot_weight: 0.90,
        }
    }

    /// Number of stored records: floor(load_factor * requested capacity).
    pub fn key_count(&self) -> usize {
        (self.load_factor * self.m_requested as f64).floor() as usize
    }

    /// Number of queries: multiplier * key count, exactly.
    pub fn query_count(&self) -> usize {
        self.query_multiplier * self.key_count()
    }

    /// Same workload with a different seed; the harness derives per-cycle
    /// seeds this way.
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }
}

/// The deterministic value stream shared by key and query generation.
#[derive(Debug, Clone)]
struct MixStream {
    state: u64,
}

impl MixStream {
    fn new(seed: u64) -> Self {
        MixStream { state: seed }
    }

    #[inline]
    fn next_value(&mut self) -> u64 {
        let v = mix64(self.state);
        self.state = self.state.wrapping_add(GOLDEN_GAMMA);
        v
    }
}

/// An ordered set of pairwise-distinct keys.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KeySet {
    keys: Vec<Key>,
}

impl KeySet {
    pub fn keys(&self) -> &[Key] {
        &self.keys
    }

    pub fn len(&self) -> usize {
        self.keys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.keys.is_empty()
    }
}

/// First `N` distinct values of the spec's key stream.
pub fn gen_keys(spec: &WorkloadSpec) -> KeySet {
    let n = spec.key_count();
    let mut stream = MixStream::new(spec.seed);
    let mut seen = HashSet::with_capacity(n * 2);
    let mut keys = Vec::with_capacity(n);
    while keys.len() < n {
        let v = stream.next_value();
        if seen.insert(v) {
            keys.push(Key(v));
        }
    }
    KeySet { keys }
}

/// Lazily generated query stream of exactly `query_multiplier * N` keys.
#[derive(Debug, Clone)]
pub struct QueryStream<'a> {
    keys: &'a [Key],
    mode: QueryMode,
    stream: MixStream,
    remaining: usize,
    hot_count: usize,
    hot_threshold: u64,
}

impl<'a> Iterator for QueryStream<'a> {
    type Item = Key;

    #[inline]
    fn next(&mut self) -> Option<Key> {
        if self.remaining == 0 {
            return None;
        }
        self.remaining -= 1;
        let n = self.keys.len();
        let idx = match self.mode {
            QueryMode::Uniform => (self.stream.next_value() % n as u64) as usize,
            QueryMode::Hotspot => {
                // one draw decides hot vs cold, the next picks within the
                // chosen span; a degenerate span falls back to the hot set
                let bernoulli = self.stream.next_value();
                let pick = self.stream.next_value();
                let hot = self.hot_count.min(n);
                let cold = n - hot;
                if bernoulli < self.hot_threshold || cold == 0 {
                    (pick % hot.max(1) as u64) as usize
                } else {
                    hot + (pick % cold as u64) as usize
                }
            }
        };
        Some(self.keys[idx])
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        (self.remaining, Some(self.remaining))
    }
}

impl ExactSizeIterator for QueryStream<'_> {}

/// Query stream over a key set. Uniform mode indexes the keys by successive
/// stream values; hotspot mode routes `hot_weight` of the queries to the
/// first ceil(`hot_fraction` * N) keys.
pub fn gen_queries<'a>(spec: &WorkloadSpec, keys: &'a KeySet) -> Result<QueryStream<'a>> {
    if keys.is_empty() {
        return Err(Error::EmptyKeySet);
    }
    let hot_count = (spec.hot_fraction * keys.len() as f64).ceil() as usize;
    // hot_weight < 1 keeps the product below 2^64
    let hot_threshold = (spec.hot_weight * 18_446_744_073_709_551_616.0) as u64;
    Ok(QueryStream {
        keys: keys.keys(),
        mode: spec.mode,
        stream: MixStream::new(spec.seed ^ QUERY_STREAM_SALT),
        remaining: spec.query_count(),
        hot_count,
        hot_threshold,
    })
}
