//! Probe histograms, structural indicators, and the collision-rate oracle.

use crate::table::InsertStats;
use crate::{Error, Result};
use std::collections::BTreeMap;

/// Distribution of per-operation probe counts.
#[derive(Debug, Clone, Default)]
pub struct ProbeHistogram {
    counts: BTreeMap<u32, u64>,
    total: u64,
}

impl ProbeHistogram {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn record(&mut self, probes: usize) {
        *self.counts.entry(probes as u32).or_insert(0) += 1;
        self.total += 1;
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn counts(&self) -> &BTreeMap<u32, u64> {
        &self.counts
    }

    /// Exact mean, `sum(v * count) / total`; 0 for an empty histogram.
    pub fn mean(&self) -> f64 {
        if self.total == 0 {
            return 0.0;
        }
        let sum: u64 = self.counts.iter().map(|(&v, &c)| v as u64 * c).sum();
        sum as f64 / self.total as f64
    }

    /// Nearest-rank percentile for `p` in (0, 100]: the smallest recorded
    /// value whose cumulative count reaches ceil(p/100 * total). Probe
    /// counts are small integers, so no interpolation; fractional reported
    /// values come from averaging per-run percentiles, not from within a
    /// run.
    pub fn percentile(&self, p: f64) -> Result<u32> {
        if self.total == 0 {
            return Err(Error::EmptyHistogram);
        }
        debug_assert!(p > 0.0 && p <= 100.0);
        // the epsilon keeps exact ranks (e.g. p=95 of 100) from being
        // pushed up a bucket by float rounding
        let rank = ((p / 100.0) * self.total as f64 - 1e-9).ceil().max(1.0) as u64;
        let mut cumulative = 0u64;
        for (&v, &c) in &self.counts {
            cumulative += c;
            if cumulative >= rank {
                return Ok(v);
            }
        }
        Ok(*self.counts.keys().next_back().expect("non-empty"))
    }
}

/// Arrangement indicators of a finished build, independent of any lookup
/// rule.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StructureStats {
    /// Fraction of inserts whose placed candidate had an occupied home.
    pub collisions_per_record: f64,
    /// Longest circular run of occupied slots.
    pub max_cluster: usize,
    /// ceil(log2 K) for a shaped table, 0 when shaping is off.
    pub metadata_bits: u32,
}

/// Longest circularly-contiguous run of occupied slots; wrapping across the
/// array boundary counts as contiguous. Fully occupied -> the whole array.
pub fn max_cluster(occupancy: &[bool]) -> usize {
    let m = occupancy.len();
    let Some(first_empty) = occupancy.iter().position(|&o| !o) else {
        return m;
    };
    let mut best = 0usize;
    let mut run = 0usize;
    for d in 1..=m {
        if occupancy[(first_empty + d) % m] {
            run += 1;
            best = best.max(run);
        } else {
            run = 0;
        }
    }
    best
}

/// Closed-form collision rate under uniform hashing: the probability,
/// averaged along the fill trajectory, that all `k` candidate homes are
/// occupied. Equals `(1/alpha) * integral_0^alpha t^k dt = alpha^k / (k+1)`.
pub fn analytic_collision_rate(alpha: f64, k: u32) -> f64 {
    debug_assert!((0.0..=1.0).contains(&alpha));
    debug_assert!(k >= 1);
    alpha.powi(k as i32) / (k as f64 + 1.0)
}

/// Fraction of inserts that collided.
pub fn collision_rate(build_stats: &[InsertStats]) -> Result<f64> {
    if build_stats.is_empty() {
        return Err(Error::EmptyBuild);
    }
    let collided = build_stats.iter().filter(|s| s.collided).count();
    Ok(collided as f64 / build_stats.len() as f64)
}

/// Tag width for a shaping order: ceil(log2 k), with order 1 needing none.
pub fn metadata_bits(k: usize) -> u32 {
    if k <= 1 {
        0
    } else {
        usize::BITS - (k - 1).leading_zeros()
    }
}
