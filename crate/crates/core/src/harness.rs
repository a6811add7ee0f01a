//! Experiment runner: warm-up plus repeated measured cycles, grid presets,
//! and the baseline/shaped speedup join.
//!
//! Timing uses a monotonic clock around the whole build phase and the whole
//! query phase; per-query time is phase time divided by the query count.
//! Structural columns are averaged over the measured cycles with per-cycle
//! percentiles (hence fractional averages of integer percentiles). Cycle
//! `i` runs the workload with seed `base + i`; warm-up cycles reuse the
//! seeds of the first measured cycles so the measured output is independent
//! of the warm-up count.
//!
//! Timed grids run strictly one configuration at a time. Structural grids
//! skip the clock entirely and may fan out across threads; every structural
//! column is deterministic for a fixed seed, so the two modes agree on
//! everything but the timing columns.

use crate::keyspace::ShapingFamily;
use crate::metrics::{self, metadata_bits, ProbeHistogram};
use crate::table::{InsertStats, ProbeScheme, Table};
use crate::workload::{gen_keys, gen_queries, QueryMode, WorkloadSpec};
use crate::{Error, Result};
use rayon::prelude::*;
use std::collections::HashMap;
use std::time::Instant;

/// Queries are generated in chunks outside the timed region, so the lookup
/// clock sees only table traffic and the stream never materializes whole.
const QUERY_CHUNK: usize = 1 << 16;

/// One cell of the benchmark grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExperimentConfig {
    pub scheme: ProbeScheme,
    pub sst: bool,
    /// Shaping order; ignored when `sst` is false.
    pub k: usize,
    pub workload: WorkloadSpec,
    pub runs: usize,
    pub warmup_runs: usize,
}

impl ExperimentConfig {
    pub fn plain(scheme: ProbeScheme, workload: WorkloadSpec) -> Self {
        ExperimentConfig {
            scheme,
            sst: false,
            k: 0,
            workload,
            runs: 8,
            warmup_runs: 1,
        }
    }

    pub fn shaped(scheme: ProbeScheme, k: usize, workload: WorkloadSpec) -> Self {
        ExperimentConfig {
            scheme,
            sst: true,
            k,
            workload,
            runs: 8,
            warmup_runs: 1,
        }
    }

    pub fn with_runs(mut self, runs: usize, warmup_runs: usize) -> Self {
        self.runs = runs;
        self.warmup_runs = warmup_runs;
        self
    }

    fn build_table(&self) -> Table {
        if self.sst {
            Table::new_shaped(
                self.workload.m_requested,
                self.scheme,
                ShapingFamily::new(self.k),
            )
        } else {
            Table::new(self.workload.m_requested, self.scheme)
        }
    }
}

/// Measured row for one configuration: config echo, phase timings, and
/// cycle-averaged probe and structure statistics.
#[derive(Debug, Clone, PartialEq)]
pub struct RunResult {
    pub scheme: ProbeScheme,
    pub sst: bool,
    /// Shaping order of the row; 0 on baseline rows.
    pub k: usize,
    pub metadata_bits: u32,
    pub m_requested: usize,
    pub m_actual: usize,
    pub load_factor: f64,
    pub q_multiplier: usize,
    pub mode: QueryMode,
    pub seed: u64,
    pub runs: usize,
    pub build_time_s: f64,
    pub lookup_time_us_per_query: f64,
    pub total_time_s: f64,
    pub mean_probes: f64,
    pub p95_probes: f64,
    pub p99_probes: f64,
    pub collisions_per_record: f64,
    pub max_cluster: f64,
}

/// How a grid executes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GridMode {
    /// Full timing; configurations run strictly serially.
    Timed,
    /// Skip the clock (timing columns report zero) and run configurations
    /// in parallel.
    Structural,
}

struct CycleStats {
    build_s: f64,
    query_s: f64,
    queries: u64,
    mean: f64,
    p95: u32,
    p99: u32,
    collisions: f64,
    max_cluster: usize,
}

fn run_cycle(config: &ExperimentConfig, seed: u64, timed: bool) -> Result<CycleStats> {
    let workload = config.workload.with_seed(seed);
    let keys = gen_keys(&workload);

    let mut table = config.build_table();
    let mut build_stats: Vec<InsertStats> = Vec::with_capacity(keys.len());
    let build_start = Instant::now();
    for &key in keys.keys() {
        build_stats.push(table.insert(key)?);
    }
    let build_s = if timed {
        build_start.elapsed().as_secs_f64()
    } else {
        0.0
    };

    let collisions = metrics::collision_rate(&build_stats)?;
    let max_cluster = metrics::max_cluster(&table.occupancy());

    let mut queries = gen_queries(&workload, &keys)?;
    let mut hist = ProbeHistogram::new();
    let mut chunk: Vec<crate::keyspace::Key> = Vec::with_capacity(QUERY_CHUNK);
    let mut probes_buf: Vec<u32> = vec![0; QUERY_CHUNK];
    let mut query_s = 0.0f64;
    let mut total_queries = 0u64;
    loop {
        chunk.clear();
        chunk.extend(queries.by_ref().take(QUERY_CHUNK));
        if chunk.is_empty() {
            break;
        }
        total_queries += chunk.len() as u64;
        let start = Instant::now();
        if table.sst_enabled() {
            for (q, out) in chunk.iter().zip(probes_buf.iter_mut()) {
                let r = table.lookup_shaped(*q);
                if !r.is_found() {
                    return Err(Error::LookupMiss { key: q.0 });
                }
                *out = r.probes() as u32;
            }
        } else {
            for (q, out) in chunk.iter().zip(probes_buf.iter_mut()) {
                let r = table.lookup_plain(*q);
                if !r.is_found() {
                    return Err(Error::LookupMiss { key: q.0 });
                }
                *out = r.probes() as u32;
            }
        }
        if timed {
            query_s += start.elapsed().as_secs_f64();
        }
        for &p in &probes_buf[..chunk.len()] {
            hist.record(p as usize);
        }
    }

    Ok(CycleStats {
        build_s,
        query_s,
        queries: total_queries,
        mean: hist.mean(),
        p95: hist.percentile(95.0)?,
        p99: hist.percentile(99.0)?,
        collisions,
        max_cluster,
    })
}

fn execute(config: &ExperimentConfig, timed: bool) -> Result<RunResult> {
    assert!(config.runs >= 1, "at least one measured run");
    let base = config.workload.seed;

    if timed {
        for j in 0..config.warmup_runs {
            run_cycle(config, base.wrapping_add(j as u64), false)?;
        }
    }

    let mut cycles = Vec::with_capacity(config.runs);
    for i in 0..config.runs {
        cycles.push(run_cycle(config, base.wrapping_add(i as u64), timed)?);
    }

    let n = cycles.len() as f64;
    let avg = |f: &dyn Fn(&CycleStats) -> f64| cycles.iter().map(f).sum::<f64>() / n;
    let build_time_s = avg(&|c| c.build_s);
    let query_time_s = avg(&|c| c.query_s);
    let queries_per_cycle = cycles[0].queries;
    let lookup_time_us_per_query = if queries_per_cycle > 0 {
        query_time_s * 1e6 / queries_per_cycle as f64
    } else {
        0.0
    };

    let table = config.build_table();
    let k_reported = if config.sst { config.k } else { 0 };
    Ok(RunResult {
        scheme: config.scheme,
        sst: config.sst,
        k: k_reported,
        metadata_bits: if config.sst {
            metadata_bits(config.k)
        } else {
            0
        },
        m_requested: config.workload.m_requested,
        m_actual: table.capacity(),
        load_factor: config.workload.load_factor,
        q_multiplier: config.workload.query_multiplier,
        mode: config.workload.mode,
        seed: base,
        runs: config.runs,
        build_time_s,
        lookup_time_us_per_query,
        total_time_s: build_time_s + query_time_s,
        mean_probes: avg(&|c| c.mean),
        p95_probes: avg(&|c| c.p95 as f64),
        p99_probes: avg(&|c| c.p99 as f64),
        collisions_per_record: avg(&|c| c.collisions),
        max_cluster: avg(&|c| c.max_cluster as f64),
    })
}

/// Runs one configuration with warm-up and full timing.
pub fn run_single(config: &ExperimentConfig) -> Result<RunResult> {
    execute(config, true)
}

/// Runs every configuration, collecting per-row outcomes in input order.
/// Individual failures do not abort the rest of the grid.
pub fn run_grid(grid: &[ExperimentConfig], mode: GridMode) -> Vec<Result<RunResult>> {
    match mode {
        GridMode::Timed => grid.iter().map(run_single).collect(),
        GridMode::Structural => grid.par_iter().map(|c| execute(c, false)).collect(),
    }
}

/// A baseline row joined with its shaped counterpart. Ratios are
/// baseline / shaped, so values above 1 favor shaping.
#[derive(Debug, Clone, PartialEq)]
pub struct SpeedupRow {
    pub baseline: RunResult,
    pub shaped: RunResult,
    pub lookup_speedup: f64,
    pub total_speedup: f64,
    pub probe_speedup: f64,
    pub p99_probe_speedup: f64,
}

/// Speedup join output; rows that found no partner are reported, not
/// silently dropped.
#[derive(Debug, Clone, Default)]
pub struct SpeedupReport {
    pub rows: Vec<SpeedupRow>,
    pub unpaired: Vec<RunResult>,
}

#[derive(PartialEq, Eq, Hash)]
struct PairKey {
    scheme: ProbeScheme,
    m_requested: usize,
    load_factor_bits: u64,
    q_multiplier: usize,
    mode: QueryMode,
    seed: u64,
}

impl PairKey {
    fn of(r: &RunResult) -> Self {
        PairKey {
            scheme: r.scheme,
            m_requested: r.m_requested,
            load_factor_bits: r.load_factor.to_bits(),
            q_multiplier: r.q_multiplier,
            mode: r.mode,
            seed: r.seed,
        }
    }
}

/// Joins every shaped row against the baseline row sharing its workload
/// parameters and emits the ratio columns.
pub fn compute_speedups(results: &[RunResult]) -> SpeedupReport {
    let mut baselines: HashMap<PairKey, &RunResult> = HashMap::new();
    for r in results.iter().filter(|r| !r.sst) {
        baselines.entry(PairKey::of(r)).or_insert(r);
    }

    let mut report = SpeedupReport::default();
    for r in results.iter().filter(|r| r.sst) {
        match baselines.get(&PairKey::of(r)) {
            Some(base) => report.rows.push(SpeedupRow {
                baseline: (*base).clone(),
                shaped: r.clone(),
                lookup_speedup: base.lookup_time_us_per_query / r.lookup_time_us_per_query,
                total_speedup: base.total_time_s / r.total_time_s,
                probe_speedup: base.mean_probes / r.mean_probes,
                p99_probe_speedup: base.p99_probes / r.p99_probes,
            }),
            None => report.unpaired.push(r.clone()),
        }
    }
    report
}

/// Named experiment grids.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GridPreset {
    /// Full grid: M=5000, four load factors, three query multipliers, both
    /// query modes, shaping off and K in {2,4,8}. 384 rows.
    Main,
    /// Size sweep: M in {5000, 50000, 500000}, load 0.90/0.95, uniform,
    /// Q/N=50, off vs K=8.
    Scale,
    /// Read-intensity sweep: the three sizes at load 0.95, Q/N 50 vs 200,
    /// off vs K=8.
    HighQ,
    /// Amortization: M=5000 at load 0.95, Q/N in {1,20,50}, off vs K=4.
    Amortization,
    /// Query-distribution comparison: uniform vs hotspot at M=5000, load
    /// 0.95, Q/N=50, off vs K=4.
    QueryMode,
}

impl GridPreset {
    pub const ALL: [GridPreset; 5] = [
        GridPreset::Main,
        GridPreset::Scale,
        GridPreset::HighQ,
        GridPreset::Amortization,
        GridPreset::QueryMode,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            GridPreset::Main => "main",
            GridPreset::Scale => "scale",
            GridPreset::HighQ => "highq",
            GridPreset::Amortization => "amortization",
            GridPreset::QueryMode => "querymode",
        }
    }

    /// Expands the preset into configurations. `runs`/`warmup_runs` apply
    /// to every row; `seed` is the base seed.
    pub fn configs(self, seed: u64, runs: usize, warmup_runs: usize) -> Vec<ExperimentConfig> {
        let mut out = Vec::new();
        let mut push = |scheme, variant: Option<usize>, m, alpha, qmult, mode| {
            let w = WorkloadSpec::new(m, alpha, qmult, mode, seed);
            let cfg = match variant {
                None => ExperimentConfig::plain(scheme, w),
                Some(k) => ExperimentConfig::shaped(scheme, k, w),
            };
            out.push(cfg.with_runs(runs, warmup_runs));
        };
        let variants =
            |ks: &'static [usize]| std::iter::once(None).chain(ks.iter().map(|&k| Some(k)));

        match self {
            GridPreset::Main => {
                for scheme in ProbeScheme::ALL {
                    for variant in variants(&[2, 4, 8]) {
                        for alpha in [0.75, 0.85, 0.90, 0.95] {
                            for qmult in [1, 20, 50] {
                                for mode in [QueryMode::Uniform, QueryMode::Hotspot] {
                                    push(scheme, variant, 5000, alpha, qmult, mode);
                                }
                            }
                        }
                    }
                }
            }
            GridPreset::Scale => {
                for scheme in ProbeScheme::ALL {
                    for variant in variants(&[8]) {
                        for m in [5000, 50_000, 500_000] {
                            for alpha in [0.90, 0.95] {
                                push(scheme, variant, m, alpha, 50, QueryMode::Uniform);
                            }
                        }
                    }
                }
            }
            GridPreset::HighQ => {
                for scheme in ProbeScheme::ALL {
                    for variant in variants(&[8]) {
                        for m in [5000, 50_000, 500_000] {
                            for qmult in [50, 200] {
                                push(scheme, variant, m, 0.95, qmult, QueryMode::Uniform);
                            }
                        }
                    }
                }
            }
            GridPreset::Amortization => {
                for scheme in ProbeScheme::ALL {
                    for variant in variants(&[4]) {
                        for qmult in [1, 20, 50] {
                            push(scheme, variant, 5000, 0.95, qmult, QueryMode::Uniform);
                        }
                    }
                }
            }
            GridPreset::QueryMode => {
                for scheme in ProbeScheme::ALL {
                    for variant in variants(&[4]) {
                        for mode in [QueryMode::Uniform, QueryMode::Hotspot] {
                            push(scheme, variant, 5000, 0.95, 50, mode);
                        }
                    }
                }
            }
        }
        out
    }
}

impl std::fmt::Display for GridPreset {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for GridPreset {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        GridPreset::ALL
            .into_iter()
            .find(|p| p.as_str() == s)
            .ok_or_else(|| format!("unknown grid preset `{s}`"))
    }
}
