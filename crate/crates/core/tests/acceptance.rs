//! Acceptance suite. One test per criterion; each prints a single
//! PASS line with the measured quantities when it holds and panics with a
//! FAIL line otherwise. Every tolerance is pinned here, in code.
//!
//! Reference configuration throughout: requested capacity 5000 (actual
//! 5003), load factor 0.95, uniform keys, base seed 42, eight measured
//! runs per configuration.

use sst_index::csv::{write_csv, RESULT_HEADER};
use sst_index::{
    analytic_collision_rate, collision_rate, gen_keys, gen_queries, max_cluster, run_grid, shape,
    unshape, ExperimentConfig, GridMode, GridPreset, Key, ProbeScheme, QueryMode, ShapingFamily,
    ShapingTag, Table, WorkloadSpec,
};
use std::time::Instant;

const BASE_SEED: u64 = 42;
const SEEDS: std::ops::Range<u64> = BASE_SEED..BASE_SEED + 8;

fn workload(m: usize, alpha: f64, qmult: usize, mode: QueryMode, seed: u64) -> WorkloadSpec {
    WorkloadSpec::new(m, alpha, qmult, mode, seed)
}

/// Builds one table over the seed's key set; returns the table and its
/// per-insert stats.
fn build(
    scheme: ProbeScheme,
    k: Option<usize>,
    m: usize,
    alpha: f64,
    seed: u64,
) -> (Table, Vec<sst_index::InsertStats>, Vec<Key>) {
    let keys = gen_keys(&workload(m, alpha, 1, QueryMode::Uniform, seed))
        .keys()
        .to_vec();
    let mut table = match k {
        None => Table::new(m, scheme),
        Some(k) => Table::new_shaped(m, scheme, ShapingFamily::new(k)),
    };
    let stats: Vec<_> = keys.iter().map(|&key| table.insert(key).unwrap()).collect();
    (table, stats, keys)
}

fn seed_avg(mut f: impl FnMut(u64) -> f64) -> f64 {
    let mut total = 0.0;
    for seed in SEEDS {
        total += f(seed);
    }
    total / 8.0
}

#[test]
fn criterion_01_bijection_suite() {
    let start = Instant::now();
    let family = ShapingFamily::new(8);
    let mut failures = 0u64;
    let w = workload(1_000_000, 1.0, 1, QueryMode::Uniform, 0xB1B1);
    let keys = gen_keys(&w);
    for &key in keys.keys() {
        for i in 0..8u8 {
            let tag = ShapingTag::new(i);
            let shaped = shape(key, tag, &family).unwrap();
            if unshape(shaped, tag, &family).unwrap() != key {
                failures += 1;
            }
        }
    }
    let elapsed = start.elapsed().as_secs_f64();
    assert_eq!(
        failures, 0,
        "criterion 01 FAIL: {failures} round-trip failures"
    );
    assert!(
        elapsed < 10.0,
        "criterion 01 FAIL: bijection suite took {elapsed:.1}s (budget 10s)"
    );
    println!("criterion 01 PASS: 1e6 keys x 8 tags round-trip exactly, 0 failures, {elapsed:.2}s");
}

#[test]
fn criterion_02_table1_collision_reproduction() {
    let start = Instant::now();
    // (shaping order, expected, band); order 1 plays the baseline's role
    // in the analytic oracle
    let rows = [
        (None, 0.475, 0.02),
        (Some(2), 0.302, 0.02),
        (Some(4), 0.160, 0.015),
        (Some(8), 0.072, 0.01),
    ];
    let mut report = String::new();
    for (variant, expected, band) in rows {
        let empirical = seed_avg(|seed| {
            let (_, stats, _) = build(ProbeScheme::Linear, variant, 5000, 0.95, seed);
            collision_rate(&stats).unwrap()
        });
        let k = variant.unwrap_or(1);
        let oracle = analytic_collision_rate(0.95, k as u32);
        assert!(
            (empirical - expected).abs() <= band,
            "criterion 02 FAIL: K={k} collisions/record {empirical:.4} vs published {expected} +- {band}"
        );
        assert!(
            (empirical - oracle).abs() <= band,
            "criterion 02 FAIL: K={k} collisions/record {empirical:.4} vs analytic {oracle:.4} +- {band}"
        );
        report.push_str(&format!(" K{k}={empirical:.4}(oracle {oracle:.4})"));

        // cross-scheme mean, reported for comparison: collision accounting
        // is scheme-independent, so it lands in the same band
        let cross = seed_avg(|seed| {
            ProbeScheme::ALL
                .iter()
                .map(|&s| {
                    let (_, stats, _) = build(s, variant, 5000, 0.95, seed);
                    collision_rate(&stats).unwrap()
                })
                .sum::<f64>()
                / 4.0
        });
        assert!(
            (cross - expected).abs() <= band,
            "criterion 02 FAIL: K={k} cross-scheme mean {cross:.4} outside band"
        );
    }
    let elapsed = start.elapsed().as_secs_f64();
    assert!(
        elapsed < 60.0,
        "criterion 02 FAIL: took {elapsed:.1}s (budget 60s)"
    );
    println!("criterion 02 PASS:{report}, {elapsed:.1}s");
}

#[test]
fn criterion_03_cluster_collapse() {
    let cluster_of = |variant: Option<usize>| {
        seed_avg(|seed| {
            let (table, _, _) = build(ProbeScheme::Linear, variant, 5000, 0.95, seed);
            max_cluster(&table.occupancy()) as f64
        })
    };
    let off = cluster_of(None);
    let k4 = cluster_of(Some(4));
    let k8 = cluster_of(Some(8));
    assert!(
        off >= 3.0 * k4,
        "criterion 03 FAIL: max cluster off={off:.1} < 3x K4={k4:.1}"
    );
    assert!(
        off >= 3.0 * k8,
        "criterion 03 FAIL: max cluster off={off:.1} < 3x K8={k8:.1}"
    );
    println!(
        "criterion 03 PASS: max cluster off={off:.1}, K4={k4:.1} ({:.1}x), K8={k8:.1} ({:.1}x)",
        off / k4,
        off / k8
    );
}

#[test]
fn criterion_04_probe_tail_collapse() {
    let w = workload(5000, 0.95, 50, QueryMode::Uniform, BASE_SEED);
    let grid = [
        ExperimentConfig::plain(ProbeScheme::Linear, w),
        ExperimentConfig::shaped(ProbeScheme::Linear, 8, w),
    ];
    let rows: Vec<_> = run_grid(&grid, GridMode::Structural)
        .into_iter()
        .map(|r| r.unwrap())
        .collect();
    let (off, k8) = (&rows[0], &rows[1]);
    assert!(
        off.p99_probes >= 4.0 * k8.p99_probes,
        "criterion 04 FAIL: p99 off={} < 4x K8={}",
        off.p99_probes,
        k8.p99_probes
    );
    assert!(
        off.mean_probes >= 2.0 * k8.mean_probes,
        "criterion 04 FAIL: mean off={} < 2x K8={}",
        off.mean_probes,
        k8.mean_probes
    );
    println!(
        "criterion 04 PASS: p99 {:.2} vs {:.2} ({:.1}x >= 4x), mean {:.3} vs {:.3} ({:.1}x >= 2x)",
        off.p99_probes,
        k8.p99_probes,
        off.p99_probes / k8.p99_probes,
        off.mean_probes,
        k8.mean_probes,
        off.mean_probes / k8.mean_probes
    );
}

#[test]
fn criterion_05_monotonicity_sweep() {
    for scheme in ProbeScheme::ALL {
        for alpha in [0.75, 0.85, 0.90, 0.95] {
            let mut previous = f64::INFINITY;
            for k in [1usize, 2, 4, 8] {
                let empirical = seed_avg(|seed| {
                    let (_, stats, _) = build(scheme, Some(k), 5000, alpha, seed);
                    collision_rate(&stats).unwrap()
                });
                let oracle = analytic_collision_rate(alpha, k as u32);
                assert!(
                    empirical < previous,
                    "criterion 05 FAIL: {scheme} a={alpha}: K={k} rate {empirical:.4} did not decrease"
                );
                assert!(
                    (empirical - oracle).abs() <= 0.02,
                    "criterion 05 FAIL: {scheme} a={alpha} K={k}: {empirical:.4} vs a^K/(K+1)={oracle:.4}"
                );
                previous = empirical;
            }
        }
    }
    println!(
        "criterion 05 PASS: collisions/record strictly decreasing in K and within 0.02 of a^K/(K+1) for 4 schemes x 4 load factors"
    );
}

#[test]
fn criterion_06_order_one_control() {
    for scheme in ProbeScheme::ALL {
        let mut coll = [0.0f64; 2];
        let mut mean = [0.0f64; 2];
        for (side, variant) in [None, Some(1)].into_iter().enumerate() {
            coll[side] = seed_avg(|seed| {
                let (_, stats, _) = build(scheme, variant, 5000, 0.95, seed);
                collision_rate(&stats).unwrap()
            });
            mean[side] = seed_avg(|seed| {
                let (table, _, keys) = build(scheme, variant, 5000, 0.95, seed);
                let total: usize = keys.iter().map(|&k| table.lookup(k).probes()).sum();
                total as f64 / keys.len() as f64
            });
        }
        assert!(
            (coll[0] - coll[1]).abs() <= 0.02,
            "criterion 06 FAIL: {scheme} collision rate plain={:.4} K1={:.4}",
            coll[0],
            coll[1]
        );
        let rel = (mean[0] - mean[1]).abs() / mean[0];
        assert!(
            rel <= 0.10,
            "criterion 06 FAIL: {scheme} mean probes plain={:.3} K1={:.3} ({:.1}% apart)",
            mean[0],
            mean[1],
            rel * 100.0
        );
        println!(
            "criterion 06 PASS: {scheme} collision {:.4} vs {:.4}, mean probes {:.3} vs {:.3} ({:.1}%)",
            coll[0],
            coll[1],
            mean[0],
            mean[1],
            rel * 100.0
        );
    }
}

#[test]
fn criterion_07_scale_grid() {
    let start = Instant::now();
    let grid = GridPreset::Scale.configs(BASE_SEED, 8, 1);
    assert_eq!(grid.len(), 48);
    let results = run_grid(&grid, GridMode::Structural);
    let mut rows = Vec::new();
    for (cfg, r) in grid.iter().zip(results) {
        match r {
            Ok(row) => rows.push(row),
            Err(e) => panic!(
                "criterion 07 FAIL: {} m={} failed: {e}",
                cfg.scheme, cfg.workload.m_requested
            ),
        }
    }
    let pick = |sst: bool| {
        rows.iter()
            .find(|r| {
                r.scheme == ProbeScheme::Linear
                    && r.m_requested == 500_000
                    && r.load_factor == 0.95
                    && r.sst == sst
            })
            .unwrap()
    };
    let (off, k8) = (pick(false), pick(true));
    assert!(
        off.max_cluster >= 5.0 * k8.max_cluster,
        "criterion 07 FAIL: M=500000 max cluster off={:.1} < 5x K8={:.1}",
        off.max_cluster,
        k8.max_cluster
    );
    let elapsed = start.elapsed().as_secs_f64();
    assert!(
        elapsed < 600.0,
        "criterion 07 FAIL: scale grid took {elapsed:.0}s (budget 600s)"
    );
    println!(
        "criterion 07 PASS: 48-row scale grid completed in {elapsed:.0}s; M=500000 max cluster {:.1} vs {:.1} ({:.1}x >= 5x)",
        off.max_cluster,
        k8.max_cluster,
        off.max_cluster / k8.max_cluster
    );
}

#[test]
fn criterion_08_structural_determinism() {
    let strip_timing = |text: &str| -> String {
        text.lines()
            .map(|line| {
                let fields: Vec<&str> = line.split(',').collect();
                fields
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| !(11..=13).contains(i))
                    .map(|(_, f)| *f)
                    .collect::<Vec<_>>()
                    .join(",")
            })
            .collect::<Vec<_>>()
            .join("\n")
    };
    // two independent executions of the main grid, structural mode
    let emit = || {
        let grid = GridPreset::Main.configs(BASE_SEED, 8, 1);
        let rows: Vec<_> = run_grid(&grid, GridMode::Structural)
            .into_iter()
            .map(|r| r.unwrap())
            .collect();
        let mut buf = Vec::new();
        write_csv(&mut buf, &rows).unwrap();
        String::from_utf8(buf).unwrap()
    };
    let (a, b) = (emit(), emit());
    let (sa, sb) = (strip_timing(&a), strip_timing(&b));
    assert_eq!(
        sa, sb,
        "criterion 08 FAIL: structural columns differ between invocations"
    );
    // sanity: the emitted grid really is the 384-row main grid
    assert_eq!(a.lines().count(), 385);
    assert!(a.starts_with(RESULT_HEADER));
    println!(
        "criterion 08 PASS: two main-grid invocations byte-identical after deleting the timing columns ({} rows)",
        a.lines().count() - 1
    );
}

#[test]
fn criterion_09_total_probe_work() {
    // mechanism behind the timing claims: identical workload, strictly
    // less probe traffic with shaping on
    let mut totals = [0u64; 2];
    for (side, variant) in [None, Some(8)].into_iter().enumerate() {
        for seed in SEEDS {
            let (table, stats, _) = build(ProbeScheme::Linear, variant, 5000, 0.95, seed);
            let w = workload(5000, 0.95, 50, QueryMode::Uniform, seed);
            let keys = gen_keys(&w);
            let mut probes: u64 = stats.iter().map(|s| s.probes as u64).sum();
            for q in gen_queries(&w, &keys).unwrap() {
                let r = table.lookup(q);
                assert!(r.is_found());
                probes += r.probes() as u64;
            }
            totals[side] += probes;
        }
    }
    assert!(
        totals[1] < totals[0],
        "criterion 09 FAIL: K8 probe work {} not below baseline {}",
        totals[1],
        totals[0]
    );
    println!(
        "criterion 09 PASS: total probe work (build + 50N lookups, 8 seeds) off={} K8={} ({:.2}x)",
        totals[0],
        totals[1],
        totals[0] as f64 / totals[1] as f64
    );
}

#[test]
fn criterion_10_amortization_identity() {
    for variant in [None, Some(8)] {
        let cfg = |qmult: usize| {
            let w = workload(5000, 0.95, qmult, QueryMode::Uniform, BASE_SEED);
            match variant {
                None => ExperimentConfig::plain(ProbeScheme::Linear, w),
                Some(k) => ExperimentConfig::shaped(ProbeScheme::Linear, k, w),
            }
        };
        let rows: Vec<_> = run_grid(&[cfg(50), cfg(200)], GridMode::Timed)
            .into_iter()
            .map(|r| r.unwrap())
            .collect();
        let (a, b) = (&rows[0], &rows[1]);
        // structural columns are bit-identical across the Q/N change
        assert_eq!(
            a.collisions_per_record.to_bits(),
            b.collisions_per_record.to_bits(),
            "criterion 10 FAIL: collisions/record changed with Q/N"
        );
        assert_eq!(
            a.max_cluster.to_bits(),
            b.max_cluster.to_bits(),
            "criterion 10 FAIL: max cluster changed with Q/N"
        );
        assert_eq!(a.metadata_bits, b.metadata_bits);
        assert_eq!(a.m_actual, b.m_actual);
        // only the query phase grows: 4x the queries takes decisively
        // longer in aggregate
        let phase_a = a.lookup_time_us_per_query * (50.0 * 4750.0);
        let phase_b = b.lookup_time_us_per_query * (200.0 * 4750.0);
        assert!(
            phase_b > 1.5 * phase_a,
            "criterion 10 FAIL: query phase did not scale with Q/N ({phase_a:.0}us vs {phase_b:.0}us)"
        );
        assert_eq!((a.q_multiplier, b.q_multiplier), (50, 200));
    }
    println!(
        "criterion 10 PASS: Q/N 50 -> 200 leaves structural columns bit-identical and scales only the query phase"
    );
}
