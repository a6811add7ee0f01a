//! `sstbench`: run shaped-vs-plain hash index experiments and emit CSV.
//!
//! Subcommands:
//! * `run` — a single configuration given by flags.
//! * `grid` — a named preset grid (`main`, `scale`, `highq`, `amortization`,
//!   `querymode`).
//! * `speedup` — join a results CSV into baseline/shaped speedup rows.
//!
//! `--structural-only` skips the wall clock (timing columns report zero)
//! and lets grid rows run in parallel; everything else is deterministic
//! for a fixed seed. Exit status is nonzero when any row aborts.

use clap::{Parser, Subcommand, ValueEnum};
use sst_index::csv::{emit_csv, parse_results_csv, write_csv, CsvRecord};
use sst_index::{
    compute_speedups, run_grid, ExperimentConfig, GridMode, GridPreset, ProbeScheme, QueryMode,
    RunResult, WorkloadSpec,
};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "sstbench", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum SchemeArg {
    Linear,
    Quadratic,
    Double,
    Robinhood,
}

impl From<SchemeArg> for ProbeScheme {
    fn from(s: SchemeArg) -> ProbeScheme {
        match s {
            SchemeArg::Linear => ProbeScheme::Linear,
            SchemeArg::Quadratic => ProbeScheme::Quadratic,
            SchemeArg::Double => ProbeScheme::Double,
            SchemeArg::Robinhood => ProbeScheme::RobinHood,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Uniform,
    Hotspot,
}

impl From<ModeArg> for QueryMode {
    fn from(m: ModeArg) -> QueryMode {
        match m {
            ModeArg::Uniform => QueryMode::Uniform,
            ModeArg::Hotspot => QueryMode::Hotspot,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum OnOff {
    On,
    Off,
}

#[derive(Clone, Copy, ValueEnum)]
enum PresetArg {
    Main,
    Scale,
    Highq,
    Amortization,
    Querymode,
}

impl From<PresetArg> for GridPreset {
    fn from(p: PresetArg) -> GridPreset {
        match p {
            PresetArg::Main => GridPreset::Main,
            PresetArg::Scale => GridPreset::Scale,
            PresetArg::Highq => GridPreset::HighQ,
            PresetArg::Amortization => GridPreset::Amortization,
            PresetArg::Querymode => GridPreset::QueryMode,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Run one configuration.
    Run {
        #[arg(long, value_enum)]
        scheme: SchemeArg,
        /// Shaping layer on or off.
        #[arg(long, value_enum, default_value = "off")]
        sst: OnOff,
        /// Shaping order (candidates per key) when the layer is on.
        #[arg(long, default_value_t = 8, value_parser = parse_order)]
        k: usize,
        /// Requested table capacity; rounded up to the next prime.
        #[arg(long, default_value_t = 5000)]
        m: usize,
        #[arg(long, default_value_t = 0.95)]
        load_factor: f64,
        /// Queries per stored record (Q/N).
        #[arg(long, default_value_t = 50)]
        qmult: usize,
        #[arg(long, value_enum, default_value = "uniform")]
        mode: ModeArg,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        /// Measured runs per configuration.
        #[arg(long, default_value_t = 8)]
        runs: usize,
        /// Unmeasured warm-up runs.
        #[arg(long, default_value_t = 1)]
        warmup: usize,
        /// Output CSV path; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Skip timing (timing columns report zero) and allow parallel rows.
        #[arg(long)]
        structural_only: bool,
    },
    /// Run a named preset grid.
    Grid {
        #[arg(value_enum)]
        preset: PresetArg,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long, default_value_t = 8)]
        runs: usize,
        #[arg(long, default_value_t = 1)]
        warmup: usize,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        structural_only: bool,
    },
    /// Join a results CSV into speedup rows (baseline over shaped).
    Speedup {
        /// Results CSV produced by `run` or `grid`.
        input: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn parse_order(raw: &str) -> Result<usize, String> {
    let k: usize = raw
        .parse()
        .map_err(|_| format!("bad shaping order `{raw}`"))?;
    if [1, 2, 4, 8].contains(&k) {
        Ok(k)
    } else {
        Err(format!("shaping order must be one of 1, 2, 4, 8 (got {k})"))
    }
}

fn write_rows<R: CsvRecord>(rows: &[R], out: Option<&PathBuf>) -> sst_index::Result<()> {
    match out {
        Some(path) => emit_csv(rows, path),
        None => write_csv(std::io::stdout().lock(), rows),
    }
}

/// Runs a grid, writes the successful rows, reports failures per row.
fn execute_grid(grid: &[ExperimentConfig], structural: bool, out: Option<&PathBuf>) -> ExitCode {
    let mode = if structural {
        GridMode::Structural
    } else {
        GridMode::Timed
    };
    let outcomes = run_grid(grid, mode);
    let mut rows: Vec<RunResult> = Vec::with_capacity(outcomes.len());
    let mut failed = 0usize;
    for (cfg, outcome) in grid.iter().zip(outcomes) {
        match outcome {
            Ok(row) => rows.push(row),
            Err(e) => {
                failed += 1;
                eprintln!(
                    "row aborted: scheme={} sst={} k={} m={} load={} qmult={} mode={}: {e}",
                    cfg.scheme,
                    if cfg.sst { "on" } else { "off" },
                    cfg.k,
                    cfg.workload.m_requested,
                    cfg.workload.load_factor,
                    cfg.workload.query_multiplier,
                    cfg.workload.mode
                );
            }
        }
    }
    if let Err(e) = write_rows(&rows, out) {
        eprintln!("error: {e}");
        return ExitCode::FAILURE;
    }
    if failed > 0 {
        eprintln!("{failed} of {} rows aborted", grid.len());
        return ExitCode::FAILURE;
    }
    ExitCode::SUCCESS
}

fn main() -> ExitCode {
    match Cli::parse().command {
        Command::Run {
            scheme,
            sst,
            k,
            m,
            load_factor,
            qmult,
            mode,
            seed,
            runs,
            warmup,
            out,
            structural_only,
        } => {
            let workload = WorkloadSpec::new(m, load_factor, qmult, mode.into(), seed);
            let config = match sst {
                OnOff::Off => ExperimentConfig::plain(scheme.into(), workload),
                OnOff::On => ExperimentConfig::shaped(scheme.into(), k, workload),
            };
            execute_grid(
                &[config.with_runs(runs, warmup)],
                structural_only,
                out.as_ref(),
            )
        }
        Command::Grid {
            preset,
            seed,
            runs,
            warmup,
            out,
            structural_only,
        } => {
            let grid = GridPreset::from(preset).configs(seed, runs, warmup);
            execute_grid(&grid, structural_only, out.as_ref())
        }
        Command::Speedup { input, out } => {
            let rows = match parse_results_csv(&input) {
                Ok(rows) => rows,
                Err(e) => {
                    eprintln!("error: {e}");
                    return ExitCode::FAILURE;
                }
            };
            let report = compute_speedups(&rows);
            for row in &report.unpaired {
                eprintln!(
                    "unpaired row excluded: scheme={} k={} m={} load={} qmult={} mode={} seed={}",
                    row.scheme,
                    row.k,
                    row.m_requested,
                    row.load_factor,
                    row.q_multiplier,
                    row.mode,
                    row.seed
                );
            }
            if let Err(e) = write_rows(&report.rows, out.as_ref()) {
                eprintln!("error: {e}");
                return ExitCode::FAILURE;
            }
            ExitCode::SUCCESS
        }
    }
}
