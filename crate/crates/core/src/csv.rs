//! Result file format: comma-separated, one header line, no quoting (no
//! field ever contains a comma). Reals carry six significant digits. The
//! parser reads back exactly what the emitter writes, so grids can be
//! post-processed (speedup joins) from files alone.

use crate::harness::{RunResult, SpeedupRow};
use crate::table::ProbeScheme;
use crate::workload::QueryMode;
use crate::{Error, Result};
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;
use std::str::FromStr;

pub const RESULT_HEADER: &str = "scheme,sst,k,metadata_bits,m_requested,m_actual,load_factor,\
q_multiplier,query_mode,seed,runs,build_time_s,lookup_time_us_per_query,total_time_s,\
mean_probes,p95_probes,p99_probes,collisions_per_record,max_cluster";

pub const SPEEDUP_HEADER: &str = "scheme,k,m_requested,m_actual,load_factor,q_multiplier,\
query_mode,seed,lookup_speedup,total_speedup,probe_speedup,p99_probe_speedup";

/// Renders with six significant digits, plain notation. The exponent is
/// taken from the standard float formatter rather than a log, so the same
/// value renders identically on every platform.
pub fn sig6(x: f64) -> String {
    if !x.is_finite() {
        return x.to_string();
    }
    let exp = format!("{x:e}");
    let exp: i32 = exp[exp.find('e').expect("exponent marker") + 1..]
        .parse()
        .expect("well-formed exponent");
    let decimals = (5 - exp).max(0) as usize;
    format!("{x:.decimals$}")
}

/// A row type the emitter knows how to lay out.
pub trait CsvRecord {
    fn header() -> &'static str;
    fn csv_row(&self) -> String;
}

impl CsvRecord for RunResult {
    fn header() -> &'static str {
        RESULT_HEADER
    }

    fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            self.scheme,
            if self.sst { "on" } else { "off" },
            self.k,
            self.metadata_bits,
            self.m_requested,
            self.m_actual,
            sig6(self.load_factor),
            self.q_multiplier,
            self.mode,
            self.seed,
            self.runs,
            sig6(self.build_time_s),
            sig6(self.lookup_time_us_per_query),
            sig6(self.total_time_s),
            sig6(self.mean_probes),
            sig6(self.p95_probes),
            sig6(self.p99_probes),
            sig6(self.collisions_per_record),
            sig6(self.max_cluster),
        )
    }
}

impl CsvRecord for SpeedupRow {
    fn header() -> &'static str {
        SPEEDUP_HEADER
    }

    fn csv_row(&self) -> String {
        let s = &self.shaped;
        format!(
            "{},{},{},{},{},{},{},{},{},{},{},{}",
            s.scheme,
            s.k,
            s.m_requested,
            s.m_actual,
            sig6(s.load_factor),
            s.q_multiplier,
            s.mode,
            s.seed,
            sig6(self.lookup_speedup),
            sig6(self.total_speedup),
            sig6(self.probe_speedup),
            sig6(self.p99_probe_speedup),
        )
    }
}

/// Writes a header line and one line per row.
pub fn write_csv<W: Write, R: CsvRecord>(mut w: W, rows: &[R]) -> Result<()> {
    writeln!(w, "{}", R::header())?;
    for row in rows {
        writeln!(w, "{}", row.csv_row())?;
    }
    Ok(())
}

/// Writes the rows to a file, creating or truncating it.
pub fn emit_csv<R: CsvRecord>(rows: &[R], destination: &Path) -> Result<()> {
    let mut w = BufWriter::new(File::create(destination)?);
    write_csv(&mut w, rows)?;
    w.flush()?;
    Ok(())
}

fn parse_field<T: FromStr>(fields: &[&str], idx: usize, line: usize) -> Result<T> {
    let raw = fields.get(idx).ok_or(Error::Parse {
        line,
        msg: format!("missing column {idx}"),
    })?;
    raw.parse().map_err(|_| Error::Parse {
        line,
        msg: format!("bad value `{raw}` in column {idx}"),
    })
}

/// Parses one result row (sans header).
fn parse_result_line(text: &str, line: usize) -> Result<RunResult> {
    let fields: Vec<&str> = text.split(',').collect();
    if fields.len() != 19 {
        return Err(Error::Parse {
            line,
            msg: format!("expected 19 columns, found {}", fields.len()),
        });
    }
    let sst = match fields[1] {
        "on" => true,
        "off" => false,
        other => {
            return Err(Error::Parse {
                line,
                msg: format!("bad sst flag `{other}`"),
            })
        }
    };
    Ok(RunResult {
        scheme: parse_field::<ProbeScheme>(&fields, 0, line)?,
        sst,
        k: parse_field(&fields, 2, line)?,
        metadata_bits: parse_field(&fields, 3, line)?,
        m_requested: parse_field(&fields, 4, line)?,
        m_actual: parse_field(&fields, 5, line)?,
        load_factor: parse_field(&fields, 6, line)?,
        q_multiplier: parse_field(&fields, 7, line)?,
        mode: parse_field::<QueryMode>(&fields, 8, line)?,
        seed: parse_field(&fields, 9, line)?,
        runs: parse_field(&fields, 10, line)?,
        build_time_s: parse_field(&fields, 11, line)?,
        lookup_time_us_per_query: parse_field(&fields, 12, line)?,
        total_time_s: parse_field(&fields, 13, line)?,
        mean_probes: parse_field(&fields, 14, line)?,
        p95_probes: parse_field(&fields, 15, line)?,
        p99_probes: parse_field(&fields, 16, line)?,
        collisions_per_record: parse_field(&fields, 17, line)?,
        max_cluster: parse_field(&fields, 18, line)?,
    })
}

/// Reads a results file produced by [`emit_csv`].
pub fn parse_results_csv(path: &Path) -> Result<Vec<RunResult>> {
    let reader = BufReader::new(File::open(path)?);
    let mut rows = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if i == 0 {
            if line != RESULT_HEADER {
                return Err(Error::Parse {
                    line: 1,
                    msg: "unrecognized header".into(),
                });
            }
            continue;
        }
        if line.is_empty() {
            continue;
        }
        rows.push(parse_result_line(&line, i + 1)?);
    }
    Ok(rows)
}
