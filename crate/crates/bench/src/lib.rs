//! Shared fixtures for the microbenchmarks.

use sst_index::{gen_keys, Key, ProbeScheme, QueryMode, ShapingFamily, Table, WorkloadSpec};

/// Deterministic key set for a dense table of the requested size.
pub fn fixture_keys(m: usize, load_factor: f64, seed: u64) -> Vec<Key> {
    let spec = WorkloadSpec::new(m, load_factor, 1, QueryMode::Uniform, seed);
    gen_keys(&spec).keys().to_vec()
}

/// Table built over the fixture keys, plain when `k` is `None`.
pub fn fixture_table(scheme: ProbeScheme, k: Option<usize>, keys: &[Key], m: usize) -> Table {
    let mut table = match k {
        None => Table::new(m, scheme),
        Some(k) => Table::new_shaped(m, scheme, ShapingFamily::new(k)),
    };
    for &key in keys {
        table.insert(key).expect("fixture build");
    }
    table
}
