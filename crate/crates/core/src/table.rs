//! Open-addressed tables under four probe schemes, plain or shaped.
//!
//! A table is a fixed array of slots; the requested capacity is rounded up
//! to the next prime so double hashing walks a full cycle and quadratic
//! probing keeps its half-coverage guarantee. The home index of a stored
//! value applies the keyspace finalizer and reduces mod the capacity — the
//! same function whether the value is a raw key or a shaped form, so plain
//! and shaped builds are directly comparable.
//!
//! Plain insertion walks the scheme's probe sequence to the first empty
//! slot (Robin Hood additionally swaps with poorer residents along the
//! way). Shaped insertion first scores every candidate form by its probe
//! cost — the number of slots its sequence inspects before reaching an
//! empty one — then inserts the cheapest candidate and records its tag in
//! the slot.
//!
//! Shaped lookup cannot know the tag in advance; it is a stored verifier,
//! not a route. Candidates are therefore scanned in lockstep: one probe
//! step per still-live candidate per round, in ascending tag order within
//! a round, each candidate retiring at its own empty slot (or Robin Hood
//! displacement exit). A match requires both the shaped value and the tag
//! to agree. The probe count accumulates every slot inspected, so a miss
//! costs exactly the sum of the per-candidate termination walks.

use crate::keyspace::{mix64, Key, ShapingFamily, ShapingTag};
use crate::{Error, Result};

/// XOR applied before the finalizer to derive the double-hashing step, so
/// the step is independent of the home index.
const SECONDARY_SEED: u64 = 0xD6E8_FEB8_6659_FD93;

/// The probe sequence family. Robin Hood uses the linear step with
/// displacement-ordered placement.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ProbeScheme {
    Linear,
    Quadratic,
    Double,
    RobinHood,
}

impl ProbeScheme {
    pub const ALL: [ProbeScheme; 4] = [
        ProbeScheme::Linear,
        ProbeScheme::Quadratic,
        ProbeScheme::Double,
        ProbeScheme::RobinHood,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ProbeScheme::Linear => "linear",
            ProbeScheme::Quadratic => "quadratic",
            ProbeScheme::Double => "double",
            ProbeScheme::RobinHood => "robinhood",
        }
    }
}

impl std::fmt::Display for ProbeScheme {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for ProbeScheme {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "linear" => Ok(ProbeScheme::Linear),
            "quadratic" => Ok(ProbeScheme::Quadratic),
            "double" => Ok(ProbeScheme::Double),
            "robinhood" => Ok(ProbeScheme::RobinHood),
            other => Err(format!("unknown probe scheme `{other}`")),
        }
    }
}

/// One table slot. An occupied slot holds the stored 64-bit value (the raw
/// key when shaping is off, the shaped form when it is on), the shaping tag
/// that produced it, and its displacement: the position the slot has in the
/// value's own probe sequence. Displacement drives Robin Hood placement and
/// is informational elsewhere.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Slot {
    Empty,
    Occupied {
        stored: u64,
        tag: ShapingTag,
        displacement: u32,
    },
}

impl Slot {
    pub fn is_occupied(&self) -> bool {
        matches!(self, Slot::Occupied { .. })
    }
}

/// Per-insert accounting. `probes` counts the slots inspected by the
/// placement walk itself; for shaped inserts the candidate scoring scans
/// are excluded (they are CPU work charged to the build phase, not probe
/// traffic attributed to the record). `collided` records whether the first
/// probed slot of the placed candidate was already occupied.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct InsertStats {
    pub probes: usize,
    pub collided: bool,
    pub chosen_tag: ShapingTag,
}

/// Lookup outcome with the number of slots inspected.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Lookup {
    Found { probes: usize, tag: ShapingTag },
    NotFound { probes: usize },
}

/// Per-candidate walk state for the lockstep shaped lookup.
#[derive(Debug, Clone, Copy, Default)]
struct Candidate {
    shaped: u64,
    home: usize,
    h2: usize,
    live: bool,
}

impl Lookup {
    pub fn probes(&self) -> usize {
        match *self {
            Lookup::Found { probes, .. } | Lookup::NotFound { probes } => probes,
        }
    }

    pub fn is_found(&self) -> bool {
        matches!(self, Lookup::Found { .. })
    }
}

/// Home slot of a stored value: finalizer, then reduction mod `m`.
#[inline]
pub fn home_index(stored_value: u64, m: usize) -> usize {
    debug_assert!(m >= 1);
    (mix64(stored_value) % m as u64) as usize
}

/// Double-hashing step size in `1..=m-1`; with prime `m` every step size is
/// coprime to the capacity, so the sequence visits all `m` slots.
#[inline]
pub fn secondary_step(stored_value: u64, m: usize) -> usize {
    debug_assert!(m >= 2);
    1 + (mix64(stored_value ^ SECONDARY_SEED) % (m as u64 - 1)) as usize
}

/// Slot visited at `step` of a value's probe sequence. `h2` is only
/// consulted by double hashing.
#[inline]
pub fn probe_index(scheme: ProbeScheme, home: usize, step: usize, h2: usize, m: usize) -> usize {
    let (home, step, h2, m) = (home as u64, step as u64, h2 as u64, m as u64);
    let offset = match scheme {
        ProbeScheme::Linear | ProbeScheme::RobinHood => step,
        ProbeScheme::Quadratic => step.wrapping_mul(step),
        ProbeScheme::Double => step.wrapping_mul(h2),
    };
    ((home + offset % m) % m) as usize
}

/// Fixed-capacity open-addressed slot array. No deletions, no resizing, no
/// duplicate keys: build once, read many.
#[derive(Debug, Clone)]
pub struct Table {
    m_requested: usize,
    slots: Vec<Slot>,
    count: usize,
    scheme: ProbeScheme,
    family: Option<ShapingFamily>,
}

impl Table {
    /// Plain table (shaping off). Capacity is the smallest prime at or
    /// above the request.
    pub fn new(m_requested: usize, scheme: ProbeScheme) -> Table {
        assert!(m_requested >= 1, "capacity request must be positive");
        let m = next_prime(m_requested.max(2));
        Table {
            m_requested,
            slots: vec![Slot::Empty; m],
            count: 0,
            scheme,
            family: None,
        }
    }

    /// Shaped table: inserts go through `family`'s candidates.
    pub fn new_shaped(m_requested: usize, scheme: ProbeScheme, family: ShapingFamily) -> Table {
        let mut t = Table::new(m_requested, scheme);
        t.family = Some(family);
        t
    }

    pub fn requested_capacity(&self) -> usize {
        self.m_requested
    }

    /// Actual slot count: the smallest prime >= the requested capacity.
    pub fn capacity(&self) -> usize {
        self.slots.len()
    }

    pub fn len(&self) -> usize {
        self.count
    }

    pub fn is_empty(&self) -> bool {
        self.count == 0
    }

    pub fn scheme(&self) -> ProbeScheme {
        self.scheme
    }

    pub fn sst_enabled(&self) -> bool {
        self.family.is_some()
    }

    pub fn family(&self) -> Option<&ShapingFamily> {
        self.family.as_ref()
    }

    pub fn slot(&self, index: usize) -> &Slot {
        &self.slots[index]
    }

    /// Occupancy bitmap, slot order.
    pub fn occupancy(&self) -> Vec<bool> {
        self.slots.iter().map(Slot::is_occupied).collect()
    }

    #[inline]
    fn h2_for(&self, stored_value: u64) -> usize {
        match self.scheme {
            ProbeScheme::Double => secondary_step(stored_value, self.capacity()),
            _ => 0,
        }
    }

    /// Probe cost of a value: slots inspected along its sequence until the
    /// first empty one, without mutating the table. Cost 1 means the home
    /// slot is free. `None` when a full cycle finds no empty slot.
    #[inline]
    fn cost_scan(&self, stored_value: u64) -> Option<usize> {
        let m = self.capacity();
        let home = home_index(stored_value, m);
        let h2 = self.h2_for(stored_value);
        for i in 0..m {
            let idx = probe_index(self.scheme, home, i, h2, m);
            if !self.slots[idx].is_occupied() {
                return Some(i + 1);
            }
        }
        None
    }

    /// Public probe cost; refused when no empty slot terminates the scan
    /// (always the case on a full table, and possible for quadratic probing
    /// on a non-full one since its sequence covers only half the slots).
    pub fn probe_cost(&self, stored_value: u64) -> Result<usize> {
        if self.count == self.capacity() {
            return Err(Error::TableFull {
                capacity: self.capacity(),
            });
        }
        self.cost_scan(stored_value).ok_or(Error::NoEmptySlot)
    }

    /// Scheme insertion walk for an already-chosen stored value.
    fn insert_value(&mut self, stored: u64, tag: ShapingTag) -> Result<InsertStats> {
        let m = self.capacity();
        if self.count == m {
            return Err(Error::TableFull { capacity: m });
        }
        let home = home_index(stored, m);
        let collided = self.slots[home].is_occupied();

        if self.scheme == ProbeScheme::RobinHood {
            // Linear walk carrying whichever element is currently homeless;
            // a resident with a smaller displacement than the carried
            // element is never disturbed, a richer one gets swapped out and
            // continues down the chain.
            let mut cur = Slot::Occupied {
                stored,
                tag,
                displacement: 0,
            };
            let mut pos = home;
            let mut probes = 0usize;
            loop {
                probes += 1;
                match self.slots[pos] {
                    Slot::Empty => {
                        self.slots[pos] = cur;
                        self.count += 1;
                        return Ok(InsertStats {
                            probes,
                            collided,
                            chosen_tag: tag,
                        });
                    }
                    Slot::Occupied { displacement, .. } => {
                        let cur_d = match cur {
                            Slot::Occupied { displacement, .. } => displacement,
                            Slot::Empty => unreachable!(),
                        };
                        if displacement < cur_d {
                            std::mem::swap(&mut self.slots[pos], &mut cur);
                        }
                        if let Slot::Occupied {
                            ref mut displacement,
                            ..
                        } = cur
                        {
                            *displacement += 1;
                        }
                        pos = if pos + 1 == m { 0 } else { pos + 1 };
                    }
                }
            }
        }

        let h2 = self.h2_for(stored);
        for i in 0..m {
            let idx = probe_index(self.scheme, home, i, h2, m);
            if !self.slots[idx].is_occupied() {
                self.slots[idx] = Slot::Occupied {
                    stored,
                    tag,
                    displacement: i as u32,
                };
                self.count += 1;
                return Ok(InsertStats {
                    probes: i + 1,
                    collided,
                    chosen_tag: tag,
                });
            }
        }
        Err(Error::NoEmptySlot)
    }

    /// Baseline insert: the key is stored as-is at the first empty slot of
    /// its probe sequence. Keys are assumed distinct across inserts.
    pub fn insert_plain(&mut self, key: Key) -> Result<InsertStats> {
        self.insert_value(key.0, ShapingTag::default())
    }

    /// Shaped insert: scores every candidate form by probe cost, takes the
    /// minimum (ties to the lowest tag), and inserts that form with its tag.
    /// The chosen candidate's home is occupied — a collision — exactly when
    /// every candidate's home is.
    pub fn insert_shaped(&mut self, key: Key) -> Result<InsertStats> {
        let family = self
            .family
            .as_ref()
            .expect("insert_shaped on a table without a shaping family");
        if self.count == self.capacity() {
            return Err(Error::TableFull {
                capacity: self.capacity(),
            });
        }
        let mut best: Option<(usize, usize, u64)> = None;
        for i in 0..family.k() {
            let shaped = family.shape_raw(key.0, i);
            let cost = self.cost_scan(shaped).unwrap_or(usize::MAX);
            if best.is_none_or(|(c, _, _)| cost < c) {
                best = Some((cost, i, shaped));
            }
        }
        let (cost, tag_idx, shaped) = best.expect("family order is at least 1");
        if cost == usize::MAX {
            return Err(Error::NoEmptySlot);
        }
        self.insert_value(shaped, ShapingTag::new(tag_idx as u8))
    }

    /// Dispatches on whether the table was built with shaping.
    pub fn insert(&mut self, key: Key) -> Result<InsertStats> {
        if self.sst_enabled() {
            self.insert_shaped(key)
        } else {
            self.insert_plain(key)
        }
    }

    /// Baseline lookup: walk the key's probe sequence until the stored
    /// value matches, an empty slot proves absence, or (Robin Hood) a
    /// resident poorer than the query's current displacement proves it.
    pub fn lookup_plain(&self, key: Key) -> Lookup {
        let m = self.capacity();
        let home = home_index(key.0, m);
        let h2 = self.h2_for(key.0);
        let robin = self.scheme == ProbeScheme::RobinHood;
        let mut probes = 0usize;
        for i in 0..m {
            let idx = probe_index(self.scheme, home, i, h2, m);
            probes += 1;
            match self.slots[idx] {
                Slot::Empty => return Lookup::NotFound { probes },
                Slot::Occupied {
                    stored,
                    tag,
                    displacement,
                } => {
                    if stored == key.0 {
                        return Lookup::Found { probes, tag };
                    }
                    if robin && (displacement as usize) < i {
                        return Lookup::NotFound { probes };
                    }
                }
            }
        }
        Lookup::NotFound { probes }
    }

    /// Shaped lookup: lockstep scan over all candidate forms, ascending tag
    /// within each probe depth. A slot matches when it holds the candidate's
    /// shaped value under the candidate's own tag; un-shaping the stored
    /// value with the returned tag reconstructs the key exactly.
    pub fn lookup_shaped(&self, key: Key) -> Lookup {
        let family = self
            .family
            .as_ref()
            .expect("lookup_shaped on a table without a shaping family");
        let k = family.k();
        // orders up to 8 cover the benchmark grid; keep them off the heap
        if k <= 8 {
            let mut states = [Candidate::default(); 8];
            self.init_candidates(key, family, &mut states[..k]);
            self.lockstep_scan(&mut states[..k])
        } else {
            let mut states = vec![Candidate::default(); k];
            self.init_candidates(key, family, &mut states);
            self.lockstep_scan(&mut states)
        }
    }

    fn init_candidates(&self, key: Key, family: &ShapingFamily, states: &mut [Candidate]) {
        let m = self.capacity();
        for (i, state) in states.iter_mut().enumerate() {
            let shaped = family.shape_raw(key.0, i);
            *state = Candidate {
                shaped,
                home: home_index(shaped, m),
                h2: self.h2_for(shaped),
                live: true,
            };
        }
    }

    fn lockstep_scan(&self, states: &mut [Candidate]) -> Lookup {
        let m = self.capacity();
        let robin = self.scheme == ProbeScheme::RobinHood;
        let mut probes = 0usize;
        for depth in 0..m {
            let mut any_live = false;
            for (tag_idx, cand) in states.iter_mut().enumerate() {
                if !cand.live {
                    continue;
                }
                any_live = true;
                let idx = probe_index(self.scheme, cand.home, depth, cand.h2, m);
                probes += 1;
                match self.slots[idx] {
                    Slot::Empty => cand.live = false,
                    Slot::Occupied {
                        stored,
                        tag,
                        displacement,
                    } => {
                        if stored == cand.shaped && tag.index() == tag_idx {
                            return Lookup::Found { probes, tag };
                        }
                        if robin && (displacement as usize) < depth {
                            cand.live = false;
                        }
                    }
                }
            }
            if !any_live {
                break;
            }
        }
        Lookup::NotFound { probes }
    }

    /// Dispatches on whether the table was built with shaping.
    pub fn lookup(&self, key: Key) -> Lookup {
        if self.sst_enabled() {
            self.lookup_shaped(key)
        } else {
            self.lookup_plain(key)
        }
    }
}

fn is_prime(n: usize) -> bool {
    if n < 2 {
        return false;
    }
    if n.is_multiple_of(2) {
        return n == 2;
    }
    let mut d = 3;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 2;
    }
    true
}

fn next_prime(mut n: usize) -> usize {
    while !is_prime(n) {
        n += 1;
    }
    n
}
