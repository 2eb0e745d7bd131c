//! Online Belady's MIN emulation on sampled sets.
//!
//! Each sampled set keeps an occupancy vector (one counter per recorded
//! access) and an address cache mapping a line to its last recorded
//! position. Slot `i` stands for the interval between recorded accesses `i`
//! and `i + 1`; a reuse of a line last seen at `p` is a MIN hit iff every
//! slot in `[p, now)` still has room, in which case those slots are charged.
//! Lines that are never reused occupy nothing, so the emulation models MIN
//! with bypass.
//!
//! Decisions train a PC counter table (cache-friendly vs. averse) and
//! completed MIN residencies feed a per-region hit-count table.

use std::collections::{HashMap, VecDeque};

use crate::hash::xor_fold;

/// One sampled set per this many sets.
pub const SAMPLE_PERIOD: usize = 64;
/// History window length, in multiples of the associativity.
pub const WINDOW_FACTOR: usize = 8;

pub const PC_TABLE_BITS: u32 = 13;
pub const PC_COUNTER_MAX: u8 = 7;
pub const PC_COUNTER_INIT: u8 = 4;
pub const FRIENDLY_THRESHOLD: u8 = 4;

pub const REGION_SHIFT: u32 = 17;
pub const REGION_TABLE_BITS: u32 = 10;
pub const REGION_HISTORY: usize = 4;
/// Expected hit count for a region with no history.
pub const DEFAULT_EXPECTED_HITS: u8 = 1;
const EXPECTED_HITS_MAX: u8 = 7;

pub fn is_sampled_set(set: usize) -> bool {
    set.is_multiple_of(SAMPLE_PERIOD)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MinDecision {
    /// First access to the line, or its last access fell out of the window.
    ColdMiss,
    Hit,
    Miss,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PcClass {
    Friendly,
    Averse,
}

/// 3-bit saturating counters indexed by a 13-bit PC hash.
#[derive(Debug, Clone)]
pub struct PcCounterTable {
    counters: Vec<u8>,
}

impl Default for PcCounterTable {
    fn default() -> Self {
        Self {
            counters: vec![PC_COUNTER_INIT; 1 << PC_TABLE_BITS],
        }
    }
}

impl PcCounterTable {
    pub fn index(pc: u64) -> usize {
        xor_fold(pc, PC_TABLE_BITS) as usize
    }

    pub fn counter(&self, pc: u64) -> u8 {
        self.counters[Self::index(pc)]
    }

    pub fn set_counter(&mut self, pc: u64, value: u8) {
        self.counters[Self::index(pc)] = value.min(PC_COUNTER_MAX);
    }

    pub fn train(&mut self, pc: u64, friendly: bool) {
        let c = &mut self.counters[Self::index(pc)];
        if friendly {
            *c = (*c + 1).min(PC_COUNTER_MAX);
        } else {
            *c = c.saturating_sub(1);
        }
    }

    pub fn classify(&self, pc: u64) -> PcClass {
        pc_classify(pc, self)
    }

    pub fn counters(&self) -> &[u8] {
        &self.counters
    }
}

pub fn pc_classify(pc: u64, table: &PcCounterTable) -> PcClass {
    if table.counter(pc) >= FRIENDLY_THRESHOLD {
        PcClass::Friendly
    } else {
        PcClass::Averse
    }
}

pub fn region_id(addr: u64) -> u64 {
    addr >> REGION_SHIFT
}

#[derive(Debug, Clone, Copy, Default)]
struct RegionEntry {
    region: u64,
    /// Oldest first.
    ring: [u32; REGION_HISTORY],
    len: u8,
}

impl RegionEntry {
    fn values(&self) -> &[u32] {
        &self.ring[..self.len as usize]
    }
}

/// Direct-mapped table of recent MIN hit counts per 128 KB region.
#[derive(Debug, Clone)]
pub struct RegionHitTable {
    entries: Vec<RegionEntry>,
}

impl Default for RegionHitTable {
    fn default() -> Self {
        Self {
            entries: vec![RegionEntry::default(); 1 << REGION_TABLE_BITS],
        }
    }
}

impl RegionHitTable {
    fn slot(region: u64) -> usize {
        xor_fold(region, REGION_TABLE_BITS) as usize
    }

    /// Recorded hit counts for the region holding `addr`, oldest first.
    pub fn history(&self, addr: u64) -> &[u32] {
        let region = region_id(addr);
        let e = &self.entries[Self::slot(region)];
        if e.len > 0 && e.region == region {
            e.values()
        } else {
            &[]
        }
    }

    pub fn expected_hits(&self, addr: u64) -> u8 {
        region_expected_hits(addr, self)
    }

    pub fn record_eviction(&mut self, addr: u64, hits: u32) {
        region_record_eviction(addr, hits, self)
    }
}

/// Round-half-up mean of `values`, or `None` when empty.
pub fn rounded_mean(values: &[u32]) -> Option<u64> {
    if values.is_empty() {
        return None;
    }
    let sum: u64 = values.iter().map(|&v| v as u64).sum();
    let n = values.len() as u64;
    Some((2 * sum + n) / (2 * n))
}

pub fn region_expected_hits(addr: u64, table: &RegionHitTable) -> u8 {
    match rounded_mean(table.history(addr)) {
        Some(mean) => mean.min(EXPECTED_HITS_MAX as u64) as u8,
        None => DEFAULT_EXPECTED_HITS,
    }
}

pub fn region_record_eviction(addr: u64, hits: u32, table: &mut RegionHitTable) {
    let region = region_id(addr);
    let e = &mut table.entries[RegionHitTable::slot(region)];
    if e.region != region || e.len == 0 {
        *e = RegionEntry {
            region,
            ..Default::default()
        };
    }
    if e.len as usize == REGION_HISTORY {
        e.ring.rotate_left(1);
        e.ring[REGION_HISTORY - 1] = hits;
    } else {
        e.ring[e.len as usize] = hits;
        e.len += 1;
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct LineEntry {
    /// Absolute position of the line's last recorded access.
    pos: u64,
    pc: u64,
    addr: u64,
    /// MIN hits since the line's current emulated residency began.
    min_hits: u32,
}

/// Result of one [`SampledSetHistory::access`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OptGenOutcome {
    pub decision: MinDecision,
    /// `(pc, friendly)` training to apply to the PC table.
    pub train: Option<(u64, bool)>,
    /// Emulated residencies that ended on this access: `(addr, hits)`.
    pub completed: Vec<(u64, u32)>,
}

/// OPTGen state for one sampled set.
#[derive(Debug, Clone)]
pub struct SampledSetHistory {
    assoc: u32,
    capacity: Option<usize>,
    occupancy: VecDeque<u32>,
    /// Line whose last recorded access is this slot, if still live.
    owners: VecDeque<Option<u64>>,
    /// Absolute position of `occupancy[0]`.
    base: u64,
    lines: HashMap<u64, LineEntry>,
}

impl SampledSetHistory {
    /// Window of `8 × assoc` slots.
    pub fn new(assoc: usize) -> Self {
        Self::with_capacity(assoc, Some(WINDOW_FACTOR * assoc))
    }

    pub fn unbounded(assoc: usize) -> Self {
        Self::with_capacity(assoc, None)
    }

    pub fn with_capacity(assoc: usize, capacity: Option<usize>) -> Self {
        assert!(assoc > 0, "associativity must be positive");
        assert!(capacity != Some(0), "window must hold at least one slot");
        Self {
            assoc: assoc as u32,
            capacity,
            occupancy: VecDeque::new(),
            owners: VecDeque::new(),
            base: 0,
            lines: HashMap::new(),
        }
    }

    pub fn occupancy(&self) -> Vec<u32> {
        self.occupancy.iter().copied().collect()
    }

    pub fn tracked_lines(&self) -> usize {
        self.lines.len()
    }

    pub fn window_len(&self) -> usize {
        self.occupancy.len()
    }

    pub fn access(&mut self, tag: u64, addr: u64, pc: u64) -> OptGenOutcome {
        let now = self.base + self.occupancy.len() as u64;
        let mut completed = Vec::new();
        let mut train = None;
        let mut min_hits = 0;

        let decision = match self.lines.get(&tag).copied() {
            None => MinDecision::ColdMiss,
            Some(line) => {
                let start = (line.pos - self.base) as usize;
                self.owners[start] = None;
                if self.occupancy.range(start..).all(|&o| o < self.assoc) {
                    for o in self.occupancy.range_mut(start..) {
                        *o += 1;
                    }
                    min_hits = line.min_hits + 1;
                    train = Some((line.pc, true));
                    MinDecision::Hit
                } else {
                    train = Some((line.pc, false));
                    completed.push((line.addr, line.min_hits));
                    MinDecision::Miss
                }
            }
        };

        self.lines.insert(
            tag,
            LineEntry {
                pos: now,
                pc,
                addr,
                min_hits,
            },
        );
        self.occupancy.push_back(0);
        self.owners.push_back(Some(tag));

        if self.capacity.is_some_and(|cap| self.occupancy.len() > cap) {
            self.occupancy.pop_front();
            if let Some(Some(old)) = self.owners.pop_front() {
                let line = self.lines.remove(&old).expect("slot owner is tracked");
                completed.push((line.addr, line.min_hits));
            }
            self.base += 1;
        }

        OptGenOutcome {
            decision,
            train,
            completed,
        }
    }
}

/// Per-access OPTGen step without the side tables.
pub fn optgen_access(history: &mut SampledSetHistory, tag: u64, pc: u64) -> MinDecision {
    history.access(tag, 0, pc).decision
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SamplerCounters {
    pub cold: u64,
    pub hits: u64,
    pub misses: u64,
}

/// OPTGen over the sampled sets of a cache, plus the tables it trains.
#[derive(Debug, Clone)]
pub struct MinSampler {
    assoc: usize,
    histories: HashMap<usize, SampledSetHistory>,
    pub pcs: PcCounterTable,
    pub regions: RegionHitTable,
    pub counters: SamplerCounters,
}

impl MinSampler {
    pub fn new(assoc: usize) -> Self {
        Self {
            assoc,
            histories: HashMap::new(),
            pcs: PcCounterTable::default(),
            regions: RegionHitTable::default(),
            counters: SamplerCounters::default(),
        }
    }

    /// Runs OPTGen if `set` is sampled and applies the resulting training.
    pub fn observe(&mut self, set: usize, tag: u64, addr: u64, pc: u64) -> Option<MinDecision> {
        if !is_sampled_set(set) {
            return None;
        }
        let assoc = self.assoc;
        let history = self
            .histories
            .entry(set)
            .or_insert_with(|| SampledSetHistory::new(assoc));
        let outcome = history.access(tag, addr, pc);
        if let Some((pc, friendly)) = outcome.train {
            self.pcs.train(pc, friendly);
        }
        for (addr, hits) in outcome.completed {
            self.regions.record_eviction(addr, hits);
        }
        match outcome.decision {
            MinDecision::ColdMiss => self.counters.cold += 1,
            MinDecision::Hit => self.counters.hits += 1,
            MinDecision::Miss => self.counters.misses += 1,
        }
        Some(outcome.decision)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use MinDecision::*;

    fn run(history: &mut SampledSetHistory, tags: &[u64]) -> Vec<MinDecision> {
        tags.iter().map(|&t| optgen_access(history, t, 0)).collect()
    }

    #[test]
    fn sampled_sets() {
        assert!(is_sampled_set(0));
        assert!(!is_sampled_set(63));
        assert!(is_sampled_set(64));
        assert_eq!((0..2048).filter(|&s| is_sampled_set(s)).count(), 32);
    }

    #[test]
    fn optgen_two_way_example() {
        let mut h = SampledSetHistory::unbounded(2);
        assert_eq!(
            run(&mut h, &[1, 2, 3, 1, 2]),
            vec![ColdMiss, ColdMiss, ColdMiss, Hit, Hit]
        );
        assert_eq!(h.occupancy(), vec![1, 2, 2, 1, 0]);
    }

    #[test]
    fn optgen_direct_mapped_example() {
        let mut h = SampledSetHistory::unbounded(1);
        assert_eq!(run(&mut h, &[1, 2, 2, 1]), vec![ColdMiss, ColdMiss, Hit, Miss]);
    }

    #[test]
    fn first_access_is_cold() {
        let mut h = SampledSetHistory::new(4);
        assert_eq!(optgen_access(&mut h, 99, 0), ColdMiss);
    }

    #[test]
    fn aged_out_line_is_cold() {
        let mut h = SampledSetHistory::with_capacity(1, Some(3));
        assert_eq!(run(&mut h, &[1, 2, 3, 4, 1]), vec![ColdMiss; 5]);
        assert_eq!(h.window_len(), 3);
        assert!(h.tracked_lines() <= 3);
    }

    #[test]
    fn window_is_bounded() {
        let mut h = SampledSetHistory::new(2);
        for i in 0..100 {
            h.access(i % 7, 0, 0);
            assert!(h.window_len() <= 16);
            assert!(h.tracked_lines() <= 16);
            assert!(h.occupancy().iter().all(|&o| o <= 2));
        }
    }

    #[test]
    fn training_credits_previous_pc() {
        let mut h = SampledSetHistory::unbounded(1);
        let out = h.access(1, 0x40, 0xA);
        assert_eq!(out.train, None);
        h.access(2, 0x80, 0xB);
        let out = h.access(2, 0x80, 0xC);
        assert_eq!(out.train, Some((0xB, true)));
        let out = h.access(1, 0x40, 0xD);
        assert_eq!(out.decision, Miss);
        assert_eq!(out.train, Some((0xA, false)));
        assert_eq!(out.completed, vec![(0x40, 0)]);
    }

    #[test]
    fn completed_residency_reports_hits() {
        let mut h = SampledSetHistory::with_capacity(2, Some(4));
        h.access(1, 0x40, 0);
        h.access(1, 0x40, 0);
        h.access(1, 0x40, 0);
        let mut done = Vec::new();
        for t in 10..16 {
            done.extend(h.access(t, t << 6, 0).completed);
        }
        assert!(done.contains(&(0x40, 2)));
    }

    #[test]
    fn pc_classification() {
        let mut t = PcCounterTable::default();
        assert_eq!(t.classify(0x1234), PcClass::Friendly);
        for _ in 0..8 {
            t.train(0x1234, false);
        }
        assert_eq!(t.counter(0x1234), 0);
        assert_eq!(t.classify(0x1234), PcClass::Averse);
        for _ in 0..4 {
            t.train(0x1234, true);
        }
        assert_eq!(t.classify(0x1234), PcClass::Friendly);
        for _ in 0..10 {
            t.train(0x1234, true);
        }
        assert_eq!(t.counter(0x1234), 7);
    }

    #[test]
    fn region_expected_hits_examples() {
        let addr = 5 << REGION_SHIFT;
        let mut t = RegionHitTable::default();
        assert_eq!(region_expected_hits(addr, &t), 1);
        for h in [2, 1, 1, 0] {
            t.record_eviction(addr, h);
        }
        assert_eq!(t.history(addr), &[2, 1, 1, 0]);
        assert_eq!(region_expected_hits(addr, &t), 1);
        t.record_eviction(addr + 64, 3);
        assert_eq!(t.history(addr), &[1, 1, 0, 3]);

        let mut t = RegionHitTable::default();
        for h in [7, 7, 7, 7] {
            t.record_eviction(addr, h);
        }
        assert_eq!(region_expected_hits(addr, &t), 7);
        t.record_eviction(addr, 100);
        assert_eq!(region_expected_hits(addr, &t), 7);

        let mut t = RegionHitTable::default();
        for h in [0, 1, 2, 3] {
            t.record_eviction(addr, h);
        }
        assert_eq!(region_expected_hits(addr, &t), 2);
    }

    #[test]
    fn region_tag_mismatch_resets() {
        let a = 3 << REGION_SHIFT;
        // Same table slot, different region.
        let b = (3 ^ (1 << REGION_TABLE_BITS) ^ 1) << REGION_SHIFT;
        assert_eq!(RegionHitTable::slot(region_id(a)), RegionHitTable::slot(region_id(b)));
        let mut t = RegionHitTable::default();
        for h in [2, 2, 2] {
            t.record_eviction(a, h);
        }
        t.record_eviction(b, 5);
        assert_eq!(t.history(b), &[5]);
        assert_eq!(t.history(a), &[] as &[u32]);
        assert_eq!(region_expected_hits(a, &t), 1);
    }

    #[test]
    fn rounding_is_half_up() {
        assert_eq!(rounded_mean(&[0, 1, 2, 3]), Some(2));
        assert_eq!(rounded_mean(&[1, 2]), Some(2));
        assert_eq!(rounded_mean(&[1, 1, 1, 2]), Some(1));
        assert_eq!(rounded_mean(&[]), None);
    }
}
