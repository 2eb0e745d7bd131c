//! Set-associative LLC engine.
//!
//! The engine owns tags and bookkeeping (recency, residency hit counts, the
//! PC that last touched a block). Replacement policies plug in through
//! [`ReplacementPolicy`] and own their prediction state; the per-block
//! `rrpv` and `efh` fields live in [`BlockState`] so policies can share the
//! victim-selection helpers.

mod engine;

pub use engine::{simulate, simulate_with, ReplacementEvent, Residency, SimOptions, SimOutput};

use std::collections::BTreeMap;

use thiserror::Error;

use crate::trace::AccessRecord;

/// Largest value a 3-bit RRPV or EFH counter can hold.
pub const MAX_RRPV: u8 = 7;
pub const MAX_EFH: u8 = 7;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GeometryError {
    #[error("num_sets must be a positive power of two, got {0}")]
    NumSets(usize),
    #[error("associativity must be positive")]
    Associativity,
    #[error("block_offset_bits must be in 1..=32, got {0}")]
    BlockBits(u32),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CacheGeometry {
    num_sets: usize,
    associativity: usize,
    block_offset_bits: u32,
}

impl Default for CacheGeometry {
    /// 2 MB, 16-way, 64 B blocks.
    fn default() -> Self {
        Self {
            num_sets: 2048,
            associativity: 16,
            block_offset_bits: 6,
        }
    }
}

impl CacheGeometry {
    pub fn new(num_sets: usize, associativity: usize, block_offset_bits: u32) -> Result<Self, GeometryError> {
        if num_sets == 0 || !num_sets.is_power_of_two() {
            return Err(GeometryError::NumSets(num_sets));
        }
        if associativity == 0 {
            return Err(GeometryError::Associativity);
        }
        if !(1..=32).contains(&block_offset_bits) {
            return Err(GeometryError::BlockBits(block_offset_bits));
        }
        Ok(Self {
            num_sets,
            associativity,
            block_offset_bits,
        })
    }

    pub fn num_sets(&self) -> usize {
        self.num_sets
    }

    pub fn associativity(&self) -> usize {
        self.associativity
    }

    pub fn block_offset_bits(&self) -> u32 {
        self.block_offset_bits
    }

    pub fn capacity_blocks(&self) -> usize {
        self.num_sets * self.associativity
    }

    fn set_bits(&self) -> u32 {
        self.num_sets.trailing_zeros()
    }

    /// Block number: the address with the byte offset stripped.
    pub fn block(&self, addr: u64) -> u64 {
        addr >> self.block_offset_bits
    }

    pub fn set_index(&self, addr: u64) -> usize {
        (self.block(addr) & (self.num_sets as u64 - 1)) as usize
    }

    pub fn tag(&self, addr: u64) -> u64 {
        addr.checked_shr(self.block_offset_bits + self.set_bits()).unwrap_or(0)
    }
}

/// Per-way metadata.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct BlockState {
    pub valid: bool,
    pub tag: u64,
    /// Re-reference prediction value, 3 bits.
    pub rrpv: u8,
    /// Expected further hits, 3-bit count-down counter.
    pub efh: u8,
    /// Global touch order; larger is more recent.
    pub recency_stamp: u64,
    /// Trace position of the fill.
    pub insert_seq: u64,
    pub residency_hits: u32,
    pub last_pc: u64,
    /// Full block number, kept for event logs and region lookups.
    pub block: u64,
}

/// Context handed to every policy callback.
#[derive(Debug, Clone, Copy)]
pub struct Access<'a> {
    /// Index of the record in the trace.
    pub pos: usize,
    pub set: usize,
    pub tag: u64,
    pub block: u64,
    pub record: &'a AccessRecord,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Victim {
    Evict {
        way: usize,
        /// Set when no resident block carried an averse prediction, i.e. the
        /// policy fell back to its secondary ordering.
        no_averse: bool,
    },
    Bypass,
}

impl Victim {
    pub fn way(way: usize) -> Self {
        Victim::Evict { way, no_averse: false }
    }
}

/// Replacement policy callbacks, invoked by [`simulate`] in this order per access:
/// `observe`, then either `on_hit`, or (on a miss with a full set)
/// `choose_victim` → `on_evict` → `on_insert`, or (invalid way available)
/// `on_insert` directly.
pub trait ReplacementPolicy: Send {
    fn name(&self) -> &str;

    /// Every access, before lookup.
    fn observe(&mut self, _access: &Access<'_>) {}

    fn on_hit(&mut self, access: &Access<'_>, ways: &mut [BlockState], way: usize);

    /// Called only when every way of the set is valid.
    fn choose_victim(&mut self, access: &Access<'_>, ways: &mut [BlockState]) -> Victim;

    /// The victim is still in place when this runs.
    fn on_evict(&mut self, _access: &Access<'_>, _ways: &[BlockState], _way: usize) {}

    /// The engine has already written tag and bookkeeping for the new block.
    fn on_insert(&mut self, access: &Access<'_>, ways: &mut [BlockState], way: usize);

    /// Policy-specific counters reported alongside [`SimStats`].
    fn counters(&self) -> BTreeMap<String, u64> {
        BTreeMap::new()
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SimStats {
    pub accesses: u64,
    pub hits: u64,
    pub misses: u64,
    pub evictions: u64,
    pub bypasses: u64,
    pub replacements_total: u64,
    pub replacements_no_averse: u64,
    pub per_policy: BTreeMap<String, u64>,
}

impl SimStats {
    pub fn check_invariants(&self) -> bool {
        self.accesses == self.hits + self.misses
            && self.replacements_no_averse <= self.replacements_total
            && self.replacements_total <= self.misses
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SimError {
    #[error("policy {policy} chose way {way} in a {associativity}-way set")]
    VictimOutOfRange {
        policy: String,
        way: usize,
        associativity: usize,
    },
    #[error("statistics invariant violated after access {0}")]
    StatsInvariant(usize),
}
