//! Signature-based hit predictor on top of SRRIP victim selection.

use std::collections::BTreeMap;

use crate::cache::{Access, BlockState, CacheGeometry, ReplacementPolicy, Victim, MAX_RRPV};
use crate::hash::xor_fold;

use super::rrip::{rrip_choose_victim, SRRIP_INSERT};

const SIGNATURE_BITS: u32 = 14;
pub const SHCT_ENTRIES: usize = 1 << SIGNATURE_BITS;
const SHCT_MAX: u8 = 7;
/// Weakly live: a fresh signature is not predicted dead.
pub const SHCT_INIT: u8 = 1;

pub fn ship_signature(pc: u64) -> usize {
    xor_fold(pc, SIGNATURE_BITS) as usize
}

/// Signature history counter table: 3-bit saturating counters.
#[derive(Debug, Clone)]
pub struct ShipTable {
    counters: Vec<u8>,
}

impl Default for ShipTable {
    fn default() -> Self {
        Self {
            counters: vec![SHCT_INIT; SHCT_ENTRIES],
        }
    }
}

impl ShipTable {
    pub fn get(&self, signature: usize) -> u8 {
        self.counters[signature]
    }

    pub fn set(&mut self, signature: usize, value: u8) {
        self.counters[signature] = value.min(SHCT_MAX);
    }

    /// Trains on an eviction: reused blocks strengthen their signature,
    /// dead ones weaken it.
    pub fn train(&mut self, signature: usize, reused: bool) {
        let c = &mut self.counters[signature];
        if reused {
            *c = (*c + 1).min(SHCT_MAX);
        } else {
            *c = c.saturating_sub(1);
        }
    }

    /// Insertion RRPV: distant for predicted-dead signatures.
    pub fn insert_rrpv(&self, signature: usize) -> u8 {
        if self.counters[signature] == 0 {
            MAX_RRPV
        } else {
            SRRIP_INSERT
        }
    }

    pub fn counters(&self) -> &[u8] {
        &self.counters
    }
}

pub struct Ship {
    table: ShipTable,
    assoc: usize,
    /// Per block: reused during the current residency.
    outcome: Vec<bool>,
    signature: Vec<u16>,
    predicted_dead: u64,
}

impl Ship {
    pub fn new(geom: CacheGeometry) -> Self {
        Self {
            table: ShipTable::default(),
            assoc: geom.associativity(),
            outcome: vec![false; geom.capacity_blocks()],
            signature: vec![0; geom.capacity_blocks()],
            predicted_dead: 0,
        }
    }

    pub fn table(&self) -> &ShipTable {
        &self.table
    }

    fn slot(&self, set: usize, way: usize) -> usize {
        set * self.assoc + way
    }
}

impl ReplacementPolicy for Ship {
    fn name(&self) -> &str {
        "ship"
    }

    fn on_hit(&mut self, access: &Access<'_>, ways: &mut [BlockState], way: usize) {
        let slot = self.slot(access.set, way);
        self.outcome[slot] = true;
        ways[way].rrpv = 0;
    }

    fn choose_victim(&mut self, _: &Access<'_>, ways: &mut [BlockState]) -> Victim {
        Victim::way(rrip_choose_victim(ways))
    }

    fn on_evict(&mut self, access: &Access<'_>, _: &[BlockState], way: usize) {
        let slot = self.slot(access.set, way);
        self.table.train(self.signature[slot] as usize, self.outcome[slot]);
    }

    fn on_insert(&mut self, access: &Access<'_>, ways: &mut [BlockState], way: usize) {
        let slot = self.slot(access.set, way);
        let sig = ship_signature(access.record.pc);
        self.signature[slot] = sig as u16;
        self.outcome[slot] = false;
        let rrpv = self.table.insert_rrpv(sig);
        if rrpv == MAX_RRPV {
            self.predicted_dead += 1;
        }
        ways[way].rrpv = rrpv;
    }

    fn counters(&self) -> BTreeMap<String, u64> {
        BTreeMap::from([("predicted_dead_fills".to_string(), self.predicted_dead)])
    }
}
