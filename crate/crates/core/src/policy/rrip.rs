//! Re-reference interval prediction: SRRIP, BRRIP and set-dueling DRRIP.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::cache::{Access, BlockState, ReplacementPolicy, Victim, MAX_RRPV};

/// Insertion RRPV for SRRIP ("long" re-reference interval).
pub const SRRIP_INSERT: u8 = MAX_RRPV - 1;

/// BRRIP inserts at `SRRIP_INSERT` once every this many fills on average.
const BRRIP_EPSILON: u32 = 32;

pub const PSEL_MAX: u16 = 1023;
pub const PSEL_INIT: u16 = 512;

const DUEL_PERIOD: usize = 64;
const SRRIP_LEADER_OFFSET: usize = 0;
const BRRIP_LEADER_OFFSET: usize = 33;

/// Ages every block until one reaches `MAX_RRPV`, then returns the first such way.
pub fn rrip_choose_victim(ways: &mut [BlockState]) -> usize {
    loop {
        if let Some(w) = ways.iter().position(|b| b.rrpv >= MAX_RRPV) {
            return w;
        }
        for b in ways.iter_mut() {
            b.rrpv += 1;
        }
    }
}

pub fn brrip_insert_rrpv<R: Rng>(rng: &mut R) -> u8 {
    if rng.random_range(0..BRRIP_EPSILON) == 0 {
        SRRIP_INSERT
    } else {
        MAX_RRPV
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Insertion {
    Srrip,
    Brrip,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DuelRole {
    SrripLeader,
    BrripLeader,
    Follower,
}

/// Fixed leader sets: one SRRIP and one BRRIP leader per 64 sets.
pub fn duel_role(set: usize) -> DuelRole {
    match set % DUEL_PERIOD {
        SRRIP_LEADER_OFFSET => DuelRole::SrripLeader,
        BRRIP_LEADER_OFFSET => DuelRole::BrripLeader,
        _ => DuelRole::Follower,
    }
}

/// 10-bit saturating policy selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Psel(u16);

impl Default for Psel {
    fn default() -> Self {
        Psel(PSEL_INIT)
    }
}

impl Psel {
    pub fn new(value: u16) -> Self {
        Psel(value.min(PSEL_MAX))
    }

    pub fn value(self) -> u16 {
        self.0
    }

    pub fn increment(&mut self) {
        self.0 = (self.0 + 1).min(PSEL_MAX);
    }

    pub fn decrement(&mut self) {
        self.0 = self.0.saturating_sub(1);
    }

    /// Counts a miss in `set`; only leader sets move the selector.
    pub fn record_miss(&mut self, set: usize) {
        match duel_role(set) {
            DuelRole::SrripLeader => self.increment(),
            DuelRole::BrripLeader => self.decrement(),
            DuelRole::Follower => {}
        }
    }
}

pub fn drrip_policy_for_set(set: usize, psel: Psel) -> Insertion {
    match duel_role(set) {
        DuelRole::SrripLeader => Insertion::Srrip,
        DuelRole::BrripLeader => Insertion::Brrip,
        DuelRole::Follower if psel.value() < PSEL_INIT => Insertion::Srrip,
        DuelRole::Follower => Insertion::Brrip,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RripMode {
    Static,
    Bimodal,
    Dynamic,
}

pub struct Rrip {
    mode: RripMode,
    psel: Psel,
    rng: ChaCha8Rng,
    srrip_fills: u64,
    brrip_fills: u64,
}

impl Rrip {
    pub fn new(mode: RripMode, seed: u64) -> Self {
        Self {
            mode,
            psel: Psel::default(),
            rng: ChaCha8Rng::seed_from_u64(seed),
            srrip_fills: 0,
            brrip_fills: 0,
        }
    }

    pub fn srrip() -> Self {
        Self::new(RripMode::Static, 0)
    }

    pub fn brrip(seed: u64) -> Self {
        Self::new(RripMode::Bimodal, seed)
    }

    pub fn drrip(seed: u64) -> Self {
        Self::new(RripMode::Dynamic, seed)
    }

    pub fn psel(&self) -> Psel {
        self.psel
    }

    fn insertion_for(&self, set: usize) -> Insertion {
        match self.mode {
            RripMode::Static => Insertion::Srrip,
            RripMode::Bimodal => Insertion::Brrip,
            RripMode::Dynamic => drrip_policy_for_set(set, self.psel),
        }
    }
}

impl ReplacementPolicy for Rrip {
    fn name(&self) -> &str {
        match self.mode {
            RripMode::Static => "srrip",
            RripMode::Bimodal => "brrip",
            RripMode::Dynamic => "drrip",
        }
    }

    fn on_hit(&mut self, _: &Access<'_>, ways: &mut [BlockState], way: usize) {
        ways[way].rrpv = 0;
    }

    fn choose_victim(&mut self, _: &Access<'_>, ways: &mut [BlockState]) -> Victim {
        Victim::way(rrip_choose_victim(ways))
    }

    fn on_insert(&mut self, access: &Access<'_>, ways: &mut [BlockState], way: usize) {
        let insertion = self.insertion_for(access.set);
        if self.mode == RripMode::Dynamic {
            // Every fill is a miss; leader misses steer the duel.
            self.psel.record_miss(access.set);
        }
        ways[way].rrpv = match insertion {
            Insertion::Srrip => {
                self.srrip_fills += 1;
                SRRIP_INSERT
            }
            Insertion::Brrip => {
                self.brrip_fills += 1;
                brrip_insert_rrpv(&mut self.rng)
            }
        };
    }

    fn counters(&self) -> BTreeMap<String, u64> {
        let mut c = BTreeMap::new();
        c.insert("srrip_fills".into(), self.srrip_fills);
        c.insert("brrip_fills".into(), self.brrip_fills);
        if self.mode == RripMode::Dynamic {
            c.insert("psel".into(), self.psel.value() as u64);
        }
        c
    }
}
