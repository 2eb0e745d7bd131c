//! Hawkeye and EHC.
//!
//! Both share the sampled MIN emulation and the PC classifier. Blocks touched
//! by an averse PC sit at the maximum RRPV and are evicted first. When no
//! such block exists, Hawkeye evicts the oldest friendly block, while EHC
//! evicts the block minimizing `efh - rrpv`, where `efh` counts the hits a
//! block is still expected to receive in its current residency.

use std::collections::BTreeMap;

use crate::cache::{Access, BlockState, ReplacementPolicy, Victim, MAX_EFH, MAX_RRPV};
use crate::sampler::{is_sampled_set, MinSampler, PcClass};

/// Friendly blocks age up to this value; `MAX_RRPV` is reserved for averse blocks.
const FRIENDLY_AGE_CAP: u8 = MAX_RRPV - 1;

/// Where EHC takes the initial expected-further-hits value from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EfhSource {
    /// Mean MIN hit count of recently completed residencies in the block's region.
    Region,
    /// A constant for every fill.
    Fixed(u8),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BeladyConfig {
    pub ehc: bool,
    pub aging: bool,
    pub efh_source: EfhSource,
}

impl BeladyConfig {
    pub fn hawkeye() -> Self {
        Self {
            ehc: false,
            aging: true,
            efh_source: EfhSource::Region,
        }
    }

    pub fn ehc() -> Self {
        Self {
            ehc: true,
            ..Self::hawkeye()
        }
    }
}

/// Sets the RRPV of `ways[way]` after a touch by a PC of class `class`.
/// A friendly fill also ages the other friendly blocks when `aging` is on.
pub fn hawkeye_on_access(ways: &mut [BlockState], way: usize, class: PcClass, inserted: bool, aging: bool) {
    match class {
        PcClass::Averse => ways[way].rrpv = MAX_RRPV,
        PcClass::Friendly => {
            if inserted && aging {
                for (w, b) in ways.iter_mut().enumerate() {
                    if w != way && b.valid && b.rrpv < FRIENDLY_AGE_CAP {
                        b.rrpv += 1;
                    }
                }
            }
            ways[way].rrpv = 0;
        }
    }
}

fn first_averse(ways: &[BlockState]) -> Option<usize> {
    ways.iter().position(|b| b.rrpv == MAX_RRPV)
}

/// Returns `(way, no_averse)`.
pub fn hawkeye_choose_victim(ways: &[BlockState]) -> (usize, bool) {
    if let Some(w) = first_averse(ways) {
        return (w, false);
    }
    let oldest = ways
        .iter()
        .enumerate()
        .fold(0, |best, (w, b)| if b.rrpv > ways[best].rrpv { w } else { best });
    (oldest, true)
}

/// Returns `(way, no_averse)`. Delegates to Hawkeye when an averse block exists.
pub fn ehc_choose_victim(ways: &[BlockState]) -> (usize, bool) {
    if first_averse(ways).is_some() {
        return hawkeye_choose_victim(ways);
    }
    let score = |b: &BlockState| b.efh as i16 - b.rrpv as i16;
    let best = ways
        .iter()
        .enumerate()
        .fold(0, |best, (w, b)| if score(b) < score(&ways[best]) { w } else { best });
    (best, true)
}

pub fn ehc_on_hit(block: &mut BlockState) {
    block.efh = block.efh.saturating_sub(1);
}

pub struct BeladyPolicy {
    config: BeladyConfig,
    sampler: MinSampler,
    detrains: u64,
    averse_touches: u64,
    friendly_touches: u64,
}

impl BeladyPolicy {
    pub fn new(associativity: usize, config: BeladyConfig) -> Self {
        Self {
            config,
            sampler: MinSampler::new(associativity),
            detrains: 0,
            averse_touches: 0,
            friendly_touches: 0,
        }
    }

    pub fn hawkeye(associativity: usize) -> Self {
        Self::new(associativity, BeladyConfig::hawkeye())
    }

    pub fn ehc(associativity: usize) -> Self {
        Self::new(associativity, BeladyConfig::ehc())
    }

    pub fn config(&self) -> BeladyConfig {
        self.config
    }

    pub fn sampler(&self) -> &MinSampler {
        &self.sampler
    }

    fn touch(&mut self, access: &Access<'_>, ways: &mut [BlockState], way: usize, inserted: bool) {
        let class = self.sampler.pcs.classify(access.record.pc);
        match class {
            PcClass::Averse => self.averse_touches += 1,
            PcClass::Friendly => self.friendly_touches += 1,
        }
        hawkeye_on_access(ways, way, class, inserted, self.config.aging);
    }
}

impl ReplacementPolicy for BeladyPolicy {
    fn name(&self) -> &str {
        if self.config.ehc {
            "ehc"
        } else {
            "hawkeye"
        }
    }

    fn observe(&mut self, access: &Access<'_>) {
        self.sampler
            .observe(access.set, access.tag, access.record.addr, access.record.pc);
    }

    fn on_hit(&mut self, access: &Access<'_>, ways: &mut [BlockState], way: usize) {
        self.touch(access, ways, way, false);
        if self.config.ehc {
            ehc_on_hit(&mut ways[way]);
        }
    }

    fn choose_victim(&mut self, access: &Access<'_>, ways: &mut [BlockState]) -> Victim {
        let (way, no_averse) = if self.config.ehc {
            ehc_choose_victim(ways)
        } else {
            hawkeye_choose_victim(ways)
        };
        if no_averse && is_sampled_set(access.set) {
            // Detrain the friendly prediction, in sampled sets only.
            self.sampler.pcs.train(ways[way].last_pc, false);
            self.detrains += 1;
        }
        Victim::Evict { way, no_averse }
    }

    fn on_insert(&mut self, access: &Access<'_>, ways: &mut [BlockState], way: usize) {
        self.touch(access, ways, way, true);
        if self.config.ehc {
            ways[way].efh = match self.config.efh_source {
                EfhSource::Region => self.sampler.regions.expected_hits(access.record.addr),
                EfhSource::Fixed(n) => n.min(MAX_EFH),
            };
        }
    }

    fn counters(&self) -> BTreeMap<String, u64> {
        let s = self.sampler.counters;
        BTreeMap::from([
            ("optgen_cold".to_string(), s.cold),
            ("optgen_hits".to_string(), s.hits),
            ("optgen_misses".to_string(), s.misses),
            ("detrains".to_string(), self.detrains),
            ("averse_touches".to_string(), self.averse_touches),
            ("friendly_touches".to_string(), self.friendly_touches),
        ])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(state: &[(u8, u8)]) -> Vec<BlockState> {
        state
            .iter()
            .map(|&(efh, rrpv)| BlockState {
                valid: true,
                efh,
                rrpv,
                ..Default::default()
            })
            .collect()
    }

    fn with_rrpvs(rrpvs: &[u8]) -> Vec<BlockState> {
        set(&rrpvs.iter().map(|&r| (0, r)).collect::<Vec<_>>())
    }

    fn rrpvs(ways: &[BlockState]) -> Vec<u8> {
        ways.iter().map(|b| b.rrpv).collect()
    }

    #[test]
    fn averse_touch_sets_max() {
        let mut w = with_rrpvs(&[0, 3]);
        hawkeye_on_access(&mut w, 0, PcClass::Averse, false, true);
        assert_eq!(w[0].rrpv, 7);
    }

    #[test]
    fn friendly_fill_ages_others() {
        let mut w = with_rrpvs(&[0, 3, 6, 5]);
        hawkeye_on_access(&mut w, 3, PcClass::Friendly, true, true);
        assert_eq!(rrpvs(&w), vec![1, 4, 6, 0]);
    }

    #[test]
    fn aging_skips_averse_and_invalid() {
        let mut w = with_rrpvs(&[7, 2, 0]);
        w[1].valid = false;
        hawkeye_on_access(&mut w, 2, PcClass::Friendly, true, true);
        assert_eq!(rrpvs(&w), vec![7, 2, 0]);
    }

    #[test]
    fn no_aging_ablation() {
        let mut w = with_rrpvs(&[0, 3, 5]);
        hawkeye_on_access(&mut w, 2, PcClass::Friendly, true, false);
        assert_eq!(rrpvs(&w), vec![0, 3, 0]);
    }

    #[test]
    fn friendly_hit_resets() {
        let mut w = with_rrpvs(&[0, 3, 6]);
        hawkeye_on_access(&mut w, 2, PcClass::Friendly, false, true);
        assert_eq!(rrpvs(&w), vec![0, 3, 0]);
    }

    #[test]
    fn hawkeye_victims() {
        assert_eq!(hawkeye_choose_victim(&with_rrpvs(&[7, 0, 3])), (0, false));
        assert_eq!(hawkeye_choose_victim(&with_rrpvs(&[0, 6, 3])), (1, true));
        assert_eq!(hawkeye_choose_victim(&with_rrpvs(&[5, 5, 2])), (0, true));
        assert_eq!(hawkeye_choose_victim(&with_rrpvs(&[1, 7, 7])), (1, false));
    }

    #[test]
    fn ehc_victims() {
        assert_eq!(ehc_choose_victim(&set(&[(1, 0), (0, 2), (3, 6)])), (2, true));
        assert_eq!(ehc_choose_victim(&set(&[(0, 4), (0, 4)])), (0, true));
        let w = set(&[(0, 3), (5, 7), (0, 6)]);
        assert_eq!(ehc_choose_victim(&w), hawkeye_choose_victim(&w));
        assert_eq!(ehc_choose_victim(&w), (1, false));
    }

    #[test]
    fn efh_counts_down() {
        let mut b = BlockState {
            efh: 3,
            ..Default::default()
        };
        ehc_on_hit(&mut b);
        assert_eq!(b.efh, 2);
        b.efh = 0;
        ehc_on_hit(&mut b);
        assert_eq!(b.efh, 0);
        b.efh = 1;
        ehc_on_hit(&mut b);
        ehc_on_hit(&mut b);
        assert_eq!(b.efh, 0);
    }
}
