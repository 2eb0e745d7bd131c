//! Independent reference models and trace builders shared by the
//! integration tests. Nothing here calls into the simulator's policies.

#![allow(dead_code)]

use std::collections::HashMap;

use ehcsim::cache::CacheGeometry;
use ehcsim::trace::{AccessRecord, Trace};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const BLOCK: u64 = 64;

/// Trace over explicit block numbers, one PC per block parity.
pub fn blocks(seq: &[u64]) -> Trace {
    Trace::from_records(
        seq.iter()
            .enumerate()
            .map(|(i, &b)| AccessRecord::read(i as u64 + 1, 0x1000 + 4 * (b % 2), b * BLOCK))
            .collect(),
    )
}

/// Random trace whose blocks map to `sets` sets with at most
/// `blocks_per_set` distinct blocks each.
pub fn random_trace(rng: &mut ChaCha8Rng, len: usize, sets: u64, blocks_per_set: u64) -> Trace {
    let seq: Vec<u64> = (0..len)
        .map(|_| {
            let set = rng.random_range(0..sets);
            let k = rng.random_range(0..blocks_per_set);
            k * sets + set
        })
        .collect();
    let mut t = blocks(&seq);
    for r in &mut t.records {
        r.pc = 0x2000 + 4 * rng.random_range(0..4u64);
    }
    t
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// True-LRU by explicit recency lists, most recent first.
pub fn brute_lru(trace: &Trace, geom: CacheGeometry) -> Vec<bool> {
    let mut lists: HashMap<usize, Vec<u64>> = HashMap::new();
    trace
        .records
        .iter()
        .map(|r| {
            let b = geom.block(r.addr);
            let list = lists.entry(geom.set_index(r.addr)).or_default();
            let hit = match list.iter().position(|&x| x == b) {
                Some(i) => {
                    list.remove(i);
                    true
                }
                None => false,
            };
            list.insert(0, b);
            list.truncate(geom.associativity());
            hit
        })
        .collect()
}

/// Maximum hits over every eviction (and, with `bypass`, bypass) schedule.
pub fn exhaustive_max_hits(trace: &Trace, geom: CacheGeometry, bypass: bool) -> u64 {
    let accesses: Vec<(usize, u64)> = trace
        .records
        .iter()
        .map(|r| (geom.set_index(r.addr), geom.block(r.addr)))
        .collect();
    let sets: Vec<Vec<u64>> = vec![Vec::new(); geom.num_sets()];
    search(&accesses, 0, sets, geom.associativity(), bypass)
}

fn search(accesses: &[(usize, u64)], i: usize, mut sets: Vec<Vec<u64>>, assoc: usize, bypass: bool) -> u64 {
    let Some(&(set, block)) = accesses.get(i) else {
        return 0;
    };
    if sets[set].contains(&block) {
        return 1 + search(accesses, i + 1, sets, assoc, bypass);
    }
    if sets[set].len() < assoc {
        sets[set].push(block);
        return search(accesses, i + 1, sets, assoc, bypass);
    }
    let mut best = 0;
    if bypass {
        best = search(accesses, i + 1, sets.clone(), assoc, bypass);
    }
    for way in 0..assoc {
        let mut next = sets.clone();
        next[set][way] = block;
        best = best.max(search(accesses, i + 1, next, assoc, bypass));
    }
    best
}
