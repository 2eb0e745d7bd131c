//! Offline Belady's MIN and the analyses built on its ground truth.

mod analysis;

pub use analysis::{
    per_block_prediction_error, per_region_prediction_error, victim_quality, ErrorHistogram, VictimQuality,
    ERROR_BUCKETS,
};

use std::collections::HashMap;

use thiserror::Error;

use crate::cache::{
    simulate_with, Access, BlockState, CacheGeometry, ReplacementEvent, ReplacementPolicy, Residency, SimError,
    SimOptions, SimStats, Victim,
};
use crate::sampler::MinDecision;
use crate::trace::Trace;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum OracleError {
    #[error("victim-quality analysis needs a run recorded with the event log enabled")]
    MissingEventLog,
    #[error(transparent)]
    Sim(#[from] SimError),
}

/// For each trace position, the position of the next access to the same block.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NextUseIndex {
    next: Vec<Option<usize>>,
}

impl NextUseIndex {
    pub fn get(&self, pos: usize) -> Option<usize> {
        self.next[pos]
    }

    /// Next use as a sortable distance; never-reused maps to `usize::MAX`.
    pub fn key(&self, pos: usize) -> usize {
        self.next[pos].unwrap_or(usize::MAX)
    }

    pub fn len(&self) -> usize {
        self.next.len()
    }

    pub fn is_empty(&self) -> bool {
        self.next.is_empty()
    }

    pub fn as_slice(&self) -> &[Option<usize>] {
        &self.next
    }
}

/// One backward pass. Equal blocks always share a set, so per-block
/// bookkeeping is also per-set.
pub fn compute_next_use(trace: &Trace, geom: CacheGeometry) -> NextUseIndex {
    let mut seen: HashMap<u64, usize> = HashMap::new();
    let mut next = vec![None; trace.len()];
    for (pos, r) in trace.records.iter().enumerate().rev() {
        next[pos] = seen.insert(geom.block(r.addr), pos);
    }
    NextUseIndex { next }
}

/// Belady's MIN as a policy: evicts the resident with the farthest next use
/// (lowest way on ties). With bypass, the incoming block is also a candidate
/// and is bypassed only when strictly farther than every resident.
pub struct MinPolicy {
    next_use: NextUseIndex,
    bypass: bool,
    assoc: usize,
    resident_next: Vec<usize>,
}

impl MinPolicy {
    pub fn new(trace: &Trace, geom: CacheGeometry, bypass: bool) -> Self {
        Self {
            next_use: compute_next_use(trace, geom),
            bypass,
            assoc: geom.associativity(),
            resident_next: vec![usize::MAX; geom.capacity_blocks()],
        }
    }

    fn remember(&mut self, access: &Access<'_>, way: usize) {
        self.resident_next[access.set * self.assoc + way] = self.next_use.key(access.pos);
    }
}

impl ReplacementPolicy for MinPolicy {
    fn name(&self) -> &str {
        if self.bypass {
            "min"
        } else {
            "min-nobypass"
        }
    }

    fn on_hit(&mut self, access: &Access<'_>, _: &mut [BlockState], way: usize) {
        self.remember(access, way);
    }

    fn choose_victim(&mut self, access: &Access<'_>, _: &mut [BlockState]) -> Victim {
        let base = access.set * self.assoc;
        let nexts = &self.resident_next[base..base + self.assoc];
        let farthest = nexts
            .iter()
            .enumerate()
            .fold(0, |best, (w, &n)| if n > nexts[best] { w } else { best });
        if self.bypass && self.next_use.key(access.pos) > nexts[farthest] {
            Victim::Bypass
        } else {
            Victim::way(farthest)
        }
    }

    fn on_insert(&mut self, access: &Access<'_>, _: &mut [BlockState], way: usize) {
        self.remember(access, way);
    }
}

#[derive(Debug, Clone)]
pub struct MinRun {
    pub stats: SimStats,
    pub decisions: Vec<MinDecision>,
    pub residencies: Vec<Residency>,
    pub events: Vec<ReplacementEvent>,
}

/// Labels engine hit/miss outcomes, marking first touches of a block as cold.
pub fn classify_outcomes(trace: &Trace, geom: CacheGeometry, hits: &[bool]) -> Vec<MinDecision> {
    let mut seen = std::collections::HashSet::new();
    trace
        .records
        .iter()
        .zip(hits)
        .map(|(r, &hit)| {
            let first = seen.insert(geom.block(r.addr));
            match (hit, first) {
                (true, _) => MinDecision::Hit,
                (false, true) => MinDecision::ColdMiss,
                (false, false) => MinDecision::Miss,
            }
        })
        .collect()
}

pub fn simulate_min(trace: &Trace, geom: CacheGeometry, bypass: bool) -> Result<MinRun, OracleError> {
    let mut policy = MinPolicy::new(trace, geom, bypass);
    let out = simulate_with(
        trace,
        &mut policy,
        geom,
        SimOptions {
            events: true,
            residencies: true,
            outcomes: true,
        },
    )?;
    Ok(MinRun {
        decisions: classify_outcomes(trace, geom, &out.outcomes),
        stats: out.stats,
        residencies: out.residencies,
        events: out.events,
    })
}
