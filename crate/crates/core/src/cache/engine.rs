use super::{Access, BlockState, CacheGeometry, ReplacementPolicy, SimError, SimStats, Victim};
use crate::trace::Trace;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SimOptions {
    /// Record every replacement decision (needed for victim-quality ranking).
    pub events: bool,
    /// Record every completed residency.
    pub residencies: bool,
    /// Record hit/miss per access.
    pub outcomes: bool,
}

/// One replacement decision: the set was full and the policy picked a victim
/// or bypassed the incoming block.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReplacementEvent {
    pub pos: usize,
    pub set: usize,
    pub incoming: u64,
    /// Block numbers of the residents, in way order.
    pub residents: Vec<u64>,
    /// `None` when the incoming block was bypassed.
    pub victim: Option<usize>,
    pub no_averse: bool,
}

/// A block's stay in the cache, from fill to eviction (or end of trace).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Residency {
    pub block: u64,
    pub fill_pos: usize,
    pub end_pos: usize,
    pub hits: u32,
}

#[derive(Debug, Clone, Default)]
pub struct SimOutput {
    pub stats: SimStats,
    pub events: Vec<ReplacementEvent>,
    pub residencies: Vec<Residency>,
    pub outcomes: Vec<bool>,
}

pub fn simulate(trace: &Trace, policy: &mut dyn ReplacementPolicy, geom: CacheGeometry) -> Result<SimStats, SimError> {
    simulate_with(trace, policy, geom, SimOptions::default()).map(|o| o.stats)
}

pub fn simulate_with(
    trace: &Trace,
    policy: &mut dyn ReplacementPolicy,
    geom: CacheGeometry,
    opts: SimOptions,
) -> Result<SimOutput, SimError> {
    let assoc = geom.associativity();
    let mut blocks = vec![BlockState::default(); geom.capacity_blocks()];
    let mut stamp = 0u64;
    let mut out = SimOutput::default();
    if opts.outcomes {
        out.outcomes.reserve(trace.len());
    }
    let stats = &mut out.stats;

    for (pos, record) in trace.records.iter().enumerate() {
        let set = geom.set_index(record.addr);
        let access = Access {
            pos,
            set,
            tag: geom.tag(record.addr),
            block: geom.block(record.addr),
            record,
        };
        let ways = &mut blocks[set * assoc..(set + 1) * assoc];
        stamp += 1;
        stats.accesses += 1;
        policy.observe(&access);

        if let Some(way) = ways.iter().position(|b| b.valid && b.tag == access.tag) {
            stats.hits += 1;
            let b = &mut ways[way];
            b.residency_hits += 1;
            b.recency_stamp = stamp;
            b.last_pc = record.pc;
            policy.on_hit(&access, ways, way);
            if opts.outcomes {
                out.outcomes.push(true);
            }
            debug_assert!(stats.check_invariants());
            continue;
        }

        stats.misses += 1;
        if opts.outcomes {
            out.outcomes.push(false);
        }

        let way = match ways.iter().position(|b| !b.valid) {
            Some(way) => Some(way),
            None => {
                let residents: Vec<u64> = if opts.events {
                    ways.iter().map(|b| b.block).collect()
                } else {
                    Vec::new()
                };
                let victim = policy.choose_victim(&access, ways);
                let (chosen, no_averse) = match victim {
                    Victim::Bypass => (None, false),
                    Victim::Evict { way, no_averse } => {
                        if way >= assoc {
                            return Err(SimError::VictimOutOfRange {
                                policy: policy.name().to_string(),
                                way,
                                associativity: assoc,
                            });
                        }
                        (Some(way), no_averse)
                    }
                };
                if opts.events {
                    out.events.push(ReplacementEvent {
                        pos,
                        set,
                        incoming: access.block,
                        residents,
                        victim: chosen,
                        no_averse,
                    });
                }
                match chosen {
                    None => stats.bypasses += 1,
                    Some(way) => {
                        policy.on_evict(&access, ways, way);
                        stats.evictions += 1;
                        stats.replacements_total += 1;
                        if no_averse {
                            stats.replacements_no_averse += 1;
                        }
                        if opts.residencies {
                            let old = &ways[way];
                            out.residencies.push(Residency {
                                block: old.block,
                                fill_pos: old.insert_seq as usize,
                                end_pos: pos,
                                hits: old.residency_hits,
                            });
                        }
                    }
                }
                chosen
            }
        };

        if let Some(way) = way {
            ways[way] = BlockState {
                valid: true,
                tag: access.tag,
                rrpv: 0,
                efh: 0,
                recency_stamp: stamp,
                insert_seq: pos as u64,
                residency_hits: 0,
                last_pc: record.pc,
                block: access.block,
            };
            policy.on_insert(&access, ways, way);
        }
        debug_assert!(stats.check_invariants());
    }

    if opts.residencies {
        let end = trace.len();
        for b in blocks.iter().filter(|b| b.valid) {
            out.residencies.push(Residency {
                block: b.block,
                fill_pos: b.insert_seq as usize,
                end_pos: end,
                hits: b.residency_hits,
            });
        }
    }

    if !out.stats.check_invariants() {
        return Err(SimError::StatsInvariant(trace.len()));
    }
    out.stats.per_policy = policy.counters();
    Ok(out)
}
