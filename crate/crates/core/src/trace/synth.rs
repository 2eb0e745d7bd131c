//! Synthetic trace generators.
//!
//! Every generator is a pure function of its [`GeneratorSpec`]. Records get
//! `seq` equal to their index and one PC per access stream: each phase of a
//! mixed trace has its own, and the region-correlated generator gives each
//! reuse class its own.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Zipf};

use super::{AccessRecord, Trace, TraceError};

/// 128 KB regions of 64 B blocks.
pub const BLOCKS_PER_REGION: u64 = 2048;

const BLOCK_BYTES: u64 = 64;
const PC_BASE: u64 = 0x40_0000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GeneratorKind {
    Stream,
    Loop,
    Zipf,
    RegionCorrelated,
    Mixed,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeneratorSpec {
    pub kind: GeneratorKind,
    pub block_count: u64,
    pub length: u64,
    /// Zipf skew; ignored by the other kinds.
    pub alpha: f64,
    pub seed: u64,
}

impl GeneratorSpec {
    pub fn new(kind: GeneratorKind, block_count: u64, length: u64, seed: u64) -> Self {
        Self {
            kind,
            block_count,
            length,
            alpha: 1.0,
            seed,
        }
    }

    pub fn with_alpha(mut self, alpha: f64) -> Self {
        self.alpha = alpha;
        self
    }

    fn validate(&self) -> Result<(), TraceError> {
        if self.length == 0 {
            return Err(TraceError::InvalidSpec("length must be at least 1"));
        }
        if self.block_count == 0 {
            return Err(TraceError::InvalidSpec("block_count must be at least 1"));
        }
        if matches!(self.kind, GeneratorKind::Zipf | GeneratorKind::Mixed)
            && !(self.alpha.is_finite() && self.alpha >= 0.0)
        {
            return Err(TraceError::InvalidSpec("alpha must be a nonnegative real"));
        }
        Ok(())
    }
}

/// Emits records for one phase. Each phase owns a 1 TB address area and a PC pool.
struct Phase<'a> {
    out: &'a mut Vec<AccessRecord>,
    area: u64,
    pc_base: u64,
}

impl<'a> Phase<'a> {
    fn new(out: &'a mut Vec<AccessRecord>, id: u64) -> Self {
        Self {
            out,
            area: id << 40,
            pc_base: PC_BASE + id * 0x1000,
        }
    }

    fn push(&mut self, block: u64) {
        self.push_from(block, 0);
    }

    fn push_from(&mut self, block: u64, stream: u64) {
        let seq = self.out.len() as u64;
        let pc = self.pc_base + 4 * stream;
        self.out
            .push(AccessRecord::read(seq, pc, self.area + block * BLOCK_BYTES));
    }
}

pub fn gen_synthetic(spec: &GeneratorSpec) -> Result<Trace, TraceError> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut records = Vec::with_capacity(spec.length as usize);

    match spec.kind {
        GeneratorKind::Stream => stream(&mut Phase::new(&mut records, 0), spec.length),
        GeneratorKind::Loop => cyclic(&mut Phase::new(&mut records, 0), spec.block_count, spec.length),
        GeneratorKind::Zipf => zipf(
            &mut Phase::new(&mut records, 0),
            spec.block_count,
            spec.length,
            spec.alpha,
            &mut rng,
        ),
        GeneratorKind::RegionCorrelated => region_correlated(
            &mut Phase::new(&mut records, 0),
            spec.block_count,
            spec.length,
            &mut rng,
        ),
        GeneratorKind::Mixed => {
            let quarter = spec.length / 4;
            let lens = [quarter, quarter, quarter, spec.length - 3 * quarter];
            stream(&mut Phase::new(&mut records, 0), lens[0]);
            cyclic(&mut Phase::new(&mut records, 1), spec.block_count, lens[1]);
            zipf(
                &mut Phase::new(&mut records, 2),
                spec.block_count,
                lens[2],
                spec.alpha,
                &mut rng,
            );
            region_correlated(&mut Phase::new(&mut records, 3), spec.block_count, lens[3], &mut rng);
        }
    }

    Ok(Trace::from_records(records))
}

fn stream(p: &mut Phase<'_>, length: u64) {
    for i in 0..length {
        p.push(i);
    }
}

fn cyclic(p: &mut Phase<'_>, blocks: u64, length: u64) {
    for i in 0..length {
        p.push(i % blocks);
    }
}

fn zipf(p: &mut Phase<'_>, blocks: u64, length: u64, alpha: f64, rng: &mut ChaCha8Rng) {
    if length == 0 {
        return;
    }
    let dist = Zipf::new(blocks as f64, alpha).expect("validated zipf parameters");
    for _ in 0..length {
        let rank = dist.sample(rng) as u64;
        p.push(rank.clamp(1, blocks) - 1);
    }
}

/// Reuse behavior shared by every block of a region.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum ReuseClass {
    /// A burst of four touches with short gaps.
    Short,
    /// Two touches separated by a gap of roughly half the footprint.
    Medium,
    /// A single touch.
    Never,
}

/// Blocks are handed out region by region. A region's class fixes how many
/// times each of its blocks is touched per visit and at what spacing, so the
/// per-residency hit counts of blocks in one region are correlated.
fn region_correlated(p: &mut Phase<'_>, blocks: u64, length: u64, rng: &mut ChaCha8Rng) {
    if length == 0 {
        return;
    }
    let regions = blocks.div_ceil(BLOCKS_PER_REGION);
    let mut order: Vec<u64> = (0..regions).collect();
    order.shuffle(rng);
    const CLASSES: [ReuseClass; 3] = [ReuseClass::Short, ReuseClass::Medium, ReuseClass::Never];
    let mut pools: [Vec<u64>; 3] = Default::default();
    for (i, &region) in order.iter().enumerate() {
        let first = region * BLOCKS_PER_REGION;
        let last = ((region + 1) * BLOCKS_PER_REGION).min(blocks);
        pools[i % 3].extend(first..last);
    }
    let mut cursors = [0usize; 3];

    let short_gap = (blocks / 8).max(2);
    let medium_gap = (blocks / 2).max(4);

    // (due time, tie-break counter, block, class)
    let mut pending: BinaryHeap<Reverse<(u64, u64, u64, u64)>> = BinaryHeap::new();
    let mut tiebreak = 0u64;

    for t in 0..length {
        if let Some(&Reverse((due, _, block, class))) = pending.peek() {
            if due <= t {
                pending.pop();
                p.push_from(block, class);
                continue;
            }
        }

        let class = loop {
            let draw: f64 = rng.random();
            let class = if draw < 0.4 {
                0
            } else if draw < 0.6 {
                1
            } else {
                2
            };
            if !pools[class].is_empty() {
                break class;
            }
        };
        let pool = &pools[class];
        let block = pool[cursors[class] % pool.len()];
        cursors[class] += 1;
        p.push_from(block, class as u64);

        let mut schedule = |due: u64| {
            pending.push(Reverse((due, tiebreak, block, class as u64)));
            tiebreak += 1;
        };
        match CLASSES[class] {
            ReuseClass::Short => {
                let mut due = t;
                for _ in 0..3 {
                    due += rng.random_range(1..=short_gap);
                    schedule(due);
                }
            }
            ReuseClass::Medium => {
                schedule(t + rng.random_range(medium_gap / 2..=medium_gap + medium_gap / 2));
            }
            ReuseClass::Never => {}
        }
    }
}
