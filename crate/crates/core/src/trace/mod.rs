//! Access-trace data model.
//!
//! A [`Trace`] is an ordered list of LLC accesses. Each record carries the
//! instruction sequence number of the access, which doubles as the
//! instruction counter used for MPKI.

mod format;
mod synth;

pub use format::{read_trace, write_trace, HEADER_LEN, MAGIC, RECORD_LEN, VERSION};
pub use synth::{gen_synthetic, GeneratorKind, GeneratorSpec, BLOCKS_PER_REGION};

use thiserror::Error;

/// Kind of memory access. Writes are treated as fills exactly like reads.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AccessKind {
    Read,
    Write,
}

impl AccessKind {
    pub fn to_byte(self) -> u8 {
        match self {
            AccessKind::Read => 0,
            AccessKind::Write => 1,
        }
    }

    pub fn from_byte(b: u8) -> Option<Self> {
        match b {
            0 => Some(AccessKind::Read),
            1 => Some(AccessKind::Write),
            _ => None,
        }
    }
}

/// One LLC access.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct AccessRecord {
    pub seq: u64,
    pub core: u8,
    pub pc: u64,
    pub addr: u64,
    pub kind: AccessKind,
}

impl AccessRecord {
    pub fn read(seq: u64, pc: u64, addr: u64) -> Self {
        Self {
            seq,
            core: 0,
            pc,
            addr,
            kind: AccessKind::Read,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Trace {
    pub records: Vec<AccessRecord>,
    pub instruction_count: u64,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum TraceError {
    #[error("not a trace file (bad magic)")]
    BadMagic,
    #[error("unsupported trace version {0}")]
    UnsupportedVersion(u8),
    #[error("truncated trace: header declares {declared} records, only {available} present")]
    Truncated { declared: u64, available: u64 },
    #[error("{0} trailing bytes after the last record")]
    TrailingBytes(usize),
    #[error("record {index} has invalid access kind {byte}")]
    BadKind { index: u64, byte: u8 },
    #[error("invalid generator spec: {0}")]
    InvalidSpec(&'static str),
    #[error("cannot interleave {0} traces: core ids are limited to 0..=255")]
    TooManyCores(usize),
    #[error("interleave needs at least one input trace")]
    NoInputs,
}

impl Trace {
    /// Builds a trace whose instruction count is the largest `seq`.
    pub fn from_records(records: Vec<AccessRecord>) -> Self {
        let instruction_count = records.iter().map(|r| r.seq).max().unwrap_or(0);
        Self {
            records,
            instruction_count,
        }
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }
}

/// Address window width used to keep interleaved programs disjoint.
pub const CORE_WINDOW_SHIFT: u32 = 32;

/// Merges per-program traces into one shared-LLC trace.
///
/// Records are ordered by `seq` (stable, so ties keep input order), input
/// `i` becomes core `i`, and its addresses move into the `i`-th 4 GB window.
/// The merged instruction count is the sum of the inputs' counts.
pub fn interleave(traces: &[Trace]) -> Result<Trace, TraceError> {
    if traces.is_empty() {
        return Err(TraceError::NoInputs);
    }
    if traces.len() > 256 {
        return Err(TraceError::TooManyCores(traces.len()));
    }

    let mut tagged: Vec<(u64, usize, usize)> = Vec::with_capacity(traces.iter().map(Trace::len).sum());
    for (core, t) in traces.iter().enumerate() {
        for (i, r) in t.records.iter().enumerate() {
            tagged.push((r.seq, core, i));
        }
    }
    // (seq, input index, position) is unique, so an unstable sort is still deterministic
    // and gives the stable tie order.
    tagged.sort_unstable();

    let records = tagged
        .into_iter()
        .map(|(_, core, i)| {
            let r = traces[core].records[i];
            AccessRecord {
                core: core as u8,
                addr: r.addr.wrapping_add((core as u64) << CORE_WINDOW_SHIFT),
                ..r
            }
        })
        .collect();

    let instruction_count = traces
        .iter()
        .fold(0u64, |acc, t| acc.saturating_add(t.instruction_count));
    Ok(Trace {
        records,
        instruction_count,
    })
}
