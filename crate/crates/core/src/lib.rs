//! Trace-driven last-level cache simulator.
//!
//! Replays memory-access traces through a set-associative cache under a
//! pluggable [`cache::ReplacementPolicy`]. Ships LRU, the RRIP family, SHiP,
//! Hawkeye, and the expected-hit-count (EHC) extension of Hawkeye, plus an
//! offline Belady MIN oracle and the analyses built on it.

pub mod analysis;
pub mod cache;
pub mod hash;
pub mod oracle;
pub mod policy;
pub mod sampler;
pub mod trace;
