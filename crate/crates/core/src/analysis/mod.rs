//! Metrics, the policy registry, reports and experiment drivers.

mod experiment;
mod report;

pub use experiment::{analyze, compare, events_csv, run_policy, run_report, AnalyzeKind, RunOutput};
pub use report::{format_number, Report, ReportError, Table};

use thiserror::Error;

use crate::cache::{CacheGeometry, ReplacementPolicy, SimError, SimStats};
use crate::oracle::{MinPolicy, OracleError};
use crate::policy::{BeladyConfig, BeladyPolicy, EfhSource, Lru, Rrip, Ship};
use crate::trace::Trace;

pub const DEFAULT_SEED: u64 = 42;

/// Online policies, in report order.
pub const ONLINE_POLICIES: &[&str] = &["lru", "srrip", "brrip", "drrip", "ship", "hawkeye", "ehc"];
/// Offline oracles accepted wherever a policy name is.
pub const ORACLE_POLICIES: &[&str] = &["min", "min-nobypass"];

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AnalysisError {
    #[error("unknown policy '{0}'")]
    UnknownPolicy(String),
    #[error("MPKI is undefined for a trace with zero instructions")]
    ZeroInstructions,
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
}

/// Everything needed to instantiate and run a policy.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RunConfig {
    pub geometry: CacheGeometry,
    pub seed: u64,
    /// Forces a constant EFH on every EHC fill.
    pub ehc_fixed_init: Option<u8>,
    pub aging: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            geometry: CacheGeometry::default(),
            seed: DEFAULT_SEED,
            ehc_fixed_init: None,
            aging: true,
        }
    }
}

impl RunConfig {
    pub fn with_geometry(geometry: CacheGeometry) -> Self {
        Self {
            geometry,
            ..Self::default()
        }
    }

    fn belady(&self, ehc: bool) -> BeladyConfig {
        BeladyConfig {
            ehc,
            aging: self.aging,
            efh_source: self.ehc_fixed_init.map_or(EfhSource::Region, EfhSource::Fixed),
        }
    }
}

pub fn is_known_policy(name: &str) -> bool {
    ONLINE_POLICIES.contains(&name) || ORACLE_POLICIES.contains(&name)
}

/// Instantiates a policy by name. The oracles need the whole trace up front.
pub fn build_policy(name: &str, trace: &Trace, cfg: &RunConfig) -> Result<Box<dyn ReplacementPolicy>, AnalysisError> {
    let g = cfg.geometry;
    let assoc = g.associativity();
    Ok(match name {
        "lru" => Box::new(Lru),
        "srrip" => Box::new(Rrip::srrip()),
        "brrip" => Box::new(Rrip::brrip(cfg.seed)),
        "drrip" => Box::new(Rrip::drrip(cfg.seed)),
        "ship" => Box::new(Ship::new(g)),
        "hawkeye" => Box::new(BeladyPolicy::new(assoc, cfg.belady(false))),
        "ehc" => Box::new(BeladyPolicy::new(assoc, cfg.belady(true))),
        "min" => Box::new(MinPolicy::new(trace, g, true)),
        "min-nobypass" => Box::new(MinPolicy::new(trace, g, false)),
        other => return Err(AnalysisError::UnknownPolicy(other.to_string())),
    })
}

/// Misses per thousand instructions.
pub fn mpki(stats: &SimStats, instruction_count: u64) -> Result<f64, AnalysisError> {
    if instruction_count == 0 {
        return Err(AnalysisError::ZeroInstructions);
    }
    Ok(stats.misses as f64 * 1000.0 / instruction_count as f64)
}

/// `1 - mpki / baseline`; zero when the baseline has no misses.
pub fn mpki_reduction(mpki: f64, baseline: f64) -> f64 {
    if baseline == 0.0 {
        0.0
    } else {
        1.0 - mpki / baseline
    }
}

/// Share of replacements made with no averse block in the set.
pub fn no_averse_fraction(stats: &SimStats) -> f64 {
    if stats.replacements_total == 0 {
        0.0
    } else {
        stats.replacements_no_averse as f64 / stats.replacements_total as f64
    }
}
