//! Replacement policies.
//!
//! Baselines (LRU, the RRIP family, SHiP) and the Belady-inspired policies
//! (Hawkeye and EHC). The offline MIN oracle lives in [`crate::oracle`].

mod hawkeye;
mod lru;
mod rrip;
mod ship;

pub use hawkeye::{
    ehc_choose_victim, ehc_on_hit, hawkeye_choose_victim, hawkeye_on_access, BeladyConfig, BeladyPolicy, EfhSource,
};
pub use lru::{lru_choose_victim, Lru};
pub use rrip::{
    brrip_insert_rrpv, drrip_policy_for_set, duel_role, rrip_choose_victim, DuelRole, Insertion, Psel, Rrip, RripMode,
    PSEL_INIT, PSEL_MAX, SRRIP_INSERT,
};
pub use ship::{ship_signature, Ship, ShipTable, SHCT_ENTRIES, SHCT_INIT};
