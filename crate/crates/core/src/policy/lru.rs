use crate::cache::{Access, BlockState, ReplacementPolicy, Victim};

/// Least recently used. Recency comes from the engine's touch stamps, so the
/// policy itself is stateless.
#[derive(Debug, Default, Clone, Copy)]
pub struct Lru;

/// Way with the oldest touch stamp. Stamps are unique per access, so there are no ties.
pub fn lru_choose_victim(ways: &[BlockState]) -> usize {
    ways.iter()
        .enumerate()
        .min_by_key(|(_, b)| b.recency_stamp)
        .map(|(w, _)| w)
        .expect("non-empty set")
}

impl ReplacementPolicy for Lru {
    fn name(&self) -> &str {
        "lru"
    }

    fn on_hit(&mut self, _: &Access<'_>, _: &mut [BlockState], _: usize) {}

    fn choose_victim(&mut self, _: &Access<'_>, ways: &mut [BlockState]) -> Victim {
        Victim::way(lru_choose_victim(ways))
    }

    fn on_insert(&mut self, _: &Access<'_>, _: &mut [BlockState], _: usize) {}
}
