//! Hit-count predictability and victim-quality measurements.

use std::collections::{HashMap, VecDeque};

use crate::cache::{CacheGeometry, ReplacementEvent, Residency};
use crate::sampler::{region_id, rounded_mean, REGION_HISTORY};
use crate::trace::Trace;

use super::OracleError;

/// Buckets for |actual - predicted|: 0, 1, 2, 3, and 4 or more.
pub const ERROR_BUCKETS: usize = 5;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ErrorHistogram {
    pub buckets: [u64; ERROR_BUCKETS],
}

impl ErrorHistogram {
    pub fn record(&mut self, actual: u32, predicted: u64) {
        let diff = (actual as u64).abs_diff(predicted);
        self.buckets[(diff as usize).min(ERROR_BUCKETS - 1)] += 1;
    }

    pub fn total(&self) -> u64 {
        self.buckets.iter().sum()
    }

    pub fn fraction(&self, bucket: usize) -> f64 {
        match self.total() {
            0 => 0.0,
            n => self.buckets[bucket] as f64 / n as f64,
        }
    }

    /// Bucket holding the most predictions (lowest bucket on ties).
    pub fn mode(&self) -> usize {
        (0..ERROR_BUCKETS).fold(0, |best, b| if self.buckets[b] > self.buckets[best] { b } else { best })
    }
}

fn in_completion_order(residencies: &[Residency]) -> Vec<&Residency> {
    let mut sorted: Vec<&Residency> = residencies.iter().collect();
    sorted.sort_by_key(|r| (r.end_pos, r.fill_pos, r.block));
    sorted
}

/// Predicts each residency's hit count from up to `REGION_HISTORY` earlier
/// residencies sharing its key. Residencies without history are skipped.
fn prediction_error(residencies: &[Residency], key: impl Fn(&Residency) -> u64) -> ErrorHistogram {
    let mut history: HashMap<u64, VecDeque<u32>> = HashMap::new();
    let mut hist = ErrorHistogram::default();
    for r in in_completion_order(residencies) {
        let past = history.entry(key(r)).or_default();
        if let Some(predicted) = rounded_mean(past.make_contiguous()) {
            hist.record(r.hits, predicted);
        }
        if past.len() == REGION_HISTORY {
            past.pop_front();
        }
        past.push_back(r.hits);
    }
    hist
}

/// Prediction = mean of the block's own last four residencies.
pub fn per_block_prediction_error(residencies: &[Residency]) -> ErrorHistogram {
    prediction_error(residencies, |r| r.block)
}

/// Prediction = mean of the last four residencies that ended in the block's
/// 128 KB region.
pub fn per_region_prediction_error(residencies: &[Residency], geom: CacheGeometry) -> ErrorHistogram {
    let bits = geom.block_offset_bits();
    prediction_error(residencies, |r| region_id(r.block << bits))
}

/// Histogram of victim ranks. Rank 0 means the victim had the farthest next
/// use among the residents and the incoming block.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VictimQuality {
    pub histogram: Vec<u64>,
}

impl VictimQuality {
    pub fn decisions(&self) -> u64 {
        self.histogram.iter().sum()
    }

    pub fn mean_rank(&self) -> f64 {
        let n = self.decisions();
        if n == 0 {
            return 0.0;
        }
        let weighted: u64 = self.histogram.iter().enumerate().map(|(r, &c)| r as u64 * c).sum();
        weighted as f64 / n as f64
    }

    pub fn optimal_fraction(&self) -> f64 {
        match self.decisions() {
            0 => 0.0,
            n => self.histogram[0] as f64 / n as f64,
        }
    }
}

struct Positions(HashMap<u64, Vec<usize>>);

impl Positions {
    fn new(trace: &Trace, geom: CacheGeometry) -> Self {
        let mut map: HashMap<u64, Vec<usize>> = HashMap::new();
        for (pos, r) in trace.records.iter().enumerate() {
            map.entry(geom.block(r.addr)).or_default().push(pos);
        }
        Positions(map)
    }

    /// First access to `block` strictly after `pos`; `usize::MAX` if none.
    fn next_after(&self, block: u64, pos: usize) -> usize {
        let Some(list) = self.0.get(&block) else {
            return usize::MAX;
        };
        let i = list.partition_point(|&p| p <= pos);
        list.get(i).copied().unwrap_or(usize::MAX)
    }
}

/// Ranks every recorded replacement decision by reuse distance.
///
/// Candidates are the residents plus the incoming block, ordered farthest
/// next use first. A victim tied with others shares the rank of the first
/// member of its tie group, so any farthest-next-use choice scores 0.
pub fn victim_quality(
    events: Option<&[ReplacementEvent]>,
    trace: &Trace,
    geom: CacheGeometry,
) -> Result<VictimQuality, OracleError> {
    let events = events.ok_or(OracleError::MissingEventLog)?;
    let positions = Positions::new(trace, geom);
    let mut histogram = vec![0u64; geom.associativity() + 1];

    for e in events {
        let victim_block = match e.victim {
            Some(way) => e.residents[way],
            None => e.incoming,
        };
        let victim_next = positions.next_after(victim_block, e.pos);
        let farther = e
            .residents
            .iter()
            .chain(std::iter::once(&e.incoming))
            .filter(|&&b| positions.next_after(b, e.pos) > victim_next)
            .count();
        if farther >= histogram.len() {
            histogram.resize(farther + 1, 0);
        }
        histogram[farther] += 1;
    }
    Ok(VictimQuality { histogram })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trace::AccessRecord;

    fn res(block: u64, fill: usize, end: usize, hits: u32) -> Residency {
        Residency {
            block,
            fill_pos: fill,
            end_pos: end,
            hits,
        }
    }

    #[test]
    fn block_prediction_examples() {
        let r = [
            res(1, 0, 1, 2),
            res(1, 1, 2, 2),
            res(1, 2, 3, 2),
            res(1, 3, 4, 2),
            res(1, 4, 5, 2),
        ];
        let h = per_block_prediction_error(&r);
        assert_eq!(h.total(), 4);
        assert_eq!(h.buckets[0], 4);

        let r = [
            res(1, 0, 1, 0),
            res(1, 1, 2, 1),
            res(1, 2, 3, 1),
            res(1, 3, 4, 2),
            res(1, 4, 5, 3),
        ];
        let h = per_block_prediction_error(&r);
        // Last residency: prior [0,1,1,2] -> mean 1, actual 3.
        assert_eq!(h.buckets[2], 1);

        assert_eq!(per_block_prediction_error(&[res(9, 0, 3, 5)]).total(), 0);
    }

    #[test]
    fn region_prediction_examples() {
        let g = CacheGeometry::new(1, 4, 6).unwrap();
        // Blocks 0..4 share region 0 (2048 blocks per region).
        let r = [
            res(0, 0, 1, 0),
            res(1, 0, 2, 0),
            res(2, 0, 3, 4),
            res(3, 0, 4, 4),
            res(4, 0, 5, 0),
        ];
        let h = per_region_prediction_error(&r, g);
        assert_eq!(h.total(), 4);
        // Predictions 0, 0, 1, 2 against actuals 0, 4, 4, 0; the last one is
        // the mean of [0,0,4,4] = 2 vs actual 0.
        assert_eq!(h.buckets, [1, 0, 1, 1, 1]);

        let r = [
            res(0, 0, 1, 1),
            res(1, 0, 2, 1),
            res(2, 0, 3, 1),
            res(3, 0, 4, 1),
            res(5, 0, 5, 1),
        ];
        assert_eq!(per_region_prediction_error(&r, g).buckets[0], 4);

        // First eviction in a different region is skipped.
        let far = 2048 * 7;
        assert_eq!(per_region_prediction_error(&[res(far, 0, 1, 3)], g).total(), 0);
    }

    #[test]
    fn large_errors_share_the_last_bucket() {
        let mut h = ErrorHistogram::default();
        h.record(9, 0);
        h.record(0, 4);
        assert_eq!(h.buckets[4], 2);
    }

    fn crafted() -> (Trace, CacheGeometry) {
        // Positions: 0 A, 1 B, 2 C, 3 D(incoming), then B@4, D@6, A@11. C never again.
        let seq = [10u64, 11, 12, 13, 11, 99, 13, 98, 97, 96, 95, 10];
        let t = Trace::from_records(
            seq.iter()
                .enumerate()
                .map(|(i, &b)| AccessRecord::read(i as u64, 0, b * 64))
                .collect(),
        );
        (t, CacheGeometry::new(1, 3, 6).unwrap())
    }

    fn event(victim: Option<usize>) -> ReplacementEvent {
        ReplacementEvent {
            pos: 3,
            set: 0,
            incoming: 13,
            residents: vec![10, 11, 12],
            victim,
            no_averse: false,
        }
    }

    #[test]
    fn victim_rank_examples() {
        let (t, g) = crafted();
        // Next uses: A=11, B=4, C=inf, D=6 -> order C, A, D, B.
        let q = victim_quality(Some(&[event(Some(2))]), &t, g).unwrap();
        assert_eq!(q.histogram, vec![1, 0, 0, 0]);
        let q = victim_quality(Some(&[event(Some(1))]), &t, g).unwrap();
        assert_eq!(q.histogram, vec![0, 0, 0, 1]);
        let q = victim_quality(Some(&[event(None)]), &t, g).unwrap();
        assert_eq!(q.histogram, vec![0, 0, 1, 0]);
        assert_eq!(q.mean_rank(), 2.0);
    }

    #[test]
    fn missing_log_is_an_error() {
        let (t, g) = crafted();
        assert_eq!(victim_quality(None, &t, g), Err(OracleError::MissingEventLog));
    }
}
