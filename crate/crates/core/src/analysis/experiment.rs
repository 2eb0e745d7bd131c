use std::thread;

use crate::cache::{simulate_with, ReplacementEvent, Residency, SimOptions, SimStats};
use crate::oracle::{
    per_block_prediction_error, per_region_prediction_error, victim_quality, ErrorHistogram, ERROR_BUCKETS,
};
use crate::trace::Trace;

use super::{
    build_policy, is_known_policy, mpki, mpki_reduction, no_averse_fraction, AnalysisError, Report, RunConfig, Table,
    ONLINE_POLICIES,
};

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub policy: String,
    pub stats: SimStats,
    /// Present only when the run recorded events.
    pub events: Option<Vec<ReplacementEvent>>,
    pub residencies: Vec<Residency>,
}

pub fn run_policy(trace: &Trace, name: &str, cfg: &RunConfig, opts: SimOptions) -> Result<RunOutput, AnalysisError> {
    let mut policy = build_policy(name, trace, cfg)?;
    let out = simulate_with(trace, policy.as_mut(), cfg.geometry, opts)?;
    Ok(RunOutput {
        policy: name.to_string(),
        stats: out.stats,
        events: opts.events.then_some(out.events),
        residencies: out.residencies,
    })
}

fn check_names(names: &[&str]) -> Result<(), AnalysisError> {
    match names.iter().find(|n| !is_known_policy(n)) {
        Some(n) => Err(AnalysisError::UnknownPolicy(n.to_string())),
        None => Ok(()),
    }
}

/// Runs each policy on its own thread; results come back in `names` order.
fn run_all(trace: &Trace, names: &[&str], cfg: &RunConfig, opts: SimOptions) -> Result<Vec<RunOutput>, AnalysisError> {
    check_names(names)?;
    thread::scope(|s| {
        let handles: Vec<_> = names
            .iter()
            .map(|&name| s.spawn(move || run_policy(trace, name, cfg, opts)))
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("simulation thread panicked"))
            .collect()
    })
}

const STATS_COLUMNS: &[&str] = &[
    "accesses",
    "hits",
    "misses",
    "evictions",
    "bypasses",
    "replacements_total",
    "replacements_no_averse",
    "mpki",
    "no_averse_fraction",
];

/// Report for a single run: headline stats plus the policy's own counters.
pub fn run_report(trace: &Trace, run: &RunOutput, cfg: &RunConfig) -> Result<Report, AnalysisError> {
    let s = &run.stats;
    let mut stats = Table::new("stats", STATS_COLUMNS);
    stats.push(
        run.policy.clone(),
        vec![
            s.accesses as f64,
            s.hits as f64,
            s.misses as f64,
            s.evictions as f64,
            s.bypasses as f64,
            s.replacements_total as f64,
            s.replacements_no_averse as f64,
            mpki(s, trace.instruction_count)?,
            no_averse_fraction(s),
        ],
    );
    let mut counters = Table::new("counters", &["value"]);
    for (k, v) in &s.per_policy {
        counters.push(k.clone(), vec![*v as f64]);
    }
    let mut report = Report::new(cfg.seed);
    report.tables.push(stats);
    report.tables.push(counters);
    if let Some(events) = &run.events {
        report.tables.push(rank_table(trace, events, cfg)?);
    }
    Ok(report)
}

fn rank_table(trace: &Trace, events: &[ReplacementEvent], cfg: &RunConfig) -> Result<Table, AnalysisError> {
    let q = victim_quality(Some(events), trace, cfg.geometry)?;
    let mut t = Table::new("victim-quality", &["count", "fraction"]);
    let n = q.decisions().max(1) as f64;
    for (rank, &count) in q.histogram.iter().enumerate() {
        t.push(format!("rank{rank}"), vec![count as f64, count as f64 / n]);
    }
    t.push("mean", vec![q.decisions() as f64, q.mean_rank()]);
    Ok(t)
}

/// One row per policy: hits, misses, MPKI, MPKI reduction over LRU and the
/// no-averse fraction; with `ranks`, also the mean victim rank.
pub fn compare(trace: &Trace, names: &[&str], cfg: &RunConfig, ranks: bool) -> Result<Report, AnalysisError> {
    let opts = SimOptions {
        events: ranks,
        ..Default::default()
    };
    let mut all: Vec<&str> = names.to_vec();
    let baseline_added = !all.contains(&"lru");
    if baseline_added {
        all.push("lru");
    }
    let runs = run_all(trace, &all, cfg, opts)?;
    let lru_mpki = mpki(
        &runs.iter().find(|r| r.policy == "lru").expect("lru present").stats,
        trace.instruction_count,
    )?;

    let mut columns = vec!["hits", "misses", "mpki", "mpki_reduction", "no_averse_fraction"];
    if ranks {
        columns.push("victim_mean_rank");
    }
    let mut table = Table::new("compare", &columns);
    for run in runs.iter().take(names.len()) {
        let m = mpki(&run.stats, trace.instruction_count)?;
        let mut row = vec![
            run.stats.hits as f64,
            run.stats.misses as f64,
            m,
            mpki_reduction(m, lru_mpki),
            no_averse_fraction(&run.stats),
        ];
        if let Some(events) = &run.events {
            row.push(victim_quality(Some(events), trace, cfg.geometry)?.mean_rank());
        }
        table.push(run.policy.clone(), row);
    }
    let mut report = Report::new(cfg.seed);
    report.tables.push(table);
    Ok(report)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AnalyzeKind {
    /// Share of replacements made without an averse candidate.
    NoAverse,
    /// Hit-count predictability from a block's own past residencies.
    HitcountBlock,
    /// Hit-count predictability from the block's region.
    HitcountRegion,
    /// Rank of chosen victims by reuse distance.
    VictimQuality,
    /// Miss gap between policies and offline MIN.
    MinGap,
}

impl AnalyzeKind {
    pub fn name(self) -> &'static str {
        match self {
            AnalyzeKind::NoAverse => "no-averse",
            AnalyzeKind::HitcountBlock => "hitcount-block",
            AnalyzeKind::HitcountRegion => "hitcount-region",
            AnalyzeKind::VictimQuality => "victim-quality",
            AnalyzeKind::MinGap => "min-gap",
        }
    }

    fn default_policy(self) -> &'static str {
        match self {
            AnalyzeKind::NoAverse | AnalyzeKind::VictimQuality => "hawkeye",
            AnalyzeKind::HitcountBlock | AnalyzeKind::HitcountRegion => "min",
            AnalyzeKind::MinGap => "lru",
        }
    }
}

fn histogram_table(name: &str, h: &ErrorHistogram) -> Table {
    let mut t = Table::new(name, &["count", "fraction"]);
    for b in 0..ERROR_BUCKETS {
        let label = if b + 1 == ERROR_BUCKETS {
            format!("diff{b}+")
        } else {
            format!("diff{b}")
        };
        t.push(label, vec![h.buckets[b] as f64, h.fraction(b)]);
    }
    t
}

/// `policy` defaults per report: `hawkeye` for no-averse and victim-quality,
/// `min` for the hit-count reports, and every online policy for min-gap.
pub fn analyze(
    trace: &Trace,
    kind: AnalyzeKind,
    policy: Option<&str>,
    cfg: &RunConfig,
) -> Result<Report, AnalysisError> {
    let name = policy.unwrap_or(kind.default_policy());
    check_names(&[name])?;
    let mut report = Report::new(cfg.seed);

    match kind {
        AnalyzeKind::NoAverse => {
            let run = run_policy(trace, name, cfg, SimOptions::default())?;
            let mut t = Table::new(
                kind.name(),
                &["replacements_total", "replacements_no_averse", "fraction"],
            );
            t.push(
                name,
                vec![
                    run.stats.replacements_total as f64,
                    run.stats.replacements_no_averse as f64,
                    no_averse_fraction(&run.stats),
                ],
            );
            report.tables.push(t);
        }
        AnalyzeKind::HitcountBlock | AnalyzeKind::HitcountRegion => {
            let opts = SimOptions {
                residencies: true,
                ..Default::default()
            };
            let run = run_policy(trace, name, cfg, opts)?;
            let h = if kind == AnalyzeKind::HitcountBlock {
                per_block_prediction_error(&run.residencies)
            } else {
                per_region_prediction_error(&run.residencies, cfg.geometry)
            };
            report.tables.push(histogram_table(kind.name(), &h));
        }
        AnalyzeKind::VictimQuality => {
            let opts = SimOptions {
                events: true,
                ..Default::default()
            };
            let run = run_policy(trace, name, cfg, opts)?;
            let events = run.events.as_deref().expect("events recorded");
            report.tables.push(rank_table(trace, events, cfg)?);
        }
        AnalyzeKind::MinGap => {
            let mut names: Vec<&str> = match policy {
                Some(p) => vec![p],
                None => ONLINE_POLICIES.to_vec(),
            };
            names.extend(["min-nobypass", "min"]);
            let runs = run_all(trace, &names, cfg, SimOptions::default())?;
            let min_misses = runs.last().expect("min run").stats.misses;
            let min_mpki = mpki(&runs.last().expect("min run").stats, trace.instruction_count)?;
            let mut t = Table::new(kind.name(), &["hits", "misses", "mpki", "excess_misses", "mpki_gap"]);
            for run in &runs {
                let m = mpki(&run.stats, trace.instruction_count)?;
                t.push(
                    run.policy.clone(),
                    vec![
                        run.stats.hits as f64,
                        run.stats.misses as f64,
                        m,
                        run.stats.misses.saturating_sub(min_misses) as f64,
                        m - min_mpki,
                    ],
                );
            }
            report.tables.push(t);
        }
    }
    Ok(report)
}

/// Event log as CSV: one row per replacement decision. `victim` is empty for
/// a bypass; `residents` lists block numbers by way, separated by `;`.
pub fn events_csv(events: &[ReplacementEvent]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["pos", "set", "incoming", "victim", "no_averse", "residents"])
        .expect("in-memory CSV write");
    for e in events {
        let residents: Vec<String> = e.residents.iter().map(u64::to_string).collect();
        w.write_record([
            e.pos.to_string(),
            e.set.to_string(),
            e.incoming.to_string(),
            e.victim.map_or(String::new(), |v| v.to_string()),
            u8::from(e.no_averse).to_string(),
            residents.join(";"),
        ])
        .expect("in-memory CSV write");
    }
    String::from_utf8(w.into_inner().expect("in-memory CSV flush")).expect("CSV output is UTF-8")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cache::CacheGeometry;
    use crate::trace::{gen_synthetic, GeneratorKind, GeneratorSpec};

    fn small() -> RunConfig {
        RunConfig::with_geometry(CacheGeometry::new(16, 4, 6).unwrap())
    }

    #[test]
    fn compare_lru_alone_has_zero_reduction() {
        let t = gen_synthetic(&GeneratorSpec::new(GeneratorKind::Zipf, 500, 5000, 1)).unwrap();
        let r = compare(&t, &["lru"], &small(), false).unwrap();
        let table = r.table("compare").unwrap();
        assert_eq!(table.rows.len(), 1);
        assert_eq!(table.value("lru", "mpki_reduction"), Some(0.0));
    }

    #[test]
    fn compare_stream_is_all_misses() {
        let t = gen_synthetic(&GeneratorSpec::new(GeneratorKind::Stream, 3000, 3000, 1)).unwrap();
        let names = ONLINE_POLICIES;
        let r = compare(&t, names, &small(), true).unwrap();
        let table = r.table("compare").unwrap();
        for name in names {
            assert_eq!(table.value(name, "hits"), Some(0.0));
            assert_eq!(table.value(name, "misses"), Some(3000.0));
            assert_eq!(table.value(name, "mpki_reduction"), Some(0.0));
        }
    }

    #[test]
    fn compare_rejects_unknown_policy() {
        let t = gen_synthetic(&GeneratorSpec::new(GeneratorKind::Loop, 10, 100, 1)).unwrap();
        assert_eq!(
            compare(&t, &["lru", "nope"], &small(), false).unwrap_err(),
            AnalysisError::UnknownPolicy("nope".into())
        );
    }

    #[test]
    fn analyze_reports_have_expected_shape() {
        let t = gen_synthetic(&GeneratorSpec::new(GeneratorKind::Mixed, 400, 8000, 3)).unwrap();
        let cfg = small();
        for kind in [
            AnalyzeKind::NoAverse,
            AnalyzeKind::HitcountBlock,
            AnalyzeKind::HitcountRegion,
            AnalyzeKind::VictimQuality,
            AnalyzeKind::MinGap,
        ] {
            let r = analyze(&t, kind, None, &cfg).unwrap();
            let table = r.table(kind.name()).unwrap();
            assert!(!table.rows.is_empty(), "{}", kind.name());
        }
        let gap = analyze(&t, AnalyzeKind::MinGap, Some("ehc"), &cfg).unwrap();
        let table = gap.table("min-gap").unwrap();
        assert_eq!(table.value("min", "excess_misses"), Some(0.0));
        assert!(table.value("ehc", "excess_misses").unwrap() >= 0.0);
    }

    #[test]
    fn min_victims_are_optimal() {
        let t = gen_synthetic(&GeneratorSpec::new(GeneratorKind::Zipf, 300, 4000, 9)).unwrap();
        let r = analyze(&t, AnalyzeKind::VictimQuality, Some("min"), &small()).unwrap();
        let table = r.table("victim-quality").unwrap();
        assert_eq!(table.value("rank0", "fraction"), Some(1.0));
        assert_eq!(table.value("mean", "fraction"), Some(0.0));
    }
}
