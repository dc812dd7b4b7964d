//! Benchmark rows, CSV I/O and the memory/time factor summary.

use std::collections::BTreeMap;
use std::io::{Read, Write};

use mbd_core::dpi::{brute_force_min_diagnoses, AxiomSet, Dpi, FaultProbabilities};
use mbd_core::search::{rbf_hs, Algorithm, SearchStats};
use mbd_core::sequential::{run_simulated_session, SessionError, SessionTrace};
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub const CSV_HEADER: [&str; 11] = [
    "dpi",
    "algo",
    "ld",
    "session",
    "runtime_ms",
    "peak_live_nodes",
    "nodes_generated",
    "label_calls",
    "conflict_computations",
    "conflict_reuses",
    "diagnoses_found",
];

pub const DEFAULT_LDS: [usize; 4] = [2, 6, 10, 20];

/// Instances up to this size draw session targets from the full list of
/// minimal diagnoses; larger ones from the first search.
pub const SAMPLE_BRUTE_FORCE_LIMIT: usize = 14;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub dpi: String,
    pub algo: String,
    pub ld: usize,
    pub session: usize,
    pub runtime_ms: f64,
    pub peak_live_nodes: usize,
    pub nodes_generated: usize,
    pub label_calls: usize,
    pub conflict_computations: usize,
    pub conflict_reuses: usize,
    pub diagnoses_found: usize,
}

impl BenchRow {
    pub fn from_stats(dpi: &str, algo: Algorithm, ld: usize, session: usize, stats: &SearchStats, found: usize) -> Self {
        BenchRow {
            dpi: dpi.to_string(),
            algo: algo.name().to_string(),
            ld,
            session,
            runtime_ms: stats.wall_time.as_secs_f64() * 1e3,
            peak_live_nodes: stats.peak_live_nodes,
            nodes_generated: stats.nodes_generated,
            label_calls: stats.label_calls,
            conflict_computations: stats.conflict_computations,
            conflict_reuses: stats.conflict_reuses,
            diagnoses_found: found,
        }
    }

    /// Aggregates every search of a session: runtimes and counters add up,
    /// the peak is the largest single-search peak, and `diagnoses_found` is
    /// the size of the first search's result.
    pub fn from_session(dpi: &str, algo: Algorithm, ld: usize, session: usize, trace: &SessionTrace) -> Self {
        let found = trace.iterations.first().map_or(trace.last_diagnoses.len(), |i| i.diagnoses.len());
        let mut row = BenchRow::from_stats(dpi, algo, ld, session, &SearchStats::default(), found);
        for s in trace.search_stats() {
            row.runtime_ms += s.wall_time.as_secs_f64() * 1e3;
            row.peak_live_nodes = row.peak_live_nodes.max(s.peak_live_nodes);
            row.nodes_generated += s.nodes_generated;
            row.label_calls += s.label_calls;
            row.conflict_computations += s.conflict_computations;
            row.conflict_reuses += s.conflict_reuses;
        }
        row
    }
}

pub fn write_rows<W: Write>(out: W, rows: &[BenchRow]) -> Result<(), csv::Error> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    w.write_record(CSV_HEADER)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_rows<R: Read>(input: R) -> Result<Vec<BenchRow>, csv::Error> {
    csv::Reader::from_reader(input).deserialize().collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub dpi: String,
    pub ld: usize,
    pub sessions: usize,
    /// Mean of peak(hstree) / peak(rbfhs).
    pub memory_factor: f64,
    /// Mean of runtime(rbfhs) / runtime(hstree).
    pub time_factor: f64,
}

type Pair<'a> = (Option<&'a BenchRow>, Option<&'a BenchRow>);

/// Per (dpi, ld) averages over the sessions where both algorithms ran.
pub fn summarize(rows: &[BenchRow]) -> Vec<SummaryRow> {
    let mut cells: BTreeMap<(&str, usize, usize), Pair> = BTreeMap::new();
    for r in rows {
        let cell = cells.entry((r.dpi.as_str(), r.ld, r.session)).or_default();
        match r.algo.as_str() {
            "rbfhs" => cell.0 = Some(r),
            "hstree" => cell.1 = Some(r),
            _ => {}
        }
    }
    let mut acc: BTreeMap<(&str, usize), (usize, f64, f64, usize)> = BTreeMap::new();
    for ((dpi, ld, _), pair) in cells {
        let (Some(r), Some(h)) = pair else { continue };
        if r.peak_live_nodes == 0 {
            continue;
        }
        let e = acc.entry((dpi, ld)).or_default();
        e.0 += 1;
        e.1 += h.peak_live_nodes as f64 / r.peak_live_nodes as f64;
        if h.runtime_ms > 0.0 {
            e.2 += r.runtime_ms / h.runtime_ms;
            e.3 += 1;
        }
    }
    acc.into_iter()
        .map(|((dpi, ld), (n, mem, time, timed))| SummaryRow {
            dpi: dpi.to_string(),
            ld,
            sessions: n,
            memory_factor: mem / n as f64,
            time_factor: if timed > 0 { time / timed as f64 } else { f64::NAN },
        })
        .collect()
}

pub fn write_summary<W: Write>(out: W, rows: &[SummaryRow]) -> Result<(), csv::Error> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    w.write_record(["dpi", "ld", "sessions", "memory_factor", "time_factor"])?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

/// `k` session targets drawn with `seed`, distinct while enough minimal
/// diagnoses are available.
pub fn sample_actuals(dpi: &Dpi, pr: &FaultProbabilities, k: usize, pool_ld: usize, seed: u64) -> Vec<AxiomSet> {
    let pool: Vec<AxiomSet> = if dpi.num_axioms() <= SAMPLE_BRUTE_FORCE_LIMIT {
        brute_force_min_diagnoses(dpi, pr).map(|v| v.into_iter().map(|d| d.axioms).collect()).unwrap_or_default()
    } else {
        rbf_hs(dpi, pr, pool_ld.max(1)).map(|r| r.diagnoses.into_iter().map(|d| d.axioms).collect()).unwrap_or_default()
    };
    if pool.is_empty() {
        return Vec::new();
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    if k <= pool.len() {
        sample(&mut rng, pool.len(), k).into_iter().map(|i| pool[i].clone()).collect()
    } else {
        (0..k).map(|_| pool[rng.gen_range(0..pool.len())].clone()).collect()
    }
}

/// Runs one simulated session per (target, ld, algorithm) and returns a row
/// for each; failed cells are returned separately.
pub fn bench_instance(
    name: &str,
    dpi: &Dpi,
    pr: &FaultProbabilities,
    lds: &[usize],
    actuals: &[AxiomSet],
) -> (Vec<BenchRow>, Vec<(String, SessionError)>) {
    let mut rows = Vec::new();
    let mut failures = Vec::new();
    for (session, actual) in actuals.iter().enumerate() {
        for &ld in lds {
            for algo in [Algorithm::RbfHs, Algorithm::HsTree] {
                match run_simulated_session(dpi, pr, ld, algo, actual) {
                    Ok(trace) => rows.push(BenchRow::from_session(name, algo, ld, session, &trace)),
                    Err(e) => failures.push((format!("{name} {algo} ld={ld} session={session}"), e)),
                }
            }
        }
    }
    (rows, failures)
}
