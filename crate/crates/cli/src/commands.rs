use std::fs::File;
use std::io::{BufRead, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use mbd_core::conflict::{find_min_conflict, ConflictOutcome};
use mbd_core::dpi::{
    brute_force_min_conflicts, brute_force_min_diagnoses, cardinality_pr, cost_adjust, minimal_hitting_sets, normalized, AxiomSet,
    BackendKind, ConflictStrategy, Dpi, DpiError, FaultProbabilities, BRUTE_FORCE_LIMIT,
};
use mbd_core::search::{Algorithm, SearchError, SearchOptions, SearchResult};
use mbd_core::sequential::{run_session, Oracle, Query, SessionError, SessionTrace, SimulatedOracle};
use serde::Serialize;
use thiserror::Error;

use crate::bench::{bench_instance, sample_actuals, summarize, write_rows, write_summary, BenchRow, DEFAULT_LDS};
use crate::format::{load_dpi_file, FormatError, LoadedDpi};

/// Uniform fault probability used in cardinality mode.
pub const CARDINALITY_C: f64 = 1.0 / 3.0;
/// Scaling constant applied to file probabilities that are not yet below 0.5.
pub const ADJUST_C: f64 = 0.25;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Format(#[from] FormatError),
    #[error(transparent)]
    Dpi(#[from] DpiError),
    #[error(transparent)]
    Search(#[from] SearchError),
    #[error(transparent)]
    Session(#[from] SessionError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error("{0}")]
    Usage(String),
}

#[derive(Parser, Debug)]
#[command(name = "mbd", version, about = "Best-first minimal diagnosis search")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Compute the most probable minimal diagnoses of an instance.
    Diag(DiagArgs),
    /// Run sequential diagnosis sessions.
    Sequential(SequentialArgs),
    /// Benchmark both searches over a directory of instances.
    Bench(BenchArgs),
    /// Cross-check the searches against exhaustive enumeration.
    Check(CheckArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum AlgoArg {
    Rbfhs,
    Hstree,
}

impl From<AlgoArg> for Algorithm {
    fn from(a: AlgoArg) -> Self {
        match a {
            AlgoArg::Rbfhs => Algorithm::RbfHs,
            AlgoArg::Hstree => Algorithm::HsTree,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    /// Uniform probabilities: fewer faults is more probable.
    Card,
    /// Probabilities from the `[PR]` section.
    Prob,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ConflictArg {
    Auto,
    Quickxplain,
    Family,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum OracleArg {
    Simulated,
    Interactive,
}

#[derive(Args, Debug, Clone)]
pub struct ProbArgs {
    #[arg(long, value_enum, default_value = "card")]
    pub mode: Mode,
    /// Scale file probabilities by this constant even if all are below 0.5.
    #[arg(long, value_name = "C")]
    pub adjust: Option<f64>,
}

/// A positive count, or `all`.
pub fn parse_ld(s: &str) -> Result<usize, String> {
    match s {
        "all" | "inf" => Ok(usize::MAX),
        _ => match s.parse::<usize>() {
            Ok(0) => Err("ld must be at least 1".into()),
            Ok(n) => Ok(n),
            Err(_) => Err(format!("`{s}` is not a count")),
        },
    }
}

#[derive(Args, Debug)]
pub struct DiagArgs {
    #[arg(long)]
    pub dpi: PathBuf,
    #[arg(long, value_enum, default_value = "rbfhs")]
    pub algo: AlgoArg,
    #[arg(long, value_parser = parse_ld, default_value = "10")]
    pub ld: usize,
    #[command(flatten)]
    pub prob: ProbArgs,
    #[arg(long, value_enum, default_value = "auto")]
    pub conflicts: ConflictArg,
    /// Write one line per search event.
    #[arg(long, value_name = "FILE")]
    pub trace: Option<PathBuf>,
    /// Write the search counters as a CSV row.
    #[arg(long, value_name = "FILE")]
    pub stats: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct SequentialArgs {
    #[arg(long)]
    pub dpi: PathBuf,
    #[arg(long, value_enum, default_value = "rbfhs")]
    pub algo: AlgoArg,
    #[arg(long, value_parser = parse_ld, default_value = "4")]
    pub ld: usize,
    #[command(flatten)]
    pub prob: ProbArgs,
    /// Comma-separated ids of the actual diagnosis.
    #[arg(long, conflicts_with = "sessions")]
    pub actual: Option<String>,
    /// Number of sessions with randomly drawn actual diagnoses.
    #[arg(long)]
    pub sessions: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value = "simulated")]
    pub oracle: OracleArg,
    /// JSON-lines session trace.
    #[arg(long, value_name = "FILE")]
    pub trace: Option<PathBuf>,
    /// One aggregated CSV row per session.
    #[arg(long, value_name = "FILE")]
    pub csv: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct BenchArgs {
    /// Directory with `.dpi` files.
    #[arg(long)]
    pub dir: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// Per (dpi, ld) memory and time factors.
    #[arg(long, value_name = "FILE")]
    pub summary: Option<PathBuf>,
    #[arg(long, value_delimiter = ',', value_parser = parse_ld)]
    pub ld: Vec<usize>,
    #[arg(long, default_value_t = 5)]
    pub sessions: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub prob: ProbArgs,
}

#[derive(Args, Debug)]
pub struct CheckArgs {
    #[arg(long)]
    pub dpi: PathBuf,
    #[command(flatten)]
    pub prob: ProbArgs,
}

/// Fault probabilities for the chosen mode. File probabilities are used
/// as-is when all lie below 0.5 and scaled by [`ADJUST_C`] otherwise.
pub fn probabilities(loaded: &LoadedDpi, prob: &ProbArgs) -> Result<FaultProbabilities, CliError> {
    let n = loaded.dpi.num_axioms();
    match prob.mode {
        Mode::Card => Ok(cardinality_pr(n, CARDINALITY_C)?),
        Mode::Prob => {
            let pr = loaded.pr.as_ref().ok_or_else(|| CliError::Usage("--mode prob needs a [PR] section".into()))?;
            match prob.adjust {
                Some(c) => Ok(cost_adjust(pr, c)?),
                None if pr.is_cost_adjusted() => Ok(pr.clone()),
                None => Ok(cost_adjust(pr, ADJUST_C)?),
            }
        }
    }
}

fn create(path: &Path) -> Result<BufWriter<File>, CliError> {
    Ok(BufWriter::new(File::create(path)?))
}

fn dpi_name(path: &Path) -> String {
    path.file_stem().map_or_else(|| path.display().to_string(), |s| s.to_string_lossy().into_owned())
}

fn ld_text(ld: usize) -> String {
    if ld == usize::MAX {
        "all".into()
    } else {
        ld.to_string()
    }
}

/// Runs a parsed command; the returned value is the process exit code.
pub fn run(cli: Cli, input: &mut dyn BufRead, out: &mut dyn Write) -> Result<i32, CliError> {
    match cli.command {
        Command::Diag(a) => cmd_diag(&a, out).map(|_| 0),
        Command::Sequential(a) => cmd_sequential(&a, input, out).map(|_| 0),
        Command::Bench(a) => cmd_bench(&a, out).map(|_| 0),
        Command::Check(a) => cmd_check(&a, out).map(|ok| if ok { 0 } else { 1 }),
    }
}

pub fn cmd_diag(args: &DiagArgs, out: &mut dyn Write) -> Result<SearchResult, CliError> {
    let loaded = load_dpi_file(&args.dpi)?;
    let pr = probabilities(&loaded, &args.prob)?;
    let options = SearchOptions {
        trace: args.trace.is_some(),
        conflict_strategy: match args.conflicts {
            ConflictArg::Auto => None,
            ConflictArg::Quickxplain => Some(ConflictStrategy::QuickXplain),
            ConflictArg::Family => Some(ConflictStrategy::FamilyOrder),
        },
    };
    let algo = Algorithm::from(args.algo);
    let result = algo.run(&loaded.dpi, &pr, args.ld, &options)?;
    let dpi = &loaded.dpi;

    writeln!(out, "{algo}: {} minimal diagnoses (ld={})", result.diagnoses.len(), ld_text(args.ld))?;
    let probs: Vec<f64> = result.diagnoses.iter().map(|d| d.probability).collect();
    for (i, (d, norm)) in result.diagnoses.iter().zip(normalized(&probs)).enumerate() {
        writeln!(out, "{:>3}. {:<24} pr={:.6e} normalized={norm:.4}", i + 1, dpi.show(&d.axioms), d.probability)?;
    }
    let s = &result.stats;
    writeln!(
        out,
        "peak_live_nodes={} nodes_generated={} label_calls={} conflict_computations={} conflict_reuses={} backtracks={} runtime_ms={:.3}",
        s.peak_live_nodes,
        s.nodes_generated,
        s.label_calls,
        s.conflict_computations,
        s.conflict_reuses,
        s.backtracks,
        s.wall_time.as_secs_f64() * 1e3
    )?;

    if let Some(path) = &args.trace {
        let mut w = create(path)?;
        for e in &result.trace {
            writeln!(w, "{}", e.render(dpi))?;
        }
        w.flush()?;
    }
    if let Some(path) = &args.stats {
        let row = BenchRow::from_stats(&dpi_name(&args.dpi), algo, args.ld, 0, s, result.diagnoses.len());
        write_rows(create(path)?, &[row])?;
    }
    Ok(result)
}

/// Asks a human on `out` and reads `y`/`n` answers from `input`.
pub struct InteractiveOracle<'a> {
    pub input: &'a mut dyn BufRead,
    pub out: &'a mut dyn Write,
}

impl Oracle for InteractiveOracle<'_> {
    fn answer(&mut self, dpi: &Dpi, query: Query) -> Result<bool, SessionError> {
        let name = dpi.name(query.axiom);
        let question = match dpi.formula(query.axiom) {
            Some(f) => format!("Is axiom {name} (`{f}`) correct? [y/n] "),
            None => format!("Is component {name} working? [y/n] "),
        };
        let io = |e: std::io::Error| SessionError::Oracle(e.to_string());
        loop {
            write!(self.out, "{question}").map_err(io)?;
            self.out.flush().map_err(io)?;
            let mut line = String::new();
            if self.input.read_line(&mut line).map_err(io)? == 0 {
                return Err(SessionError::Oracle("input ended before the session finished".into()));
            }
            match line.trim().to_ascii_lowercase().as_str() {
                "y" | "yes" => return Ok(true),
                "n" | "no" => return Ok(false),
                _ => writeln!(self.out, "please answer y or n").map_err(io)?,
            }
        }
    }
}

#[derive(Serialize)]
struct IterationRecord<'a> {
    session: usize,
    iteration: usize,
    diagnoses: Vec<Vec<&'a str>>,
    query: &'a str,
    score: f64,
    answer: bool,
    peak_live_nodes: usize,
    nodes_generated: usize,
}

#[derive(Serialize)]
struct FinalRecord<'a> {
    session: usize,
    actual: Option<Vec<&'a str>>,
    final_diagnosis: Option<Vec<&'a str>>,
    queries: usize,
}

fn names<'a>(dpi: &'a Dpi, set: &AxiomSet) -> Vec<&'a str> {
    set.iter().map(|a| dpi.name(a)).collect()
}

fn write_session_trace(w: &mut dyn Write, dpi: &Dpi, session: usize, actual: Option<&AxiomSet>, t: &SessionTrace) -> Result<(), CliError> {
    for (i, it) in t.iterations.iter().enumerate() {
        let rec = IterationRecord {
            session,
            iteration: i,
            diagnoses: it.diagnoses.iter().map(|d| names(dpi, &d.axioms)).collect(),
            query: dpi.name(it.query.axiom),
            score: it.score,
            answer: it.answer,
            peak_live_nodes: it.stats.peak_live_nodes,
            nodes_generated: it.stats.nodes_generated,
        };
        writeln!(w, "{}", serde_json::to_string(&rec)?)?;
    }
    let rec = FinalRecord {
        session,
        actual: actual.map(|a| names(dpi, a)),
        final_diagnosis: t.final_diagnosis().map(|d| names(dpi, d)),
        queries: t.queries(),
    };
    writeln!(w, "{}", serde_json::to_string(&rec)?)?;
    Ok(())
}

pub fn cmd_sequential(args: &SequentialArgs, input: &mut dyn BufRead, out: &mut dyn Write) -> Result<Vec<SessionTrace>, CliError> {
    let loaded = load_dpi_file(&args.dpi)?;
    let pr = probabilities(&loaded, &args.prob)?;
    let dpi = &loaded.dpi;
    let algo = Algorithm::from(args.algo);
    let name = dpi_name(&args.dpi);

    let actuals: Vec<Option<AxiomSet>> = match (&args.actual, args.sessions, args.oracle) {
        (Some(list), _, _) => {
            let ids: Vec<&str> = list.split(',').map(str::trim).filter(|s| !s.is_empty()).collect();
            let set = dpi.axiom_set(&ids)?;
            if !dpi.is_minimal_diagnosis(&set)? {
                return Err(SessionError::NotMinimalDiagnosis(dpi.show(&set)).into());
            }
            vec![Some(set)]
        }
        (None, _, OracleArg::Interactive) => vec![None],
        (None, Some(k), OracleArg::Simulated) => {
            sample_actuals(dpi, &pr, k, args.ld.min(1000), args.seed).into_iter().map(Some).collect()
        }
        (None, None, OracleArg::Simulated) => {
            return Err(CliError::Usage("simulated sessions need --actual or --sessions".into()));
        }
    };

    let mut trace_out = args.trace.as_deref().map(create).transpose()?;
    let mut rows = Vec::new();
    let mut traces = Vec::new();
    for (session, actual) in actuals.iter().enumerate() {
        let result = match (args.oracle, actual) {
            (OracleArg::Interactive, _) => run_session(dpi, &pr, args.ld, algo, &mut InteractiveOracle { input, out }),
            (OracleArg::Simulated, Some(a)) => run_session(dpi, &pr, args.ld, algo, &mut SimulatedOracle { actual: a.clone() }),
            (OracleArg::Simulated, None) => unreachable!("simulated sessions always have a target"),
        };
        let trace = match result {
            Ok(t) => t,
            Err(SessionError::NotDiscriminable(partial)) | Err(SessionError::NoDiagnosis(partial)) if trace_out.is_some() => {
                let w = trace_out.as_mut().expect("checked above");
                write_session_trace(w, dpi, session, actual.as_ref(), &partial)?;
                w.flush()?;
                let remaining = partial.last_diagnoses.len();
                return Err(CliError::Usage(format!("session {session}: stuck with {remaining} diagnoses; partial trace written")));
            }
            Err(e) => return Err(e.into()),
        };
        let shown = trace.final_diagnosis().map_or_else(|| "none".to_string(), |d| dpi.show(d));
        match actual {
            Some(a) => {
                let verdict = if trace.final_diagnosis() == Some(a) { "ok" } else { "MISMATCH" };
                writeln!(out, "session {session}: actual {} -> {shown} after {} queries ({verdict})", dpi.show(a), trace.queries())?;
            }
            None => writeln!(out, "session {session}: {shown} after {} queries", trace.queries())?,
        }
        if let Some(w) = trace_out.as_mut() {
            write_session_trace(w, dpi, session, actual.as_ref(), &trace)?;
        }
        rows.push(BenchRow::from_session(&name, algo, args.ld, session, &trace));
        traces.push(trace);
    }
    if let Some(mut w) = trace_out {
        w.flush()?;
    }
    if let Some(path) = &args.csv {
        write_rows(create(path)?, &rows)?;
    }
    Ok(traces)
}

pub fn cmd_bench(args: &BenchArgs, out: &mut dyn Write) -> Result<Vec<BenchRow>, CliError> {
    let lds: Vec<usize> = if args.ld.is_empty() { DEFAULT_LDS.to_vec() } else { args.ld.clone() };
    if lds.iter().any(|&ld| ld < 2) {
        return Err(CliError::Usage("sessions need every ld >= 2".into()));
    }
    let mut files: Vec<PathBuf> = std::fs::read_dir(&args.dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "dpi"))
        .collect();
    files.sort();

    let mut rows = Vec::new();
    for path in &files {
        let name = dpi_name(path);
        let prepared = load_dpi_file(path).map_err(CliError::from).and_then(|l| probabilities(&l, &args.prob).map(|pr| (l, pr)));
        let (loaded, pr) = match prepared {
            Ok(x) => x,
            Err(e) => {
                writeln!(out, "FAILED {name}: {e}")?;
                continue;
            }
        };
        let pool_ld = lds.iter().copied().max().unwrap_or(20);
        let actuals = sample_actuals(&loaded.dpi, &pr, args.sessions, pool_ld, args.seed);
        let (mut r, failures) = bench_instance(&name, &loaded.dpi, &pr, &lds, &actuals);
        for (cell, e) in failures {
            writeln!(out, "FAILED {cell}: {e}")?;
        }
        writeln!(out, "{name}: {} rows", r.len())?;
        rows.append(&mut r);
    }
    write_rows(create(&args.out)?, &rows)?;
    let summary = summarize(&rows);
    for s in &summary {
        writeln!(out, "{} ld={} memory_factor={:.2} time_factor={:.2}", s.dpi, s.ld, s.memory_factor, s.time_factor)?;
    }
    if let Some(path) = &args.summary {
        write_summary(create(path)?, &summary)?;
    }
    Ok(rows)
}

struct Report<'a> {
    out: &'a mut dyn Write,
    ok: bool,
}

impl Report<'_> {
    fn check(&mut self, name: &str, pass: bool, detail: impl FnOnce() -> String) -> std::io::Result<()> {
        self.ok &= pass;
        if pass {
            writeln!(self.out, "PASS {name}")
        } else {
            writeln!(self.out, "FAIL {name}: {}", detail())
        }
    }
}

fn sorted(mut v: Vec<AxiomSet>) -> Vec<AxiomSet> {
    v.sort();
    v
}

/// Returns whether every property held.
pub fn cmd_check(args: &CheckArgs, out: &mut dyn Write) -> Result<bool, CliError> {
    let loaded = load_dpi_file(&args.dpi)?;
    let pr = probabilities(&loaded, &args.prob)?;
    let dpi = &loaded.dpi;
    if dpi.num_axioms() > BRUTE_FORCE_LIMIT {
        return Err(DpiError::TooLarge(dpi.num_axioms(), BRUTE_FORCE_LIMIT).into());
    }
    let oracle = brute_force_min_diagnoses(dpi, &pr)?;
    let conflicts = brute_force_min_conflicts(dpi)?;
    let expected = sorted(oracle.iter().map(|d| d.axioms.clone()).collect());
    writeln!(out, "{} axioms, {} minimal conflicts, {} minimal diagnoses", dpi.num_axioms(), conflicts.len(), oracle.len())?;
    let mut report = Report { out, ok: true };

    if dpi.is_valid_set(&AxiomSet::new())? {
        let hs = sorted(minimal_hitting_sets(dpi.num_axioms(), &conflicts));
        report.check("duality: minimal diagnoses are the minimal hitting sets of minimal conflicts", hs == expected, || {
            format!("{} hitting sets vs {} diagnoses", hs.len(), expected.len())
        })?;
    }
    let first = find_min_conflict(dpi);
    let first_ok = match &first {
        ConflictOutcome::Minimal(c) => conflicts.contains(c),
        ConflictOutcome::NoConflict => conflicts.is_empty(),
        ConflictOutcome::EmptyConflict => !dpi.is_valid_set(&AxiomSet::new())?,
    };
    report.check("find_min_conflict returns a minimal conflict", first_ok, || format!("{first:?}"))?;

    for algo in [Algorithm::RbfHs, Algorithm::HsTree] {
        let r = algo.run(dpi, &pr, usize::MAX, &SearchOptions::default())?;
        let got = sorted(r.diagnoses.iter().map(|d| d.axioms.clone()).collect());
        report.check(&format!("{algo}: complete and sound"), got == expected, || {
            format!("found {} diagnoses, expected {}", got.len(), expected.len())
        })?;
        let ordered = r.diagnoses.windows(2).all(|w| w[0].probability >= w[1].probability * (1.0 - 1e-9));
        report.check(&format!("{algo}: best-first order"), ordered, String::new)?;
        let minimal = r.diagnoses.iter().all(|d| dpi.is_minimal_diagnosis(&d.axioms).unwrap_or(false));
        report.check(&format!("{algo}: every diagnosis is minimal"), minimal, String::new)?;
        let conflicts_minimal = r
            .conflicts
            .iter()
            .all(|c| !dpi.is_valid_set(c).unwrap_or(true) && c.iter().all(|e| dpi.is_valid_set(&c.without(e)).unwrap_or(false)));
        report.check(&format!("{algo}: computed conflicts are minimal"), conflicts_minimal, String::new)?;
        let hitting = r.diagnoses.iter().all(|d| r.conflicts.iter().all(|c| !c.is_disjoint(&d.axioms)));
        report.check(&format!("{algo}: diagnoses hit every computed conflict"), hitting, String::new)?;
        if algo == Algorithm::RbfHs {
            let c_max = r.conflicts.iter().map(AxiomSet::len).max().unwrap_or(0);
            let bound = (c_max + 1) * (dpi.num_axioms() + 1);
            report.check("rbfhs: peak live nodes within (c_max+1)(|K|+1)", r.stats.peak_live_nodes <= bound, || {
                format!("{} > {bound}", r.stats.peak_live_nodes)
            })?;
        }
    }
    if dpi.backend() == BackendKind::Reasoner || dpi.num_axioms() <= 12 {
        for ld in 1..=oracle.len().min(6) {
            let a = Algorithm::RbfHs.run(dpi, &pr, ld, &SearchOptions::default())?;
            let b = Algorithm::HsTree.run(dpi, &pr, ld, &SearchOptions::default())?;
            let same = a.diagnoses.len() == b.diagnoses.len()
                && a.diagnoses.iter().zip(&b.diagnoses).all(|(x, y)| (x.probability - y.probability).abs() <= 1e-12 * x.probability);
            report.check(&format!("agreement at ld={ld}"), same, String::new)?;
        }
    }
    let ok = report.ok;
    writeln!(report.out, "{}", if ok { "all checks passed" } else { "some checks FAILED" })?;
    Ok(ok)
}
