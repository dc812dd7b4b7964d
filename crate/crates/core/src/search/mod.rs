//! Best-first minimal diagnosis search.
//!
//! [`rbf_hs`] is the linear-space recursive best-first hitting set search;
//! [`hs_tree`] is the uniform-cost HS-Tree it is benchmarked against. Both
//! share node labeling and instrumentation.

mod hstree;
mod rbfhs;

use std::cmp::Ordering;
#[cfg(debug_assertions)]
use std::collections::HashSet;
use std::fmt;
use std::time::Duration;

use thiserror::Error;

use crate::conflict::{conflict_in_remainder, find_min_conflict_excluding, ConflictOutcome};
use crate::dpi::{AxiomSet, ConflictStrategy, Cost, Diagnosis, Dpi, FaultProbabilities};

pub use hstree::{hs_tree, hs_tree_with};
pub use rbfhs::{rbf_hs, rbf_hs_with};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SearchError {
    #[error("fault probabilities must be cost-adjusted (all below 0.5)")]
    NotCostAdjusted,
    #[error("ld must be at least 1")]
    ZeroLd,
    #[error("expected {expected} fault probabilities, got {got}")]
    ProbabilityCount { expected: usize, got: usize },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Algorithm {
    RbfHs,
    HsTree,
}

impl Algorithm {
    pub fn name(self) -> &'static str {
        match self {
            Algorithm::RbfHs => "rbfhs",
            Algorithm::HsTree => "hstree",
        }
    }

    pub fn run(self, dpi: &Dpi, pr: &FaultProbabilities, ld: usize, options: &SearchOptions) -> Result<SearchResult, SearchError> {
        match self {
            Algorithm::RbfHs => rbf_hs_with(dpi, pr, ld, options),
            Algorithm::HsTree => hs_tree_with(dpi, pr, ld, options),
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Debug, Default)]
pub struct SearchOptions {
    /// Record a [`TraceEvent`] log.
    pub trace: bool,
    /// Overrides the instance's default conflict strategy.
    pub conflict_strategy: Option<ConflictStrategy>,
}

/// A search tree node: the set of edge labels on its path from the root.
#[derive(Clone, Debug)]
pub struct Node {
    pub ids: AxiomSet,
    /// Static cost, `log pr(ids)`.
    pub f: Cost,
    /// Backed-up cost.
    pub big_f: Cost,
    pub dummy: bool,
}

impl Node {
    fn dummy() -> Self {
        Node { ids: AxiomSet::new(), f: Cost::NegInf, big_f: Cost::NegInf, dummy: true }
    }
}

/// Best first: higher F, then fewer elements, then lexicographically smaller.
pub(crate) fn node_order(a: &AxiomSet, fa: Cost, b: &AxiomSet, fb: Cost) -> Ordering {
    fb.cmp(&fa).then_with(|| a.cmp_size_lex(b))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Label {
    Valid,
    Closed,
    Conflict(AxiomSet),
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct SearchStats {
    pub peak_live_nodes: usize,
    pub nodes_generated: usize,
    pub label_calls: usize,
    pub conflict_computations: usize,
    pub conflict_reuses: usize,
    pub backtracks: usize,
    pub wall_time: Duration,
}

#[derive(Clone, Debug, PartialEq)]
pub enum TraceLabel {
    Valid,
    Closed,
    Conflict { conflict: AxiomSet, reused: bool },
}

#[derive(Clone, Debug, PartialEq)]
pub enum TraceEvent {
    Label { node: AxiomSet, label: TraceLabel },
    /// Children with their f and initial F values.
    Expand { node: AxiomSet, children: Vec<(AxiomSet, Cost, Cost)>, dummy: bool },
    /// A child took its parent's backed-up F instead of its own f.
    Inherit { node: AxiomSet, parent: AxiomSet, f: Cost, big_f: Cost },
    Backtrack { node: AxiomSet, returned: Cost, bound: Cost },
    Diag { diagnosis: AxiomSet, probability: f64 },
}

impl TraceEvent {
    /// One line with axiom names and linear-scale costs.
    pub fn render(&self, dpi: &Dpi) -> String {
        match self {
            TraceEvent::Label { node, label } => {
                let what = match label {
                    TraceLabel::Valid => "valid".to_string(),
                    TraceLabel::Closed => "closed".to_string(),
                    TraceLabel::Conflict { conflict, reused } => {
                        format!("conflict {} {}", dpi.show(conflict), if *reused { "reused" } else { "computed" })
                    }
                };
                format!("LABEL {} {what}", dpi.show(node))
            }
            TraceEvent::Expand { node, children, dummy } => {
                let list: Vec<String> =
                    children.iter().map(|(c, f, big_f)| format!("{} f={f} F={big_f}", dpi.show(c))).collect();
                format!("EXPAND {} -> {}{}", dpi.show(node), list.join(", "), if *dummy { ", dummy F=-inf" } else { "" })
            }
            TraceEvent::Inherit { node, parent, f, big_f } => {
                format!("INHERIT {} f={f} F={big_f} from {}", dpi.show(node), dpi.show(parent))
            }
            TraceEvent::Backtrack { node, returned, bound } => {
                format!("BACKTRACK {} F={returned} bound={bound}", dpi.show(node))
            }
            TraceEvent::Diag { diagnosis, probability } => {
                format!("DIAG {} pr={probability:.6}", dpi.show(diagnosis))
            }
        }
    }
}

#[derive(Clone, Debug)]
pub struct SearchResult {
    /// Minimal diagnoses in the order they were found.
    pub diagnoses: Vec<Diagnosis>,
    /// Every minimal conflict computed during the search.
    pub conflicts: Vec<AxiomSet>,
    pub stats: SearchStats,
    pub trace: Vec<TraceEvent>,
}

/// State shared by both searches: the diagnosis and conflict lists, counters
/// and the optional trace.
pub(crate) struct Search<'a> {
    pub dpi: &'a Dpi,
    pub pr: &'a FaultProbabilities,
    pub ld: usize,
    strategy: ConflictStrategy,
    pub diagnoses: Vec<AxiomSet>,
    pub conflicts: Vec<AxiomSet>,
    pub stats: SearchStats,
    live: usize,
    trace: Option<Vec<TraceEvent>>,
    /// Assert (in debug builds) that no two live nodes share an id-set.
    /// HS-Tree briefly holds generated duplicates before its own check drops
    /// them, so only RBF-HS sets this.
    pub unique_live: bool,
    #[cfg(debug_assertions)]
    live_ids: HashSet<AxiomSet>,
}

pub(crate) enum Start {
    Done(Vec<AxiomSet>),
    Search,
}

impl<'a> Search<'a> {
    pub fn new(dpi: &'a Dpi, pr: &'a FaultProbabilities, ld: usize, options: &SearchOptions) -> Result<Self, SearchError> {
        if ld == 0 {
            return Err(SearchError::ZeroLd);
        }
        if pr.len() != dpi.num_axioms() {
            return Err(SearchError::ProbabilityCount { expected: dpi.num_axioms(), got: pr.len() });
        }
        if !pr.is_cost_adjusted() {
            return Err(SearchError::NotCostAdjusted);
        }
        Ok(Search {
            dpi,
            pr,
            ld,
            strategy: options.conflict_strategy.unwrap_or_else(|| dpi.default_conflict_strategy()),
            diagnoses: Vec::new(),
            conflicts: Vec::new(),
            stats: SearchStats::default(),
            live: 0,
            trace: options.trace.then(Vec::new),
            unique_live: false,
            #[cfg(debug_assertions)]
            live_ids: HashSet::new(),
        })
    }

    /// Handles the trivial cases and seeds the conflict list.
    pub fn start(&mut self) -> Start {
        match find_min_conflict_excluding(self.dpi, &AxiomSet::new(), self.strategy) {
            ConflictOutcome::EmptyConflict => Start::Done(Vec::new()),
            ConflictOutcome::NoConflict => Start::Done(vec![AxiomSet::new()]),
            ConflictOutcome::Minimal(c) => {
                self.stats.conflict_computations += 1;
                self.conflicts.push(c);
                Start::Search
            }
        }
    }

    pub fn tracing(&self) -> bool {
        self.trace.is_some()
    }

    pub fn emit(&mut self, event: impl FnOnce() -> TraceEvent) {
        if let Some(t) = &mut self.trace {
            t.push(event());
        }
    }

    pub fn node(&mut self, ids: AxiomSet) -> Node {
        let f = self.pr.cost(&ids);
        self.register(&ids, false);
        Node { ids, f, big_f: f, dummy: false }
    }

    pub fn dummy(&mut self) -> Node {
        self.register(&AxiomSet::new(), true);
        Node::dummy()
    }

    fn register(&mut self, _ids: &AxiomSet, _dummy: bool) {
        self.live += 1;
        self.stats.nodes_generated += 1;
        self.stats.peak_live_nodes = self.stats.peak_live_nodes.max(self.live);
        #[cfg(debug_assertions)]
        if !_dummy && self.track_duplicates() {
            assert!(self.live_ids.insert(_ids.clone()), "duplicate live node");
        }
    }

    #[cfg(debug_assertions)]
    fn track_duplicates(&self) -> bool {
        self.unique_live
    }

    pub fn discard(&mut self, node: &Node) {
        self.live -= 1;
        #[cfg(debug_assertions)]
        if !node.dummy && self.track_duplicates() {
            self.live_ids.remove(&node.ids);
        }
        let _ = node;
    }

    /// Closed if `n` contains a found diagnosis; otherwise the first stored
    /// conflict disjoint from `n`, or a fresh one from `K \ n`.
    pub fn label(&mut self, n: &AxiomSet) -> Label {
        self.stats.label_calls += 1;
        let label = if self.diagnoses.iter().any(|d| d.is_subset_of(n)) {
            Label::Closed
        } else if let Some(c) = self.conflicts.iter().find(|c| c.is_disjoint(n)) {
            self.stats.conflict_reuses += 1;
            let c = c.clone();
            self.emit(|| TraceEvent::Label { node: n.clone(), label: TraceLabel::Conflict { conflict: c.clone(), reused: true } });
            return Label::Conflict(c);
        } else {
            match conflict_in_remainder(self.dpi, n, self.strategy) {
                ConflictOutcome::NoConflict => Label::Valid,
                ConflictOutcome::Minimal(c) => {
                    self.stats.conflict_computations += 1;
                    self.conflicts.push(c.clone());
                    self.emit(|| TraceEvent::Label { node: n.clone(), label: TraceLabel::Conflict { conflict: c.clone(), reused: false } });
                    return Label::Conflict(c);
                }
                ConflictOutcome::EmptyConflict => unreachable!("empty set checked before the search starts"),
            }
        };
        let shown = if label == Label::Valid { TraceLabel::Valid } else { TraceLabel::Closed };
        self.emit(|| TraceEvent::Label { node: n.clone(), label: shown });
        label
    }

    /// Records a diagnosis; true once `ld` have been found.
    pub fn add_diagnosis(&mut self, n: &AxiomSet) -> bool {
        let probability = self.pr.pr(n);
        self.emit(|| TraceEvent::Diag { diagnosis: n.clone(), probability });
        self.diagnoses.push(n.clone());
        self.diagnoses.len() >= self.ld
    }

    pub fn finish(self, found: Vec<AxiomSet>, wall_time: Duration) -> SearchResult {
        debug_assert_eq!(self.live, 0, "live nodes leaked");
        let mut stats = self.stats;
        stats.wall_time = wall_time;
        let diagnoses = found.into_iter().map(|axioms| Diagnosis { probability: self.pr.pr(&axioms), axioms }).collect();
        SearchResult { diagnoses, conflicts: self.conflicts, stats, trace: self.trace.unwrap_or_default() }
    }
}
