use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashSet};
use std::time::Instant;

use super::{node_order, Label, Node, Search, SearchError, SearchOptions, SearchResult, Start, TraceEvent};
use crate::dpi::{AxiomSet, Dpi, FaultProbabilities};

struct Queued(Node);

impl PartialEq for Queued {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Queued {}

impl PartialOrd for Queued {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Queued {
    // BinaryHeap pops the greatest element, so the best node compares greatest.
    fn cmp(&self, other: &Self) -> Ordering {
        node_order(&other.0.ids, other.0.f, &self.0.ids, self.0.f)
    }
}

/// Uniform-cost HS-Tree over the same labeling as [`super::rbf_hs`]. Keeps
/// the full open list in memory.
pub fn hs_tree(dpi: &Dpi, pr: &FaultProbabilities, ld: usize) -> Result<SearchResult, SearchError> {
    hs_tree_with(dpi, pr, ld, &SearchOptions::default())
}

pub fn hs_tree_with(dpi: &Dpi, pr: &FaultProbabilities, ld: usize, options: &SearchOptions) -> Result<SearchResult, SearchError> {
    let started = Instant::now();
    let mut search = Search::new(dpi, pr, ld, options)?;
    if let Start::Done(found) = search.start() {
        return Ok(search.finish(found, started.elapsed()));
    }

    let mut queue = BinaryHeap::new();
    let mut queued: HashSet<AxiomSet> = HashSet::new();
    let root = search.node(AxiomSet::new());
    queued.insert(root.ids.clone());
    queue.push(Queued(root));

    while let Some(Queued(n)) = queue.pop() {
        queued.remove(&n.ids);
        match search.label(&n.ids) {
            Label::Closed => {}
            Label::Valid => {
                if search.add_diagnosis(&n.ids) {
                    search.discard(&n);
                    break;
                }
            }
            Label::Conflict(c) => {
                let mut shown = Vec::new();
                for e in c.iter() {
                    let child = search.node(n.ids.with(e));
                    if queued.contains(&child.ids) {
                        search.discard(&child);
                        continue;
                    }
                    if search.tracing() {
                        shown.push((child.ids.clone(), child.f, child.big_f));
                    }
                    queued.insert(child.ids.clone());
                    queue.push(Queued(child));
                }
                search.emit(|| TraceEvent::Expand { node: n.ids.clone(), children: shown, dummy: false });
            }
        }
        search.discard(&n);
    }
    for Queued(n) in queue.drain() {
        search.discard(&n);
    }
    let found = std::mem::take(&mut search.diagnoses);
    Ok(search.finish(found, started.elapsed()))
}
