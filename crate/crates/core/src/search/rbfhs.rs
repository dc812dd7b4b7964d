use std::time::Instant;

use super::{node_order, Label, Node, Search, SearchError, SearchOptions, SearchResult, Start, TraceEvent};
use crate::dpi::{AxiomSet, Cost, Dpi, FaultProbabilities};

/// Up to `ld` most probable minimal diagnoses, in descending order of
/// probability, using space linear in `|K|`. Pass `usize::MAX` for all.
pub fn rbf_hs(dpi: &Dpi, pr: &FaultProbabilities, ld: usize) -> Result<SearchResult, SearchError> {
    rbf_hs_with(dpi, pr, ld, &SearchOptions::default())
}

pub fn rbf_hs_with(dpi: &Dpi, pr: &FaultProbabilities, ld: usize, options: &SearchOptions) -> Result<SearchResult, SearchError> {
    let started = Instant::now();
    let mut search = Search::new(dpi, pr, ld, options)?;
    search.unique_live = true;
    if let Start::Done(found) = search.start() {
        return Ok(search.finish(found, started.elapsed()));
    }
    let root = search.node(AxiomSet::new());
    let mut aborted = false;
    recurse(&mut search, &root, root.f, Cost::NegInf, &mut aborted);
    search.discard(&root);
    let found = std::mem::take(&mut search.diagnoses);
    Ok(search.finish(found, started.elapsed()))
}

fn sort_children(children: &mut [Node]) {
    children.sort_by(|a, b| node_order(&a.ids, a.big_f, &b.ids, b.big_f));
}

/// Explores below `n` while its best child stays at or above `bound` and
/// returns the backed-up cost of `n`.
fn recurse(search: &mut Search<'_>, n: &Node, big_f: Cost, bound: Cost, aborted: &mut bool) -> Cost {
    let conflict = match search.label(&n.ids) {
        Label::Closed => return Cost::NegInf,
        Label::Valid => {
            *aborted = search.add_diagnosis(&n.ids);
            return Cost::NegInf;
        }
        Label::Conflict(c) => c,
    };

    let mut children: Vec<Node> = Vec::with_capacity(conflict.len() + 1);
    for e in conflict.iter() {
        let mut child = search.node(n.ids.with(e));
        if n.f > big_f && child.f > big_f {
            child.big_f = big_f;
            search.emit(|| TraceEvent::Inherit { node: child.ids.clone(), parent: n.ids.clone(), f: child.f, big_f });
        }
        children.push(child);
    }
    let with_dummy = children.len() == 1;
    if with_dummy {
        let d = search.dummy();
        children.push(d);
    }
    search.emit(|| TraceEvent::Expand {
        node: n.ids.clone(),
        children: children.iter().filter(|c| !c.dummy).map(|c| (c.ids.clone(), c.f, c.big_f)).collect(),
        dummy: with_dummy,
    });
    sort_children(&mut children);

    loop {
        let best = children[0].big_f;
        if best < bound || best.is_neg_inf() {
            break;
        }
        let child_bound = bound.max(children[1].big_f);
        let child = children[0].clone();
        let backed_up = recurse(search, &child, best, child_bound, aborted);
        if *aborted {
            for c in &children {
                search.discard(c);
            }
            return Cost::NegInf;
        }
        // stable reinsertion: move the child to its new position
        let mut updated = children.remove(0);
        updated.big_f = backed_up;
        let at = children.partition_point(|c| node_order(&c.ids, c.big_f, &updated.ids, updated.big_f).is_lt());
        children.insert(at, updated);
    }

    let result = children[0].big_f;
    search.stats.backtracks += 1;
    search.emit(|| TraceEvent::Backtrack { node: n.ids.clone(), returned: result, bound });
    for c in &children {
        search.discard(c);
    }
    result
}
