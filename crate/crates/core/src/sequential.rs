//! Sequential diagnosis: alternate diagnosis search with single-axiom
//! measurements until one diagnosis remains.
//!
//! Queries are scored with an entropy-style criterion: the normalized
//! probability mass of diagnoses predicting a positive answer, with
//! non-committed diagnoses split evenly, should be as close to one half as
//! possible.

use thiserror::Error;

use crate::dpi::{AxiomId, AxiomSet, Diagnosis, Dpi, FaultProbabilities};
use crate::search::{Algorithm, SearchError, SearchOptions, SearchStats};

const SCORE_TIE: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum SessionError {
    #[error("no admissible query separates the {} remaining diagnoses", .0.last_diagnoses.len())]
    NotDiscriminable(Box<SessionTrace>),
    #[error("the measurements rule out every diagnosis")]
    NoDiagnosis(Box<SessionTrace>),
    #[error("{0} is not a minimal diagnosis")]
    NotMinimalDiagnosis(String),
    #[error("sessions need ld >= 2 to detect a single remaining diagnosis")]
    LdTooSmall,
    #[error(transparent)]
    Search(#[from] SearchError),
    #[error("oracle failed: {0}")]
    Oracle(String),
}

/// A true/false question: does axiom `axiom` hold?
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Query {
    pub axiom: AxiomId,
}

/// Indices into the diagnosis list the partition was computed for.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct QueryPartition {
    /// Diagnoses predicting a positive answer.
    pub plus: Vec<usize>,
    /// Diagnoses refuted by a positive answer.
    pub minus: Vec<usize>,
    pub zero: Vec<usize>,
}

impl QueryPartition {
    /// Either answer eliminates at least one diagnosis.
    pub fn is_admissible(&self) -> bool {
        !self.plus.is_empty() && !self.minus.is_empty()
    }
}

pub fn partition(dpi: &Dpi, diagnoses: &[AxiomSet], query: Query) -> QueryPartition {
    let n = dpi.num_axioms();
    let mut p = QueryPartition::default();
    for (i, d) in diagnoses.iter().enumerate() {
        let rest = d.complement(n);
        if dpi.entails_axiom(&rest, query.axiom) {
            p.plus.push(i);
        } else if !dpi.is_valid_set(&rest.with(query.axiom)).unwrap_or(false) {
            p.minus.push(i);
        } else {
            p.zero.push(i);
        }
    }
    p
}

#[derive(Clone, Debug, PartialEq)]
pub struct Selection {
    pub query: Query,
    pub partition: QueryPartition,
    pub score: f64,
}

/// The admissible query minimizing `|p(D+) + p(D0)/2 - 1/2|`; ties go to the
/// smaller `D0`, then the lower axiom id. `None` if no candidate axiom
/// separates the diagnoses.
pub fn ent_select(dpi: &Dpi, diagnoses: &[AxiomSet], pr: &FaultProbabilities) -> Option<Selection> {
    let weights: Vec<f64> = diagnoses.iter().map(|d| pr.pr(d)).collect();

    let union = diagnoses.iter().fold(AxiomSet::new(), |acc, d| acc.union(d));
    let mut best: Option<Selection> = None;
    for axiom in union.iter().filter(|&a| !diagnoses.iter().all(|d| d.contains(a))) {
        let query = Query { axiom };
        let part = partition(dpi, diagnoses, query);
        if !part.is_admissible() {
            continue;
        }
        let score = ent_score(&part, &weights);
        let better = match &best {
            None => true,
            Some(b) => score < b.score - SCORE_TIE || (score <= b.score + SCORE_TIE && part.zero.len() < b.partition.zero.len()),
        };
        if better {
            best = Some(Selection { query, partition: part, score });
        }
    }
    best
}

/// `|p(D+) + p(D0)/2 - 1/2|` with `weights` normalized over all diagnoses.
pub fn ent_score(part: &QueryPartition, weights: &[f64]) -> f64 {
    let total: f64 = weights.iter().sum();
    let mass = |idx: &[usize]| idx.iter().map(|&i| weights[i]).sum::<f64>() / total;
    (mass(&part.plus) + 0.5 * mass(&part.zero) - 0.5).abs()
}

/// Answer of a simulated oracle that knows the actual diagnosis: an axiom
/// holds iff it is not faulty.
pub fn oracle_answer(query: Query, actual: &AxiomSet) -> bool {
    !actual.contains(query.axiom)
}

/// Adds the queried sentence to `P` on a positive answer, to `N` otherwise.
pub fn update_dpi(dpi: &Dpi, query: Query, answer: bool) -> Dpi {
    dpi.with_measurement(query.axiom, answer)
}

pub trait Oracle {
    fn answer(&mut self, dpi: &Dpi, query: Query) -> Result<bool, SessionError>;
}

pub struct SimulatedOracle {
    pub actual: AxiomSet,
}

impl Oracle for SimulatedOracle {
    fn answer(&mut self, _dpi: &Dpi, query: Query) -> Result<bool, SessionError> {
        Ok(oracle_answer(query, &self.actual))
    }
}

#[derive(Clone, Debug)]
pub struct Iteration {
    pub diagnoses: Vec<Diagnosis>,
    pub query: Query,
    pub score: f64,
    pub partition: QueryPartition,
    pub answer: bool,
    pub stats: SearchStats,
}

#[derive(Clone, Debug)]
pub struct SessionTrace {
    pub iterations: Vec<Iteration>,
    /// Result of the last search.
    pub last_diagnoses: Vec<Diagnosis>,
    pub last_stats: SearchStats,
    /// The instance with every measurement applied.
    pub final_dpi: Dpi,
}

impl SessionTrace {
    pub fn final_diagnosis(&self) -> Option<&AxiomSet> {
        match self.last_diagnoses.as_slice() {
            [d] => Some(&d.axioms),
            _ => None,
        }
    }

    pub fn queries(&self) -> usize {
        self.iterations.len()
    }

    /// Search statistics of every search in the session, in order.
    pub fn search_stats(&self) -> impl Iterator<Item = &SearchStats> {
        self.iterations.iter().map(|i| &i.stats).chain(std::iter::once(&self.last_stats))
    }
}

/// Searches for `ld` diagnoses, stops when exactly one is left, otherwise
/// asks the best query and folds the answer into the instance.
pub fn run_session(
    dpi: &Dpi,
    pr: &FaultProbabilities,
    ld: usize,
    algo: Algorithm,
    oracle: &mut dyn Oracle,
) -> Result<SessionTrace, SessionError> {
    if ld < 2 {
        return Err(SessionError::LdTooSmall);
    }
    let options = SearchOptions::default();
    let mut current = dpi.clone();
    let mut iterations = Vec::new();
    loop {
        let result = algo.run(&current, pr, ld, &options)?;
        let sets: Vec<AxiomSet> = result.diagnoses.iter().map(|d| d.axioms.clone()).collect();
        let trace = |iterations, dpi| SessionTrace {
            iterations,
            last_diagnoses: result.diagnoses.clone(),
            last_stats: result.stats.clone(),
            final_dpi: dpi,
        };
        match sets.len() {
            0 => return Err(SessionError::NoDiagnosis(Box::new(trace(iterations, current)))),
            1 => return Ok(trace(iterations, current)),
            _ => {}
        }
        let Some(sel) = ent_select(&current, &sets, pr) else {
            return Err(SessionError::NotDiscriminable(Box::new(trace(iterations, current))));
        };
        let answer = oracle.answer(&current, sel.query)?;
        current = update_dpi(&current, sel.query, answer);
        iterations.push(Iteration {
            diagnoses: result.diagnoses,
            query: sel.query,
            score: sel.score,
            partition: sel.partition,
            answer,
            stats: result.stats,
        });
    }
}

/// [`run_session`] against a simulated oracle for `actual`, which must be a
/// minimal diagnosis of `dpi`.
pub fn run_simulated_session(
    dpi: &Dpi,
    pr: &FaultProbabilities,
    ld: usize,
    algo: Algorithm,
    actual: &AxiomSet,
) -> Result<SessionTrace, SessionError> {
    if !dpi.is_minimal_diagnosis(actual).unwrap_or(false) {
        return Err(SessionError::NotMinimalDiagnosis(dpi.show(actual)));
    }
    run_session(dpi, pr, ld, algo, &mut SimulatedOracle { actual: actual.clone() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dpi::fixtures::*;
    use crate::dpi::{brute_force_min_diagnoses, cardinality_pr, minimal_hitting_sets};
    use crate::logic::parse_formula;

    fn table1_diagnoses(dpi: &Dpi) -> Vec<AxiomSet> {
        ["ax1,ax3", "ax1,ax4", "ax2,ax3", "ax2,ax5"]
            .iter()
            .map(|s| dpi.axiom_set(&s.split(',').collect::<Vec<_>>()).unwrap())
            .collect()
    }

    #[test]
    fn table1_partition_on_ax1() {
        let dpi = table1();
        let d = table1_diagnoses(&dpi);
        let p = partition(&dpi, &d, Query { axiom: AxiomId(0) });
        assert_eq!(p, QueryPartition { plus: vec![2, 3], minus: vec![0, 1], zero: vec![] });
    }

    #[test]
    fn axiom_outside_every_diagnosis_is_inadmissible() {
        let dpi = example4();
        let d = vec![AxiomSet::from_indices([0, 3]), AxiomSet::from_indices([0, 5])];
        let p = partition(&dpi, &d, Query { axiom: AxiomId(6) });
        assert_eq!(p.plus, vec![0, 1]);
        assert!(!p.is_admissible());
        let single = partition(&dpi, &d[..1], Query { axiom: AxiomId(0) });
        assert_eq!(single.minus, vec![0]);
        assert!(single.plus.is_empty() && single.zero.is_empty());
    }

    #[test]
    fn table1_selection_is_a_perfect_split() {
        let dpi = table1();
        let pr = cardinality_pr(5, 1.0 / 3.0).unwrap();
        let sel = ent_select(&dpi, &table1_diagnoses(&dpi), &pr).unwrap();
        assert_eq!(sel.query.axiom, AxiomId(0));
        assert!(sel.score.abs() < 1e-12);
    }

    #[test]
    fn one_against_three_scores_a_quarter() {
        let c = |v: &[usize]| AxiomSet::from_indices(v.iter().copied());
        let d = vec![c(&[0, 1]), c(&[2, 3]), c(&[2, 4]), c(&[2, 5])];
        let dpi = Dpi::abstract_components(6, minimal_hitting_sets(6, &d)).unwrap();
        let pr = cardinality_pr(6, 0.2).unwrap();
        let mut oracle: Vec<AxiomSet> = brute_force_min_diagnoses(&dpi, &pr).unwrap().into_iter().map(|x| x.axioms).collect();
        oracle.sort();
        assert_eq!(oracle, d);
        let p = partition(&dpi, &d, Query { axiom: AxiomId(0) });
        assert_eq!((p.plus.len(), p.minus.len()), (3, 1));
        let w: Vec<f64> = d.iter().map(|s| pr.pr(s)).collect();
        assert!((ent_score(&p, &w) - 0.25).abs() < 1e-12);
    }

    #[test]
    fn ties_go_to_lower_id() {
        // {1},{2}: both axioms give a perfect split
        let dpi = Dpi::abstract_components(2, vec![AxiomSet::from_indices([0, 1])]).unwrap();
        let d = vec![AxiomSet::from_indices([0]), AxiomSet::from_indices([1])];
        let sel = ent_select(&dpi, &d, &cardinality_pr(2, 0.3).unwrap()).unwrap();
        assert_eq!(sel.query.axiom, AxiomId(0));
    }

    #[test]
    fn oracle_answers() {
        let actual = AxiomSet::from_indices([0, 2]);
        assert!(!oracle_answer(Query { axiom: AxiomId(0) }, &actual));
        assert!(oracle_answer(Query { axiom: AxiomId(1) }, &actual));

        let dpi = table1();
        let d = table1_diagnoses(&dpi);
        for actual in &d {
            for a in 0..5 {
                let q = Query { axiom: AxiomId(a) };
                let p = partition(&dpi, &d, q);
                let idx = d.iter().position(|x| x == actual).unwrap();
                let eliminated = if oracle_answer(q, actual) { &p.minus } else { &p.plus };
                assert!(!eliminated.contains(&idx));
            }
        }
    }

    #[test]
    fn updates() {
        let dpi = table1();
        let q = Query { axiom: AxiomId(0) };
        let neg = update_dpi(&dpi, q, false);
        assert_eq!(neg.negative(), &[parse_formula("!A").unwrap(), parse_formula("A -> !B").unwrap()]);
        let d = table1_diagnoses(&dpi);
        let p = partition(&dpi, &d, q);
        // a negative answer refutes the diagnoses predicting a positive one
        for &i in &p.plus {
            assert!(!neg.is_diagnosis(&d[i]).unwrap());
        }
        for &i in &p.minus {
            assert!(neg.is_diagnosis(&d[i]).unwrap());
        }
        let yes = update_dpi(&dpi, q, true);
        for &i in &p.minus {
            assert!(!yes.is_diagnosis(&d[i]).unwrap());
        }
        let pos = update_dpi(&update_dpi(&dpi, q, true), q, true);
        assert_eq!(pos.positive().len(), 1);
        assert_eq!(pos.num_axioms(), 5);
    }

    #[test]
    fn table1_session() {
        let dpi = table1();
        let pr = cardinality_pr(5, 1.0 / 3.0).unwrap();
        let actual = dpi.axiom_set(&["ax1", "ax3"]).unwrap();
        for algo in [Algorithm::RbfHs, Algorithm::HsTree] {
            let t = run_simulated_session(&dpi, &pr, 4, algo, &actual).unwrap();
            assert_eq!(t.final_diagnosis(), Some(&actual));
            assert!(t.queries() <= 2);
        }
    }

    #[test]
    fn unique_diagnosis_needs_no_query() {
        let dpi = Dpi::abstract_components(3, vec![AxiomSet::from_indices([1])]).unwrap();
        let t = run_simulated_session(&dpi, &cardinality_pr(3, 0.2).unwrap(), 5, Algorithm::RbfHs, &AxiomSet::from_indices([1]))
            .unwrap();
        assert_eq!(t.queries(), 0);
    }

    #[test]
    fn rejects_bad_sessions() {
        let dpi = table1();
        let pr = cardinality_pr(5, 0.2).unwrap();
        let not_minimal = dpi.axiom_set(&["ax1", "ax3", "ax4"]).unwrap();
        assert!(matches!(run_simulated_session(&dpi, &pr, 4, Algorithm::RbfHs, &not_minimal), Err(SessionError::NotMinimalDiagnosis(_))));
        let actual = dpi.axiom_set(&["ax1", "ax3"]).unwrap();
        assert!(matches!(run_simulated_session(&dpi, &pr, 1, Algorithm::RbfHs, &actual), Err(SessionError::LdTooSmall)));
    }

    #[test]
    fn every_answer_shrinks_the_candidate_space() {
        let dpi = example4();
        let pr = example4_pr();
        for actual in brute_force_min_diagnoses(&dpi, &pr).unwrap() {
            let t = run_simulated_session(&dpi, &pr, 3, Algorithm::RbfHs, &actual.axioms).unwrap();
            assert_eq!(t.final_diagnosis(), Some(&actual.axioms));
            let mut current = dpi.clone();
            for it in &t.iterations {
                let before = brute_force_min_diagnoses(&current, &pr).unwrap();
                current = update_dpi(&current, it.query, it.answer);
                let after = brute_force_min_diagnoses(&current, &pr).unwrap();
                assert!(current.is_diagnosis(&actual.axioms).unwrap());
                assert!(after.iter().all(|d| before.iter().any(|b| b.axioms.is_subset_of(&d.axioms))));
                let removed = it.diagnoses.iter().filter(|d| !current.is_diagnosis(&d.axioms).unwrap()).count();
                assert!(removed >= 1);
            }
        }
    }
}
