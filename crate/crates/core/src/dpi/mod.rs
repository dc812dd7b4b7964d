//! Diagnosis problem instances.
//!
//! A [`Dpi`] bundles the possibly-faulty axioms `K` with background knowledge
//! `B`, positive measurements `P` and negative measurements `N`. Two backends
//! decide validity of an axiom subset: the propositional reasoner, and an
//! abstract mode where the minimal conflicts are given up front and the axioms
//! carry no formulas at all.

mod gen;
mod oracle;
mod prob;

use std::fmt;

use thiserror::Error;

use crate::logic::{Clause, Encoder, Formula, Solver};

pub use gen::{gen_random_dpi, gen_random_dpi_sized, gen_random_propositional_dpi, random_probabilities};
pub use oracle::{brute_force_min_conflicts, brute_force_min_diagnoses, minimal_hitting_sets, BRUTE_FORCE_LIMIT};
pub use prob::{cardinality_pr, cost_adjust, normalized, pr_of, Cost, FaultProbabilities};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DpiError {
    #[error("duplicate axiom id `{0}`")]
    DuplicateId(String),
    #[error("unknown axiom id `{0}`")]
    UnknownId(String),
    #[error("axiom index {0} out of range")]
    IndexOutOfRange(usize),
    #[error("conflict family is not an antichain: {0} is contained in {1}")]
    NotAntichain(String, String),
    #[error("probability {value} for `{id}` is outside (0, 1)")]
    ProbabilityOutOfRange { id: String, value: f64 },
    #[error("missing probability for `{0}`")]
    MissingProbability(String),
    #[error("expected {expected} probabilities, got {got}")]
    ProbabilityCount { expected: usize, got: usize },
    #[error("scaling constant {0} is outside (0, 0.5)")]
    ConstantOutOfRange(f64),
    #[error("instance has {0} axioms; brute force is limited to {1}")]
    TooLarge(usize, usize),
}

/// Position of an axiom in `K`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct AxiomId(pub u32);

impl AxiomId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// A sorted, duplicate-free set of axiom ids.
///
/// The derived ordering is lexicographic over the sorted sequence, which is
/// the tie-break order used by both searches.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct AxiomSet(Vec<AxiomId>);

impl AxiomSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_ids(ids: impl IntoIterator<Item = AxiomId>) -> Self {
        let mut v: Vec<AxiomId> = ids.into_iter().collect();
        v.sort_unstable();
        v.dedup();
        AxiomSet(v)
    }

    pub fn from_indices(ids: impl IntoIterator<Item = usize>) -> Self {
        Self::from_ids(ids.into_iter().map(|i| AxiomId(i as u32)))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn ids(&self) -> &[AxiomId] {
        &self.0
    }

    pub fn iter(&self) -> impl Iterator<Item = AxiomId> + '_ {
        self.0.iter().copied()
    }

    pub fn contains(&self, id: AxiomId) -> bool {
        self.0.binary_search(&id).is_ok()
    }

    pub fn with(&self, id: AxiomId) -> AxiomSet {
        let mut v = self.0.clone();
        if let Err(pos) = v.binary_search(&id) {
            v.insert(pos, id);
        }
        AxiomSet(v)
    }

    pub fn without(&self, id: AxiomId) -> AxiomSet {
        AxiomSet(self.0.iter().copied().filter(|&x| x != id).collect())
    }

    pub fn is_subset_of(&self, other: &AxiomSet) -> bool {
        if self.len() > other.len() {
            return false;
        }
        let mut it = other.0.iter();
        'outer: for a in &self.0 {
            for b in it.by_ref() {
                if a == b {
                    continue 'outer;
                }
                if b > a {
                    return false;
                }
            }
            return false;
        }
        true
    }

    pub fn is_disjoint(&self, other: &AxiomSet) -> bool {
        let (mut i, mut j) = (0, 0);
        while i < self.0.len() && j < other.0.len() {
            match self.0[i].cmp(&other.0[j]) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => return false,
            }
        }
        true
    }

    pub fn union(&self, other: &AxiomSet) -> AxiomSet {
        AxiomSet::from_ids(self.iter().chain(other.iter()))
    }

    /// Elements of `universe` that are not in `self`, in universe order.
    pub fn complement(&self, universe: usize) -> AxiomSet {
        AxiomSet((0..universe as u32).map(AxiomId).filter(|&id| !self.contains(id)).collect())
    }

    /// Orders by cardinality first, then lexicographically.
    pub fn cmp_size_lex(&self, other: &AxiomSet) -> std::cmp::Ordering {
        self.len().cmp(&other.len()).then_with(|| self.cmp(other))
    }
}

impl FromIterator<AxiomId> for AxiomSet {
    fn from_iter<T: IntoIterator<Item = AxiomId>>(iter: T) -> Self {
        AxiomSet::from_ids(iter)
    }
}

/// Anything that can decide whether a set of axioms, together with the fixed
/// background and measurements, is valid (consistent and entailing no
/// negative measurement).
pub trait ValidityOracle {
    fn is_valid(&self, axioms: &[AxiomId]) -> bool;
}

impl<T: ValidityOracle + ?Sized> ValidityOracle for &T {
    fn is_valid(&self, axioms: &[AxiomId]) -> bool {
        (**self).is_valid(axioms)
    }
}

/// How `find_min_conflict` obtains a conflict from a backend.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ConflictStrategy {
    /// QuickXplain over the validity predicate.
    QuickXplain,
    /// First attached conflict (in family order) disjoint from the excluded
    /// axioms. Only meaningful for the abstract backend.
    FamilyOrder,
}

#[derive(Clone, Debug)]
struct Theory {
    axioms: Vec<Formula>,
    background: Vec<Formula>,
    positive: Vec<Formula>,
    negative: Vec<Formula>,
    num_vars: u32,
    axiom_clauses: Vec<Vec<Clause>>,
    negated_axiom_clauses: Vec<Vec<Clause>>,
    fixed_clauses: Vec<Clause>,
    negated_negative_clauses: Vec<Vec<Clause>>,
}

impl Theory {
    fn compile(axioms: Vec<Formula>, background: Vec<Formula>, positive: Vec<Formula>, negative: Vec<Formula>) -> Self {
        let mut enc = Encoder::new();
        // named atoms first so they get the lowest variable ids
        for f in axioms.iter().chain(&background).chain(&positive).chain(&negative) {
            enc.declare(f);
        }
        let axiom_clauses: Vec<_> = axioms.iter().map(|f| enc.encode(f)).collect();
        let negated_axiom_clauses: Vec<_> = axioms.iter().map(|f| enc.encode(&Formula::not(f.clone()))).collect();
        let fixed_clauses = background.iter().chain(&positive).flat_map(|f| enc.encode(f)).collect();
        let negated_negative_clauses = negative.iter().map(|f| enc.encode(&Formula::not(f.clone()))).collect();
        Theory {
            axioms,
            background,
            positive,
            negative,
            num_vars: enc.num_vars(),
            axiom_clauses,
            negated_axiom_clauses,
            fixed_clauses,
            negated_negative_clauses,
        }
    }

    fn satisfiable(&self, axioms: &[AxiomId], extra: &[Clause]) -> bool {
        let clauses = self
            .fixed_clauses
            .iter()
            .chain(axioms.iter().flat_map(|a| self.axiom_clauses[a.index()].iter()))
            .chain(extra.iter())
            .map(Vec::as_slice);
        Solver::new(self.num_vars, clauses).solve()
    }

    fn is_valid(&self, axioms: &[AxiomId]) -> bool {
        self.satisfiable(axioms, &[]) && self.negated_negative_clauses.iter().all(|neg| self.satisfiable(axioms, neg))
    }

    fn entails_axiom(&self, axioms: &[AxiomId], goal: AxiomId) -> bool {
        !self.satisfiable(axioms, &self.negated_axiom_clauses[goal.index()])
    }
}

#[derive(Clone, Debug)]
struct AbstractFamily {
    base: Vec<AxiomSet>,
    positive: AxiomSet,
    negative: AxiomSet,
    /// `base` with the measurements folded in, reduced to an antichain.
    effective: Vec<AxiomSet>,
}

impl AbstractFamily {
    fn new(base: Vec<AxiomSet>, positive: AxiomSet, negative: AxiomSet) -> Self {
        // A positive measurement p is always present, so C \ {p} already
        // conflicts; a negative measurement n is entailed exactly by sets
        // containing n, so {n} becomes a conflict.
        let mut family: Vec<AxiomSet> = negative.iter().map(|n| AxiomSet::from_ids([n])).collect();
        family.extend(base.iter().map(|c| AxiomSet::from_ids(c.iter().filter(|&a| !positive.contains(a)))));
        let effective = reduce_to_antichain(family);
        AbstractFamily { base, positive, negative, effective }
    }

    fn is_valid(&self, axioms: &[AxiomId]) -> bool {
        let set = AxiomSet::from_ids(axioms.iter().copied());
        !self.effective.iter().any(|c| c.is_subset_of(&set))
    }
}

/// Drops duplicates and strict supersets, keeping the first occurrence order.
pub fn reduce_to_antichain(family: Vec<AxiomSet>) -> Vec<AxiomSet> {
    let mut out: Vec<AxiomSet> = Vec::with_capacity(family.len());
    for (i, c) in family.iter().enumerate() {
        let dominated = family.iter().enumerate().any(|(j, d)| {
            j != i && d.is_subset_of(c) && (d.len() < c.len() || j < i)
        });
        if !dominated {
            out.push(c.clone());
        }
    }
    out
}

#[derive(Clone, Debug)]
enum Backend {
    Reasoner(Box<Theory>),
    Abstract(AbstractFamily),
}

/// Which validity backend a [`Dpi`] uses.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BackendKind {
    Reasoner,
    Abstract,
}

/// A diagnosis problem instance `<K, B, P, N>`. Immutable once built;
/// measurements produce a fresh instance.
#[derive(Clone, Debug)]
pub struct Dpi {
    names: Vec<String>,
    backend: Backend,
}

impl Dpi {
    /// Builds a propositional instance. `axioms` is `K` in file order.
    pub fn propositional(
        axioms: Vec<(String, Formula)>,
        background: Vec<Formula>,
        positive: Vec<Formula>,
        negative: Vec<Formula>,
    ) -> Result<Self, DpiError> {
        let names: Vec<String> = axioms.iter().map(|(n, _)| n.clone()).collect();
        check_unique(&names)?;
        let formulas = axioms.into_iter().map(|(_, f)| f).collect();
        let theory = Theory::compile(formulas, background, positive, negative);
        Ok(Dpi { names, backend: Backend::Reasoner(Box::new(theory)) })
    }

    /// Builds an abstract instance from component names and its minimal
    /// conflicts. The family must be an antichain.
    pub fn abstract_conflicts(names: Vec<String>, conflicts: Vec<AxiomSet>) -> Result<Self, DpiError> {
        check_unique(&names)?;
        for c in &conflicts {
            if let Some(bad) = c.iter().find(|a| a.index() >= names.len()) {
                return Err(DpiError::IndexOutOfRange(bad.index()));
            }
        }
        for (i, c) in conflicts.iter().enumerate() {
            for (j, d) in conflicts.iter().enumerate() {
                if i != j && c.is_subset_of(d) {
                    let show = |s: &AxiomSet| format!("{{{}}}", s.iter().map(|a| names[a.index()].as_str()).collect::<Vec<_>>().join(","));
                    return Err(DpiError::NotAntichain(show(c), show(d)));
                }
            }
        }
        let family = AbstractFamily::new(conflicts, AxiomSet::new(), AxiomSet::new());
        Ok(Dpi { names, backend: Backend::Abstract(family) })
    }

    /// Abstract instance over components named `1..=n`.
    pub fn abstract_components(n: usize, conflicts: Vec<AxiomSet>) -> Result<Self, DpiError> {
        Self::abstract_conflicts((1..=n).map(|i| i.to_string()).collect(), conflicts)
    }

    pub fn backend(&self) -> BackendKind {
        match self.backend {
            Backend::Reasoner(_) => BackendKind::Reasoner,
            Backend::Abstract(_) => BackendKind::Abstract,
        }
    }

    pub fn default_conflict_strategy(&self) -> ConflictStrategy {
        match self.backend {
            Backend::Reasoner(_) => ConflictStrategy::QuickXplain,
            Backend::Abstract(_) => ConflictStrategy::FamilyOrder,
        }
    }

    /// |K|
    pub fn num_axioms(&self) -> usize {
        self.names.len()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn name(&self, id: AxiomId) -> &str {
        &self.names[id.index()]
    }

    pub fn all_axioms(&self) -> AxiomSet {
        AxiomSet::from_indices(0..self.num_axioms())
    }

    pub fn axiom_id(&self, name: &str) -> Result<AxiomId, DpiError> {
        self.names
            .iter()
            .position(|n| n == name)
            .map(|i| AxiomId(i as u32))
            .ok_or_else(|| DpiError::UnknownId(name.to_owned()))
    }

    pub fn axiom_set<S: AsRef<str>>(&self, names: &[S]) -> Result<AxiomSet, DpiError> {
        names.iter().map(|n| self.axiom_id(n.as_ref())).collect()
    }

    /// Renders a set as `{a,b,c}` using axiom names.
    pub fn show(&self, set: &AxiomSet) -> String {
        format!("{{{}}}", set.iter().map(|a| self.name(a)).collect::<Vec<_>>().join(","))
    }

    pub fn formula(&self, id: AxiomId) -> Option<&Formula> {
        match &self.backend {
            Backend::Reasoner(t) => t.axioms.get(id.index()),
            Backend::Abstract(_) => None,
        }
    }

    pub fn background(&self) -> &[Formula] {
        match &self.backend {
            Backend::Reasoner(t) => &t.background,
            Backend::Abstract(_) => &[],
        }
    }

    pub fn positive(&self) -> &[Formula] {
        match &self.backend {
            Backend::Reasoner(t) => &t.positive,
            Backend::Abstract(_) => &[],
        }
    }

    pub fn negative(&self) -> &[Formula] {
        match &self.backend {
            Backend::Reasoner(t) => &t.negative,
            Backend::Abstract(_) => &[],
        }
    }

    /// Attached conflict family of an abstract instance, with measurements
    /// folded in. `None` for the reasoner backend.
    pub fn conflict_family(&self) -> Option<&[AxiomSet]> {
        match &self.backend {
            Backend::Abstract(f) => Some(&f.effective),
            Backend::Reasoner(_) => None,
        }
    }

    /// Axioms measured true (abstract backend) or whose sentence is in `P`.
    pub fn positive_axioms(&self) -> AxiomSet {
        match &self.backend {
            Backend::Abstract(f) => f.positive.clone(),
            Backend::Reasoner(t) => self.axioms_in(&t.positive, &t.axioms),
        }
    }

    /// Axioms measured false (abstract backend) or whose sentence is in `N`.
    pub fn negative_axioms(&self) -> AxiomSet {
        match &self.backend {
            Backend::Abstract(f) => f.negative.clone(),
            Backend::Reasoner(t) => self.axioms_in(&t.negative, &t.axioms),
        }
    }

    fn axioms_in(&self, sentences: &[Formula], axioms: &[Formula]) -> AxiomSet {
        AxiomSet::from_indices(axioms.iter().enumerate().filter(|(_, f)| sentences.contains(f)).map(|(i, _)| i))
    }

    fn check_ids(&self, set: &AxiomSet) -> Result<(), DpiError> {
        match set.iter().find(|a| a.index() >= self.num_axioms()) {
            Some(bad) => Err(DpiError::IndexOutOfRange(bad.index())),
            None => Ok(()),
        }
    }

    /// True iff `S ∪ B ∪ P` is consistent and entails no negative measurement.
    pub fn is_valid_set(&self, set: &AxiomSet) -> Result<bool, DpiError> {
        self.check_ids(set)?;
        Ok(self.is_valid(set.ids()))
    }

    /// True iff `K \ D` is valid.
    pub fn is_diagnosis(&self, diagnosis: &AxiomSet) -> Result<bool, DpiError> {
        self.check_ids(diagnosis)?;
        Ok(self.is_valid(diagnosis.complement(self.num_axioms()).ids()))
    }

    /// Diagnosis-hood is monotone over supersets in the weak fault model, so
    /// checking every single-element removal suffices for minimality.
    pub fn is_minimal_diagnosis(&self, diagnosis: &AxiomSet) -> Result<bool, DpiError> {
        if !self.is_diagnosis(diagnosis)? {
            return Ok(false);
        }
        for a in diagnosis.iter() {
            if self.is_diagnosis(&diagnosis.without(a))? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// True iff the set is a conflict (invalid).
    pub fn is_conflict(&self, set: &AxiomSet) -> Result<bool, DpiError> {
        self.is_valid_set(set).map(|v| !v)
    }

    /// Whether `axioms ∪ B ∪ P` entails the sentence of `goal`. In the
    /// abstract backend entailment of an axiom is membership.
    pub fn entails_axiom(&self, axioms: &AxiomSet, goal: AxiomId) -> bool {
        match &self.backend {
            Backend::Reasoner(t) => t.entails_axiom(axioms.ids(), goal),
            Backend::Abstract(f) => axioms.contains(goal) || f.positive.contains(goal),
        }
    }

    /// Returns a fresh instance with the sentence of `axiom` added to `P`
    /// (`positive`) or to `N`. Adding an already present measurement is a
    /// no-op.
    pub fn with_measurement(&self, axiom: AxiomId, positive: bool) -> Dpi {
        let backend = match &self.backend {
            Backend::Reasoner(t) => {
                let sentence = t.axioms[axiom.index()].clone();
                let (mut p, mut n) = (t.positive.clone(), t.negative.clone());
                let target = if positive { &mut p } else { &mut n };
                if !target.contains(&sentence) {
                    target.push(sentence);
                }
                Backend::Reasoner(Box::new(Theory::compile(t.axioms.clone(), t.background.clone(), p, n)))
            }
            Backend::Abstract(f) => {
                let (mut p, mut n) = (f.positive.clone(), f.negative.clone());
                if positive {
                    p = p.with(axiom);
                } else {
                    n = n.with(axiom);
                }
                Backend::Abstract(AbstractFamily::new(f.base.clone(), p, n))
            }
        };
        Dpi { names: self.names.clone(), backend }
    }
}

impl ValidityOracle for Dpi {
    fn is_valid(&self, axioms: &[AxiomId]) -> bool {
        match &self.backend {
            Backend::Reasoner(t) => t.is_valid(axioms),
            Backend::Abstract(f) => f.is_valid(axioms),
        }
    }
}

impl fmt::Display for Dpi {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.backend {
            Backend::Reasoner(t) => {
                writeln!(f, "[K]")?;
                for (name, ax) in self.names.iter().zip(&t.axioms) {
                    writeln!(f, "{name}: {ax}")?;
                }
                for (title, list) in [("B", &t.background), ("P", &t.positive), ("N", &t.negative)] {
                    if !list.is_empty() {
                        writeln!(f, "[{title}]")?;
                        for s in list {
                            writeln!(f, "{s}")?;
                        }
                    }
                }
                Ok(())
            }
            Backend::Abstract(fam) => {
                writeln!(f, "[COMPONENTS]\n{}", self.num_axioms())?;
                writeln!(f, "[CONFLICTS]")?;
                for c in &fam.effective {
                    writeln!(f, "{}", c.iter().map(|a| self.name(a)).collect::<Vec<_>>().join(" "))?;
                }
                Ok(())
            }
        }
    }
}

fn check_unique(names: &[String]) -> Result<(), DpiError> {
    let mut seen = std::collections::HashSet::new();
    for n in names {
        if !seen.insert(n.as_str()) {
            return Err(DpiError::DuplicateId(n.clone()));
        }
    }
    Ok(())
}

/// A minimal diagnosis with its (unnormalized) probability.
#[derive(Clone, Debug, PartialEq)]
pub struct Diagnosis {
    pub axioms: AxiomSet,
    pub probability: f64,
}

#[cfg(test)]
pub(crate) mod fixtures {
    use super::*;
    use crate::logic::parse_formula;

    pub fn table1() -> Dpi {
        let k = ["A -> !B", "A -> B", "A -> !C", "B -> C", "A -> B | C"]
            .iter()
            .enumerate()
            .map(|(i, s)| (format!("ax{}", i + 1), parse_formula(s).unwrap()))
            .collect();
        Dpi::propositional(k, vec![], vec![], vec![parse_formula("!A").unwrap()]).unwrap()
    }

    pub fn example4() -> Dpi {
        let c = |v: &[usize]| AxiomSet::from_indices(v.iter().map(|i| i - 1));
        Dpi::abstract_components(7, vec![c(&[1, 2, 5]), c(&[2, 4, 6]), c(&[1, 3, 4]), c(&[1, 5, 6, 7])]).unwrap()
    }

    pub fn example4_pr() -> FaultProbabilities {
        FaultProbabilities::new(vec![0.26, 0.18, 0.21, 0.41, 0.18, 0.40, 0.18]).unwrap()
    }
}
