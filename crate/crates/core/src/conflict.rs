//! Minimal conflict extraction.

use thiserror::Error;

use crate::dpi::{AxiomId, AxiomSet, ConflictStrategy, Dpi, ValidityOracle};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ConflictOutcome {
    /// The background and positive measurements alone are invalid.
    EmptyConflict,
    /// The candidate axioms are valid; no conflict exists.
    NoConflict,
    Minimal(AxiomSet),
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ConflictError {
    #[error("quickxplain precondition violated: background is invalid")]
    InvalidBackground,
    #[error("quickxplain precondition violated: background and candidates are valid")]
    NothingToExplain,
}

/// A minimal conflict over all of `K`.
pub fn find_min_conflict(dpi: &Dpi) -> ConflictOutcome {
    find_min_conflict_excluding(dpi, &AxiomSet::new(), dpi.default_conflict_strategy())
}

/// A minimal conflict within `K \ excluded`, i.e. of the sub-instance
/// `<K \ excluded, B, P, N>`.
pub fn find_min_conflict_excluding(dpi: &Dpi, excluded: &AxiomSet, strategy: ConflictStrategy) -> ConflictOutcome {
    if !dpi.is_valid(&[]) {
        return ConflictOutcome::EmptyConflict;
    }
    conflict_in_remainder(dpi, excluded, strategy)
}

/// Like [`find_min_conflict_excluding`] but assumes the empty set is valid.
pub(crate) fn conflict_in_remainder(dpi: &Dpi, excluded: &AxiomSet, strategy: ConflictStrategy) -> ConflictOutcome {
    let candidates: Vec<AxiomId> = dpi.all_axioms().iter().filter(|&a| !excluded.contains(a)).collect();
    if dpi.is_valid(&candidates) {
        return ConflictOutcome::NoConflict;
    }
    if strategy == ConflictStrategy::FamilyOrder {
        if let Some(family) = dpi.conflict_family() {
            let c = family.iter().find(|c| c.is_disjoint(excluded)).expect("invalid remainder contains a family member");
            return ConflictOutcome::Minimal(c.clone());
        }
    }
    let mut background = Vec::new();
    ConflictOutcome::Minimal(qx(dpi, &mut background, false, &candidates))
}

/// QuickXplain: a subset-minimal `C ⊆ candidates` with `background ∪ C`
/// invalid. Candidate order decides which minimal conflict is found.
pub fn quickxplain<O: ValidityOracle>(oracle: &O, background: &[AxiomId], candidates: &[AxiomId]) -> Result<AxiomSet, ConflictError> {
    if !oracle.is_valid(background) {
        return Err(ConflictError::InvalidBackground);
    }
    let mut bg = background.to_vec();
    bg.extend_from_slice(candidates);
    if oracle.is_valid(&bg) {
        return Err(ConflictError::NothingToExplain);
    }
    bg.truncate(background.len());
    Ok(qx(oracle, &mut bg, false, candidates))
}

fn qx<O: ValidityOracle>(oracle: &O, background: &mut Vec<AxiomId>, delta_nonempty: bool, candidates: &[AxiomId]) -> AxiomSet {
    if delta_nonempty && !oracle.is_valid(background) {
        return AxiomSet::new();
    }
    if candidates.len() == 1 {
        return AxiomSet::from_ids(candidates.iter().copied());
    }
    let split = candidates.len().div_ceil(2);
    let (c1, c2) = candidates.split_at(split);
    let mark = background.len();

    background.extend_from_slice(c1);
    let d2 = qx(oracle, background, true, c2);
    background.truncate(mark);

    background.extend(d2.iter());
    let d1 = qx(oracle, background, !d2.is_empty(), c1);
    background.truncate(mark);

    d1.union(&d2)
}
