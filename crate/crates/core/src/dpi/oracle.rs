//! Exhaustive enumeration used as ground truth in tests and `check`.

use itertools::Itertools;

use super::{AxiomSet, Diagnosis, Dpi, DpiError, FaultProbabilities};

/// Largest |K| the brute-force enumerators accept.
pub const BRUTE_FORCE_LIMIT: usize = 20;

/// Subset-minimal sets, in ascending cardinality then lexicographic order,
/// for which `accept` holds. `accept` must be upward closed.
fn minimal_sets(n: usize, mut accept: impl FnMut(&AxiomSet) -> bool) -> Vec<AxiomSet> {
    let mut found: Vec<AxiomSet> = Vec::new();
    for k in 0..=n {
        for combo in (0..n).combinations(k) {
            let s = AxiomSet::from_indices(combo);
            if found.iter().any(|m| m.is_subset_of(&s)) {
                continue;
            }
            if accept(&s) {
                found.push(s);
            }
        }
    }
    found
}

fn guard(dpi: &Dpi) -> Result<(), DpiError> {
    if dpi.num_axioms() > BRUTE_FORCE_LIMIT {
        return Err(DpiError::TooLarge(dpi.num_axioms(), BRUTE_FORCE_LIMIT));
    }
    Ok(())
}

/// All minimal diagnoses, most probable first; ties by cardinality, then
/// lexicographically.
pub fn brute_force_min_diagnoses(dpi: &Dpi, pr: &FaultProbabilities) -> Result<Vec<Diagnosis>, DpiError> {
    guard(dpi)?;
    let n = dpi.num_axioms();
    let sets = minimal_sets(n, |s| dpi.is_diagnosis(s).unwrap_or(false));
    let mut out: Vec<Diagnosis> = sets
        .into_iter()
        .map(|axioms| Diagnosis { probability: pr.pr(&axioms), axioms })
        .collect();
    out.sort_by(|a, b| {
        pr.log_pr(&b.axioms)
            .total_cmp(&pr.log_pr(&a.axioms))
            .then_with(|| a.axioms.cmp_size_lex(&b.axioms))
    });
    Ok(out)
}

/// All minimal conflicts, by size then lexicographically.
pub fn brute_force_min_conflicts(dpi: &Dpi) -> Result<Vec<AxiomSet>, DpiError> {
    guard(dpi)?;
    Ok(minimal_sets(dpi.num_axioms(), |s| !dpi.is_valid_set(s).unwrap_or(true)))
}

/// Minimal hitting sets of `family` over a universe of `n` elements,
/// enumerated exhaustively.
pub fn minimal_hitting_sets(n: usize, family: &[AxiomSet]) -> Vec<AxiomSet> {
    minimal_sets(n, |s| family.iter().all(|c| !c.is_disjoint(s)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dpi::fixtures::*;
    use crate::dpi::{cardinality_pr, gen_random_dpi};
    use crate::logic::parse_formula;

    fn names(dpi: &Dpi, sets: &[AxiomSet]) -> Vec<String> {
        sets.iter().map(|s| dpi.show(s)).collect()
    }

    #[test]
    fn table1_diagnoses_and_conflicts() {
        let dpi = table1();
        let pr = cardinality_pr(5, 1.0 / 3.0).unwrap();
        let diags: Vec<AxiomSet> = brute_force_min_diagnoses(&dpi, &pr).unwrap().into_iter().map(|d| d.axioms).collect();
        assert_eq!(names(&dpi, &diags), ["{ax1,ax3}", "{ax1,ax4}", "{ax2,ax3}", "{ax2,ax5}"]);

        let conflicts = brute_force_min_conflicts(&dpi).unwrap();
        assert_eq!(names(&dpi, &conflicts), ["{ax1,ax2}", "{ax1,ax3,ax5}", "{ax2,ax3,ax4}", "{ax3,ax4,ax5}"]);
    }

    #[test]
    fn example4_diagnoses_and_conflicts() {
        let dpi = example4();
        let diags = brute_force_min_diagnoses(&dpi, &example4_pr()).unwrap();
        let shown: Vec<String> = diags.iter().map(|d| dpi.show(&d.axioms)).collect();
        assert_eq!(&shown[..4], ["{1,4}", "{1,6}", "{4,5}", "{2,4,6}"]);

        let mut conflicts = brute_force_min_conflicts(&dpi).unwrap();
        let mut family = dpi.conflict_family().unwrap().to_vec();
        conflicts.sort();
        family.sort();
        assert_eq!(conflicts, family);
    }

    #[test]
    fn consistent_instance_has_empty_diagnosis() {
        let k = vec![("a".to_string(), parse_formula("X -> Y").unwrap())];
        let dpi = Dpi::propositional(k, vec![], vec![], vec![]).unwrap();
        let pr = cardinality_pr(1, 0.25).unwrap();
        let d = brute_force_min_diagnoses(&dpi, &pr).unwrap();
        assert_eq!(d.len(), 1);
        assert!(d[0].axioms.is_empty());
        assert!(brute_force_min_conflicts(&dpi).unwrap().is_empty());
    }

    #[test]
    fn size_guard() {
        let dpi = gen_random_dpi(21, 2, 3, 1);
        assert!(matches!(brute_force_min_conflicts(&dpi), Err(DpiError::TooLarge(21, 20))));
    }

    #[test]
    fn hitting_set_property_on_fixtures() {
        for (dpi, pr) in [(table1(), cardinality_pr(5, 0.2).unwrap()), (example4(), example4_pr())] {
            let n = dpi.num_axioms();
            let conflicts = brute_force_min_conflicts(&dpi).unwrap();
            let mut diags: Vec<AxiomSet> = brute_force_min_diagnoses(&dpi, &pr).unwrap().into_iter().map(|d| d.axioms).collect();
            for d in &diags {
                assert!(conflicts.iter().all(|c| !c.is_disjoint(d)));
            }
            let mut hs = minimal_hitting_sets(n, &conflicts);
            diags.sort();
            hs.sort();
            assert_eq!(diags, hs);
        }
    }
}
