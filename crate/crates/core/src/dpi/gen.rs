//! Seeded instance generators for property tests and benchmarks.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{reduce_to_antichain, AxiomSet, Dpi, FaultProbabilities};
use crate::logic::Formula;

/// Abstract instance with `components` axioms and up to `conflicts` random
/// conflicts of size `1..=max_size`, reduced to an antichain.
pub fn gen_random_dpi(components: usize, conflicts: usize, max_size: usize, seed: u64) -> Dpi {
    gen_random_dpi_sized(components, conflicts, 1, max_size, seed)
}

/// Like [`gen_random_dpi`] with conflict sizes drawn from `min_size..=max_size`.
pub fn gen_random_dpi_sized(components: usize, conflicts: usize, min_size: usize, max_size: usize, seed: u64) -> Dpi {
    assert!(components > 0 && min_size >= 1 && min_size <= max_size && max_size <= components);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let ids: Vec<usize> = (0..components).collect();
    let family: Vec<AxiomSet> = (0..conflicts)
        .map(|_| {
            let size = rng.gen_range(min_size..=max_size);
            AxiomSet::from_indices(ids.choose_multiple(&mut rng, size).copied())
        })
        .collect();
    Dpi::abstract_components(components, reduce_to_antichain(family)).expect("reduced family is an antichain")
}

/// Fault probabilities drawn uniformly from `[lo, hi)`.
pub fn random_probabilities(n: usize, lo: f64, hi: f64, seed: u64) -> FaultProbabilities {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    FaultProbabilities::new((0..n).map(|_| rng.gen_range(lo..hi)).collect()).expect("range inside (0, 1)")
}

fn random_formula(rng: &mut ChaCha8Rng, atoms: &[String], depth: u32) -> Formula {
    if depth == 0 || rng.gen_bool(0.3) {
        let a = Formula::atom(atoms.choose(rng).unwrap().clone());
        return if rng.gen_bool(0.4) { Formula::not(a) } else { a };
    }
    let (l, r) = (random_formula(rng, atoms, depth - 1), random_formula(rng, atoms, depth - 1));
    match rng.gen_range(0..5) {
        0 => Formula::and(l, r),
        1 => Formula::or(l, r),
        2 | 3 => Formula::implies(l, r),
        _ => Formula::iff(l, r),
    }
}

/// Propositional instance with `axioms` random implications-heavy sentences
/// over `atoms` atoms, one or two negative measurements and, sometimes, one
/// background sentence.
pub fn gen_random_propositional_dpi(axioms: usize, atoms: usize, seed: u64) -> Dpi {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let names: Vec<String> = (0..atoms).map(|i| ((b'A' + i as u8) as char).to_string()).collect();
    let k = (0..axioms).map(|i| (format!("ax{}", i + 1), random_formula(&mut rng, &names, 2))).collect();
    let background = if rng.gen_bool(0.3) { vec![random_formula(&mut rng, &names, 1)] } else { vec![] };
    let n_count = rng.gen_range(1..=2);
    let negative = (0..n_count).map(|_| random_formula(&mut rng, &names, 1)).collect();
    Dpi::propositional(k, background, vec![], negative).expect("generated ids are unique")
}
