use std::cmp::Ordering;
use std::fmt;

use super::{AxiomSet, DpiError};

/// Node cost on a log-probability scale. `NegInf` is a distinguished
/// sentinel below every finite cost; arithmetic never produces it.
#[derive(Clone, Copy, Debug)]
pub enum Cost {
    NegInf,
    Log(f64),
}

impl Cost {
    pub fn is_neg_inf(self) -> bool {
        matches!(self, Cost::NegInf)
    }

    /// The linear probability, `0.0` for the sentinel.
    pub fn probability(self) -> f64 {
        match self {
            Cost::NegInf => 0.0,
            Cost::Log(x) => x.exp(),
        }
    }
}

impl PartialEq for Cost {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Cost {}

impl PartialOrd for Cost {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Cost {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Cost::NegInf, Cost::NegInf) => Ordering::Equal,
            (Cost::NegInf, _) => Ordering::Less,
            (_, Cost::NegInf) => Ordering::Greater,
            (Cost::Log(a), Cost::Log(b)) => a.total_cmp(b),
        }
    }
}

impl fmt::Display for Cost {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Cost::NegInf => write!(f, "-inf"),
            Cost::Log(_) => {
                let p = self.probability();
                if p >= 1e-4 {
                    write!(f, "{p:.6}")
                } else {
                    write!(f, "{p:.4e}")
                }
            }
        }
    }
}

/// Component fault probabilities, indexed like `K`.
#[derive(Clone, Debug, PartialEq)]
pub struct FaultProbabilities {
    values: Vec<f64>,
    cost_adjusted: bool,
    // log(1 - p) summed over K, and log(p / (1 - p)) per axiom
    base: f64,
    weights: Vec<f64>,
}

impl FaultProbabilities {
    /// Every value must lie in (0, 1). The instance counts as cost-adjusted
    /// when every value is below 0.5.
    pub fn new(values: Vec<f64>) -> Result<Self, DpiError> {
        for (i, &v) in values.iter().enumerate() {
            if !(v > 0.0 && v < 1.0) {
                return Err(DpiError::ProbabilityOutOfRange { id: format!("#{}", i + 1), value: v });
            }
        }
        let cost_adjusted = values.iter().all(|&v| v < 0.5);
        let base = values.iter().map(|&p| (-p).ln_1p()).sum();
        let weights = values.iter().map(|&p| p.ln() - (-p).ln_1p()).collect();
        Ok(FaultProbabilities { values, cost_adjusted, base, weights })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn is_cost_adjusted(&self) -> bool {
        self.cost_adjusted
    }

    /// `log pr(X)`, summed in ascending id order so equal sets always get
    /// bit-identical costs.
    pub fn log_pr(&self, set: &AxiomSet) -> f64 {
        set.iter().fold(self.base, |acc, a| acc + self.weights[a.index()])
    }

    pub fn cost(&self, set: &AxiomSet) -> Cost {
        Cost::Log(self.log_pr(set))
    }

    pub fn pr(&self, set: &AxiomSet) -> f64 {
        self.log_pr(set).exp()
    }
}

/// `pr(X) = prod_{ax in X} pr(ax) * prod_{ax in K \ X} (1 - pr(ax))`.
pub fn pr_of(pr: &FaultProbabilities, set: &AxiomSet) -> Result<f64, DpiError> {
    if let Some(bad) = set.iter().find(|a| a.index() >= pr.len()) {
        return Err(DpiError::MissingProbability(format!("#{}", bad.index() + 1)));
    }
    Ok(pr.pr(set))
}

/// Scales every probability by `c` in (0, 0.5); ratios are preserved.
pub fn cost_adjust(pr: &FaultProbabilities, c: f64) -> Result<FaultProbabilities, DpiError> {
    if !(c > 0.0 && c < 0.5) {
        return Err(DpiError::ConstantOutOfRange(c));
    }
    FaultProbabilities::new(pr.values.iter().map(|v| v * c).collect())
}

/// Uniform probability `c`; orders subsets by ascending cardinality.
pub fn cardinality_pr(num_axioms: usize, c: f64) -> Result<FaultProbabilities, DpiError> {
    if !(c > 0.0 && c < 0.5) {
        return Err(DpiError::ConstantOutOfRange(c));
    }
    FaultProbabilities::new(vec![c; num_axioms])
}

/// Probabilities of `values` divided by their sum.
pub fn normalized(values: &[f64]) -> Vec<f64> {
    let total: f64 = values.iter().sum();
    values.iter().map(|v| v / total).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dpi::AxiomSet;

    fn set(v: &[usize]) -> AxiomSet {
        AxiomSet::from_indices(v.iter().map(|i| i - 1))
    }

    #[test]
    fn table1_diagnosis_probabilities() {
        let pr = FaultProbabilities::new(vec![0.1, 0.05, 0.1, 0.05, 0.15]).unwrap();
        let d1 = pr_of(&pr, &set(&[1, 3])).unwrap();
        let direct = 0.1 * (1.0 - 0.05) * 0.1 * (1.0 - 0.05) * (1.0 - 0.15);
        assert!((d1 - direct).abs() < 1e-15);
        assert!((d1 - 0.0077).abs() < 5e-5);
    }

    #[test]
    fn example4_probability_of_one_four() {
        let pr = FaultProbabilities::new(vec![0.26, 0.18, 0.21, 0.41, 0.18, 0.40, 0.18]).unwrap();
        let direct = 0.26 * 0.41 * 0.82 * 0.79 * 0.82 * 0.60 * 0.82;
        let got = pr_of(&pr, &set(&[1, 4])).unwrap();
        assert!((got - direct).abs() < 1e-15);
        assert!((got - 0.0279).abs() < 5e-5);
    }

    #[test]
    fn empty_selection() {
        let p = 0.5 - 1e-3;
        let pr = FaultProbabilities::new(vec![p; 4]).unwrap();
        assert!((pr_of(&pr, &AxiomSet::new()).unwrap() - (1.0 - p).powi(4)).abs() < 1e-15);
        assert!(pr_of(&pr, &AxiomSet::from_indices([7])).is_err());
    }

    #[test]
    fn cost_adjustment() {
        let pr = FaultProbabilities::new(vec![0.8, 0.4]).unwrap();
        assert!(!pr.is_cost_adjusted());
        let adj = cost_adjust(&pr, 0.25).unwrap();
        assert!((adj.values()[0] - 0.2).abs() < 1e-15 && (adj.values()[1] - 0.1).abs() < 1e-15);
        assert!((adj.values()[0] / adj.values()[1] - 2.0).abs() < 1e-12);
        assert!(adj.is_cost_adjusted());

        assert_eq!(cost_adjust(&adj, 1.0), Err(DpiError::ConstantOutOfRange(1.0)));
        assert!(cost_adjust(&adj, 0.5).is_err());
        assert!(cost_adjust(&adj, 0.0).is_err());

        let uniform = cost_adjust(&FaultProbabilities::new(vec![0.9; 3]).unwrap(), 0.3).unwrap();
        assert!(uniform.values().iter().all(|v| (v - 0.27).abs() < 1e-15));
    }

    #[test]
    fn cardinality_mode() {
        let pr = cardinality_pr(5, 1.0 / 3.0).unwrap();
        assert!(pr.values().iter().all(|&v| v == 1.0 / 3.0));
        assert!(pr.pr(&set(&[1])) > pr.pr(&set(&[1, 2])));
        assert_eq!(pr.cost(&set(&[1, 2])), pr.cost(&set(&[4, 5])));
        assert!(cardinality_pr(5, 0.5).is_err());
    }

    #[test]
    fn rejects_out_of_range_values() {
        assert!(FaultProbabilities::new(vec![0.1, 1.2]).is_err());
        assert!(FaultProbabilities::new(vec![0.0]).is_err());
        assert!(FaultProbabilities::new(vec![f64::NAN]).is_err());
    }

    #[test]
    fn cost_order() {
        assert!(Cost::NegInf < Cost::Log(-1e300));
        assert!(Cost::Log(-2.0) < Cost::Log(-1.0));
        assert_eq!(Cost::NegInf, Cost::NegInf);
        assert_eq!(Cost::NegInf.probability(), 0.0);
    }

    #[test]
    fn normalization() {
        let n = normalized(&[1.0, 3.0]);
        assert_eq!(n, vec![0.25, 0.75]);
    }
}
