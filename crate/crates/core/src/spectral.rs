//! Sorted eigenvalue sequences and the optimal worst-case error.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::weights::WeightFamily;

/// The `M` largest product eigenvalues of a weight family over N^d, sorted
/// nonincreasing with ties broken by lexicographic multi-index order. The flat
/// index `k` (1-based) of the rest of the crate refers to positions in this
/// list.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralData {
    pub d: usize,
    lambdas: Vec<f64>,
    order: Vec<Vec<usize>>,
}

impl SpectralData {
    /// Wrap an already sorted positive sequence as a univariate spectrum.
    /// Used for synthetic eigenvalue families in diagnostics and tests.
    pub fn from_sorted_lambdas(lambdas: Vec<f64>) -> Result<Self> {
        if lambdas.is_empty() {
            return Err(Error::InvalidParameter("empty eigenvalue list".into()));
        }
        if lambdas.iter().any(|&v| !v.is_finite() || v <= 0.0) {
            return Err(Error::InvalidParameter(
                "eigenvalues must be positive and finite".into(),
            ));
        }
        if lambdas.windows(2).any(|w| w[0] < w[1]) {
            return Err(Error::InvalidParameter(
                "eigenvalues must be nonincreasing".into(),
            ));
        }
        let order = (1..=lambdas.len()).map(|k| vec![k]).collect();
        Ok(Self { d: 1, lambdas, order })
    }

    pub fn len(&self) -> usize {
        self.lambdas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lambdas.is_empty()
    }

    pub fn lambdas(&self) -> &[f64] {
        &self.lambdas
    }

    /// Eigenvalue at 1-based flat index `k`.
    pub fn lambda(&self, k: usize) -> Result<f64> {
        if k == 0 || k > self.lambdas.len() {
            return Err(Error::TruncationExceeded {
                needed: k,
                available: self.lambdas.len(),
            });
        }
        Ok(self.lambdas[k - 1])
    }

    /// Multi-index attached to 1-based flat index `k`.
    pub fn multi_index(&self, k: usize) -> Result<&[usize]> {
        if k == 0 || k > self.order.len() {
            return Err(Error::TruncationExceeded {
                needed: k,
                available: self.order.len(),
            });
        }
        Ok(&self.order[k - 1])
    }

    pub fn multi_indices(&self) -> &[Vec<usize>] {
        &self.order
    }

    /// Optimal worst-case error of n-functional approximation: sqrt(lambda_{n+1}).
    /// `n = 0` gives the initial error sqrt(lambda_1).
    pub fn worst_case_error(&self, n: usize) -> Result<f64> {
        Ok(self.lambda(n + 1)?.sqrt())
    }
}

/// Heap entry ordered by eigenvalue (largest first), ties by lexicographically
/// smaller multi-index first.
struct FrontierEntry {
    value: f64,
    index: Vec<usize>,
}

impl PartialEq for FrontierEntry {
    fn eq(&self, other: &Self) -> bool {
        self.value == other.value && self.index == other.index
    }
}
impl Eq for FrontierEntry {}

impl Ord for FrontierEntry {
    fn cmp(&self, other: &Self) -> Ordering {
        self.value
            .total_cmp(&other.value)
            .then_with(|| other.index.cmp(&self.index))
    }
}

impl PartialOrd for FrontierEntry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Enumerate the `m_max` largest product eigenvalues of `weights` over N^d by
/// best-first frontier expansion: each popped multi-index pushes its d
/// coordinate successors, with dedup. Valid because every univariate factor is
/// nonincreasing, so successors never exceed their parent.
pub fn enumerate_eigenvalues(
    weights: &WeightFamily,
    d: usize,
    m_max: usize,
) -> Result<SpectralData> {
    if d == 0 {
        return Err(Error::InvalidParameter("dimension d must be >= 1".into()));
    }
    if m_max == 0 {
        return Err(Error::InvalidParameter(
            "truncation length M must be >= 1".into(),
        ));
    }
    weights.validate(d)?;

    let mut heap = BinaryHeap::new();
    let mut seen: HashSet<Vec<usize>> = HashSet::new();
    let root = vec![1usize; d];
    heap.push(FrontierEntry {
        value: weights.value(&root),
        index: root.clone(),
    });
    seen.insert(root);

    let mut lambdas = Vec::with_capacity(m_max);
    let mut order = Vec::with_capacity(m_max);
    while lambdas.len() < m_max {
        let FrontierEntry { value, index } = heap
            .pop()
            .expect("frontier never empties before m_max pops");
        if !value.is_finite() || value <= 0.0 {
            // Tail underflowed to zero; the sequence is no longer usable.
            return Err(Error::InvalidParameter(format!(
                "eigenvalue underflow at flat index {}; reduce M",
                lambdas.len() + 1
            )));
        }
        for nu in 0..d {
            let mut succ = index.clone();
            succ[nu] += 1;
            if !seen.contains(&succ) {
                let v = weights.value(&succ);
                seen.insert(succ.clone());
                heap.push(FrontierEntry { value: v, index: succ });
            }
        }
        lambdas.push(value);
        order.push(index);
    }
    Ok(SpectralData { d, lambdas, order })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    /// Brute-force oracle: evaluate the weight on the full grid {1..grid}^d,
    /// sort by (value desc, index lex asc), take the first m entries.
    fn brute_force(weights: &WeightFamily, d: usize, grid: usize, m: usize) -> Vec<(f64, Vec<usize>)> {
        fn fill(
            weights: &WeightFamily,
            grid: usize,
            idx: &mut Vec<usize>,
            depth: usize,
            out: &mut Vec<(f64, Vec<usize>)>,
        ) {
            if depth == idx.len() {
                out.push((weights.value(idx), idx.clone()));
                return;
            }
            for k in 1..=grid {
                idx[depth] = k;
                fill(weights, grid, idx, depth + 1, out);
            }
        }
        let mut all = Vec::new();
        fill(weights, grid, &mut vec![1; d], 0, &mut all);
        all.sort_by(|a, b| b.0.total_cmp(&a.0).then_with(|| a.1.cmp(&b.1)));
        all.truncate(m);
        all
    }

    #[test]
    fn univariate_algebraic_sequence() {
        let s = enumerate_eigenvalues(&WeightFamily::algebraic(1.0), 1, 3).unwrap();
        assert_eq!(s.lambdas(), &[1.0, 0.25, 1.0 / 9.0]);
    }

    #[test]
    fn univariate_exponential_sequence() {
        let s = enumerate_eigenvalues(&WeightFamily::exponential(1.0, 0.5), 1, 4).unwrap();
        assert_eq!(s.lambdas(), &[1.0, 0.5, 0.25, 0.125]);
    }

    #[test]
    fn bivariate_algebraic_top_six_matches_grid_sort() {
        let w = WeightFamily::algebraic(1.0);
        let s = enumerate_eigenvalues(&w, 2, 6).unwrap();
        let oracle = brute_force(&w, 2, 50, 6);
        for (k, (val, idx)) in oracle.iter().enumerate() {
            assert_abs_diff_eq!(s.lambda(k + 1).unwrap(), *val, epsilon = 1e-15);
            assert_eq!(s.multi_index(k + 1).unwrap(), idx.as_slice());
        }
        // Frozen from the 50x50 grid sort: 1, 1/4, 1/4, 1/9, 1/9, 1/16.
        assert_eq!(
            s.lambdas(),
            &[1.0, 0.25, 0.25, 1.0 / 9.0, 1.0 / 9.0, 1.0 / 16.0]
        );
        assert_eq!(s.multi_index(6).unwrap(), &[1, 4]);
    }

    #[test]
    fn matches_brute_force_over_families_and_dims() {
        let families = [
            WeightFamily::algebraic(0.75),
            WeightFamily::algebraic(1.0),
            WeightFamily::exponential(1.5, 0.7),
            WeightFamily::Algebraic {
                alpha: 1.0,
                gamma: Some(vec![1.0, 0.3, 2.5]),
            },
        ];
        for w in &families {
            for d in 1..=3usize {
                if let WeightFamily::Algebraic { gamma: Some(g), .. } = w {
                    if g.len() != d {
                        continue;
                    }
                }
                for m in [1usize, 7, 40, 100] {
                    let s = enumerate_eigenvalues(w, d, m).unwrap();
                    let oracle = brute_force(w, d, m + 2, m);
                    for (k, (value, index)) in oracle.iter().enumerate() {
                        assert_eq!(
                            s.lambda(k + 1).unwrap(),
                            *value,
                            "family {w:?} d={d} m={m} k={k}"
                        );
                        assert_eq!(s.multi_index(k + 1).unwrap(), index.as_slice());
                    }
                }
            }
        }
    }

    #[test]
    fn sequence_is_nonincreasing_and_positive() {
        let s = enumerate_eigenvalues(&WeightFamily::exponential(2.0, 0.8), 3, 200).unwrap();
        for w in s.lambdas().windows(2) {
            assert!(w[0] >= w[1]);
        }
        assert!(s.lambdas().iter().all(|&v| v > 0.0));
    }

    #[test]
    fn first_index_is_all_ones() {
        for w in [WeightFamily::algebraic(0.8), WeightFamily::exponential(3.0, 0.4)] {
            for d in 1..=3 {
                let s = enumerate_eigenvalues(&w, d, 5).unwrap();
                assert_eq!(s.multi_index(1).unwrap(), vec![1usize; d].as_slice());
            }
        }
    }

    #[test]
    fn worst_case_error_values() {
        let s = SpectralData::from_sorted_lambdas(
            (1..=16).map(|k| 1.0 / (k as f64 * k as f64)).collect(),
        )
        .unwrap();
        assert_abs_diff_eq!(s.worst_case_error(0).unwrap(), 1.0);
        assert_abs_diff_eq!(s.worst_case_error(3).unwrap(), 0.25);
        let geo = SpectralData::from_sorted_lambdas(
            (0..16).map(|k| 0.5_f64.powi(k)).collect(),
        )
        .unwrap();
        assert_abs_diff_eq!(geo.worst_case_error(4).unwrap(), 0.25);
    }

    #[test]
    fn worst_case_error_is_nonincreasing_in_n() {
        let s = enumerate_eigenvalues(&WeightFamily::algebraic(0.9), 2, 60).unwrap();
        let mut prev = f64::INFINITY;
        for n in 0..s.len() {
            let e = s.worst_case_error(n).unwrap();
            assert!(e <= prev);
            prev = e;
        }
    }

    #[test]
    fn truncation_errors_are_reported() {
        let s = enumerate_eigenvalues(&WeightFamily::algebraic(1.0), 1, 4).unwrap();
        assert!(matches!(
            s.worst_case_error(4),
            Err(Error::TruncationExceeded { needed: 5, available: 4 })
        ));
        assert!(s.lambda(0).is_err());
    }

    #[test]
    fn invalid_parameters_are_rejected() {
        assert!(enumerate_eigenvalues(&WeightFamily::algebraic(0.5), 1, 3).is_err());
        assert!(enumerate_eigenvalues(&WeightFamily::exponential(1.0, 1.2), 1, 3).is_err());
        assert!(enumerate_eigenvalues(&WeightFamily::algebraic(1.0), 0, 3).is_err());
        assert!(enumerate_eigenvalues(&WeightFamily::algebraic(1.0), 1, 0).is_err());
    }

    #[test]
    fn geometric_underflow_is_an_error_not_a_zero() {
        let w = WeightFamily::exponential(1.0, 0.5);
        assert!(enumerate_eigenvalues(&w, 1, 1000).is_ok());
        assert!(enumerate_eigenvalues(&w, 1, 2000).is_err());
    }

    #[test]
    fn from_sorted_rejects_bad_sequences() {
        assert!(SpectralData::from_sorted_lambdas(vec![]).is_err());
        assert!(SpectralData::from_sorted_lambdas(vec![1.0, 2.0]).is_err());
        assert!(SpectralData::from_sorted_lambdas(vec![1.0, 0.0]).is_err());
    }
}
