use std::collections::HashMap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::FockParams;

/// Multi-index `alpha = (alpha_1, ..., alpha_n)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MultiIndex(pub Vec<usize>);

impl MultiIndex {
    pub fn degree(&self) -> usize {
        self.0.iter().sum()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// `alpha! = prod alpha_i!` as a float.
    pub fn factorial(&self) -> f64 {
        self.0
            .iter()
            .map(|&a| (1..=a).map(|k| k as f64).product::<f64>())
            .product()
    }
}

impl std::fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "(")?;
        for (i, a) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{a}")?;
        }
        write!(f, ")")
    }
}

/// Ordered monomial basis `{e_alpha : |alpha| <= D}` in graded lexicographic
/// order, with the inverse position map.
#[derive(Debug, Clone)]
pub struct Basis {
    indices: Vec<MultiIndex>,
    positions: HashMap<MultiIndex, usize>,
}

impl Basis {
    pub fn new(params: &FockParams) -> Self {
        let indices = basis_indexer(params);
        let positions = indices.iter().cloned().enumerate().map(|(i, a)| (a, i)).collect();
        Self { indices, positions }
    }

    pub fn indices(&self) -> &[MultiIndex] {
        &self.indices
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn position(&self, alpha: &MultiIndex) -> Option<usize> {
        self.positions.get(alpha).copied()
    }

    /// Positions of all indices with total degree at most `degree`. Because the
    /// order is graded these form a prefix.
    pub fn prefix_len(&self, degree: usize) -> usize {
        self.indices.iter().take_while(|a| a.degree() <= degree).count()
    }

    /// Values of every basis element at `z`, in basis order.
    pub fn eval_all(&self, params: &FockParams, z: &[Complex64]) -> Vec<Complex64> {
        let tables = axis_tables(params, z);
        self.indices
            .iter()
            .map(|a| a.0.iter().enumerate().map(|(i, &k)| tables[i][k]).product())
            .collect()
    }
}

/// All multi-indices with `|alpha| <= D` in graded lexicographic order:
/// by degree, then lexicographically descending in the leading entries.
pub fn basis_indexer(params: &FockParams) -> Vec<MultiIndex> {
    let mut out = Vec::with_capacity(params.dim());
    let mut current = vec![0usize; params.n];
    for degree in 0..=params.d {
        compositions(degree, 0, &mut current, &mut out);
    }
    out
}

fn compositions(remaining: usize, slot: usize, current: &mut [usize], out: &mut Vec<MultiIndex>) {
    if slot + 1 == current.len() {
        current[slot] = remaining;
        out.push(MultiIndex(current.to_vec()));
        return;
    }
    for first in (0..=remaining).rev() {
        current[slot] = first;
        compositions(remaining - first, slot + 1, current, out);
    }
    current[slot] = 0;
}

/// Per-axis tables `z_i^k / sqrt(k! t^k)` for `k = 0..=D`.
pub(crate) fn axis_tables(params: &FockParams, z: &[Complex64]) -> Vec<Vec<Complex64>> {
    z.iter()
        .map(|&zi| {
            let mut row = Vec::with_capacity(params.d + 1);
            row.push(Complex64::new(1.0, 0.0));
            for k in 1..=params.d {
                let prev = row[k - 1];
                row.push(prev * zi / (k as f64 * params.t).sqrt());
            }
            row
        })
        .collect()
}

/// `e_alpha(z) = sqrt(1 / (alpha! t^|alpha|)) z^alpha`.
pub fn eval_basis(params: &FockParams, alpha: &MultiIndex, z: &[Complex64]) -> Complex64 {
    let mut acc = Complex64::new(1.0, 0.0);
    for (&a, &zi) in alpha.0.iter().zip(z) {
        for k in 1..=a {
            acc *= zi / (k as f64 * params.t).sqrt();
        }
    }
    acc
}
