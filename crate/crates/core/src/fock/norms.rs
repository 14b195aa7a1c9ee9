//! Spectral and Schatten norms, and the sampled `F_t^p` operator-norm estimator.

use nalgebra::DVector;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::operator::singular_values;
use super::{Basis, FockOperator, FockVector};
use crate::quadrature::{gaussian_grid_with_order, GaussGrid};

/// Largest singular value.
pub fn operator_norm_2(a: &FockOperator) -> f64 {
    a.singular_values().first().copied().unwrap_or(0.0)
}

/// Spectral norm of an arbitrary dense block.
pub fn spectral_norm(m: &nalgebra::DMatrix<Complex64>) -> f64 {
    singular_values(m).first().copied().unwrap_or(0.0)
}

/// `l^p0` norm of the singular values; `p0 = 1` is the nuclear norm.
///
/// Panics if `p0 < 1`.
pub fn schatten_norm(a: &FockOperator, p0: f64) -> f64 {
    assert!(p0 >= 1.0, "Schatten exponent must be at least 1, got {p0}");
    let sv = a.singular_values();
    if p0.is_infinite() {
        return sv.first().copied().unwrap_or(0.0);
    }
    let top = sv.first().copied().unwrap_or(0.0);
    if top == 0.0 {
        return 0.0;
    }
    // Scale by the largest value to avoid overflow for large p0.
    top * sv.iter().map(|s| (s / top).powf(p0)).sum::<f64>().powf(1.0 / p0)
}

/// `||g||_{F_t^p} = (int |g|^p d mu_{2t/p})^{1/p}` evaluated on `grid`.
pub fn fock_p_norm(v: &FockVector, basis: &Basis, grid: &GaussGrid, p: f64) -> f64 {
    let n = v.params.n;
    let total: f64 = (0..grid.len())
        .map(|i| grid.weight(i) * v.eval(basis, grid.node(i)).norm().powf(p))
        .sum();
    debug_assert_eq!(grid.node(0).len(), n);
    total.powf(1.0 / p)
}

/// Lower bound for the operator norm of `a` on `F_t^p`.
///
/// Evaluates `||A g||_p / ||g||_p` for the constant function followed by
/// `trials - 1` random polynomials drawn from a seeded generator, and returns
/// the running maximum. The sample sequence is a deterministic function of
/// `seed`, so the result is non-decreasing in `trials`.
pub fn p_operator_norm_lower_bound(a: &FockOperator, p: f64, trials: usize, seed: u64) -> f64 {
    assert!(trials >= 1, "at least one trial is required");
    assert!(p > 1.0 && p.is_finite(), "p must lie in (1, inf)");
    let params = a.params;
    let basis = Basis::new(&params);
    let order = params.q.max(params.d + 12).min(crate::quadrature::MAX_HERMITE_ORDER);
    let grid = gaussian_grid_with_order(params.n, 2.0 * params.t / p, order);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best: f64 = 0.0;
    for trial in 0..trials {
        let g = if trial == 0 {
            FockVector::basis_vector(params, 0)
        } else {
            let coeffs = DVector::from_fn(params.dim(), |_, _| {
                let re: f64 = StandardNormal.sample(&mut rng);
                let im: f64 = StandardNormal.sample(&mut rng);
                Complex64::new(re, im)
            });
            FockVector { params, coeffs }
        };
        let denom = fock_p_norm(&g, &basis, &grid, p);
        if denom == 0.0 {
            continue;
        }
        let ag = FockVector {
            params,
            coeffs: &a.matrix * &g.coeffs,
        };
        best = best.max(fock_p_norm(&ag, &basis, &grid, p) / denom);
    }
    best
}
