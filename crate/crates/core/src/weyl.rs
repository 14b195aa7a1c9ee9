//! Weyl operators `W_z f(w) = k_z(w) f(w - z)` and the action
//! `alpha_z(A) = W_z A W_{-z}`.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::Result;
use crate::fock::{Basis, FockOperator, FockParams};
use crate::quadrature::{gaussian_grid_with_order, integrate};

/// Whether `z` lies in the trusted window `|z|^2 <= t D / 4`.
pub fn in_trusted_window(params: &FockParams, z: &[Complex64]) -> bool {
    let r2: f64 = z.iter().map(|c| c.norm_sqr()).sum();
    r2 <= params.trusted_radius_sq() * (1.0 + 1e-12)
}

/// Matrix of `W_z` on the truncated basis.
///
/// Entries are the exact matrix elements of the untruncated operator, from the
/// associated-Laguerre closed form evaluated in log-scaled form. The operator
/// factorizes over coordinates.
pub fn weyl(params: &FockParams, z: &[Complex64]) -> FockOperator {
    assert_eq!(z.len(), params.n, "point dimension must match n");
    let factors: Vec<DMatrix<Complex64>> = z.iter().map(|&zi| weyl_1d(params.t, params.d, zi)).collect();
    if params.n == 1 {
        return FockOperator {
            params: *params,
            matrix: factors.into_iter().next().unwrap(),
        };
    }
    let basis = Basis::new(params);
    let idx = basis.indices();
    let dim = idx.len();
    let matrix = DMatrix::from_fn(dim, dim, |i, j| {
        let (a, b) = (&idx[i].0, &idx[j].0);
        let mut v = Complex64::new(1.0, 0.0);
        for k in 0..params.n {
            v *= factors[k][(a[k], b[k])];
        }
        v
    });
    FockOperator { params: *params, matrix }
}

/// One-variable Weyl matrix of size `(d+1) x (d+1)`:
///
/// `<W_z e_b, e_a> = sqrt(b!/a!) (conj z / sqrt t)^(a-b) exp(-x/2) L_b^(a-b)(x)` for `a >= b`,
/// `<W_z e_b, e_a> = sqrt(a!/b!) (-z / sqrt t)^(b-a) exp(-x/2) L_a^(b-a)(x)` for `a < b`,
///
/// with `x = |z|^2 / t`. Each diagonal `a - b = k` is one Laguerre recurrence.
pub fn weyl_1d(t: f64, d: usize, z: Complex64) -> DMatrix<Complex64> {
    let m = d + 1;
    let x = z.norm_sqr() / t;
    if x == 0.0 {
        return DMatrix::identity(m, m);
    }
    let ln_fact = ln_factorials(m);
    let ln_x = x.ln();
    let below = z.conj() / z.norm();
    let above = -z / z.norm();
    let mut w = DMatrix::zeros(m, m);
    let mut lag = vec![0.0; m];
    for k in 0..m {
        laguerre_sequence(m - k, k as f64, x, &mut lag);
        let phase_below = below.powu(k as u32);
        let phase_above = above.powu(k as u32);
        for j in 0..m - k {
            // j = min(a, b), j + k = max(a, b)
            let mag = (0.5 * (ln_fact[j] - ln_fact[j + k]) + 0.5 * k as f64 * ln_x - 0.5 * x).exp() * lag[j];
            w[(j + k, j)] = phase_below * mag;
            if k > 0 {
                w[(j, j + k)] = phase_above * mag;
            }
        }
    }
    w
}

fn ln_factorials(m: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(m);
    let mut acc = 0.0;
    out.push(0.0);
    for k in 1..m {
        acc += (k as f64).ln();
        out.push(acc);
    }
    out
}

// L_0^(alpha)(x), ..., L_{len-1}^(alpha)(x) into out[..len].
fn laguerre_sequence(len: usize, alpha: f64, x: f64, out: &mut [f64]) {
    if len == 0 {
        return;
    }
    out[0] = 1.0;
    if len == 1 {
        return;
    }
    out[1] = 1.0 + alpha - x;
    for j in 1..len - 1 {
        let jf = j as f64;
        out[j + 1] = ((2.0 * jf + 1.0 + alpha - x) * out[j] - (jf + alpha) * out[j - 1]) / (jf + 1.0);
    }
}

/// `W_z` by Gauss-Hermite quadrature of `int k_z(w) e_b(w - z) conj(e_a(w)) d mu_t`.
///
/// The integrand is not polynomial, so `order` must comfortably exceed `D`
/// for moderate `|z|`. Used as an independent cross-check of [`weyl`].
pub fn weyl_by_quadrature(params: &FockParams, z: &[Complex64], order: usize) -> Result<FockOperator> {
    let basis = Basis::new(params);
    let grid = gaussian_grid_with_order(params.n, params.t, order);
    let dim = basis.len();
    let norm_z: f64 = z.iter().map(|c| c.norm_sqr()).sum();
    let mut m = DMatrix::zeros(dim, dim);
    for a in 0..dim {
        for b in 0..dim {
            let (ia, ib) = (&basis.indices()[a], &basis.indices()[b]);
            m[(a, b)] = integrate(&grid, |w| {
                let dot: Complex64 = w.iter().zip(z).map(|(wi, zi)| wi * zi.conj()).sum();
                let k = (dot / params.t - norm_z / (2.0 * params.t)).exp();
                let shifted: Vec<Complex64> = w.iter().zip(z).map(|(wi, zi)| wi - zi).collect();
                k * crate::fock::eval_basis(params, ib, &shifted) * crate::fock::eval_basis(params, ia, w).conj()
            })?;
        }
    }
    FockOperator::new(*params, m)
}

/// `alpha_z(A) = W_z A W_{-z}`. The truncated `W_{-z}` equals the conjugate
/// transpose of the truncated `W_z`, so one Weyl matrix suffices.
pub fn alpha_op(a: &FockOperator, z: &[Complex64]) -> FockOperator {
    let w = weyl(&a.params, z);
    conjugate_by(&w.matrix, a)
}

pub(crate) fn conjugate_by(w: &DMatrix<Complex64>, a: &FockOperator) -> FockOperator {
    FockOperator {
        params: a.params,
        matrix: w * &a.matrix * w.adjoint(),
    }
}

/// Generalized Laguerre polynomial `L_k^{(alpha)}(x)` by the three-term recurrence.
pub fn laguerre(k: usize, alpha: f64, x: f64) -> f64 {
    let mut l0 = 1.0;
    if k == 0 {
        return l0;
    }
    let mut l1 = 1.0 + alpha - x;
    for j in 1..k {
        let j = j as f64;
        let l2 = ((2.0 * j + 1.0 + alpha - x) * l1 - (j + alpha) * l0) / (j + 1.0);
        l0 = l1;
        l1 = l2;
    }
    l1
}
