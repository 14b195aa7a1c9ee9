//! Toeplitz operators, Berezin transforms and heat transforms.

use std::io::Write;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::Result;
use crate::fock::{kernel_vec, Basis, FockOperator, FockParams};
use crate::parallel;
use crate::quadrature::{gaussian_grid, GaussGrid};
use crate::symbol::{GridSymbol, HeatSmoothed, Symbol};
use crate::weyl::in_trusted_window;

const NODE_BLOCK: usize = 128;

/// `T_f`, with `M[a, b] = int f e_b conj(e_a) d mu_t` on the Gauss-Hermite grid.
pub fn toeplitz(params: &FockParams, f: &Symbol) -> Result<FockOperator> {
    let grid = gaussian_grid(params);
    toeplitz_on_grid(params, f, &grid)
}

/// [`toeplitz`] on a caller-supplied `mu_t` grid.
pub fn toeplitz_on_grid(params: &FockParams, f: &Symbol, grid: &GaussGrid) -> Result<FockOperator> {
    let basis = Basis::new(params);
    let dim = basis.len();
    let mut matrix = parallel::sum_matrix_blocks(grid.len(), NODE_BLOCK, dim, dim, |range| {
        let rows = range.len();
        let mut e = DMatrix::<Complex64>::zeros(rows, dim);
        let mut fe = DMatrix::<Complex64>::zeros(rows, dim);
        for (r, i) in range.enumerate() {
            let node = grid.node(i);
            let v = f.try_eval(node)? * grid.weight(i);
            for (k, val) in basis.eval_all(params, node).into_iter().enumerate() {
                e[(r, k)] = val;
                fe[(r, k)] = val * v;
            }
        }
        Ok::<_, crate::QhaError>(e.ad_mul(&fe))
    })?;
    if f.is_real() {
        // Hermitian by construction; remove rounding asymmetry.
        let sym = (&matrix + matrix.adjoint()) * Complex64::new(0.5, 0.0);
        matrix = sym;
    }
    FockOperator::new(*params, matrix)
}

/// Berezin transform `z -> <A k_z, k_z> / <k_z, k_z>` of a truncated operator.
///
/// The truncated kernel is renormalized, so the identity maps to the constant 1
/// everywhere and the contraction `|A~| <= ||A||` holds at every point.
#[derive(Debug, Clone)]
pub struct BerezinTransform {
    operator: FockOperator,
    basis: Basis,
}

impl BerezinTransform {
    pub fn operator(&self) -> &FockOperator {
        &self.operator
    }

    pub fn eval(&self, z: &[Complex64]) -> Complex64 {
        let c = DVector::from_vec(kernel_vec(&self.operator.params, &self.basis, z));
        let norm = c.norm_squared();
        if norm == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        let ac = &self.operator.matrix * &c;
        c.dotc(&ac) / norm
    }

    /// Unnormalized `<A k_z, k_z>` with the truncated kernel.
    pub fn eval_raw(&self, z: &[Complex64]) -> Complex64 {
        let c = DVector::from_vec(kernel_vec(&self.operator.params, &self.basis, z));
        c.dotc(&(&self.operator.matrix * &c))
    }

    pub fn is_trusted(&self, z: &[Complex64]) -> bool {
        in_trusted_window(&self.operator.params, z)
    }

    /// Sample on a uniform grid over `[-window, window]^{2n}`; points outside
    /// the trusted window are flagged.
    pub fn grid(&self, window: f64, points: usize) -> Result<GridSymbol> {
        let mut g = GridSymbol::sample(self.operator.params.n, window, points, |z| Ok(self.eval(z)))?;
        for i in 0..g.len() {
            g.flagged[i] = !self.is_trusted(&g.point(i));
        }
        Ok(g)
    }

    /// Grid over the trusted window.
    pub fn trusted_grid(&self, points: usize) -> Result<GridSymbol> {
        self.grid(self.operator.params.trusted_radius(), points)
    }

    pub fn write_csv<W: Write>(&self, window: f64, points: usize, writer: W) -> Result<()> {
        self.grid(window, points)?.write_csv(writer)
    }

    pub fn into_symbol(self) -> Symbol {
        Symbol::Berezin(Arc::new(self))
    }
}

pub fn berezin(a: &FockOperator) -> BerezinTransform {
    BerezinTransform {
        operator: a.clone(),
        basis: Basis::new(&a.params),
    }
}

/// Heat transform of `source` at time `t`.
#[derive(Debug, Clone)]
pub struct HeatTransformResult {
    /// Evaluates the transform on demand with a recentred Gauss-Hermite rule.
    pub symbol: Symbol,
    pub t: f64,
    pub source: Symbol,
}

impl HeatTransformResult {
    pub fn eval(&self, z: &[Complex64]) -> Complex64 {
        self.symbol.eval(z)
    }

    /// Tabulate on a uniform grid over `[-window, window]^{2n}`.
    pub fn to_grid(&self, n: usize, window: f64, points: usize) -> Result<GridSymbol> {
        self.symbol.sample(n, window, points)
    }
}

/// Default Gauss-Hermite order for heat transforms.
pub const HEAT_ORDER: usize = 40;

/// `(pi t)^{-n} int f(w) exp(-|z - w|^2 / t) dV(w)`.
pub fn heat_transform(f: &Symbol, n: usize, t: f64) -> HeatTransformResult {
    heat_transform_with_order(f, n, t, HEAT_ORDER)
}

pub fn heat_transform_with_order(f: &Symbol, n: usize, t: f64, order: usize) -> HeatTransformResult {
    HeatTransformResult {
        symbol: Symbol::Heat(Arc::new(HeatSmoothed::new(f.clone(), n, t, order))),
        t,
        source: f.clone(),
    }
}
