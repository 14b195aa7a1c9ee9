//! Gauss-Hermite grids for `mu_t` and Gauss-Legendre grids for Lebesgue
//! measure on a window `[-W, W]^{2n}`.

mod hermite;
mod legendre;

use std::io::Write;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{QhaError, Result};
use crate::fock::FockParams;
use crate::parallel;

pub use hermite::gauss_hermite;
pub use legendre::gauss_legendre;

/// Largest supported Gauss-Hermite order per real axis.
pub const MAX_HERMITE_ORDER: usize = 400;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Measure {
    /// `mu_t`, possibly recentred at a point.
    Gaussian { t: f64, order: usize },
    /// `dV` on `[-window, window]^{2n}` with `resolution` points per axis.
    Lebesgue { window: f64, resolution: usize },
}

/// Tensor quadrature grid on `C^n`. Real axes are ordered
/// `(Re z_1, Im z_1, Re z_2, ...)` with the last axis varying fastest.
#[derive(Debug, Clone)]
pub struct GaussGrid {
    n: usize,
    nodes: Vec<Complex64>,
    weights: Vec<f64>,
    pub measure: Measure,
}

impl GaussGrid {
    fn tensor(n: usize, axis_nodes: &[f64], axis_weights: &[f64], measure: Measure) -> Self {
        let m = axis_nodes.len();
        let axes = 2 * n;
        let count = m.pow(axes as u32);
        let mut nodes = Vec::with_capacity(count * n);
        let mut weights = Vec::with_capacity(count);
        let mut digits = vec![0usize; axes];
        for _ in 0..count {
            let mut w = 1.0;
            for i in 0..n {
                let (re, im) = (digits[2 * i], digits[2 * i + 1]);
                nodes.push(Complex64::new(axis_nodes[re], axis_nodes[im]));
                w *= axis_weights[re] * axis_weights[im];
            }
            weights.push(w);
            for d in digits.iter_mut().rev() {
                *d += 1;
                if *d < m {
                    break;
                }
                *d = 0;
            }
        }
        Self { n, nodes, weights, measure }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn node(&self, i: usize) -> &[Complex64] {
        &self.nodes[i * self.n..(i + 1) * self.n]
    }

    pub fn weight(&self, i: usize) -> f64 {
        self.weights[i]
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// The same grid translated by `center`.
    pub fn shifted(&self, center: &[Complex64]) -> Self {
        assert_eq!(center.len(), self.n);
        let mut out = self.clone();
        for chunk in out.nodes.chunks_mut(self.n) {
            for (x, c) in chunk.iter_mut().zip(center) {
                *x += c;
            }
        }
        out
    }

    /// CSV with columns `re_1,im_1,...,re_n,im_n,weight`.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let mut header = Vec::new();
        for i in 1..=self.n {
            header.push(format!("re_{i}"));
            header.push(format!("im_{i}"));
        }
        header.push("weight".into());
        w.write_record(&header)?;
        for i in 0..self.len() {
            let mut row = Vec::with_capacity(2 * self.n + 1);
            for z in self.node(i) {
                row.push(z.re.to_string());
                row.push(z.im.to_string());
            }
            row.push(self.weight(i).to_string());
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Tensor Gauss-Hermite grid of order `params.q` for `mu_t`.
pub fn gaussian_grid(params: &FockParams) -> GaussGrid {
    gaussian_grid_with_order(params.n, params.t, params.q)
}

/// Tensor Gauss-Hermite grid for `mu_t` with an explicit per-axis order.
pub fn gaussian_grid_with_order(n: usize, t: f64, order: usize) -> GaussGrid {
    let (x, w) = gauss_hermite(order);
    let scale = t.sqrt();
    let x: Vec<f64> = x.iter().map(|v| v * scale).collect();
    GaussGrid::tensor(n, &x, &w, Measure::Gaussian { t, order })
}

/// Tensor Gauss-Legendre grid for `dV` on `[-window, window]^{2n}`.
pub fn lebesgue_grid(window: f64, resolution: usize, n: usize) -> Result<GaussGrid> {
    if !(window.is_finite() && window > 0.0) {
        return Err(QhaError::InvalidArgument(format!("window must be positive, got {window}")));
    }
    if resolution < 2 {
        return Err(QhaError::InvalidArgument(format!("resolution must be at least 2, got {resolution}")));
    }
    if n == 0 {
        return Err(QhaError::InvalidArgument("complex dimension must be positive".into()));
    }
    let (x, w) = gauss_legendre(resolution);
    let x: Vec<f64> = x.iter().map(|v| v * window).collect();
    let w: Vec<f64> = w.iter().map(|v| v * window).collect();
    Ok(GaussGrid::tensor(n, &x, &w, Measure::Lebesgue { window, resolution }))
}

/// `sum_i w_i f(node_i)`; a non-finite value is reported with its node.
pub fn integrate<F>(grid: &GaussGrid, f: F) -> Result<Complex64>
where
    F: Fn(&[Complex64]) -> Complex64 + Sync,
{
    parallel::try_sum_complex(grid.len(), |i| {
        let node = grid.node(i);
        let v = f(node);
        if !(v.re.is_finite() && v.im.is_finite()) {
            return Err(QhaError::NonFinite { node: node.to_vec(), value: v });
        }
        Ok(v * grid.weight(i))
    })
}

/// Fallible variant of [`integrate`] for integrands that can fail themselves.
pub fn try_integrate<F>(grid: &GaussGrid, f: F) -> Result<Complex64>
where
    F: Fn(&[Complex64]) -> Result<Complex64> + Sync,
{
    parallel::try_sum_complex(grid.len(), |i| {
        let node = grid.node(i);
        let v = f(node)?;
        if !(v.re.is_finite() && v.im.is_finite()) {
            return Err(QhaError::NonFinite { node: node.to_vec(), value: v });
        }
        Ok(v * grid.weight(i))
    })
}
