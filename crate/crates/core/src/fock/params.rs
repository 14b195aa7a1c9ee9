use serde::{Deserialize, Serialize};

use crate::error::{QhaError, Result};

/// Parameters of a truncated Fock model.
///
/// `n` is the complex dimension, `t` the Gaussian weight, `d` the total-degree
/// cutoff of the monomial basis and `q` the Gauss-Hermite order per real axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FockParams {
    pub n: usize,
    pub t: f64,
    pub d: usize,
    pub q: usize,
}

impl FockParams {
    pub fn new(n: usize, t: f64, d: usize, q: usize) -> Result<Self> {
        let p = Self { n, t, d, q };
        p.validate()?;
        Ok(p)
    }

    /// Same as [`FockParams::new`] with the quadrature order set to `d + 12`,
    /// which leaves headroom for smooth non-polynomial symbols.
    pub fn with_degree(n: usize, t: f64, d: usize) -> Result<Self> {
        Self::new(n, t, d, d + 12)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(QhaError::InvalidParams("complex dimension n must be positive".into()));
        }
        if !(self.t.is_finite() && self.t > 0.0) {
            return Err(QhaError::InvalidParams(format!("weight t must be positive, got {}", self.t)));
        }
        if self.q < self.d + 2 {
            return Err(QhaError::InvalidParams(format!(
                "quadrature order q={} must be at least d+2={}",
                self.q,
                self.d + 2
            )));
        }
        if self.q > crate::quadrature::MAX_HERMITE_ORDER {
            return Err(QhaError::InvalidParams(format!(
                "quadrature order q={} exceeds the supported maximum {}",
                self.q,
                crate::quadrature::MAX_HERMITE_ORDER
            )));
        }
        Ok(())
    }

    /// Number of basis elements, `binomial(d + n, n)`.
    pub fn dim(&self) -> usize {
        binomial(self.d + self.n, self.n)
    }

    /// Squared radius of the trusted window, `t * d / 4`.
    pub fn trusted_radius_sq(&self) -> f64 {
        self.t * self.d as f64 / 4.0
    }

    pub fn trusted_radius(&self) -> f64 {
        self.trusted_radius_sq().sqrt()
    }

    /// Degree bound of the trusted sub-block.
    pub fn trusted_degree(&self) -> usize {
        self.d / 2
    }

    /// Default half-width of Lebesgue windows: `sqrt(t (d + 4)) + 3 sqrt(t)`.
    pub fn default_window(&self) -> f64 {
        (self.t * (self.d as f64 + 4.0)).sqrt() + 3.0 * self.t.sqrt()
    }

    pub fn same_model(&self, other: &Self) -> bool {
        self.n == other.n && self.d == other.d && self.t.to_bits() == other.t.to_bits()
    }

    pub fn ensure_same(&self, other: &Self) -> Result<()> {
        if self.same_model(other) {
            Ok(())
        } else {
            Err(QhaError::ParamsMismatch {
                left: self.to_string(),
                right: other.to_string(),
            })
        }
    }
}

impl std::fmt::Display for FockParams {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "n={} t={} D={} Q={}", self.n, self.t, self.d, self.q)
    }
}

pub(crate) fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc as usize
}
