use nalgebra::DVector;
use num_complex::Complex64;

use super::basis::axis_tables;
use super::{Basis, FockParams};
use crate::error::Result;

/// Default threshold on the kernel truncation defect `1 - |c|^2`.
pub const DEFAULT_DEFECT_THRESHOLD: f64 = 1e-8;

/// Coefficients of an element of the truncated space in the basis `e_alpha`.
#[derive(Debug, Clone, PartialEq)]
pub struct FockVector {
    pub params: FockParams,
    pub coeffs: DVector<Complex64>,
}

impl FockVector {
    pub fn new(params: FockParams, coeffs: DVector<Complex64>) -> Result<Self> {
        if coeffs.len() != params.dim() {
            return Err(crate::QhaError::InvalidArgument(format!(
                "vector has {} coefficients, model dimension is {}",
                coeffs.len(),
                params.dim()
            )));
        }
        Ok(Self { params, coeffs })
    }

    pub fn zeros(params: FockParams) -> Self {
        Self {
            params,
            coeffs: DVector::zeros(params.dim()),
        }
    }

    /// The basis vector at position `index`.
    pub fn basis_vector(params: FockParams, index: usize) -> Self {
        let mut v = Self::zeros(params);
        v.coeffs[index] = Complex64::new(1.0, 0.0);
        v
    }

    /// Norm in `F_t^2`, which is the Euclidean norm of the coefficients.
    pub fn norm(&self) -> f64 {
        self.coeffs.norm()
    }

    /// `<self, other>_{F_t^2}`, linear in the first slot.
    pub fn inner(&self, other: &Self) -> Result<Complex64> {
        self.params.ensure_same(&other.params)?;
        Ok(other.coeffs.dotc(&self.coeffs))
    }

    /// Evaluate the represented polynomial at `z`.
    pub fn eval(&self, basis: &Basis, z: &[Complex64]) -> Complex64 {
        basis
            .eval_all(&self.params, z)
            .iter()
            .zip(self.coeffs.iter())
            .map(|(e, c)| e * c)
            .sum()
    }
}

/// Truncated normalized reproducing kernel `k_z` together with its truncation
/// defect `1 - |c|^2`.
#[derive(Debug, Clone)]
pub struct KernelCoefficients {
    pub vector: FockVector,
    pub defect: f64,
}

impl KernelCoefficients {
    pub fn is_flagged(&self, threshold: f64) -> bool {
        self.defect > threshold
    }
}

/// Coefficients `c_alpha = exp(-|z|^2 / 2t) conj(e_alpha(z))` of `k_z`.
pub fn kernel_coefficients(params: &FockParams, basis: &Basis, z: &[Complex64]) -> KernelCoefficients {
    let coeffs = DVector::from_vec(kernel_vec(params, basis, z));
    let defect = (1.0 - coeffs.norm_squared()).max(0.0);
    KernelCoefficients {
        vector: FockVector { params: *params, coeffs },
        defect,
    }
}

pub(crate) fn kernel_vec(params: &FockParams, basis: &Basis, z: &[Complex64]) -> Vec<Complex64> {
    let norm_sq: f64 = z.iter().map(|c| c.norm_sqr()).sum();
    let scale = (-norm_sq / (2.0 * params.t)).exp();
    let conj_z: Vec<Complex64> = z.iter().map(|c| c.conj()).collect();
    let tables = axis_tables(params, &conj_z);
    basis
        .indices()
        .iter()
        .map(|a| scale * a.0.iter().enumerate().map(|(i, &k)| tables[i][k]).product::<Complex64>())
        .collect()
}
