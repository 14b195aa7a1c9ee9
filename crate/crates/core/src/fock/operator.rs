use std::ops::{Add, Mul, Sub};

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::{Basis, FockParams, FockVector};
use crate::error::{QhaError, Result};

/// Dense matrix `M[alpha, beta] = <A e_beta, e_alpha>` on the truncated basis.
#[derive(Debug, Clone, PartialEq)]
pub struct FockOperator {
    pub params: FockParams,
    pub matrix: DMatrix<Complex64>,
}

impl FockOperator {
    pub fn new(params: FockParams, matrix: DMatrix<Complex64>) -> Result<Self> {
        let dim = params.dim();
        if matrix.nrows() != dim || matrix.ncols() != dim {
            return Err(QhaError::InvalidArgument(format!(
                "matrix is {}x{}, model dimension is {dim}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        Ok(Self { params, matrix })
    }

    pub fn zeros(params: FockParams) -> Self {
        let dim = params.dim();
        Self {
            params,
            matrix: DMatrix::zeros(dim, dim),
        }
    }

    pub fn identity(params: FockParams) -> Self {
        let dim = params.dim();
        Self {
            params,
            matrix: DMatrix::identity(dim, dim),
        }
    }

    /// `P_C = 1 (x) 1`, the projection onto constants.
    pub fn projection_onto_constants(params: FockParams) -> Self {
        let mut op = Self::zeros(params);
        op.matrix[(0, 0)] = Complex64::new(1.0, 0.0);
        op
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn trace(&self) -> Complex64 {
        self.matrix.trace()
    }

    pub fn adjoint(&self) -> Self {
        Self {
            params: self.params,
            matrix: self.matrix.adjoint(),
        }
    }

    pub fn scale(&self, factor: Complex64) -> Self {
        Self {
            params: self.params,
            matrix: &self.matrix * factor,
        }
    }

    pub fn apply(&self, v: &FockVector) -> Result<FockVector> {
        self.params.ensure_same(&v.params)?;
        Ok(FockVector {
            params: self.params,
            coeffs: &self.matrix * &v.coeffs,
        })
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        self.params.ensure_same(&other.params)?;
        Ok(Self {
            params: self.params,
            matrix: &self.matrix + &other.matrix,
        })
    }

    pub fn try_sub(&self, other: &Self) -> Result<Self> {
        self.params.ensure_same(&other.params)?;
        Ok(Self {
            params: self.params,
            matrix: &self.matrix - &other.matrix,
        })
    }

    pub fn try_mul(&self, other: &Self) -> Result<Self> {
        self.params.ensure_same(&other.params)?;
        Ok(Self {
            params: self.params,
            matrix: &self.matrix * &other.matrix,
        })
    }

    /// `U A U` with `U` the parity operator; entries pick up `(-1)^(|alpha|+|beta|)`.
    pub fn parity_conjugate(&self) -> Self {
        let signs = parity_signs(&self.params);
        let mut m = self.matrix.clone();
        for j in 0..m.ncols() {
            for i in 0..m.nrows() {
                if signs[i] != signs[j] {
                    m[(i, j)] = -m[(i, j)];
                }
            }
        }
        Self { params: self.params, matrix: m }
    }

    /// Leading block on the basis elements of degree at most `degree`.
    pub fn block(&self, degree: usize) -> DMatrix<Complex64> {
        let k = Basis::new(&self.params).prefix_len(degree);
        self.matrix.view((0, 0), (k, k)).into_owned()
    }

    /// Leading block on the trusted degrees `|alpha| <= D/2`.
    pub fn trusted_block(&self) -> DMatrix<Complex64> {
        self.block(self.params.trusted_degree())
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.matrix.norm()
    }

    pub fn singular_values(&self) -> Vec<f64> {
        singular_values(&self.matrix)
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        (&self.matrix - self.matrix.adjoint()).camax() <= tol
    }
}

impl Add for &FockOperator {
    type Output = FockOperator;
    fn add(self, rhs: Self) -> FockOperator {
        self.try_add(rhs).expect("operator models differ")
    }
}

impl Sub for &FockOperator {
    type Output = FockOperator;
    fn sub(self, rhs: Self) -> FockOperator {
        self.try_sub(rhs).expect("operator models differ")
    }
}

impl Mul for &FockOperator {
    type Output = FockOperator;
    fn mul(self, rhs: Self) -> FockOperator {
        self.try_mul(rhs).expect("operator models differ")
    }
}

/// `y (x) x`: the operator `f -> <f, y> x`, with matrix `x_alpha conj(y_beta)`.
pub fn rank_one(y: &FockVector, x: &FockVector) -> Result<FockOperator> {
    y.params.ensure_same(&x.params)?;
    Ok(FockOperator {
        params: x.params,
        matrix: &x.coeffs * y.coeffs.adjoint(),
    })
}

/// Diagonal matrix of `U f(w) = f(-w)`, entries `(-1)^|alpha|`.
pub fn parity_matrix(params: FockParams) -> FockOperator {
    let signs = parity_signs(&params);
    let diag = nalgebra::DVector::from_iterator(
        signs.len(),
        signs.iter().map(|&odd| Complex64::new(if odd { -1.0 } else { 1.0 }, 0.0)),
    );
    FockOperator {
        params,
        matrix: DMatrix::from_diagonal(&diag),
    }
}

fn parity_signs(params: &FockParams) -> Vec<bool> {
    Basis::new(params).indices().iter().map(|a| a.degree() % 2 == 1).collect()
}

pub(crate) use crate::linalg::singular_values;
