//! Truncated Fock-space model: basis, vectors, dense operators and norms.

mod basis;
pub mod io;
mod norms;
mod operator;
mod params;
mod vector;

pub use basis::{basis_indexer, eval_basis, Basis, MultiIndex};
pub use norms::{fock_p_norm, operator_norm_2, p_operator_norm_lower_bound, schatten_norm, spectral_norm};
pub use operator::{parity_matrix, rank_one, FockOperator};
pub use params::FockParams;
pub use vector::{kernel_coefficients, FockVector, KernelCoefficients, DEFAULT_DEFECT_THRESHOLD};

pub(crate) use vector::kernel_vec;
