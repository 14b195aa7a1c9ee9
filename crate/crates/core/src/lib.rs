//! Quantum harmonic analysis on truncated Fock spaces.
//!
//! The crate realizes Weyl operators, Toeplitz operators, Berezin and heat
//! transforms and the function/operator convolutions as dense matrices and
//! grid functions on a total-degree truncation of the Fock space `F_t^2`.

pub mod approx;
pub mod conv;
pub mod error;
pub mod experiments;
pub mod fock;
mod linalg;
pub mod parallel;
pub mod quadrature;
pub mod symbol;
pub mod toeplitz;
pub mod weyl;

pub use error::{QhaError, Result};
pub use fock::{FockOperator, FockParams, FockVector, MultiIndex};
pub use quadrature::{GaussGrid, Measure};
pub use approx::{ApproxConfig, ApproximationReport, FitConfig, FitObjective, HeatKernelFit, NodeLayout};
pub use conv::{ConvolutionConfig, ResidualRecord};
pub use experiments::{SweepRecord, SweepReport};
pub use symbol::{GridSymbol, Symbol};
pub use toeplitz::{BerezinTransform, HeatTransformResult};
