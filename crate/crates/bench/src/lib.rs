//! Shared fixtures for the benchmarks.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use qha_core::conv::random_finite_rank;
use qha_core::{ConvolutionConfig, FockOperator, FockParams, Symbol};

pub const SEED: u64 = 20240601;

pub fn model(d: usize) -> FockParams {
    FockParams::with_degree(1, 1.0, d).expect("valid model")
}

/// Default window with a reduced grid, so one iteration stays short.
pub fn convolution(params: &FockParams, resolution: usize) -> ConvolutionConfig {
    ConvolutionConfig {
        resolution,
        ..ConvolutionConfig::for_params(params)
    }
}

pub fn random_pair(params: &FockParams) -> (FockOperator, FockOperator) {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let a = random_finite_rank(params, 2, &mut rng);
    let b = random_finite_rank(params, 3, &mut rng);
    (a, b)
}

pub fn bump() -> Symbol {
    Symbol::gaussian_bump(vec![Complex64::new(0.3, -0.2)], 2.0)
}

pub fn point() -> [Complex64; 1] {
    [Complex64::new(0.6, 0.8)]
}
