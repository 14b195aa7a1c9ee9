//! Deterministic parallel reductions.
//!
//! Work is split into chunks of a fixed size that does not depend on the
//! number of worker threads. Each chunk is reduced sequentially, and the
//! chunk partials are then combined pairwise in index order. The result is
//! therefore bit-identical for any thread count.

use std::ops::AddAssign;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;

/// Items per chunk. Changing this changes rounding, so it is fixed.
pub const CHUNK: usize = 256;

/// Combine partials pairwise in index order.
pub fn pairwise_fold<T, F>(mut parts: Vec<T>, zero: impl Fn() -> T, add: F) -> T
where
    F: Fn(T, T) -> T,
{
    if parts.is_empty() {
        return zero();
    }
    while parts.len() > 1 {
        let mut next = Vec::with_capacity(parts.len().div_ceil(2));
        let mut it = parts.into_iter();
        while let Some(a) = it.next() {
            match it.next() {
                Some(b) => next.push(add(a, b)),
                None => next.push(a),
            }
        }
        parts = next;
    }
    parts.pop().unwrap()
}

/// Sum `term(i)` for `i in 0..count`.
pub fn sum_complex<F>(count: usize, term: F) -> Complex64
where
    F: Fn(usize) -> Complex64 + Sync,
{
    let chunks = count.div_ceil(CHUNK);
    let parts: Vec<Complex64> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let lo = c * CHUNK;
            let hi = (lo + CHUNK).min(count);
            let mut acc = Complex64::new(0.0, 0.0);
            for i in lo..hi {
                acc += term(i);
            }
            acc
        })
        .collect();
    pairwise_fold(parts, || Complex64::new(0.0, 0.0), |a, b| a + b)
}

/// Fallible variant of [`sum_complex`]; the first error in index order wins.
pub fn try_sum_complex<F, E>(count: usize, term: F) -> Result<Complex64, E>
where
    F: Fn(usize) -> Result<Complex64, E> + Sync,
    E: Send,
{
    let chunks = count.div_ceil(CHUNK);
    let parts: Vec<Result<Complex64, E>> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let lo = c * CHUNK;
            let hi = (lo + CHUNK).min(count);
            let mut acc = Complex64::new(0.0, 0.0);
            for i in lo..hi {
                acc += term(i)?;
            }
            Ok(acc)
        })
        .collect();
    let parts: Vec<Complex64> = parts.into_iter().collect::<Result<_, E>>()?;
    Ok(pairwise_fold(parts, || Complex64::new(0.0, 0.0), |a, b| a + b))
}

/// Accumulate a matrix-valued sum. `accumulate(i, acc)` adds term `i` into `acc`.
pub fn sum_matrices<F, E>(count: usize, rows: usize, cols: usize, accumulate: F) -> Result<DMatrix<Complex64>, E>
where
    F: Fn(usize, &mut DMatrix<Complex64>) -> Result<(), E> + Sync,
    E: Send,
{
    let chunk = matrix_chunk(rows * cols);
    let chunks = count.div_ceil(chunk);
    let parts: Vec<Result<DMatrix<Complex64>, E>> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let lo = c * chunk;
            let hi = (lo + chunk).min(count);
            let mut acc = DMatrix::zeros(rows, cols);
            for i in lo..hi {
                accumulate(i, &mut acc)?;
            }
            Ok(acc)
        })
        .collect();
    let parts: Vec<DMatrix<Complex64>> = parts.into_iter().collect::<Result<_, E>>()?;
    Ok(pairwise_fold(
        parts,
        || DMatrix::zeros(rows, cols),
        |mut a, b| {
            a.add_assign(&b);
            a
        },
    ))
}

/// Sum matrices produced per block of `chunk` consecutive indices.
///
/// `block(range)` returns the contribution of `range`; blocks are combined
/// pairwise in index order.
pub fn sum_matrix_blocks<F, E>(count: usize, chunk: usize, rows: usize, cols: usize, block: F) -> Result<DMatrix<Complex64>, E>
where
    F: Fn(std::ops::Range<usize>) -> Result<DMatrix<Complex64>, E> + Sync,
    E: Send,
{
    let chunks = count.div_ceil(chunk);
    let parts: Vec<Result<DMatrix<Complex64>, E>> = (0..chunks)
        .into_par_iter()
        .map(|c| block(c * chunk..((c + 1) * chunk).min(count)))
        .collect();
    let parts: Vec<DMatrix<Complex64>> = parts.into_iter().collect::<Result<_, E>>()?;
    Ok(pairwise_fold(
        parts,
        || DMatrix::zeros(rows, cols),
        |mut a, b| {
            a.add_assign(&b);
            a
        },
    ))
}

/// Map `0..count` in parallel, preserving order.
pub fn map_ordered<T, F>(count: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    (0..count).into_par_iter().map(f).collect()
}

// Chunk size for matrix sums, fixed per matrix size.
fn matrix_chunk(entries: usize) -> usize {
    if entries >= 4096 {
        64
    } else {
        CHUNK
    }
}
