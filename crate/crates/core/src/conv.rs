//! Function/operator convolutions `f * A`, `A * B`, `f * g` on a shared
//! Lebesgue grid, and residuals of the identities relating them.

use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{QhaError, Result};
use crate::fock::{spectral_norm, Basis, FockOperator, FockParams, FockVector};
use crate::parallel;
use crate::quadrature::{lebesgue_grid, GaussGrid};
use crate::symbol::{GridSymbol, Symbol, SymbolFn};
use crate::toeplitz::berezin;
use crate::weyl::weyl;

/// Default points per real axis of the convolution grid.
pub const DEFAULT_RESOLUTION: usize = 160;
/// Default relative change tolerated when the window is doubled.
pub const DEFAULT_STABILITY_TOLERANCE: f64 = 1e-6;

const NODE_BLOCK: usize = 8;
// Relative size below which a quadrature term is dropped.
const NEGLIGIBLE: f64 = 1e-17;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConvolutionConfig {
    /// Half-width `W` of the window `[-W, W]^{2n}`.
    pub window: f64,
    /// Gauss-Legendre points per real axis.
    pub resolution: usize,
    /// Reductions are always ordered; the flag is recorded for reports.
    pub deterministic: bool,
    /// Relative change allowed by the window-doubling check.
    pub stability_tolerance: f64,
}

impl ConvolutionConfig {
    pub fn for_params(params: &FockParams) -> Self {
        Self {
            window: params.default_window(),
            resolution: DEFAULT_RESOLUTION,
            deterministic: true,
            stability_tolerance: DEFAULT_STABILITY_TOLERANCE,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.window.is_finite() && self.window > 0.0) {
            return Err(QhaError::InvalidArgument(format!("window must be positive, got {}", self.window)));
        }
        if self.resolution < 2 {
            return Err(QhaError::InvalidArgument(format!(
                "resolution must be at least 2, got {}",
                self.resolution
            )));
        }
        if self.stability_tolerance.is_nan() || self.stability_tolerance <= 0.0 {
            return Err(QhaError::InvalidArgument("stability tolerance must be positive".into()));
        }
        Ok(())
    }

    /// Whether the window contains the trusted disc `|z|^2 <= t D / 4`.
    pub fn covers_trusted_window(&self, params: &FockParams) -> bool {
        self.window >= params.trusted_radius()
    }

    pub fn grid(&self, n: usize) -> Result<GaussGrid> {
        self.validate()?;
        lebesgue_grid(self.window, self.resolution, n)
    }

    /// Window and resolution both doubled, keeping the node spacing.
    pub fn doubled(&self) -> Self {
        Self {
            window: 2.0 * self.window,
            resolution: 2 * self.resolution,
            ..*self
        }
    }
}

/// An operator as either a dense matrix or a thin factorization `L R^H`.
#[derive(Debug, Clone)]
enum Factored {
    Dense(DMatrix<Complex64>),
    LowRank {
        left: DMatrix<Complex64>,
        right: DMatrix<Complex64>,
    },
}

impl Factored {
    fn new(m: &DMatrix<Complex64>) -> Self {
        let dim = m.nrows();
        if dim < 8 {
            return Factored::Dense(m.clone());
        }
        let Some((u, s, v)) = crate::linalg::svd(m) else {
            return Factored::Dense(m.clone());
        };
        let top = s.iter().copied().fold(0.0, f64::max);
        if top == 0.0 {
            return Factored::LowRank {
                left: DMatrix::zeros(dim, 0),
                right: DMatrix::zeros(dim, 0),
            };
        }
        // Numerical rank: singular values below dim * eps * top are round-off.
        let cutoff = dim as f64 * f64::EPSILON * top;
        let keep: Vec<usize> = (0..s.len()).filter(|&k| s[k] > cutoff).collect();
        if keep.len() * 4 > dim {
            return Factored::Dense(m.clone());
        }
        let mut left = DMatrix::zeros(dim, keep.len());
        let mut right = DMatrix::zeros(dim, keep.len());
        for (c, &k) in keep.iter().enumerate() {
            left.set_column(c, &(u.column(k) * Complex64::new(s[k], 0.0)));
            right.set_column(c, &v.column(k));
        }
        Factored::LowRank { left, right }
    }

    /// `W M W^H` as a dense matrix.
    fn conjugated(&self, w: &DMatrix<Complex64>) -> DMatrix<Complex64> {
        match self {
            Factored::Dense(m) => w * m * w.adjoint(),
            Factored::LowRank { left, right } => (w * left) * (w * right).adjoint(),
        }
    }

    /// `Tr(A W M W^H)`.
    fn trace_against(&self, a: &DMatrix<Complex64>, w: &DMatrix<Complex64>) -> Complex64 {
        match self {
            Factored::Dense(m) => {
                let x = w * m * w.adjoint();
                a.transpose().dot(&x)
            }
            Factored::LowRank { left, right } => {
                let wl = w * left;
                let wr = w * right;
                (wr.adjoint() * (a * wl)).trace()
            }
        }
    }
}

/// Weights `w_i f(z_i)` on the grid and the indices that matter.
fn weighted_samples(f: &Symbol, grid: &GaussGrid) -> Result<(Vec<Complex64>, Vec<usize>, f64)> {
    let values: Vec<Result<Complex64>> =
        parallel::map_ordered(grid.len(), |i| Ok(f.try_eval(grid.node(i))? * grid.weight(i)));
    let values = values.into_iter().collect::<Result<Vec<_>>>()?;
    let l1: f64 = values.iter().map(|v| v.norm()).sum();
    let active = if l1 == 0.0 {
        Vec::new()
    } else {
        (0..values.len()).filter(|&i| values[i].norm() > NEGLIGIBLE * l1).collect()
    };
    Ok((values, active, l1))
}

/// `f * A = int f(z) alpha_z(A) dV(z)` on the configured window.
pub fn conv_fun_op(f: &Symbol, a: &FockOperator, cfg: &ConvolutionConfig) -> Result<FockOperator> {
    let params = a.params;
    let grid = cfg.grid(params.n)?;
    let (values, active, _) = weighted_samples(f, &grid)?;
    let factored = Factored::new(&a.matrix);
    let dim = a.dim();
    let matrix = parallel::sum_matrix_blocks(active.len(), NODE_BLOCK, dim, dim, |range| {
        let mut acc = DMatrix::zeros(dim, dim);
        for &i in &active[range] {
            let w = weyl(&params, grid.node(i)).matrix;
            acc += factored.conjugated(&w) * values[i];
        }
        Ok::<_, QhaError>(acc)
    })?;
    FockOperator::new(params, matrix)
}

/// [`conv_fun_op`] with the window-doubling integrability check.
///
/// Fails with [`QhaError::WindowInstability`] when doubling the window changes
/// the result by more than `cfg.stability_tolerance` in relative Frobenius norm.
pub fn conv_fun_op_checked(f: &Symbol, a: &FockOperator, cfg: &ConvolutionConfig) -> Result<FockOperator> {
    let base = conv_fun_op(f, a, cfg)?;
    let wide = conv_fun_op(f, a, &cfg.doubled())?;
    let change = window_change(&base.matrix, &wide.matrix);
    if change > cfg.stability_tolerance {
        return Err(QhaError::WindowInstability {
            window: cfg.window,
            change,
            tolerance: cfg.stability_tolerance,
        });
    }
    Ok(base)
}

fn window_change(base: &DMatrix<Complex64>, wide: &DMatrix<Complex64>) -> f64 {
    let scale = wide.norm();
    let diff = (base - wide).norm();
    if scale == 0.0 {
        diff
    } else {
        diff / scale
    }
}

/// `R_t = (pi t)^{-n} P_C`.
pub fn r_t(params: &FockParams) -> FockOperator {
    FockOperator::projection_onto_constants(*params)
        .scale(Complex64::new((std::f64::consts::PI * params.t).powi(-(params.n as i32)), 0.0))
}

/// `T_f` computed as `R_t * f`.
pub fn toeplitz_via_convolution(params: &FockParams, f: &Symbol, cfg: &ConvolutionConfig) -> Result<FockOperator> {
    conv_fun_op(f, &r_t(params), cfg)
}

/// `(A * B)(z) = Tr(A alpha_z(U B U))`, evaluated on demand.
#[derive(Debug, Clone)]
pub struct OperatorConvolution {
    params: FockParams,
    a: DMatrix<Complex64>,
    ubu: Factored,
    label: String,
}

impl OperatorConvolution {
    pub fn new(a: &FockOperator, b: &FockOperator) -> Result<Self> {
        a.params.ensure_same(&b.params)?;
        Ok(Self {
            params: a.params,
            a: a.matrix.clone(),
            ubu: Factored::new(&b.parity_conjugate().matrix),
            label: "operator convolution".into(),
        })
    }

    pub fn eval(&self, z: &[Complex64]) -> Complex64 {
        let w = weyl(&self.params, z).matrix;
        self.ubu.trace_against(&self.a, &w)
    }

    pub fn into_symbol(self) -> Symbol {
        Symbol::Custom(Arc::new(self))
    }
}

impl SymbolFn for OperatorConvolution {
    fn eval(&self, w: &[Complex64]) -> Complex64 {
        OperatorConvolution::eval(self, w)
    }

    fn describe(&self) -> String {
        self.label.clone()
    }
}

/// `A * B` tabulated on a uniform grid over `[-window, window]^{2n}`.
pub fn conv_op_op(a: &FockOperator, b: &FockOperator, window: f64, points: usize) -> Result<GridSymbol> {
    let conv = OperatorConvolution::new(a, b)?;
    GridSymbol::sample(a.params.n, window, points, |z| Ok(conv.eval(z)))
}

/// `(f * g)(z) = int f(w) g(z - w) dV(w)` with `f` sampled once on the grid.
#[derive(Debug, Clone)]
pub struct FunctionConvolution {
    nodes: Vec<Vec<Complex64>>,
    weighted: Vec<Complex64>,
    g: Symbol,
    label: String,
}

impl FunctionConvolution {
    pub fn new(f: &Symbol, g: &Symbol, n: usize, cfg: &ConvolutionConfig) -> Result<Self> {
        let grid = cfg.grid(n)?;
        let (values, active, _) = weighted_samples(f, &grid)?;
        Ok(Self {
            nodes: active.iter().map(|&i| grid.node(i).to_vec()).collect(),
            weighted: active.iter().map(|&i| values[i]).collect(),
            g: g.clone(),
            label: format!("convolution({f}, {g})"),
        })
    }

    pub fn eval(&self, z: &[Complex64]) -> Complex64 {
        parallel::sum_complex(self.nodes.len(), |k| {
            let shifted: Vec<Complex64> = z.iter().zip(&self.nodes[k]).map(|(a, b)| a - b).collect();
            self.weighted[k] * self.g.eval(&shifted)
        })
    }

    pub fn into_symbol(self) -> Symbol {
        Symbol::Custom(Arc::new(self))
    }
}

impl SymbolFn for FunctionConvolution {
    fn eval(&self, w: &[Complex64]) -> Complex64 {
        FunctionConvolution::eval(self, w)
    }

    fn describe(&self) -> String {
        self.label.clone()
    }
}

/// `f * g` tabulated on a uniform grid over `[-window, window]^{2n}`.
pub fn conv_fun_fun(
    f: &Symbol,
    g: &Symbol,
    n: usize,
    cfg: &ConvolutionConfig,
    window: f64,
    points: usize,
) -> Result<GridSymbol> {
    let conv = FunctionConvolution::new(f, g, n, cfg)?;
    GridSymbol::sample(n, window, points, |z| Ok(conv.eval(z)))
}

/// `int (A * B) dV` on the grid.
pub fn integrate_op_op(a: &FockOperator, b: &FockOperator, cfg: &ConvolutionConfig) -> Result<Complex64> {
    let conv = OperatorConvolution::new(a, b)?;
    let grid = cfg.grid(a.params.n)?;
    Ok(parallel::sum_complex(grid.len(), |i| conv.eval(grid.node(i)) * grid.weight(i)))
}

fn normalized(lhs: Complex64, rhs: Complex64) -> f64 {
    (lhs - rhs).norm() / (1.0 + rhs.norm())
}

/// `|int (A*B) dV - (pi t)^n Tr(A) Tr(B)| / (1 + |(pi t)^n Tr(A) Tr(B)|)`.
pub fn trace_identity_residual(a: &FockOperator, b: &FockOperator, cfg: &ConvolutionConfig) -> Result<f64> {
    let lhs = integrate_op_op(a, b, cfg)?;
    let rhs = (std::f64::consts::PI * a.params.t).powi(a.params.n as i32) * a.trace() * b.trace();
    Ok(normalized(lhs, rhs))
}

/// Residuals of the three trace-pairing dualities
///
/// 1. `<f * A1, B> = <f, B * (U A1 U)>`
/// 2. `<f * A2, B> = <A2, (U f) * B>`
/// 3. `<A1 * A2, f> = <A1, f * (U A2 U)>`
///
/// with `<A, B> = Tr(AB)` and `<f, g> = int f g dV`, each normalized as
/// `|lhs - rhs| / (1 + |rhs|)`.
pub fn adjoint_duality_residuals(
    f: &Symbol,
    a1: &FockOperator,
    a2: &FockOperator,
    b: &FockOperator,
    cfg: &ConvolutionConfig,
) -> Result<[f64; 3]> {
    a1.params.ensure_same(&a2.params)?;
    a1.params.ensure_same(&b.params)?;
    let n = a1.params.n;
    let grid = cfg.grid(n)?;
    let pairing = |x: &FockOperator, y: &FockOperator| (&x.matrix * &y.matrix).trace();
    let integrate_with_f = |h: &(dyn Fn(&[Complex64]) -> Complex64 + Sync)| -> Result<Complex64> {
        crate::quadrature::try_integrate(&grid, |z| Ok(f.try_eval(z)? * h(z)))
    };

    let f_a1 = conv_fun_op(f, a1, cfg)?;
    let b_ua1u = OperatorConvolution::new(b, &a1.parity_conjugate())?;
    let r1 = normalized(pairing(&f_a1, b), integrate_with_f(&|z| b_ua1u.eval(z))?);

    let f_a2 = conv_fun_op(f, a2, cfg)?;
    let uf_b = conv_fun_op(&f.clone().parity(), b, cfg)?;
    let r2 = normalized(pairing(&f_a2, b), pairing(a2, &uf_b));

    let a1_a2 = OperatorConvolution::new(a1, a2)?;
    let f_ua2u = conv_fun_op(f, &a2.parity_conjugate(), cfg)?;
    let r3 = normalized(integrate_with_f(&|z| a1_a2.eval(z))?, pairing(a1, &f_ua2u));

    Ok([r1, r2, r3])
}

/// `||Pi (alpha_z(f * A) - (alpha_z f) * A) Pi||` on the trusted sub-block.
pub fn covariance_residual(f: &Symbol, a: &FockOperator, z: &[Complex64], cfg: &ConvolutionConfig) -> Result<f64> {
    let lhs = crate::weyl::alpha_op(&conv_fun_op(f, a, cfg)?, z);
    let rhs = conv_fun_op(&f.clone().translate(z.to_vec()), a, cfg)?;
    Ok(spectral_norm(&(&lhs - &rhs).trusted_block()))
}

/// Max over `points` of `|((A*B)*g)(z) - (A*(B*g))(z)| / (1 + |rhs|)`.
pub fn associativity_residual(
    a: &FockOperator,
    b: &FockOperator,
    g: &Symbol,
    points: &[Vec<Complex64>],
    cfg: &ConvolutionConfig,
) -> Result<f64> {
    let n = a.params.n;
    let ab = OperatorConvolution::new(a, b)?.into_symbol();
    let left = FunctionConvolution::new(&ab, g, n, cfg)?;
    let bg = conv_fun_op(g, b, cfg)?;
    let right = OperatorConvolution::new(a, &bg)?;
    Ok(points
        .iter()
        .map(|z| normalized(left.eval(z), right.eval(z)))
        .fold(0.0, f64::max))
}

/// Max over `points` of `|berezin(f * A)(z) - (f * berezin(A))(z)|`.
pub fn smoothing_residual(f: &Symbol, a: &FockOperator, points: &[Vec<Complex64>], cfg: &ConvolutionConfig) -> Result<f64> {
    let lhs = berezin(&conv_fun_op(f, a, cfg)?);
    let rhs = FunctionConvolution::new(f, &berezin(a).into_symbol(), a.params.n, cfg)?;
    Ok(points.iter().map(|z| (lhs.eval(z) - rhs.eval(z)).norm()).fold(0.0, f64::max))
}

/// `||f||_{L^1}` restricted to the window.
pub fn l1_norm(f: &Symbol, n: usize, cfg: &ConvolutionConfig) -> Result<f64> {
    let grid = cfg.grid(n)?;
    let (_, _, l1) = weighted_samples(f, &grid)?;
    Ok(l1)
}

/// `||f * A|| / (||f||_{L^1} ||A||)` with spectral norms on the trusted sub-block.
pub fn young_ratio(f: &Symbol, a: &FockOperator, cfg: &ConvolutionConfig) -> Result<f64> {
    let fa = conv_fun_op(f, a, cfg)?;
    let denom = l1_norm(f, a.params.n, cfg)? * spectral_norm(&a.trusted_block());
    if denom == 0.0 {
        return Ok(0.0);
    }
    Ok(spectral_norm(&fa.trusted_block()) / denom)
}

/// Random operator `sum_k x_k (x) y_k` of the given rank, with Gaussian
/// coefficient vectors supported on the trusted degrees and unit norm.
pub fn random_finite_rank<R: Rng>(params: &FockParams, rank: usize, rng: &mut R) -> FockOperator {
    let support = Basis::new(params).prefix_len(params.trusted_degree());
    let sample = |rng: &mut R| {
        let mut v = FockVector::zeros(*params);
        for k in 0..support {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            v.coeffs[k] = Complex64::new(re, im);
        }
        let norm = v.norm();
        v.coeffs /= Complex64::new(norm, 0.0);
        v
    };
    let mut op = FockOperator::zeros(*params);
    for _ in 0..rank {
        let x = sample(rng);
        let y = sample(rng);
        op.matrix += &x.coeffs * y.coeffs.adjoint();
    }
    op
}

/// One identity check, as written to residual reports.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ResidualRecord {
    pub identity: String,
    pub operands: Vec<String>,
    pub residual: f64,
    pub tolerance: f64,
    pub passed: bool,
    pub cfg: ConvolutionConfig,
}

impl ResidualRecord {
    pub fn new(identity: &str, operands: Vec<String>, residual: f64, tolerance: f64, cfg: ConvolutionConfig) -> Self {
        Self {
            identity: identity.to_string(),
            operands,
            residual,
            tolerance,
            passed: residual.is_finite() && residual <= tolerance,
            cfg,
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::kernel_coefficients;
    use crate::toeplitz::toeplitz;
    use rand::SeedableRng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn small() -> (FockParams, ConvolutionConfig) {
        let p = FockParams::with_degree(1, 1.0, 12).unwrap();
        let cfg = ConvolutionConfig {
            resolution: 64,
            ..ConvolutionConfig::for_params(&p)
        };
        (p, cfg)
    }

    #[test]
    fn zero_function_gives_zero_operator() {
        let (p, cfg) = small();
        let out = conv_fun_op(&Symbol::constant(0.0), &FockOperator::identity(p), &cfg).unwrap();
        assert!(out.matrix.iter().all(|v| *v == c(0.0, 0.0)));
    }

    #[test]
    fn factored_paths_agree_with_dense() {
        let p = FockParams::with_degree(1, 1.0, 16).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let a = random_finite_rank(&p, 2, &mut rng);
        let lowrank = Factored::new(&a.matrix);
        assert!(matches!(lowrank, Factored::LowRank { .. }));
        let w = weyl(&p, &[c(0.4, -0.9)]).matrix;
        let dense = &w * &a.matrix * w.adjoint();
        assert!((lowrank.conjugated(&w) - &dense).camax() < 1e-13);
        let b = random_finite_rank(&p, 3, &mut rng);
        let t1 = lowrank.trace_against(&b.matrix, &w);
        let t2 = Factored::Dense(a.matrix.clone()).trace_against(&b.matrix, &w);
        assert!((t1 - t2).norm() < 1e-13);
    }

    #[test]
    fn projection_self_convolution_is_gaussian() {
        let (p, _) = small();
        let pc = FockOperator::projection_onto_constants(p);
        let conv = OperatorConvolution::new(&pc, &pc).unwrap();
        for z in [c(0.0, 0.0), c(0.7, -1.1)] {
            assert!((conv.eval(&[z]).re - (-z.norm_sqr()).exp()).abs() < 1e-12);
        }
    }

    #[test]
    fn berezin_equals_projection_convolution() {
        let (p, _) = small();
        let basis = Basis::new(&p);
        let k = kernel_coefficients(&p, &basis, &[c(0.5, 0.2)]).vector;
        let a = crate::fock::rank_one(&k, &k).unwrap();
        let pc = FockOperator::projection_onto_constants(p);
        let conv = OperatorConvolution::new(&pc, &a).unwrap();
        let b = berezin(&a);
        for z in [c(0.0, 0.0), c(-0.8, 0.4)] {
            assert!((conv.eval(&[z]) - b.eval(&[z])).norm() < 1e-6);
        }
    }

    #[test]
    fn trace_identity_for_projection() {
        let p = FockParams::with_degree(1, 1.0, 30).unwrap();
        let cfg = ConvolutionConfig::for_params(&p);
        let pc = FockOperator::projection_onto_constants(p);
        assert!(trace_identity_residual(&pc, &pc, &cfg).unwrap() <= 1e-6);
        assert_eq!(trace_identity_residual(&FockOperator::zeros(p), &pc, &cfg).unwrap(), 0.0);
    }

    #[test]
    fn trace_identity_for_random_low_rank_pair() {
        let p = FockParams::with_degree(1, 1.0, 20).unwrap();
        let cfg = ConvolutionConfig::for_params(&p);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(20240601);
        let a = random_finite_rank(&p, 1, &mut rng);
        let b = random_finite_rank(&p, 2, &mut rng);
        assert!(trace_identity_residual(&a, &b, &cfg).unwrap() < 1e-4);
    }

    #[test]
    fn toeplitz_pipelines_agree() {
        let p = FockParams::with_degree(1, 1.0, 16).unwrap();
        let cfg = ConvolutionConfig::for_params(&p);
        let f = Symbol::gaussian_bump(vec![c(0.3, -0.2)], 2.0);
        let direct = toeplitz(&p, &f).unwrap();
        let via = toeplitz_via_convolution(&p, &f, &cfg).unwrap();
        assert!((direct.matrix - via.matrix).norm() / toeplitz(&p, &f).unwrap().frobenius_norm() < 1e-4);
    }

    #[test]
    fn window_doubling_flags_escaping_mass() {
        let (p, _) = small();
        let cfg = ConvolutionConfig {
            window: 1.0,
            resolution: 24,
            ..ConvolutionConfig::for_params(&p)
        };
        let err = conv_fun_op_checked(&Symbol::heat_kernel(1, 1.0), &FockOperator::identity(p), &cfg).unwrap_err();
        assert!(matches!(err, QhaError::WindowInstability { .. }));
    }

    #[test]
    fn heat_kernels_convolve_to_heat_kernel() {
        let cfg = ConvolutionConfig {
            window: 7.0,
            resolution: 80,
            deterministic: true,
            stability_tolerance: 1e-6,
        };
        let conv = FunctionConvolution::new(&Symbol::heat_kernel(1, 0.5), &Symbol::heat_kernel(1, 0.75), 1, &cfg).unwrap();
        let want = Symbol::heat_kernel(1, 1.25);
        for z in [c(0.0, 0.0), c(1.0, -0.5)] {
            assert!((conv.eval(&[z]) - want.eval(&[z])).norm() < 1e-10);
        }
    }

    #[test]
    fn residual_record_serializes_all_fields() {
        let (_, cfg) = small();
        let r = ResidualRecord::new("trace", vec!["P_C".into()], 1e-9, 1e-6, cfg);
        let json = r.to_json().unwrap();
        for key in ["identity", "operands", "residual", "cfg", "window"] {
            assert!(json.contains(key));
        }
        assert!(r.passed);
    }
}
