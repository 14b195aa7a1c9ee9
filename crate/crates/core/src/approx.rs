//! Toeplitz approximation of operators through translated Berezin transforms.
//!
//! The narrow heat kernel `f_{t/N}` is fitted by a combination of translates of
//! the width-`t` kernel `f_t`. The same coefficients applied to translates of
//! `A~` give a symbol `g_N` with `T_{g_N} = (sum_j c_j f_t(. - z_j)) * A`, which
//! approaches `A` as the fit approaches `f_{t/N}`.

use std::f64::consts::PI;
use std::io::Write;
use std::sync::Arc;
use std::time::{Duration, Instant};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::conv::{conv_fun_op, young_ratio, ConvolutionConfig};
use crate::error::{QhaError, Result};
use crate::fock::{spectral_norm, FockOperator, FockParams};
use crate::parallel;
use crate::quadrature::lebesgue_grid;
use crate::symbol::Symbol;
use crate::toeplitz::{berezin, toeplitz};
use crate::weyl::in_trusted_window;

/// Ridge relative to the mean diagonal of the Gram matrix.
pub const DEFAULT_RIDGE: f64 = 1e-8;
/// Slack allowed in monotonicity and domination checks.
pub const DEFAULT_SLACK: f64 = 0.1;
// Errors below this are treated as zero in the domination check.
const ABSOLUTE_FLOOR: f64 = 1e-10;
const MAX_RIDGE_STEPS: usize = 8;

/// Candidate centres for the translates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum NodeLayout {
    /// Points of the square lattice `pitch Z^{2n}` with `|z| <= radius`.
    Lattice { pitch: f64, radius: f64 },
    Explicit(Vec<Vec<Complex64>>),
}

impl NodeLayout {
    /// Pitch `sqrt(t)/2`, radius `3 sqrt(t) + sqrt(t/N)`.
    pub fn default_for(t: f64, stage: usize) -> Self {
        NodeLayout::Lattice {
            pitch: 0.5 * t.sqrt(),
            radius: 3.0 * t.sqrt() + (t / stage as f64).sqrt(),
        }
    }

    pub fn nodes(&self, n: usize) -> Result<Vec<Vec<Complex64>>> {
        match self {
            NodeLayout::Explicit(nodes) => {
                if nodes.is_empty() || nodes.iter().any(|z| z.len() != n) {
                    return Err(QhaError::InvalidArgument(format!(
                        "explicit nodes must be non-empty points of C^{n}"
                    )));
                }
                Ok(nodes.clone())
            }
            &NodeLayout::Lattice { pitch, radius } => {
                if !(pitch > 0.0 && radius >= 0.0) {
                    return Err(QhaError::InvalidArgument(format!(
                        "lattice needs pitch > 0 and radius >= 0, got {pitch}, {radius}"
                    )));
                }
                let k = (radius / pitch + 1e-9).floor() as i64;
                let side = (2 * k + 1) as usize;
                let mut nodes = Vec::new();
                let mut digits = vec![0usize; 2 * n];
                loop {
                    let coords: Vec<f64> = digits.iter().map(|&d| (d as i64 - k) as f64 * pitch).collect();
                    let r2: f64 = coords.iter().map(|x| x * x).sum();
                    if r2 <= radius * radius * (1.0 + 1e-12) {
                        nodes.push(coords.chunks(2).map(|c| Complex64::new(c[0], c[1])).collect());
                    }
                    let mut axis = 2 * n;
                    loop {
                        if axis == 0 {
                            return Ok(nodes);
                        }
                        axis -= 1;
                        digits[axis] += 1;
                        if digits[axis] < side {
                            break;
                        }
                        digits[axis] = 0;
                    }
                }
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum FitObjective {
    /// Least squares in `L^2(C^n)`, computed from closed-form Gaussian integrals.
    LeastSquares,
    /// Least squares followed by iteratively reweighted passes on the
    /// `L^1` grid, each weighting by the inverse of the current residual.
    L1Refined { passes: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitConfig {
    /// Ridge added to the Gram matrix, relative to its mean diagonal.
    pub ridge: f64,
    pub objective: FitObjective,
    /// Half-width of the grid used for the `L^1` residual.
    pub l1_window: f64,
    /// Gauss-Legendre points per real axis of that grid.
    pub l1_resolution: usize,
}

impl FitConfig {
    pub fn for_params(params: &FockParams) -> Self {
        Self {
            ridge: DEFAULT_RIDGE,
            objective: FitObjective::LeastSquares,
            l1_window: 7.0 * params.t.sqrt(),
            l1_resolution: if params.n == 1 { 140 } else { 24 },
        }
    }
}

/// Coefficients `c_j` with `sum_j c_j f_t(. - z_j) ~ f_{t/N}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HeatKernelFit {
    pub stage: usize,
    pub n: usize,
    pub t: f64,
    pub nodes: Vec<Vec<Complex64>>,
    pub coefficients: Vec<f64>,
    /// `||f_{t/N} - sum_j c_j f_t(. - z_j)||_{L^1}` on the residual grid.
    pub l1_residual: f64,
    /// The same in `L^2(C^n)`, exact for the computed coefficients.
    pub l2_residual: f64,
    /// Relative ridge actually used.
    pub ridge: f64,
    /// Set when the ridge had to be increased to factor the system.
    pub flagged: bool,
}

impl HeatKernelFit {
    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn coefficient_sum(&self) -> f64 {
        self.coefficients.iter().sum()
    }

    pub fn coefficient_l1(&self) -> f64 {
        self.coefficients.iter().map(|c| c.abs()).sum()
    }

    /// `sum_j c_j f_t(w - z_j)`.
    pub fn approximant_at(&self, w: &[Complex64]) -> f64 {
        let norm = (PI * self.t).powi(-(self.n as i32));
        self.nodes
            .iter()
            .zip(&self.coefficients)
            .map(|(z, c)| c * norm * (-dist2(w, z) / self.t).exp())
            .sum()
    }

    /// `f_{t/N}(w) - sum_j c_j f_t(w - z_j)`.
    pub fn residual_at(&self, w: &[Complex64]) -> f64 {
        let s = self.t / self.stage as f64;
        let target = (PI * s).powi(-(self.n as i32)) * (-dist2(w, &[]) / s).exp();
        target - self.approximant_at(w)
    }

    pub fn approximant(&self) -> Symbol {
        Symbol::Sum(
            self.nodes
                .iter()
                .zip(&self.coefficients)
                .map(|(z, &c)| {
                    Symbol::heat_kernel(self.n, self.t)
                        .translate(z.clone())
                        .scale(Complex64::new(c, 0.0))
                })
                .collect(),
        )
    }

    /// The residual `f_{t/N} - approximant` as a symbol.
    pub fn residual_symbol(&self) -> Symbol {
        Symbol::Sum(vec![
            Symbol::heat_kernel(self.n, self.t / self.stage as f64),
            self.approximant().scale(Complex64::new(-1.0, 0.0)),
        ])
    }

    /// Recompute the `L^1` residual on a Gauss-Legendre grid.
    pub fn l1_on_grid(&self, window: f64, resolution: usize) -> Result<f64> {
        let grid = lebesgue_grid(window, resolution, self.n)?;
        Ok(parallel::sum_complex(grid.len(), |i| {
            Complex64::new(grid.weight(i) * self.residual_at(grid.node(i)).abs(), 0.0)
        })
        .re)
    }
}

// |w - z|^2 with an empty `z` meaning the origin.
fn dist2(w: &[Complex64], z: &[Complex64]) -> f64 {
    w.iter()
        .enumerate()
        .map(|(k, a)| (a - z.get(k).copied().unwrap_or_default()).norm_sqr())
        .sum()
}

/// Fit `f_{t/N}` by translates of `f_t` placed on `layout`.
///
/// The coefficients minimize the squared residual subject to `sum_j c_j = 1`,
/// so that constants are reproduced exactly. With the default lattice the
/// first stage is the single node `0` with `c = 1`.
pub fn fit_heat_kernel(params: &FockParams, stage: usize, layout: Option<&NodeLayout>, cfg: &FitConfig) -> Result<HeatKernelFit> {
    params.validate()?;
    if stage == 0 {
        return Err(QhaError::InvalidArgument("stage must be at least 1".into()));
    }
    if !(cfg.ridge >= 0.0 && cfg.ridge.is_finite()) {
        return Err(QhaError::InvalidArgument(format!("ridge must be non-negative, got {}", cfg.ridge)));
    }
    let (n, t) = (params.n, params.t);
    let nodes = match layout {
        Some(layout) => layout.nodes(n)?,
        None if stage == 1 => vec![vec![Complex64::new(0.0, 0.0); n]],
        None => NodeLayout::default_for(t, stage).nodes(n)?,
    };
    let s = t / stage as f64;
    let count = nodes.len();

    // Gram matrix and right-hand side of the normal equations in L^2(C^n).
    let gram = DMatrix::from_fn(count, count, |j, k| {
        (2.0 * PI * t).powi(-(n as i32)) * (-dist2(&nodes[j], &nodes[k]) / (2.0 * t)).exp()
    });
    let rhs = DVector::from_fn(count, |j, _| (PI * (s + t)).powi(-(n as i32)) * (-dist2(&nodes[j], &[]) / (s + t)).exp());

    let (mut coefficients, mut ridge, mut flagged) = constrained_solve(&gram, &rhs, cfg.ridge)?;

    if let FitObjective::L1Refined { passes } = cfg.objective {
        let grid = lebesgue_grid(cfg.l1_window, cfg.l1_resolution, n)?;
        let design = DMatrix::from_fn(grid.len(), count, |i, j| {
            (PI * t).powi(-(n as i32)) * (-dist2(grid.node(i), &nodes[j]) / t).exp()
        });
        let target = DVector::from_fn(grid.len(), |i, _| (PI * s).powi(-(n as i32)) * (-dist2(grid.node(i), &[]) / s).exp());
        for _ in 0..passes {
            let err = (&design * &coefficients - &target).abs();
            let floor = 1e-3 * err.max();
            if floor == 0.0 {
                break;
            }
            let weights = DVector::from_fn(grid.len(), |i, _| grid.weight(i) / err[i].max(floor));
            let weighted = DMatrix::from_fn(grid.len(), count, |i, j| design[(i, j)] * weights[i]);
            let g = design.transpose() * &weighted;
            let b = weighted.transpose() * &target;
            let (c, r, f) = constrained_solve(&g, &b, ridge)?;
            coefficients = c;
            ridge = r;
            flagged |= f;
        }
    }

    let self_norm = (2.0 * PI * s).powi(-(n as i32));
    let l2_sq = self_norm - 2.0 * coefficients.dot(&rhs) + coefficients.dot(&(&gram * &coefficients));
    let mut fit = HeatKernelFit {
        stage,
        n,
        t,
        nodes,
        coefficients: coefficients.iter().copied().collect(),
        l1_residual: 0.0,
        l2_residual: l2_sq.max(0.0).sqrt(),
        ridge,
        flagged,
    };
    fit.l1_residual = fit.l1_on_grid(cfg.l1_window, cfg.l1_resolution)?;
    Ok(fit)
}

/// Minimize `c^T G c - 2 b^T c` subject to `sum c = 1`, with ridge
/// `ridge * tr(G) / J`. The ridge grows tenfold until the system factors.
fn constrained_solve(gram: &DMatrix<f64>, rhs: &DVector<f64>, ridge: f64) -> Result<(DVector<f64>, f64, bool)> {
    let count = gram.nrows();
    let scale = gram.trace() / count as f64;
    let mut ridge = ridge;
    for step in 0..=MAX_RIDGE_STEPS {
        let mut h = gram.clone();
        for k in 0..count {
            h[(k, k)] += ridge * scale;
        }
        if let Some(chol) = h.cholesky() {
            let hb = chol.solve(rhs);
            let h1 = chol.solve(&DVector::from_element(count, 1.0));
            let mu = (hb.sum() - 1.0) / h1.sum();
            let c = hb - h1 * mu;
            if c.iter().all(|x| x.is_finite()) {
                return Ok((c, ridge, step > 0));
            }
        }
        ridge = if ridge == 0.0 { 1e-16 } else { ridge * 10.0 };
    }
    Err(QhaError::Singular { ridge })
}

/// `sum_j c_j alpha_{z_j}(A~)` together with the nodes outside the trusted window.
#[derive(Debug, Clone)]
pub struct TranslatedBerezin {
    pub symbol: Symbol,
    /// Indices of nodes that lie outside the trusted window of `A`.
    pub flagged_nodes: Vec<usize>,
}

pub fn build_symbol_from_berezin(a: &FockOperator, fit: &HeatKernelFit) -> Result<TranslatedBerezin> {
    if fit.n != a.params.n || fit.t != a.params.t {
        return Err(QhaError::InvalidArgument(format!(
            "fit for n={}, t={} does not match operator with n={}, t={}",
            fit.n, fit.t, a.params.n, a.params.t
        )));
    }
    let base = Symbol::Berezin(Arc::new(berezin(a)));
    let flagged_nodes = (0..fit.nodes.len())
        .filter(|&j| !in_trusted_window(&a.params, &fit.nodes[j]))
        .collect();
    let terms = fit
        .nodes
        .iter()
        .zip(&fit.coefficients)
        .map(|(z, &c)| base.clone().translate(z.clone()).scale(Complex64::new(c, 0.0)))
        .collect();
    Ok(TranslatedBerezin {
        symbol: Symbol::Sum(terms),
        flagged_nodes,
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ApproxConfig {
    pub fit: FitConfig,
    /// Node layout for every stage; `None` uses the default lattice per stage.
    pub layout: Option<NodeLayout>,
    pub convolution: ConvolutionConfig,
    pub slack: f64,
}

impl ApproxConfig {
    pub fn for_params(params: &FockParams) -> Self {
        Self {
            fit: FitConfig::for_params(params),
            layout: None,
            convolution: ConvolutionConfig::for_params(params),
            slack: DEFAULT_SLACK,
        }
    }
}

/// One stage of [`toeplitz_approximation`]. Norms are spectral norms on the
/// trusted sub-block.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StageReport {
    pub stage: usize,
    pub fit: HeatKernelFit,
    pub flagged_nodes: usize,
    /// Time spent building the symbol and its Toeplitz operator.
    #[serde(skip)]
    pub build_time: Duration,
    /// `||A - T_{g_N}||`.
    pub op_error: f64,
    /// `||A - f_{t/N} * A||`.
    pub baseline_error: f64,
    /// `||r * A|| / (||r||_{L^1} ||A||)` for the fit residual `r`.
    pub convolution_constant: f64,
    /// `baseline_error + C ||A|| l1_residual`.
    pub bound: f64,
    pub dominated: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ApproximationReport {
    pub target: String,
    pub params: FockParams,
    pub config: ApproxConfig,
    pub operator_norm: f64,
    pub stages: Vec<StageReport>,
}

impl ApproximationReport {
    pub fn errors(&self) -> Vec<f64> {
        self.stages.iter().map(|s| s.op_error).collect()
    }

    pub fn baseline_errors(&self) -> Vec<f64> {
        self.stages.iter().map(|s| s.baseline_error).collect()
    }

    /// Each error is at most `1 + slack` times the previous one.
    pub fn is_non_increasing(&self) -> bool {
        non_increasing_within(&self.errors(), self.config.slack)
    }

    /// Whether the last error is at most `fraction` of the first.
    pub fn final_at_most(&self, fraction: f64) -> bool {
        match (self.stages.first(), self.stages.last()) {
            (Some(first), Some(last)) => last.op_error <= fraction * first.op_error + ABSOLUTE_FLOOR,
            _ => true,
        }
    }

    pub fn all_dominated(&self) -> bool {
        self.stages.iter().all(|s| s.dominated)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// Convergence table `N,l1_residual,op_error,baseline_error`.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["N", "l1_residual", "op_error", "baseline_error"])?;
        for s in &self.stages {
            w.write_record([
                s.stage.to_string(),
                s.fit.l1_residual.to_string(),
                s.op_error.to_string(),
                s.baseline_error.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// `values[k + 1] <= (1 + slack) values[k]` for every `k`.
pub fn non_increasing_within(values: &[f64], slack: f64) -> bool {
    values.windows(2).all(|w| w[1] <= (1.0 + slack) * w[0] + ABSOLUTE_FLOOR)
}

/// Approximate `A` by `T_{g_N}` for each stage `N`.
pub fn toeplitz_approximation(a: &FockOperator, target: &str, stages: &[usize], cfg: &ApproxConfig) -> Result<ApproximationReport> {
    let params = a.params;
    params.validate()?;
    cfg.convolution.validate()?;
    let a_norm = spectral_norm(&a.trusted_block());
    let mut reports = Vec::with_capacity(stages.len());
    for &stage in stages {
        let fit = fit_heat_kernel(&params, stage, cfg.layout.as_ref(), &cfg.fit)?;

        let start = Instant::now();
        let built = build_symbol_from_berezin(a, &fit)?;
        let approx = toeplitz(&params, &built.symbol)?;
        let build_time = start.elapsed();
        let op_error = spectral_norm(&(a - &approx).trusted_block());

        let smoothed = conv_fun_op(&Symbol::heat_kernel(params.n, params.t / stage as f64), a, &cfg.convolution)?;
        let baseline_error = spectral_norm(&(a - &smoothed).trusted_block());
        let convolution_constant = young_ratio(&fit.residual_symbol(), a, &cfg.convolution)?;
        let bound = baseline_error + convolution_constant * a_norm * fit.l1_residual;
        let dominated = op_error <= (1.0 + cfg.slack) * bound + ABSOLUTE_FLOOR;

        reports.push(StageReport {
            stage,
            flagged_nodes: built.flagged_nodes.len(),
            fit,
            build_time,
            op_error,
            baseline_error,
            convolution_constant,
            bound,
            dominated,
        });
    }
    Ok(ApproximationReport {
        target: target.to_string(),
        params,
        config: cfg.clone(),
        operator_norm: a_norm,
        stages: reports,
    })
}

/// `(s, ||f_s * A - A||)` for each `s`, on the trusted sub-block.
pub fn approximate_identity_sweep(a: &FockOperator, s_list: &[f64], cfg: &ConvolutionConfig) -> Result<Vec<(f64, f64)>> {
    s_list
        .iter()
        .map(|&s| {
            if s.is_nan() || s <= 0.0 {
                return Err(QhaError::InvalidArgument(format!("s must be positive, got {s}")));
            }
            let smoothed = conv_fun_op(&Symbol::heat_kernel(a.params.n, s), a, cfg)?;
            Ok((s, spectral_norm(&(&smoothed - a).trusted_block())))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::weyl::weyl;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn p(d: usize) -> FockParams {
        FockParams::with_degree(1, 1.0, d).unwrap()
    }

    #[test]
    fn lattice_counts_and_symmetry() {
        let nodes = NodeLayout::Lattice { pitch: 1.0, radius: 1.0 }.nodes(1).unwrap();
        assert_eq!(nodes.len(), 5);
        let nodes = NodeLayout::Lattice { pitch: 0.5, radius: 1.0 }.nodes(1).unwrap();
        assert_eq!(nodes.len(), 13);
        let sum: Complex64 = nodes.iter().map(|z| z[0]).sum();
        assert!(sum.norm() < 1e-14);
        let nodes = NodeLayout::Lattice { pitch: 1.0, radius: 1.0 }.nodes(2).unwrap();
        assert_eq!(nodes.len(), 9);
    }

    #[test]
    fn first_stage_is_exact() {
        let fit = fit_heat_kernel(&p(10), 1, None, &FitConfig::for_params(&p(10))).unwrap();
        assert_eq!(fit.node_count(), 1);
        assert_eq!(fit.coefficients, vec![1.0]);
        assert!(fit.l1_residual <= 1e-10);
        assert!(fit.l2_residual <= 1e-8);
    }

    #[test]
    fn first_stage_on_lattice_recovers_the_origin() {
        let cfg = FitConfig {
            ridge: 1e-10,
            ..FitConfig::for_params(&p(10))
        };
        let layout = NodeLayout::Lattice { pitch: 1.0, radius: 1.0 };
        let fit = fit_heat_kernel(&p(10), 1, Some(&layout), &cfg).unwrap();
        assert!(fit.l1_residual <= 1e-8, "{}", fit.l1_residual);
    }

    #[test]
    fn coefficients_sum_to_one() {
        for stage in [2, 4] {
            let fit = fit_heat_kernel(&p(10), stage, None, &FitConfig::for_params(&p(10))).unwrap();
            assert!((fit.coefficient_sum() - 1.0).abs() < 1e-8);
        }
    }

    #[test]
    fn l2_residual_matches_quadrature() {
        let fit = fit_heat_kernel(&p(10), 2, None, &FitConfig::for_params(&p(10))).unwrap();
        let grid = lebesgue_grid(7.0, 140, 1).unwrap();
        let l2: f64 = (0..grid.len()).map(|i| grid.weight(i) * fit.residual_at(grid.node(i)).powi(2)).sum();
        assert!((l2.sqrt() - fit.l2_residual).abs() < 1e-6 * (1.0 + fit.l2_residual));
    }

    #[test]
    fn refinement_does_not_increase_the_l2_residual() {
        let cfg = FitConfig::for_params(&p(10));
        let coarse = NodeLayout::Lattice { pitch: 1.0, radius: 3.0 };
        let fine = NodeLayout::Lattice { pitch: 0.5, radius: 3.0 };
        let a = fit_heat_kernel(&p(10), 2, Some(&coarse), &cfg).unwrap();
        let b = fit_heat_kernel(&p(10), 2, Some(&fine), &cfg).unwrap();
        assert!(b.l2_residual <= a.l2_residual * (1.0 + 1e-6));
    }

    #[test]
    fn stage_two_beats_the_single_node() {
        let cfg = FitConfig::for_params(&p(10));
        let single = fit_heat_kernel(&p(10), 2, Some(&NodeLayout::Explicit(vec![vec![c(0.0, 0.0)]])), &cfg).unwrap();
        let lattice = fit_heat_kernel(&p(10), 2, None, &cfg).unwrap();
        assert!(lattice.l1_residual <= single.l1_residual);
    }

    #[test]
    fn reweighting_brings_stage_four_below_a_quarter() {
        let cfg = FitConfig {
            ridge: 1e-12,
            objective: FitObjective::L1Refined { passes: 2 },
            ..FitConfig::for_params(&p(10))
        };
        let fit = fit_heat_kernel(&p(10), 4, None, &cfg).unwrap();
        assert!(fit.l1_residual <= 0.25, "{}", fit.l1_residual);
        assert!((fit.coefficient_sum() - 1.0).abs() < 1e-8);
    }

    #[test]
    fn bad_inputs_are_rejected() {
        let cfg = FitConfig::for_params(&p(10));
        assert!(fit_heat_kernel(&p(10), 0, None, &cfg).is_err());
        assert!(NodeLayout::Explicit(vec![]).nodes(1).is_err());
        assert!(NodeLayout::Lattice { pitch: 0.0, radius: 1.0 }.nodes(1).is_err());
    }

    #[test]
    fn symbol_for_identity_is_one() {
        let params = p(16);
        let fit = fit_heat_kernel(&params, 2, None, &FitConfig::for_params(&params)).unwrap();
        let built = build_symbol_from_berezin(&FockOperator::identity(params), &fit).unwrap();
        for z in [c(0.0, 0.0), c(0.7, -0.3), c(1.5, 0.2)] {
            assert!((built.symbol.eval(&[z]) - 1.0).norm() < 1e-8);
        }
    }

    #[test]
    fn single_node_symbol_for_vacuum_projection() {
        let params = p(24);
        let fit = fit_heat_kernel(&params, 1, None, &FitConfig::for_params(&params)).unwrap();
        let built = build_symbol_from_berezin(&FockOperator::projection_onto_constants(params), &fit).unwrap();
        for z in [c(0.0, 0.0), c(0.6, 0.8), c(-1.0, 0.5)] {
            let expected = (-z.norm_sqr()).exp();
            assert!((built.symbol.eval(&[z]) - expected).norm() < 1e-10);
        }
        assert!(built.flagged_nodes.is_empty());
    }

    #[test]
    fn weyl_symbol_is_bounded_by_coefficient_mass() {
        let params = p(16);
        let fit = fit_heat_kernel(&params, 2, None, &FitConfig::for_params(&params)).unwrap();
        let built = build_symbol_from_berezin(&weyl(&params, &[c(0.5, 0.0)]), &fit).unwrap();
        for z in [c(0.0, 0.0), c(0.4, 0.4), c(-1.0, 0.3)] {
            assert!(built.symbol.eval(&[z]).norm() <= fit.coefficient_l1() + 1e-12);
        }
    }

    #[test]
    fn identity_is_reproduced_at_every_stage() {
        let params = p(12);
        let mut cfg = ApproxConfig::for_params(&params);
        cfg.convolution.resolution = 48;
        let report = toeplitz_approximation(&FockOperator::identity(params), "identity", &[1, 2], &cfg).unwrap();
        for s in &report.stages {
            assert!(s.op_error <= 1e-6, "{}", s.op_error);
            assert!(s.dominated);
        }
    }

    #[test]
    fn monotonicity_helper() {
        assert!(non_increasing_within(&[1.0, 1.05, 0.5], 0.1));
        assert!(!non_increasing_within(&[1.0, 1.2], 0.1));
        assert!(non_increasing_within(&[], 0.1));
    }

    #[test]
    fn csv_has_one_row_per_stage() {
        let params = p(10);
        let mut cfg = ApproxConfig::for_params(&params);
        cfg.convolution.resolution = 40;
        let report =
            toeplitz_approximation(&FockOperator::projection_onto_constants(params), "vacuum", &[1, 2], &cfg).unwrap();
        let mut out = Vec::new();
        report.write_csv(&mut out).unwrap();
        let text = String::from_utf8(out).unwrap();
        assert_eq!(text.lines().count(), 3);
        assert!(text.starts_with("N,l1_residual,op_error,baseline_error"));
        assert!(!report.to_json().unwrap().contains("build_time"));
    }
}
