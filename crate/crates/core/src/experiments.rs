//! Experiment runners: quantization sweeps, Berezin decay profiles,
//! translation invariance and Weyl-operator approximation.

use std::collections::BTreeMap;
use std::io::Write;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::approx::{non_increasing_within, toeplitz_approximation, ApproxConfig, ApproximationReport};
use crate::conv::ConvolutionConfig;
use crate::error::{QhaError, Result};
use crate::fock::{spectral_norm, FockOperator, FockParams};
use crate::parallel;
use crate::symbol::Symbol;
use crate::toeplitz::{berezin, heat_transform, toeplitz};
use crate::weyl::{alpha_op, in_trusted_window, weyl};

/// Schema version written into every sidecar.
pub const SCHEMA_VERSION: &str = "1";

/// One row of a sweep: a parameter value and the quantities measured there.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRecord {
    pub parameter: f64,
    pub values: Vec<f64>,
    pub params: FockParams,
    pub flagged: bool,
}

/// A table of [`SweepRecord`]s with the metadata needed to reproduce it.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepReport {
    pub kind: String,
    pub parameter: String,
    pub columns: Vec<String>,
    pub symbols: Vec<String>,
    pub seed: Option<u64>,
    pub tolerances: BTreeMap<String, f64>,
    pub records: Vec<SweepRecord>,
}

impl SweepReport {
    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let k = self.columns.iter().position(|c| c == name)?;
        Some(self.records.iter().map(|r| r.values[k]).collect())
    }

    /// Every column is non-increasing in row order within `slack`.
    pub fn is_decreasing_within(&self, slack: f64) -> bool {
        (0..self.columns.len()).all(|k| {
            let col: Vec<f64> = self.records.iter().map(|r| r.values[k]).collect();
            non_increasing_within(&col, slack)
        })
    }

    /// CSV with the parameter, every measured column, and the model parameters.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let mut header = vec![self.parameter.clone()];
        header.extend(self.columns.iter().cloned());
        header.extend(["model_n", "model_t", "model_d", "model_q", "flagged"].map(String::from));
        w.write_record(&header)?;
        for r in &self.records {
            let mut row = vec![r.parameter.to_string()];
            row.extend(r.values.iter().map(|v| v.to_string()));
            row.extend([
                r.params.n.to_string(),
                r.params.t.to_string(),
                r.params.d.to_string(),
                r.params.q.to_string(),
                r.flagged.to_string(),
            ]);
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }

    /// JSON sidecar; `extra` is stored under `"config"`.
    pub fn sidecar(&self, extra: serde_json::Value) -> Result<String> {
        let value = serde_json::json!({
            "schema_version": SCHEMA_VERSION,
            "kind": self.kind,
            "parameter": self.parameter,
            "columns": self.columns,
            "symbols": self.symbols,
            "seed": self.seed,
            "tolerances": self.tolerances,
            "records": self.records,
            "config": extra,
        });
        Ok(serde_json::to_string_pretty(&value)?)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuantizationConfig {
    /// Model at the reference weight `base.t`. For another `t` the degree is
    /// scaled to `ceil(base.d * base.t / t)` so the trusted window stays fixed.
    pub base: FockParams,
    /// Points per real axis of the grid on which the sup norm is taken.
    pub sup_points: usize,
}

impl QuantizationConfig {
    pub fn new(base: FockParams) -> Self {
        Self { base, sup_points: 33 }
    }

    pub fn params_for(&self, t: f64) -> Result<FockParams> {
        if !(t > 0.0 && t.is_finite()) {
            return Err(QhaError::InvalidArgument(format!("t must be positive, got {t}")));
        }
        let d = (self.base.d as f64 * self.base.t / t - 1e-9).ceil() as usize;
        let extra = self.base.q.saturating_sub(self.base.d).max(2);
        FockParams::new(self.base.n, t, d, d + extra)
    }

    /// Radius of the fixed window, the trusted radius of the base model.
    pub fn radius(&self) -> f64 {
        self.base.trusted_radius()
    }
}

/// Points of a uniform grid over `[-r, r]^{2n}` that lie in the ball of radius `r`.
pub fn ball_points(n: usize, r: f64, points: usize) -> Vec<Vec<Complex64>> {
    let count = points.pow(2 * n as u32);
    let step = if points > 1 { 2.0 * r / (points - 1) as f64 } else { 0.0 };
    (0..count)
        .filter_map(|mut i| {
            let mut coords = vec![0.0; 2 * n];
            for axis in (0..2 * n).rev() {
                coords[axis] = -r + step * (i % points) as f64;
                i /= points;
            }
            let r2: f64 = coords.iter().map(|x| x * x).sum();
            (r2 <= r * r * (1.0 + 1e-12)).then(|| coords.chunks(2).map(|c| Complex64::new(c[0], c[1])).collect())
        })
        .collect()
}

/// For each `t`: `||T_f T_g - T_{fg}||` on the trusted sub-block and
/// `sup |fg - heat_transform(fg, t)|` over the fixed window. The model is
/// rebuilt for every `t`.
pub fn quantization_sweep(f: &Symbol, g: &Symbol, t_list: &[f64], cfg: &QuantizationConfig) -> Result<SweepReport> {
    let fg = f.clone().times(g.clone());
    let n = cfg.base.n;
    let points = ball_points(n, cfg.radius(), cfg.sup_points);
    let mut records = Vec::with_capacity(t_list.len());
    for &t in t_list {
        let params = cfg.params_for(t)?;
        let tf = toeplitz(&params, f)?;
        let tg = toeplitz(&params, g)?;
        let tfg = toeplitz(&params, &fg)?;
        let op = spectral_norm(&(&(&tf * &tg) - &tfg).trusted_block());
        let heat = heat_transform(&fg, n, t);
        let diffs: Vec<Result<f64>> =
            parallel::map_ordered(points.len(), |i| Ok((fg.try_eval(&points[i])? - heat.eval(&points[i])).norm()));
        let sup = diffs.into_iter().collect::<Result<Vec<_>>>()?.into_iter().fold(0.0, f64::max);
        let flagged = !(op.is_finite() && sup.is_finite());
        records.push(SweepRecord {
            parameter: t,
            values: vec![op, sup],
            params,
            flagged,
        });
    }
    Ok(SweepReport {
        kind: "quantization".into(),
        parameter: "t".into(),
        columns: vec!["product_defect".into(), "heat_defect".into()],
        symbols: vec![f.to_string(), g.to_string()],
        seed: None,
        tolerances: BTreeMap::from([("slack".to_string(), 0.15)]),
        records,
    })
}

/// `(s, ||f_s * A - A||)` as a sweep report.
pub fn approximate_identity_report(a: &FockOperator, target: &str, s_list: &[f64], cfg: &ConvolutionConfig) -> Result<SweepReport> {
    let rows = crate::approx::approximate_identity_sweep(a, s_list, cfg)?;
    Ok(SweepReport {
        kind: "approx-identity".into(),
        parameter: "s".into(),
        columns: vec!["op_error".into()],
        symbols: vec![target.to_string()],
        seed: None,
        tolerances: BTreeMap::from([("slack".to_string(), 0.1)]),
        records: rows
            .into_iter()
            .map(|(s, e)| SweepRecord {
                parameter: s,
                values: vec![e],
                params: a.params,
                flagged: !e.is_finite(),
            })
            .collect(),
    })
}

/// Berezin decay profile and singular values of an operator.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CompactnessProfile {
    pub params: FockParams,
    pub radii: Vec<f64>,
    /// `max |A~|` over sampled points at each radius.
    pub profile: Vec<f64>,
    /// Radii outside the trusted window.
    pub flagged: Vec<bool>,
    pub singular_values: Vec<f64>,
}

impl CompactnessProfile {
    pub fn to_report(&self, target: &str) -> SweepReport {
        SweepReport {
            kind: "compactness".into(),
            parameter: "r".into(),
            columns: vec!["berezin_max".into()],
            symbols: vec![target.to_string()],
            seed: None,
            tolerances: BTreeMap::new(),
            records: self
                .radii
                .iter()
                .zip(&self.profile)
                .zip(&self.flagged)
                .map(|((&r, &v), &flagged)| SweepRecord {
                    parameter: r,
                    values: vec![v],
                    params: self.params,
                    flagged,
                })
                .collect(),
        }
    }
}

/// Sample `|A~|` on circles `r e^{i theta} u` for each coordinate axis `u`.
pub fn compactness_diagnostic(a: &FockOperator, radii: &[f64], angles: usize) -> Result<CompactnessProfile> {
    if angles == 0 || radii.iter().any(|r| r.is_nan() || *r < 0.0) {
        return Err(QhaError::InvalidArgument("need at least one angle and non-negative radii".into()));
    }
    let n = a.params.n;
    let b = berezin(a);
    let mut profile = Vec::with_capacity(radii.len());
    let mut flagged = Vec::with_capacity(radii.len());
    for &r in radii {
        let samples = parallel::map_ordered(angles * n, |i| {
            let theta = 2.0 * std::f64::consts::PI * (i % angles) as f64 / angles as f64;
            let mut z = vec![Complex64::new(0.0, 0.0); n];
            z[i / angles] = Complex64::from_polar(r, theta);
            b.eval(&z).norm()
        });
        profile.push(samples.into_iter().fold(0.0, f64::max));
        let mut probe = vec![Complex64::new(0.0, 0.0); n];
        probe[0] = Complex64::new(r, 0.0);
        flagged.push(!in_trusted_window(&a.params, &probe));
    }
    Ok(CompactnessProfile {
        params: a.params,
        radii: radii.to_vec(),
        profile,
        flagged,
        singular_values: a.singular_values(),
    })
}

/// Residuals `||alpha_w(T_f) - T_f||` on the trusted sub-block for
/// `w = lambda * direction`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InvarianceReport {
    pub params: FockParams,
    pub symbol: String,
    /// `(direction index, lambda, residual)`.
    pub samples: Vec<(usize, f64, f64)>,
    pub max_residual: f64,
}

impl InvarianceReport {
    pub fn to_report(&self) -> SweepReport {
        SweepReport {
            kind: "invariance".into(),
            parameter: "lambda".into(),
            columns: vec!["direction".into(), "residual".into()],
            symbols: vec![self.symbol.clone()],
            seed: None,
            tolerances: BTreeMap::new(),
            records: self
                .samples
                .iter()
                .map(|&(k, lambda, r)| SweepRecord {
                    parameter: lambda,
                    values: vec![k as f64, r],
                    params: self.params,
                    flagged: false,
                })
                .collect(),
        }
    }
}

pub fn invariance_check(params: &FockParams, f: &Symbol, directions: &[Vec<Complex64>], magnitudes: &[f64]) -> Result<InvarianceReport> {
    if directions.iter().any(|d| d.len() != params.n) {
        return Err(QhaError::InvalidArgument(format!("directions must be points of C^{}", params.n)));
    }
    let tf = toeplitz(params, f)?;
    let mut samples = Vec::new();
    for (k, dir) in directions.iter().enumerate() {
        for &lambda in magnitudes {
            let w: Vec<Complex64> = dir.iter().map(|x| x * lambda).collect();
            let moved = alpha_op(&tf, &w);
            samples.push((k, lambda, spectral_norm(&(&moved - &tf).trusted_block())));
        }
    }
    let max_residual = samples.iter().map(|s| s.2).fold(0.0, f64::max);
    Ok(InvarianceReport {
        params: *params,
        symbol: f.to_string(),
        samples,
        max_residual,
    })
}

/// Approximate `W_{z0}` by Toeplitz operators with translated Berezin symbols.
pub fn ccr_weyl_approximation(z0: &[Complex64], params: &FockParams, stages: &[usize], cfg: &ApproxConfig) -> Result<ApproximationReport> {
    if z0.len() != params.n {
        return Err(QhaError::InvalidArgument(format!("z0 must be a point of C^{}", params.n)));
    }
    let label = format!(
        "weyl({})",
        z0.iter().map(|z| format!("{}{:+}i", z.re, z.im)).collect::<Vec<_>>().join(", ")
    );
    toeplitz_approximation(&weyl(params, z0), &label, stages, cfg)
}

/// `sup |A~| - ||A||` over the trusted window, sampled on a grid.
pub fn berezin_contraction_gap(a: &FockOperator, points: usize) -> f64 {
    let b = berezin(a);
    let zs = ball_points(a.params.n, a.params.trusted_radius(), points);
    let sup = parallel::map_ordered(zs.len(), |i| b.eval(&zs[i]).norm())
        .into_iter()
        .fold(0.0, f64::max);
    sup - spectral_norm(&a.matrix)
}
