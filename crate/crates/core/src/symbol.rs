//! Symbols: functions on `C^n` built from closed-form atoms and combinators,
//! or sampled on a grid.

use std::fmt;
use std::io::Write;
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{QhaError, Result};
use crate::quadrature::{gaussian_grid_with_order, GaussGrid};
use crate::toeplitz::BerezinTransform;

/// One term `coeff * w^a * conj(w)^b` of a polynomial symbol.
#[derive(Debug, Clone, PartialEq)]
pub struct Monomial {
    pub coeff: Complex64,
    pub a: Vec<usize>,
    pub b: Vec<usize>,
}

#[derive(Debug, Clone)]
pub enum Symbol {
    Constant(Complex64),
    /// `amplitude * exp(-|w - center|^2 / width)`.
    Gaussian {
        center: Vec<Complex64>,
        width: f64,
        amplitude: Complex64,
    },
    /// `exp(i Im(w . conj(frequency)))`.
    PlaneWave { frequency: Vec<Complex64> },
    Polynomial(Vec<Monomial>),
    /// Profile in `|w|`, linearly interpolated and held constant past the last radius.
    Radial { radii: Vec<f64>, values: Vec<Complex64> },
    /// `amplitude * exp(-|Re w|^2 / width)`; constant along imaginary directions.
    HorizontalGaussian { width: f64, amplitude: Complex64 },
    /// `inner(w - shift)`.
    Translate { inner: Box<Symbol>, shift: Vec<Complex64> },
    /// `inner(-w)`.
    Parity(Box<Symbol>),
    Scale { inner: Box<Symbol>, factor: Complex64 },
    Sum(Vec<Symbol>),
    Product(Vec<Symbol>),
    Grid(Arc<GridSymbol>),
    Berezin(Arc<BerezinTransform>),
    /// Heat transform of `source` at time `t`, evaluated on demand by a
    /// Gauss-Hermite rule recentred at each point.
    Heat(Arc<HeatSmoothed>),
    /// Any other lazily evaluated function, such as a convolution.
    Custom(Arc<dyn SymbolFn>),
}

/// A function on `C^n` evaluated on demand.
pub trait SymbolFn: fmt::Debug + Send + Sync {
    fn eval(&self, w: &[Complex64]) -> Complex64;
    fn describe(&self) -> String;
}

impl Symbol {
    pub fn constant(value: f64) -> Self {
        Symbol::Constant(Complex64::new(value, 0.0))
    }

    /// Real Gaussian bump `exp(-|w - center|^2 / width)`.
    pub fn gaussian_bump(center: Vec<Complex64>, width: f64) -> Self {
        Symbol::Gaussian {
            center,
            width,
            amplitude: Complex64::new(1.0, 0.0),
        }
    }

    /// `f_s(w) = (pi s)^{-n} exp(-|w|^2 / s)`, unit mass.
    pub fn heat_kernel(n: usize, s: f64) -> Self {
        Symbol::Gaussian {
            center: vec![Complex64::new(0.0, 0.0); n],
            width: s,
            amplitude: Complex64::new((std::f64::consts::PI * s).powi(-(n as i32)), 0.0),
        }
    }

    pub fn plane_wave(frequency: Vec<Complex64>) -> Self {
        Symbol::PlaneWave { frequency }
    }

    /// `|w|^2` as a polynomial.
    pub fn norm_squared(n: usize) -> Self {
        Symbol::Polynomial(
            (0..n)
                .map(|i| {
                    let mut e = vec![0; n];
                    e[i] = 1;
                    Monomial {
                        coeff: Complex64::new(1.0, 0.0),
                        a: e.clone(),
                        b: e,
                    }
                })
                .collect(),
        )
    }

    pub fn translate(self, shift: Vec<Complex64>) -> Self {
        Symbol::Translate {
            inner: Box::new(self),
            shift,
        }
    }

    pub fn parity(self) -> Self {
        Symbol::Parity(Box::new(self))
    }

    pub fn scale(self, factor: Complex64) -> Self {
        Symbol::Scale {
            inner: Box::new(self),
            factor,
        }
    }

    pub fn times(self, other: Symbol) -> Self {
        Symbol::Product(vec![self, other])
    }

    pub fn eval(&self, w: &[Complex64]) -> Complex64 {
        match self {
            Symbol::Constant(c) => *c,
            Symbol::Gaussian {
                center,
                width,
                amplitude,
            } => {
                let d: f64 = w.iter().zip(center).map(|(a, b)| (a - b).norm_sqr()).sum();
                amplitude * (-d / width).exp()
            }
            Symbol::PlaneWave { frequency } => {
                let phase: f64 = w.iter().zip(frequency).map(|(a, z)| (a * z.conj()).im).sum();
                Complex64::from_polar(1.0, phase)
            }
            Symbol::Polynomial(terms) => terms
                .iter()
                .map(|m| {
                    let mut v = m.coeff;
                    for (i, wi) in w.iter().enumerate() {
                        v *= wi.powu(m.a[i] as u32) * wi.conj().powu(m.b[i] as u32);
                    }
                    v
                })
                .sum(),
            Symbol::Radial { radii, values } => {
                let r = w.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
                interpolate_profile(radii, values, r)
            }
            Symbol::HorizontalGaussian { width, amplitude } => {
                let x2: f64 = w.iter().map(|c| c.re * c.re).sum();
                amplitude * (-x2 / width).exp()
            }
            Symbol::Translate { inner, shift } => {
                let moved: Vec<Complex64> = w.iter().zip(shift).map(|(a, b)| a - b).collect();
                inner.eval(&moved)
            }
            Symbol::Parity(inner) => {
                let neg: Vec<Complex64> = w.iter().map(|a| -a).collect();
                inner.eval(&neg)
            }
            Symbol::Scale { inner, factor } => factor * inner.eval(w),
            Symbol::Sum(parts) => parts.iter().map(|p| p.eval(w)).sum(),
            Symbol::Product(parts) => parts.iter().map(|p| p.eval(w)).product(),
            Symbol::Grid(g) => g.eval(w),
            Symbol::Berezin(b) => b.eval(w),
            Symbol::Heat(h) => h.eval(w),
            Symbol::Custom(c) => c.eval(w),
        }
    }

    /// Evaluate, failing on a non-finite value.
    pub fn try_eval(&self, w: &[Complex64]) -> Result<Complex64> {
        let v = self.eval(w);
        if v.re.is_finite() && v.im.is_finite() {
            Ok(v)
        } else {
            Err(QhaError::NonFinite { node: w.to_vec(), value: v })
        }
    }

    /// True when the symbol is real-valued by construction.
    pub fn is_real(&self) -> bool {
        match self {
            Symbol::Constant(c) => c.im == 0.0,
            Symbol::Gaussian { amplitude, .. } | Symbol::HorizontalGaussian { amplitude, .. } => amplitude.im == 0.0,
            Symbol::PlaneWave { .. } | Symbol::Polynomial(_) | Symbol::Berezin(_) | Symbol::Custom(_) => false,
            Symbol::Radial { values, .. } => values.iter().all(|v| v.im == 0.0),
            Symbol::Translate { inner, .. } | Symbol::Parity(inner) => inner.is_real(),
            Symbol::Scale { inner, factor } => factor.im == 0.0 && inner.is_real(),
            Symbol::Sum(p) | Symbol::Product(p) => p.iter().all(Symbol::is_real),
            Symbol::Grid(g) => g.values.iter().all(|v| v.im == 0.0),
            Symbol::Heat(h) => h.source.is_real(),
        }
    }

    /// Sample on a uniform tensor grid over `[-window, window]^{2n}`.
    pub fn sample(&self, n: usize, window: f64, points: usize) -> Result<GridSymbol> {
        GridSymbol::sample(n, window, points, |w| self.try_eval(w))
    }
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Symbol::Constant(c) => write!(f, "constant({c})"),
            Symbol::Gaussian {
                center,
                width,
                amplitude,
            } => write!(f, "gaussian(center={}, width={width}, amplitude={amplitude})", point(center)),
            Symbol::PlaneWave { frequency } => write!(f, "plane_wave({})", point(frequency)),
            Symbol::Polynomial(terms) => {
                write!(f, "polynomial(")?;
                for (i, m) in terms.iter().enumerate() {
                    if i > 0 {
                        write!(f, " + ")?;
                    }
                    write!(f, "{} w^{:?} conj(w)^{:?}", m.coeff, m.a, m.b)?;
                }
                write!(f, ")")
            }
            Symbol::Radial { radii, .. } => write!(f, "radial({} knots)", radii.len()),
            Symbol::HorizontalGaussian { width, amplitude } => {
                write!(f, "horizontal_gaussian(width={width}, amplitude={amplitude})")
            }
            Symbol::Translate { inner, shift } => write!(f, "translate({inner}, {})", point(shift)),
            Symbol::Parity(inner) => write!(f, "parity({inner})"),
            Symbol::Scale { inner, factor } => write!(f, "scale({inner}, {factor})"),
            Symbol::Sum(p) => write!(f, "sum({} terms)", p.len()),
            Symbol::Product(p) => {
                write!(f, "product(")?;
                for (i, s) in p.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{s}")?;
                }
                write!(f, ")")
            }
            Symbol::Grid(g) => write!(f, "grid(window={}, points={})", g.window, g.points),
            Symbol::Berezin(b) => write!(f, "berezin({})", b.operator().params),
            Symbol::Heat(h) => write!(f, "heat({}, t={})", h.source, h.t),
            Symbol::Custom(c) => write!(f, "{}", c.describe()),
        }
    }
}

fn point(z: &[Complex64]) -> String {
    let parts: Vec<String> = z.iter().map(|c| c.to_string()).collect();
    format!("[{}]", parts.join(", "))
}

fn interpolate_profile(radii: &[f64], values: &[Complex64], r: f64) -> Complex64 {
    match radii.iter().position(|&x| x > r) {
        None => *values.last().unwrap_or(&Complex64::new(0.0, 0.0)),
        Some(0) => values[0],
        Some(k) => {
            let (r0, r1) = (radii[k - 1], radii[k]);
            let s = (r - r0) / (r1 - r0);
            values[k - 1] * (1.0 - s) + values[k] * s
        }
    }
}

/// Samples on a uniform tensor grid over `[-window, window]^{2n}`, multilinearly
/// interpolated and clamped to the edge outside the window.
#[derive(Debug, Clone)]
pub struct GridSymbol {
    pub n: usize,
    pub window: f64,
    pub points: usize,
    /// Row-major over real axes `(Re z_1, Im z_1, ...)`, last axis fastest.
    pub values: Vec<Complex64>,
    /// Sample points flagged by the producer (for example outside a trusted region).
    pub flagged: Vec<bool>,
}

impl GridSymbol {
    pub fn sample<F>(n: usize, window: f64, points: usize, f: F) -> Result<Self>
    where
        F: Fn(&[Complex64]) -> Result<Complex64> + Sync,
    {
        if points < 2 || window.is_nan() || window <= 0.0 || n == 0 {
            return Err(QhaError::InvalidArgument(format!(
                "grid needs n >= 1, points >= 2 and a positive window (n={n}, points={points}, window={window})"
            )));
        }
        let count = points.pow(2 * n as u32);
        let values: Vec<Result<Complex64>> =
            crate::parallel::map_ordered(count, |i| f(&Self::point_of(n, window, points, i)));
        let values = values.into_iter().collect::<Result<Vec<_>>>()?;
        Ok(Self {
            n,
            window,
            points,
            values,
            flagged: vec![false; count],
        })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn coordinate(&self, k: usize) -> f64 {
        -self.window + 2.0 * self.window * k as f64 / (self.points - 1) as f64
    }

    pub fn point(&self, i: usize) -> Vec<Complex64> {
        Self::point_of(self.n, self.window, self.points, i)
    }

    fn point_of(n: usize, window: f64, points: usize, mut i: usize) -> Vec<Complex64> {
        let mut coords = vec![0.0; 2 * n];
        for c in coords.iter_mut().rev() {
            let k = i % points;
            i /= points;
            *c = -window + 2.0 * window * k as f64 / (points - 1) as f64;
        }
        (0..n).map(|j| Complex64::new(coords[2 * j], coords[2 * j + 1])).collect()
    }

    pub fn eval(&self, w: &[Complex64]) -> Complex64 {
        let axes = 2 * self.n;
        let h = 2.0 * self.window / (self.points - 1) as f64;
        let mut base = vec![0usize; axes];
        let mut frac = vec![0.0; axes];
        for j in 0..axes {
            let x = if j % 2 == 0 { w[j / 2].re } else { w[j / 2].im };
            let u = ((x + self.window) / h).clamp(0.0, (self.points - 1) as f64);
            let k = (u.floor() as usize).min(self.points - 2);
            base[j] = k;
            frac[j] = u - k as f64;
        }
        let mut acc = Complex64::new(0.0, 0.0);
        for corner in 0..(1usize << axes) {
            let mut weight = 1.0;
            let mut idx = 0;
            for j in 0..axes {
                let bit = (corner >> (axes - 1 - j)) & 1;
                weight *= if bit == 1 { frac[j] } else { 1.0 - frac[j] };
                idx = idx * self.points + base[j] + bit;
            }
            if weight != 0.0 {
                acc += self.values[idx] * weight;
            }
        }
        acc
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// CSV with columns `re_z1,im_z1,...,re_value,im_value,flagged`.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let mut header = Vec::new();
        for i in 1..=self.n {
            header.push(format!("re_z{i}"));
            header.push(format!("im_z{i}"));
        }
        header.extend(["re_value".to_string(), "im_value".to_string(), "flagged".to_string()]);
        w.write_record(&header)?;
        for i in 0..self.len() {
            let mut row = Vec::with_capacity(2 * self.n + 3);
            for z in self.point(i) {
                row.push(z.re.to_string());
                row.push(z.im.to_string());
            }
            row.push(self.values[i].re.to_string());
            row.push(self.values[i].im.to_string());
            row.push(u8::from(self.flagged[i]).to_string());
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Heat transform `(pi t)^{-n} int source(w) exp(-|z - w|^2 / t) dV(w)`.
#[derive(Debug, Clone)]
pub struct HeatSmoothed {
    pub source: Symbol,
    pub t: f64,
    grid: GaussGrid,
}

impl HeatSmoothed {
    pub fn new(source: Symbol, n: usize, t: f64, order: usize) -> Self {
        Self {
            source,
            t,
            grid: gaussian_grid_with_order(n, t, order),
        }
    }

    pub fn order(&self) -> usize {
        match self.grid.measure {
            crate::quadrature::Measure::Gaussian { order, .. } => order,
            crate::quadrature::Measure::Lebesgue { resolution, .. } => resolution,
        }
    }

    pub fn eval(&self, z: &[Complex64]) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        let mut shifted = z.to_vec();
        for i in 0..self.grid.len() {
            for (s, (zi, ui)) in shifted.iter_mut().zip(z.iter().zip(self.grid.node(i))) {
                *s = zi + ui;
            }
            acc += self.source.eval(&shifted) * self.grid.weight(i);
        }
        acc
    }
}
