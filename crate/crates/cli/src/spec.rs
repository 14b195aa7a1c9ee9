//! Parsers for points, symbols and operator targets given on the command line.
//!
//! Points are `;`-separated complex numbers (`0.5`, `0.3-0.2i`, `1i`), one per
//! complex coordinate. Symbols are `name` or `name(key=value, ...)`:
//!
//! - `gaussian-bump(center=<point>, width=<w>)`, default centre 0 and width 4
//! - `plane-wave(freq=<point>)`
//! - `constant(value=<c>)`
//! - `norm-squared`
//! - `horizontal(width=<w>)`, constant along imaginary directions
//! - `radial(width=<w>)`, a bump at the origin
//!
//! Operator targets are `identity`, `projection`, `toeplitz:<symbol>`,
//! `weyl:<point>`, `rank-one:<point>` (the kernel projection at that point)
//! and `random:<rank>` (drawn from the run seed).

use std::collections::BTreeMap;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use qha_core::conv::random_finite_rank;
use qha_core::fock::{kernel_coefficients, rank_one, Basis};
use qha_core::toeplitz::toeplitz;
use qha_core::weyl::weyl;
use qha_core::{FockOperator, FockParams, Symbol};

use crate::CliError;

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

pub fn parse_complex(text: &str) -> Result<Complex64, CliError> {
    let s: String = text.chars().filter(|c| !c.is_whitespace()).collect();
    let s = match s.as_str() {
        "i" | "+i" => "1i".to_string(),
        "-i" => "-1i".to_string(),
        _ => s,
    };
    s.parse::<Complex64>()
        .map_err(|_| usage(format!("cannot parse complex number {text:?}")))
}

/// A point of `C^n`; a single component is allowed for `n = 1` only.
pub fn parse_point(text: &str, n: usize) -> Result<Vec<Complex64>, CliError> {
    let parts: Vec<Complex64> = text.split(';').map(parse_complex).collect::<Result<_, _>>()?;
    if parts.len() != n {
        return Err(usage(format!("point {text:?} has {} coordinates, the model has n = {n}", parts.len())));
    }
    Ok(parts)
}

fn origin(n: usize) -> Vec<Complex64> {
    vec![Complex64::new(0.0, 0.0); n]
}

/// Split `name(k=v, ...)` into the name and its arguments.
fn split_call(text: &str) -> Result<(String, BTreeMap<String, String>), CliError> {
    let text = text.trim();
    let Some(open) = text.find('(') else {
        return Ok((text.to_string(), BTreeMap::new()));
    };
    if !text.ends_with(')') {
        return Err(usage(format!("missing closing parenthesis in {text:?}")));
    }
    let name = text[..open].trim().to_string();
    let mut args = BTreeMap::new();
    for item in text[open + 1..text.len() - 1].split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let (k, v) = item
            .split_once('=')
            .ok_or_else(|| usage(format!("expected key=value, found {item:?}")))?;
        args.insert(k.trim().to_string(), v.trim().to_string());
    }
    Ok((name, args))
}

struct Args {
    name: String,
    values: BTreeMap<String, String>,
}

impl Args {
    fn take(&mut self, key: &str) -> Option<String> {
        self.values.remove(key)
    }

    fn number(&mut self, key: &str, default: f64) -> Result<f64, CliError> {
        match self.take(key) {
            None => Ok(default),
            Some(v) => v
                .parse()
                .map_err(|_| usage(format!("{}: {key} must be a number, got {v:?}", self.name))),
        }
    }

    fn positive(&mut self, key: &str, default: f64) -> Result<f64, CliError> {
        let v = self.number(key, default)?;
        if !(v > 0.0 && v.is_finite()) {
            return Err(usage(format!("{}: {key} must be positive, got {v}", self.name)));
        }
        Ok(v)
    }

    fn finish(self) -> Result<(), CliError> {
        match self.values.keys().next() {
            Some(k) => Err(usage(format!("{}: unknown argument {k:?}", self.name))),
            None => Ok(()),
        }
    }
}

pub fn parse_symbol(text: &str, n: usize) -> Result<Symbol, CliError> {
    let (name, values) = split_call(text)?;
    let mut args = Args { name: name.clone(), values };
    let symbol = match name.as_str() {
        "gaussian-bump" => {
            let center = match args.take("center") {
                Some(c) => parse_point(&c, n)?,
                None => origin(n),
            };
            Symbol::gaussian_bump(center, args.positive("width", 4.0)?)
        }
        "plane-wave" => {
            let freq = args.take("freq").ok_or_else(|| usage("plane-wave needs freq=<point>"))?;
            Symbol::plane_wave(parse_point(&freq, n)?)
        }
        "constant" => {
            let value = args.take("value").map(|v| parse_complex(&v)).transpose()?;
            Symbol::Constant(value.unwrap_or(Complex64::new(1.0, 0.0)))
        }
        "norm-squared" => Symbol::norm_squared(n),
        "horizontal" => Symbol::HorizontalGaussian {
            width: args.positive("width", 2.0)?,
            amplitude: Complex64::new(1.0, 0.0),
        },
        "radial" => Symbol::gaussian_bump(origin(n), args.positive("width", 2.0)?),
        _ => return Err(usage(format!("unknown symbol {name:?}"))),
    };
    args.finish()?;
    Ok(symbol)
}

/// A parsed operator target, kept with its original text for labels.
#[derive(Debug, Clone)]
pub struct Target {
    pub label: String,
    kind: TargetKind,
}

#[derive(Debug, Clone)]
enum TargetKind {
    Identity,
    Projection,
    Toeplitz(Symbol),
    Weyl(Vec<Complex64>),
    RankOne(Vec<Complex64>),
    Random(usize),
}

impl Target {
    pub fn parse(text: &str, n: usize) -> Result<Self, CliError> {
        let text = text.trim();
        let (head, rest) = match text.split_once(':') {
            Some((h, r)) => (h, Some(r)),
            None => (text, None),
        };
        let need = |what: &str| rest.ok_or_else(|| usage(format!("target {head} needs {what}, e.g. {head}:{}", example(head))));
        let kind = match head {
            "identity" if rest.is_none() => TargetKind::Identity,
            "projection" if rest.is_none() => TargetKind::Projection,
            "toeplitz" => TargetKind::Toeplitz(parse_symbol(need("a symbol")?, n)?),
            "weyl" => TargetKind::Weyl(parse_point(need("a point")?, n)?),
            "rank-one" => TargetKind::RankOne(parse_point(need("a point")?, n)?),
            "random" => {
                let r = need("a rank")?;
                let rank: usize = r.parse().map_err(|_| usage(format!("rank must be an integer, got {r:?}")))?;
                if rank == 0 {
                    return Err(usage("rank must be at least 1"));
                }
                TargetKind::Random(rank)
            }
            _ => return Err(usage(format!("malformed target {text:?}"))),
        };
        Ok(Self {
            label: text.to_string(),
            kind,
        })
    }

    pub fn build(&self, params: &FockParams, seed: u64) -> Result<FockOperator, CliError> {
        let op = match &self.kind {
            TargetKind::Identity => FockOperator::identity(*params),
            TargetKind::Projection => FockOperator::projection_onto_constants(*params),
            TargetKind::Toeplitz(f) => toeplitz(params, f)?,
            TargetKind::Weyl(z) => weyl(params, z),
            TargetKind::RankOne(z) => {
                let k = kernel_coefficients(params, &Basis::new(params), z).vector;
                rank_one(&k, &k)?
            }
            TargetKind::Random(rank) => random_finite_rank(params, *rank, &mut ChaCha8Rng::seed_from_u64(seed)),
        };
        Ok(op)
    }
}

fn example(head: &str) -> &'static str {
    match head {
        "toeplitz" => "gaussian-bump",
        "random" => "2",
        _ => "0.5",
    }
}

/// Comma-separated list of numbers.
pub fn parse_list(text: &str) -> Result<Vec<f64>, CliError> {
    text.split(',')
        .map(|s| s.trim().parse::<f64>().map_err(|_| usage(format!("cannot parse number {s:?} in {text:?}"))))
        .collect()
}
