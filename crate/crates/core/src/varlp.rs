//! Variable-exponent Lebesgue spaces on a finite space: exponent functions,
//! the modular, and the Luxemburg norm.

use std::path::Path;

use thiserror::Error;

use crate::numeric::{fmt_num, ExactSum};
use crate::space::{PointId, SpaceDescriptor};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum VarLpError {
    #[error("tolerance {0} is outside (0, 1e-3]")]
    NonpositiveTolerance(f64),
    #[error("exponent {1} at point {0} is not in [1, inf]")]
    InvalidExponent(PointId, f64),
    #[error("function value {1} at point {0} is negative or not finite")]
    InvalidValue(PointId, f64),
    #[error("expected {expected} values, found {found}")]
    ShapeMismatch { expected: usize, found: usize },
    #[error("{0}")]
    Csv(String),
}

/// Per-point exponent `p(x) ∈ [1, ∞]`; `f64::INFINITY` marks `X_∞`.
#[derive(Clone, Debug, PartialEq)]
pub struct ExponentFunction {
    values: Vec<f64>,
}

impl ExponentFunction {
    pub fn new(values: Vec<f64>) -> Result<Self, VarLpError> {
        for (x, &p) in values.iter().enumerate() {
            if !(p >= 1.0) {
                return Err(VarLpError::InvalidExponent(x, p));
            }
        }
        Ok(Self { values })
    }

    pub fn constant(n: usize, p: f64) -> Result<Self, VarLpError> {
        Self::new(vec![p; n])
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, x: PointId) -> f64 {
        self.values[x]
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// `X_∞`.
    pub fn infinite_set(&self) -> Vec<PointId> {
        (0..self.len()).filter(|&x| self.values[x].is_infinite()).collect()
    }
}

/// Nonnegative finite per-point values.
#[derive(Clone, Debug, PartialEq)]
pub struct PointFunction {
    values: Vec<f64>,
}

impl PointFunction {
    pub fn new(values: Vec<f64>) -> Result<Self, VarLpError> {
        for (x, &v) in values.iter().enumerate() {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(VarLpError::InvalidValue(x, v));
            }
        }
        Ok(Self { values })
    }

    pub fn zeros(n: usize) -> Self {
        Self { values: vec![0.0; n] }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, x: PointId) -> f64 {
        self.values[x]
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(0.0, f64::max)
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|&v| v == 0.0)
    }

    pub fn scaled(&self, c: f64) -> Result<Self, VarLpError> {
        Self::new(self.values.iter().map(|v| v * c).collect())
    }
}

/// Result of the Luxemburg-norm bisection.
#[derive(Clone, Debug, PartialEq)]
pub struct NormResult {
    pub value: f64,
    pub iterations: usize,
    /// Final bracket: `ρ(f/hi) ≤ 1 < ρ(f/lo)`.
    pub bracket: (f64, f64),
}

impl NormResult {
    pub fn record(&self) -> String {
        format!(
            "norm={} lo={} hi={} iters={}",
            fmt_num(self.value),
            fmt_num(self.bracket.0),
            fmt_num(self.bracket.1),
            self.iterations
        )
    }
}

pub const DEFAULT_TOL: f64 = 1e-10;

fn check_shapes(space: &SpaceDescriptor, p: &ExponentFunction, f: &PointFunction) -> Result<(), VarLpError> {
    for found in [p.len(), f.len()] {
        if found != space.n() {
            return Err(VarLpError::ShapeMismatch { expected: space.n(), found });
        }
    }
    Ok(())
}

/// `p_−`: the minimum of `p` (every point carries positive mass).
pub fn essential_infimum(p: &ExponentFunction, _space: &SpaceDescriptor) -> f64 {
    p.values.iter().copied().fold(f64::INFINITY, f64::min)
}

/// `ρ(f/λ)`.
fn modular_scaled(space: &SpaceDescriptor, p: &ExponentFunction, f: &[f64], lambda: f64) -> f64 {
    let mut integral = ExactSum::new();
    let mut sup: f64 = 0.0;
    for (x, &v) in f.iter().enumerate() {
        if v == 0.0 {
            continue;
        }
        let t = v / lambda;
        let px = p.values[x];
        if px.is_infinite() {
            sup = sup.max(t);
        } else {
            let powed = if px == 1.0 { t } else { t.powf(px) };
            if !powed.is_finite() {
                return f64::INFINITY;
            }
            integral.add(space.weight(x) * powed);
        }
    }
    integral.value() + sup
}

/// `ρ_{p(·)}(f) = Σ_{p<∞} μ({x}) f(x)^{p(x)} + max_{X_∞} f`.
pub fn modular(space: &SpaceDescriptor, p: &ExponentFunction, f: &PointFunction) -> Result<f64, VarLpError> {
    check_shapes(space, p, f)?;
    Ok(modular_scaled(space, p, &f.values, 1.0))
}

/// Luxemburg norm `inf{λ > 0 : ρ(f/λ) ≤ 1}` by bisection on the
/// nonincreasing map `λ ↦ ρ(f/λ)`.
///
/// Stops once `hi − lo ≤ tol·lo`, or when the bracket can no longer be split
/// in double precision; `value` is the bracket midpoint.
pub fn luxemburg_norm(
    space: &SpaceDescriptor,
    p: &ExponentFunction,
    f: &PointFunction,
    tol: f64,
) -> Result<NormResult, VarLpError> {
    if !(tol > 0.0 && tol <= 1e-3) {
        return Err(VarLpError::NonpositiveTolerance(tol));
    }
    check_shapes(space, p, f)?;
    if f.is_zero() {
        return Ok(NormResult { value: 0.0, iterations: 0, bracket: (0.0, 0.0) });
    }
    let rho = |lambda: f64| modular_scaled(space, p, &f.values, lambda);
    let mut hi = f.max() * space.total_measure().max(1.0);
    while rho(hi) > 1.0 {
        hi *= 2.0;
    }
    let mut lo = hi * 2f64.powi(-60);
    while rho(lo) <= 1.0 {
        lo *= 0.5;
    }
    let mut iterations = 0;
    while hi - lo > tol * lo {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if rho(mid) <= 1.0 {
            hi = mid;
        } else {
            lo = mid;
        }
        iterations += 1;
    }
    Ok(NormResult { value: 0.5 * (lo + hi), iterations, bracket: (lo, hi) })
}

/// Closed-form `L^p` norm for a constant exponent (`p = ∞` gives `max f`).
pub fn constant_p_norm(space: &SpaceDescriptor, p_const: f64, f: &PointFunction) -> Result<f64, VarLpError> {
    if !(p_const >= 1.0) {
        return Err(VarLpError::InvalidExponent(0, p_const));
    }
    if f.len() != space.n() {
        return Err(VarLpError::ShapeMismatch { expected: space.n(), found: f.len() });
    }
    let top = f.max();
    if p_const.is_infinite() || top == 0.0 {
        return Ok(top);
    }
    let s: ExactSum = f
        .values
        .iter()
        .enumerate()
        .map(|(x, &v)| space.weight(x) * (v / top).powf(p_const))
        .collect();
    Ok(top * s.value().powf(1.0 / p_const))
}

fn read_point_csv(path: &Path, n: usize, allow_inf: bool) -> Result<Vec<f64>, VarLpError> {
    let err = |msg: String| VarLpError::Csv(format!("{}: {msg}", path.display()));
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_path(path)
        .map_err(|e| err(e.to_string()))?;
    let headers = reader.headers().map_err(|e| err(e.to_string()))?.clone();
    if headers.iter().collect::<Vec<_>>() != ["point", "value"] {
        return Err(err("header must be `point,value`".into()));
    }
    let mut values = vec![None; n];
    for rec in reader.records() {
        let rec = rec.map_err(|e| err(e.to_string()))?;
        let line = rec.position().map_or(0, |p| p.line());
        let id: usize = rec[0].parse().map_err(|_| err(format!("line {line}: bad point `{}`", &rec[0])))?;
        if id >= n {
            return Err(err(format!("line {line}: point {id} out of range (n={n})")));
        }
        let v: f64 = match &rec[1] {
            "inf" if allow_inf => f64::INFINITY,
            s => s.parse().ok().filter(|v: &f64| v.is_finite()).ok_or_else(|| err(format!("line {line}: bad value `{s}`")))?,
        };
        if values[id].replace(v).is_some() {
            return Err(err(format!("line {line}: duplicate point {id}")));
        }
    }
    values
        .into_iter()
        .enumerate()
        .map(|(i, v)| v.ok_or_else(|| err(format!("missing point {i}"))))
        .collect()
}

/// Reads a `point,value` CSV; `inf` marks infinite exponents.
pub fn read_exponent_csv(path: impl AsRef<Path>, n: usize) -> Result<ExponentFunction, VarLpError> {
    ExponentFunction::new(read_point_csv(path.as_ref(), n, true)?)
}

pub fn read_function_csv(path: impl AsRef<Path>, n: usize) -> Result<PointFunction, VarLpError> {
    PointFunction::new(read_point_csv(path.as_ref(), n, false)?)
}

/// `point,value` CSV text. Values use the shortest round-trip form.
pub fn point_csv(values: &[f64]) -> String {
    let mut out = String::from("point,value\n");
    for (i, v) in values.iter().enumerate() {
        if v.is_infinite() {
            out.push_str(&format!("{i},inf\n"));
        } else {
            out.push_str(&format!("{i},{v}\n"));
        }
    }
    out
}
