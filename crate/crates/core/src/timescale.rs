//! Finite time scales and exact discrete calculus on them.
//!
//! Every point of a finite time scale is isolated, so delta and nabla
//! derivatives are plain difference quotients and Cauchy integrals are
//! weighted sums. Nothing here approximates.

use std::fmt;
use std::ops::Range;
use std::sync::Arc;

use thiserror::Error;

/// Relative tolerance (times the scale span) used for point lookup.
pub const POINT_TOL: f64 = 1e-12;

/// Relative tolerance (times the scale span) for condition (H) detection.
pub const AFFINE_TOL: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ScaleError {
    #[error("a time scale needs at least 3 distinct points, got {0}")]
    TooFewPoints(usize),
    #[error("non-finite input point {0}")]
    NonFiniteInput(f64),
    #[error("bad scale parameters: {0}")]
    BadParameters(String),
    #[error("point {0} is not in the time scale")]
    PointNotInScale(f64),
    #[error("grid function domain is too small for this operation")]
    DomainTooSmall,
    #[error("grid function is not defined at index {0}")]
    OutsideDomain(usize),
    #[error("non-finite value {value} at t = {t}")]
    NonFiniteValue { t: f64, value: f64 },
}

/// Delta (forward) or nabla (backward) calculus.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Flavor {
    Delta,
    Nabla,
}

impl Flavor {
    pub fn dual(self) -> Flavor {
        match self {
            Flavor::Delta => Flavor::Nabla,
            Flavor::Nabla => Flavor::Delta,
        }
    }
}

impl fmt::Display for Flavor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Flavor::Delta => f.write_str("delta"),
            Flavor::Nabla => f.write_str("nabla"),
        }
    }
}

/// Parametric families of time scales.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ScaleKind {
    /// `n` equally spaced points from `a` to `b`.
    Uniform { a: f64, b: f64, n: usize },
    /// `{a, a+h, ..., b}`.
    HZ { h: f64, a: f64, b: f64 },
    /// `{a, qa, q^2 a, ..., b}`.
    Quantum { q: f64, a: f64, b: f64 },
}

/// Result of the jump operators at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jumps {
    pub sigma: f64,
    pub rho: f64,
    pub mu: f64,
    pub nu: f64,
}

/// A finite, strictly increasing set of at least three reals.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeScale {
    points: Vec<f64>,
}

impl TimeScale {
    /// Builds a scale from arbitrary-order input. Duplicates (within
    /// `POINT_TOL * span`) are merged.
    pub fn new(points: impl IntoIterator<Item = f64>) -> Result<Self, ScaleError> {
        let mut pts: Vec<f64> = points.into_iter().collect();
        if let Some(&bad) = pts.iter().find(|p| !p.is_finite()) {
            return Err(ScaleError::NonFiniteInput(bad));
        }
        pts.sort_by(|x, y| x.total_cmp(y));
        let span = match (pts.first(), pts.last()) {
            (Some(lo), Some(hi)) => hi - lo,
            _ => 0.0,
        };
        let tol = POINT_TOL * span;
        pts.dedup_by(|next, kept| (*next - *kept).abs() <= tol);
        if pts.len() < 3 {
            return Err(ScaleError::TooFewPoints(pts.len()));
        }
        Ok(Self { points: pts })
    }

    pub fn generate(kind: ScaleKind) -> Result<Self, ScaleError> {
        match kind {
            ScaleKind::Uniform { a, b, n } => Self::uniform(a, b, n),
            ScaleKind::HZ { h, a, b } => Self::h_z(h, a, b),
            ScaleKind::Quantum { q, a, b } => Self::q_scale(q, a, b),
        }
    }

    pub fn uniform(a: f64, b: f64, n: usize) -> Result<Self, ScaleError> {
        if !(a.is_finite() && b.is_finite()) || a >= b || n < 3 {
            return Err(ScaleError::BadParameters(format!(
                "uniform needs a < b and n >= 3 (a={a}, b={b}, n={n})"
            )));
        }
        let step = (b - a) / (n - 1) as f64;
        let pts = (0..n).map(|i| if i == n - 1 { b } else { a + i as f64 * step });
        Self::new(pts)
    }

    pub fn h_z(h: f64, a: f64, b: f64) -> Result<Self, ScaleError> {
        if !(h.is_finite() && a.is_finite() && b.is_finite()) || h <= 0.0 || a >= b {
            return Err(ScaleError::BadParameters(format!(
                "h_z needs h > 0 and a < b (h={h}, a={a}, b={b})"
            )));
        }
        let steps = (b - a) / h;
        let n = steps.round();
        if (steps - n).abs() > 1e-9 * steps.max(1.0) {
            return Err(ScaleError::BadParameters(format!(
                "b - a = {} is not a multiple of h = {h}",
                b - a
            )));
        }
        let n = n as usize;
        Self::new((0..=n).map(|k| if k == n { b } else { a + k as f64 * h }))
    }

    pub fn q_scale(q: f64, a: f64, b: f64) -> Result<Self, ScaleError> {
        if !(q.is_finite() && a.is_finite() && b.is_finite()) || q <= 1.0 || a <= 0.0 || a >= b {
            return Err(ScaleError::BadParameters(format!(
                "q_scale needs q > 1 and 0 < a < b (q={q}, a={a}, b={b})"
            )));
        }
        let exponent = (b / a).ln() / q.ln();
        let k = exponent.round();
        if (exponent - k).abs() > 1e-9 * exponent.max(1.0) {
            return Err(ScaleError::BadParameters(format!(
                "b / a = {} is not an integer power of q = {q}",
                b / a
            )));
        }
        let k = k as i32;
        Self::new((0..=k).map(|j| if j == k { b } else { a * q.powi(j) }))
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn point(&self, i: usize) -> f64 {
        self.points[i]
    }

    pub fn min(&self) -> f64 {
        self.points[0]
    }

    pub fn max(&self) -> f64 {
        self.points[self.points.len() - 1]
    }

    pub fn span(&self) -> f64 {
        self.max() - self.min()
    }

    /// Index of `t`, matched within `POINT_TOL * span`.
    pub fn index_of(&self, t: f64) -> Result<usize, ScaleError> {
        if !t.is_finite() {
            return Err(ScaleError::PointNotInScale(t));
        }
        let tol = POINT_TOL * self.span();
        let pos = self.points.partition_point(|&p| p < t);
        let candidates = [pos.checked_sub(1), Some(pos)];
        candidates
            .into_iter()
            .flatten()
            .filter(|&i| i < self.points.len())
            .find(|&i| (self.points[i] - t).abs() <= tol)
            .ok_or(ScaleError::PointNotInScale(t))
    }

    pub fn contains(&self, t: f64) -> bool {
        self.index_of(t).is_ok()
    }

    pub fn sigma_index(&self, i: usize) -> usize {
        (i + 1).min(self.points.len() - 1)
    }

    pub fn rho_index(&self, i: usize) -> usize {
        i.saturating_sub(1)
    }

    /// Forward graininess at index `i` (zero at the maximum).
    pub fn mu(&self, i: usize) -> f64 {
        self.points[self.sigma_index(i)] - self.points[i]
    }

    /// Backward graininess at index `i` (zero at the minimum).
    pub fn nu(&self, i: usize) -> f64 {
        self.points[i] - self.points[self.rho_index(i)]
    }

    /// Graininess of the given flavor: `mu` for delta, `nu` for nabla.
    pub fn graininess(&self, i: usize, flavor: Flavor) -> f64 {
        match flavor {
            Flavor::Delta => self.mu(i),
            Flavor::Nabla => self.nu(i),
        }
    }

    /// `sigma` for delta, `rho` for nabla.
    pub fn jump_index(&self, i: usize, flavor: Flavor) -> usize {
        match flavor {
            Flavor::Delta => self.sigma_index(i),
            Flavor::Nabla => self.rho_index(i),
        }
    }

    pub fn jump_operators(&self, t: f64) -> Result<Jumps, ScaleError> {
        let i = self.index_of(t)?;
        Ok(Jumps {
            sigma: self.points[self.sigma_index(i)],
            rho: self.points[self.rho_index(i)],
            mu: self.mu(i),
            nu: self.nu(i),
        })
    }

    /// Detects condition (H): `rho(t) = a1 t + a0` with `a1 > 0` at every
    /// point except the minimum. Returns `(a1, a0)`.
    pub fn condition_h(&self) -> Option<(f64, f64)> {
        let p = &self.points;
        let a1 = (p[1] - p[0]) / (p[2] - p[1]);
        let a0 = p[0] - a1 * p[1];
        if !(a1 > 0.0 && a1.is_finite()) {
            return None;
        }
        let tol = AFFINE_TOL * self.span();
        let affine = p.windows(2).all(|w| (a1 * w[1] + a0 - w[0]).abs() <= tol);
        affine.then_some((a1, a0))
    }

    /// The reflected scale `{-t : t in T}`.
    pub fn reflect(&self) -> TimeScale {
        TimeScale {
            points: self.points.iter().rev().map(|&p| 0.0 - p).collect(),
        }
    }
}

/// Real values on a contiguous index range of a time scale.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    scale: Arc<TimeScale>,
    start: usize,
    values: Vec<f64>,
}

impl GridFunction {
    pub fn new(scale: Arc<TimeScale>, start: usize, values: Vec<f64>) -> Result<Self, ScaleError> {
        if start + values.len() > scale.len() {
            return Err(ScaleError::OutsideDomain(start + values.len() - 1));
        }
        for (k, &v) in values.iter().enumerate() {
            if !v.is_finite() {
                return Err(ScaleError::NonFiniteValue {
                    t: scale.point(start + k),
                    value: v,
                });
            }
        }
        Ok(Self {
            scale,
            start,
            values,
        })
    }

    /// Tabulates `f(t)` over the index range.
    pub fn from_fn(
        scale: Arc<TimeScale>,
        range: Range<usize>,
        mut f: impl FnMut(f64) -> f64,
    ) -> Result<Self, ScaleError> {
        let values = range.clone().map(|i| f(scale.point(i))).collect();
        Self::new(scale, range.start, values)
    }

    /// An empty function anchored at `start`.
    pub fn empty(scale: Arc<TimeScale>, start: usize) -> Self {
        Self {
            scale,
            start,
            values: Vec::new(),
        }
    }

    pub fn scale(&self) -> &Arc<TimeScale> {
        &self.scale
    }

    pub fn start(&self) -> usize {
        self.start
    }

    /// One past the last index.
    pub fn end(&self) -> usize {
        self.start + self.values.len()
    }

    pub fn indices(&self) -> Range<usize> {
        self.start..self.end()
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn contains_index(&self, i: usize) -> bool {
        i >= self.start && i < self.end()
    }

    /// Value at scale index `i`.
    pub fn get(&self, i: usize) -> Option<f64> {
        self.contains_index(i).then(|| self.values[i - self.start])
    }

    pub fn at_index(&self, i: usize) -> Result<f64, ScaleError> {
        self.get(i).ok_or(ScaleError::OutsideDomain(i))
    }

    /// Value at the scale point `t`.
    pub fn at(&self, t: f64) -> Result<f64, ScaleError> {
        let i = self.scale.index_of(t)?;
        self.at_index(i)
    }

    /// `(t, value)` pairs in increasing `t`.
    pub fn iter(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.values
            .iter()
            .enumerate()
            .map(move |(k, &v)| (self.scale.point(self.start + k), v))
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Exact delta or nabla derivative. The delta result drops the last
    /// domain point, the nabla result the first.
    pub fn derivative(&self, flavor: Flavor) -> Result<GridFunction, ScaleError> {
        if self.values.len() < 2 {
            return Err(ScaleError::DomainTooSmall);
        }
        let ts = &self.scale;
        let diffs = self.values.windows(2).enumerate().map(|(k, w)| {
            let i = self.start + k;
            (w[1] - w[0]) / (ts.point(i + 1) - ts.point(i))
        });
        let start = match flavor {
            Flavor::Delta => self.start,
            Flavor::Nabla => self.start + 1,
        };
        GridFunction::new(self.scale.clone(), start, diffs.collect())
    }

    /// Cauchy integral between two scale indices with orientation.
    pub fn integral_between(
        &self,
        i1: usize,
        i2: usize,
        flavor: Flavor,
    ) -> Result<f64, ScaleError> {
        if i1 > i2 {
            return Ok(-self.integral_between(i2, i1, flavor)?);
        }
        let ts = &self.scale;
        let mut acc = 0.0;
        match flavor {
            Flavor::Delta => {
                for i in i1..i2 {
                    acc += ts.mu(i) * self.at_index(i)?;
                }
            }
            Flavor::Nabla => {
                for i in i1 + 1..=i2 {
                    acc += ts.nu(i) * self.at_index(i)?;
                }
            }
        }
        Ok(acc)
    }

    /// `∫_{t1}^{t2} f Δτ` (or `∇τ`) as a Cauchy sum.
    pub fn integral(&self, t1: f64, t2: f64, flavor: Flavor) -> Result<f64, ScaleError> {
        let i1 = self.scale.index_of(t1)?;
        let i2 = self.scale.index_of(t2)?;
        self.integral_between(i1, i2, flavor)
    }
}
