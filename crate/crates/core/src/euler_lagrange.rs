//! Euler–Lagrange residuals for Lagrangians that depend on the indefinite
//! integral `z`.
//!
//! With `H = lam0 L - lam F` and `I` the inner integral of `∂z H`, set
//!
//! ```text
//! P = ∂v H + ∂v g · I        B = ∂y H + ∂y g · I
//! ```
//!
//! on every point that has a state. The pointwise residual is `B - P^Δ`
//! (delta) or `B - P^∇` (nabla); natural boundary residuals are `P(a)` and
//! `P(b)` at free endpoints. The integral form is `Q(t) = P(t) + ∫_t^b B`,
//! whose derivative is the negated residual.
//!
//! On a finite scale the residual vanishes at a discrete extremum on every
//! point where both `P(t)` and `P` at the neighbor are built from
//! optimization coordinates: `[a, ρ²(b)]` for a delta problem with fixed
//! ends, `[a, ρ(b)]` with a free right end (nabla: the mirror image).

use thiserror::Error;

use crate::problem::{Multipliers, PointPartials, Problem, ProblemError, States, ZAnchor};
use crate::timescale::{Flavor, GridFunction, ScaleError};

/// Relative factor of the default residual tolerance.
pub const DEFAULT_RESIDUAL_FACTOR: f64 = 1e-6;

#[derive(Debug, Error)]
pub enum ResidualError {
    #[error(transparent)]
    Problem(#[from] ProblemError),
    #[error("{0} endpoint is not free")]
    EndpointNotFree(&'static str),
}

impl From<ScaleError> for ResidualError {
    fn from(e: ScaleError) -> Self {
        ResidualError::Problem(e.into())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Endpoint {
    Left,
    Right,
}

/// Everything the residuals are assembled from, on the state points.
#[derive(Debug, Clone)]
pub struct Tabulation {
    pub states: States,
    pub partials: Vec<PointPartials>,
    pub inner: GridFunction,
    pub p: GridFunction,
    pub b: GridFunction,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResidualReport {
    pub pointwise: GridFunction,
    pub max_abs: f64,
    pub boundary_left: Option<f64>,
    pub boundary_right: Option<f64>,
    pub integral_form: GridFunction,
    pub integral_form_deviation: f64,
    pub multipliers: Multipliers,
    /// `max |∂y H|` over the state points.
    pub max_h_y: f64,
}

impl ResidualReport {
    /// `1e-6 (1 + max |∂y H|)`.
    pub fn default_tolerance(&self) -> f64 {
        DEFAULT_RESIDUAL_FACTOR * (1.0 + self.max_h_y)
    }

    /// Pointwise and boundary residuals all within `tol`.
    pub fn satisfied(&self, tol: f64) -> bool {
        self.max_abs <= tol && self.max_boundary() <= tol
    }

    pub fn max_boundary(&self) -> f64 {
        [self.boundary_left, self.boundary_right]
            .into_iter()
            .flatten()
            .fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// Tabulates states, partials, the inner integral, `P` and `B`.
pub fn tabulate(
    problem: &Problem,
    y: &GridFunction,
    m: Multipliers,
) -> Result<Tabulation, ProblemError> {
    let y = problem.conform(y)?;
    let states = problem.states(&y)?;
    let partials = states
        .points
        .iter()
        .map(|s| problem.partials(s, m))
        .collect::<Result<Vec<_>, _>>()?;
    let scale = problem.scale().clone();
    let start = states.start;
    let h_z = GridFunction::new(
        scale.clone(),
        start,
        partials.iter().map(|p| p.h_z).collect(),
    )?;
    let inner = inner_from(problem, &h_z)?;
    let (p, b): (Vec<f64>, Vec<f64>) = partials
        .iter()
        .zip(inner.values())
        .map(|(pp, i)| (pp.h_v + pp.g_v * i, pp.h_y + pp.g_y * i))
        .unzip();
    Ok(Tabulation {
        states,
        partials,
        inner,
        p: GridFunction::new(scale.clone(), start, p)?,
        b: GridFunction::new(scale, start, b)?,
    })
}

fn inner_from(problem: &Problem, h_z: &GridFunction) -> Result<GridFunction, ProblemError> {
    let ts = problem.scale();
    let flavor = problem.flavor();
    let (ia, ib) = (problem.ia(), problem.ib());
    let values = h_z
        .indices()
        .map(|i| {
            let j = ts.jump_index(i, flavor);
            match problem.anchor() {
                ZAnchor::Left => h_z.integral_between(j, ib, flavor),
                ZAnchor::Right => h_z.integral_between(ia, j, flavor),
            }
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(GridFunction::new(ts.clone(), h_z.start(), values)?)
}

/// `∫_{σ(t)}^b ∂z H Δτ` (nabla: `∫_{ρ(t)}^b ∂z H ∇τ`) on the state points.
/// For a right-anchored `z` the integral runs from `a` to `σ(t)` instead.
pub fn inner_integral(
    problem: &Problem,
    y: &GridFunction,
    m: Multipliers,
) -> Result<GridFunction, ProblemError> {
    Ok(tabulate(problem, y, m)?.inner)
}

/// Pointwise residual, natural boundary residuals and the integral form.
pub fn el_residual(
    problem: &Problem,
    y: &GridFunction,
    m: Multipliers,
) -> Result<ResidualReport, ProblemError> {
    let tab = tabulate(problem, y, m)?;
    Ok(report_from(problem, &tab, m)?)
}

/// Same report as [`el_residual`]; kept separate so callers that only want
/// the integral form read naturally.
pub fn el_residual_integral_form(
    problem: &Problem,
    y: &GridFunction,
    m: Multipliers,
) -> Result<ResidualReport, ProblemError> {
    el_residual(problem, y, m)
}

fn report_from(
    problem: &Problem,
    tab: &Tabulation,
    m: Multipliers,
) -> Result<ResidualReport, ScaleError> {
    let flavor = problem.flavor();
    let dp = tab.p.derivative(flavor)?;
    let values: Vec<f64> = dp
        .iter()
        .zip(dp.indices())
        .map(|((_, d), i)| tab.b.at_index(i).map(|b| b - d))
        .collect::<Result<_, _>>()?;
    let pointwise = GridFunction::new(problem.scale().clone(), dp.start(), values)?;
    let q = integral_form_from(problem, tab)?;
    let mean = q.values().iter().sum::<f64>() / q.len() as f64;
    let deviation = q
        .values()
        .iter()
        .fold(0.0f64, |acc, v| acc.max((v - mean).abs()));
    let spec = problem.spec();
    Ok(ResidualReport {
        max_abs: pointwise.max_abs(),
        pointwise,
        boundary_left: spec
            .left
            .is_free()
            .then(|| tab.p.at_index(problem.ia()))
            .transpose()?,
        boundary_right: spec
            .right
            .is_free()
            .then(|| tab.p.at_index(problem.ib()))
            .transpose()?,
        integral_form: q,
        integral_form_deviation: deviation,
        multipliers: m,
        max_h_y: tab
            .partials
            .iter()
            .fold(0.0f64, |acc, p| acc.max(p.h_y.abs())),
    })
}

fn integral_form_from(problem: &Problem, tab: &Tabulation) -> Result<GridFunction, ScaleError> {
    let flavor = problem.flavor();
    let ib = problem.ib();
    let values = tab
        .p
        .indices()
        .map(|i| Ok(tab.p.at_index(i)? + tab.b.integral_between(i, ib, flavor)?))
        .collect::<Result<Vec<_>, ScaleError>>()?;
    GridFunction::new(problem.scale().clone(), tab.p.start(), values)
}

/// Natural boundary residual at a free endpoint, with `H = L`.
pub fn natural_boundary_residual(
    problem: &Problem,
    y: &GridFunction,
    endpoint: Endpoint,
) -> Result<f64, ResidualError> {
    let spec = problem.spec();
    let (bc, idx, name) = match endpoint {
        Endpoint::Left => (spec.left, problem.ia(), "left"),
        Endpoint::Right => (spec.right, problem.ib(), "right"),
    };
    if !bc.is_free() {
        return Err(ResidualError::EndpointNotFree(name));
    }
    let tab = tabulate(problem, y, Multipliers::PLAIN)?;
    Ok(tab.p.at_index(idx)?)
}

/// Residuals at both endpoints; `None` for fixed ones.
pub fn natural_boundary_residuals(
    problem: &Problem,
    y: &GridFunction,
) -> Result<(Option<f64>, Option<f64>), ResidualError> {
    let spec = problem.spec();
    if !spec.left.is_free() && !spec.right.is_free() {
        return Err(ResidualError::EndpointNotFree("both"));
    }
    let tab = tabulate(problem, y, Multipliers::PLAIN)?;
    let pick = |free: bool, idx: usize| free.then(|| tab.p.at_index(idx)).transpose();
    Ok((
        pick(spec.left.is_free(), problem.ia())?,
        pick(spec.right.is_free(), problem.ib())?,
    ))
}

/// Multiplier `lam` minimizing the pointwise and boundary residuals of
/// `H = lam0 L - lam F` in the least-squares sense. Residuals are linear in
/// `(lam0, lam)`, so this is a single projection. Returns 0 when `F`
/// contributes nothing.
pub fn fit_multiplier(problem: &Problem, y: &GridFunction, lam0: f64) -> Result<f64, ProblemError> {
    let flat = |r: ResidualReport| {
        let mut v = r.pointwise.into_values();
        v.extend(r.boundary_left);
        v.extend(r.boundary_right);
        v
    };
    let base = flat(el_residual(problem, y, Multipliers::new(lam0, 0.0))?);
    let unit = flat(el_residual(problem, y, Multipliers::new(0.0, 1.0))?);
    let uu: f64 = unit.iter().map(|u| u * u).sum();
    if uu == 0.0 {
        return Ok(0.0);
    }
    Ok(-base.iter().zip(&unit).map(|(b, u)| b * u).sum::<f64>() / uu)
}

/// `∫_a^b f·η^σ Δt` (nabla: `∫_a^b f·η^ρ ∇t`) with `f` and `η` given on the
/// scale. Pairing with the unit variation at an interior point `t_j` picks
/// out `μ(ρ(t_j)) f(ρ(t_j))` (nabla: `ν(σ(t_j)) f(σ(t_j))`).
pub fn variation_pairing(
    f: &GridFunction,
    eta: &GridFunction,
    a: usize,
    b: usize,
    flavor: Flavor,
) -> Result<f64, ScaleError> {
    let ts = f.scale();
    let mut acc = 0.0;
    match flavor {
        Flavor::Delta => {
            for i in a..b {
                acc += ts.mu(i) * f.at_index(i)? * eta.at_index(i + 1)?;
            }
        }
        Flavor::Nabla => {
            for i in a + 1..=b {
                acc += ts.nu(i) * f.at_index(i)? * eta.at_index(i - 1)?;
            }
        }
    }
    Ok(acc)
}
