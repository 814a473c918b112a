//! Numerical solution by direct transcription: the functionals become
//! finite sums over the values of `y`, minimized by BFGS. Isoperimetric
//! constraints go through an augmented Lagrangian whose multiplier estimate
//! is reported as `lam` of `H = L - lam F`.

mod bfgs;
mod oracle;
mod transcription;

use thiserror::Error;

use crate::euler_lagrange::{el_residual, tabulate, ResidualReport};
use crate::problem::{Multipliers, Problem, ProblemError, Sense, Trajectory};
use crate::timescale::{Flavor, GridFunction};

pub use bfgs::{Status, ARMIJO_C, SHRINK};
pub use oracle::{
    brute_force_oracle, OracleError, OracleResult, MAX_ORACLE_COORDS, MAX_ORACLE_VALUES,
};
pub use transcription::{Terms, GRADIENT_STEP};

use bfgs::{minimize, Objective};
use transcription::Transcription;

#[derive(Debug, Clone, PartialEq)]
pub struct SolveOptions {
    /// Stop when the sup-norm of the gradient drops below this.
    pub tol_grad: f64,
    /// BFGS iterations per inner solve.
    pub max_iter: usize,
    /// Constraint tolerance `|F - gamma|`.
    pub tol_con: f64,
    /// Initial penalty of the augmented Lagrangian.
    pub rho0: f64,
    /// Penalty above which a non-shrinking violation counts as stagnation.
    pub rho_max: f64,
    pub max_outer: usize,
    /// Starting trajectory; defaults to [`Problem::initial_guess`].
    pub initial: Option<GridFunction>,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            tol_grad: 1e-9,
            max_iter: 500,
            tol_con: 1e-8,
            rho0: 10.0,
            rho_max: 1e12,
            max_outer: 60,
            initial: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    pub trajectory: Trajectory,
    pub objective: f64,
    pub constraint_value: Option<f64>,
    pub lam0: f64,
    pub lam: Option<f64>,
    pub report: ResidualReport,
    pub iterations: usize,
    pub status: Status,
    pub converged: bool,
    /// Sup-norm of the last gradient (of the penalized objective when
    /// constrained).
    pub grad_norm: f64,
}

impl Solution {
    pub fn multipliers(&self) -> Multipliers {
        Multipliers::new(self.lam0, self.lam.unwrap_or(0.0))
    }
}

#[derive(Debug, Error)]
pub enum SolveError {
    #[error(transparent)]
    Problem(#[from] ProblemError),
    #[error("problem has an isoperimetric constraint; use the constrained solver")]
    ConstraintPresent,
    #[error("problem has no isoperimetric constraint")]
    ConstraintMissing,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Normality {
    Normal,
    Abnormal,
}

/// `∫ L` and, when present, `∫ F` along `y`.
pub fn evaluate_functionals(
    problem: &Problem,
    y: &GridFunction,
) -> Result<(f64, Option<f64>), ProblemError> {
    let y = problem.conform(y)?;
    let terms = Transcription::new(problem).terms(y.values())?;
    Ok((terms.l_value(), terms.f_value()))
}

/// Per-point weighted terms of both functionals.
pub fn functional_terms(problem: &Problem, y: &GridFunction) -> Result<Terms, ProblemError> {
    let y = problem.conform(y)?;
    Transcription::new(problem).terms(y.values())
}

/// Central-difference gradients of `∫ L` and `∫ F` with respect to the
/// values at [`Problem::free_indices`], in that order.
pub fn gradient(
    problem: &Problem,
    y: &GridFunction,
) -> Result<(Vec<f64>, Option<Vec<f64>>), ProblemError> {
    let y = problem.conform(y)?;
    Transcription::new(problem).gradient(y.values())
}

/// Dispatches on the presence of a constraint.
pub fn solve(problem: &Problem, opts: &SolveOptions) -> Result<Solution, SolveError> {
    if problem.has_constraint() {
        solve_isoperimetric(problem, opts)
    } else {
        solve_unconstrained(problem, opts)
    }
}

/// Penalized objective `s L - lam F' + rho/2 (F - gamma)^2` with `s = ±1`
/// for the sense.
struct Merit<'a> {
    tr: &'a Transcription<'a>,
    y: Vec<f64>,
    sign: f64,
    gamma: f64,
    lam: f64,
    rho: f64,
}

impl Merit<'_> {
    fn combine(&self, terms: &Terms) -> (f64, f64) {
        let l = self.sign * terms.l_value();
        match terms.f_value() {
            Some(f) => {
                let c = f - self.gamma;
                let value = l - self.lam * c + 0.5 * self.rho * c * c;
                let mag = terms.l_magnitude()
                    + (self.lam.abs() + self.rho * c.abs() + 1.0) * terms.f_magnitude();
                (value, mag)
            }
            None => (l, terms.l_magnitude()),
        }
    }

    fn load(&mut self, x: &[f64]) {
        self.tr.embed(&mut self.y, x);
    }
}

impl Objective for Merit<'_> {
    type Error = ProblemError;

    fn value(&mut self, x: &[f64]) -> Option<(f64, f64)> {
        self.load(x);
        let terms = self.tr.terms(&self.y).ok()?;
        let (v, m) = self.combine(&terms);
        v.is_finite().then_some((v, m))
    }

    fn gradient(&mut self, x: &[f64]) -> Result<Vec<f64>, ProblemError> {
        self.load(x);
        let (dl, df) = self.tr.gradient(&self.y)?;
        match df {
            Some(df) => {
                let c = self.tr.terms(&self.y)?.f_value().unwrap_or(0.0) - self.gamma;
                let w = self.rho * c - self.lam;
                Ok(dl
                    .iter()
                    .zip(&df)
                    .map(|(l, f)| self.sign * l + w * f)
                    .collect())
            }
            None => Ok(dl.iter().map(|l| self.sign * l).collect()),
        }
    }
}

fn start_values(problem: &Problem, opts: &SolveOptions) -> Result<Vec<f64>, ProblemError> {
    let y = match &opts.initial {
        Some(y) => problem.conform(y)?,
        None => problem.initial_guess(),
    };
    Ok(y.into_values())
}

fn sign_of(problem: &Problem) -> f64 {
    match problem.spec().sense {
        Sense::Minimize => 1.0,
        Sense::Maximize => -1.0,
    }
}

pub fn solve_unconstrained(problem: &Problem, opts: &SolveOptions) -> Result<Solution, SolveError> {
    if problem.has_constraint() {
        return Err(SolveError::ConstraintPresent);
    }
    let tr = Transcription::new(problem);
    let y = start_values(problem, opts)?;
    let x0 = tr.extract(&y);
    let mut merit = Merit {
        tr: &tr,
        y,
        sign: sign_of(problem),
        gamma: 0.0,
        lam: 0.0,
        rho: 0.0,
    };
    let out = minimize(&mut merit, x0, opts.tol_grad, opts.max_iter, None)?;
    merit.load(&out.x);
    let y = merit.y;
    finish(
        problem,
        y,
        Multipliers::PLAIN,
        out.iterations,
        out.status,
        out.grad_norm,
    )
}

pub fn solve_isoperimetric(problem: &Problem, opts: &SolveOptions) -> Result<Solution, SolveError> {
    let gamma = match (problem.has_constraint(), problem.spec().gamma) {
        (true, Some(g)) => g,
        _ => return Err(SolveError::ConstraintMissing),
    };
    let tr = Transcription::new(problem);
    let y = start_values(problem, opts)?;
    let mut x = tr.extract(&y);
    let sign = sign_of(problem);
    let mut merit = Merit {
        tr: &tr,
        y,
        sign,
        gamma,
        lam: 0.0,
        rho: opts.rho0,
    };
    let mut iterations = 0;
    let mut previous = f64::INFINITY;
    let mut status = Status::MaxIterations;
    let mut grad_norm = f64::INFINITY;
    let mut warm = None;
    for _ in 0..opts.max_outer {
        let out = minimize(&mut merit, x, opts.tol_grad, opts.max_iter, warm)?;
        warm = Some(out.hessian);
        iterations += out.iterations;
        grad_norm = out.grad_norm;
        x = out.x;
        merit.load(&x);
        let c = tr.terms(&merit.y)?.f_value().unwrap_or(0.0) - gamma;
        merit.lam -= merit.rho * c;
        if c.abs() <= opts.tol_con {
            status = out.status;
            break;
        }
        if c.abs() > 0.25 * previous {
            if merit.rho >= opts.rho_max {
                status = Status::Stagnated;
                break;
            }
            merit.rho *= 10.0;
        }
        previous = c.abs();
    }
    merit.load(&x);
    let lam = sign * merit.lam;
    let y = merit.y;
    finish(
        problem,
        y,
        Multipliers::new(1.0, lam),
        iterations,
        status,
        grad_norm,
    )
}

fn finish(
    problem: &Problem,
    mut y: Vec<f64>,
    m: Multipliers,
    iterations: usize,
    status: Status,
    grad_norm: f64,
) -> Result<Solution, SolveError> {
    settle_carried(problem, &mut y, m)?;
    let y = GridFunction::new(problem.scale().clone(), problem.y_range().start, y)
        .map_err(ProblemError::from)?;
    let trajectory = problem.trajectory(&y)?;
    let (objective, constraint_value) = evaluate_functionals(problem, &y)?;
    let report = el_residual(problem, &y, m)?;
    Ok(Solution {
        trajectory,
        objective,
        constraint_value,
        lam0: m.lam0,
        lam: problem.has_constraint().then_some(m.lam),
        report,
        iterations,
        converged: status == Status::Converged,
        status,
        grad_norm,
    })
}

/// The value beyond a free endpoint does not enter the functionals; it is
/// chosen so that the natural boundary residual vanishes.
pub(crate) fn settle_carried(
    problem: &Problem,
    y: &mut [f64],
    m: Multipliers,
) -> Result<(), ProblemError> {
    let Some(c) = problem.carried_index() else {
        return Ok(());
    };
    let ts = problem.scale();
    let start = problem.y_range().start;
    let (end, prev, endpoint) = match problem.flavor() {
        Flavor::Delta => (problem.ib(), problem.ib() - 1, problem.ib()),
        Flavor::Nabla => (problem.ia(), problem.ia() + 1, problem.ia()),
    };
    let slope = (y[end - start] - y[prev - start]) / (ts.point(end) - ts.point(prev));
    y[c - start] = y[end - start] + slope * (ts.point(c) - ts.point(end));

    let scale = problem.scale().clone();
    let residual = |y: &[f64]| -> Result<f64, ProblemError> {
        let g = GridFunction::new(scale.clone(), start, y.to_vec())?;
        Ok(tabulate(problem, &g, m)?.p.at_index(endpoint)?)
    };
    let k = c - start;
    let mut u0 = y[k];
    let mut f0 = residual(y)?;
    let mut u1 = u0 + 1e-3 * u0.abs().max(1.0);
    y[k] = u1;
    let mut f1 = residual(y)?;
    let (mut best_u, mut best_f) = if f1.abs() < f0.abs() {
        (u1, f1)
    } else {
        (u0, f0)
    };
    for _ in 0..60 {
        if f1 == f0 || best_f == 0.0 {
            break;
        }
        let u2 = u1 - f1 * (u1 - u0) / (f1 - f0);
        if !u2.is_finite() {
            break;
        }
        y[k] = u2;
        let Ok(f2) = residual(y) else { break };
        if f2.abs() < best_f.abs() {
            best_u = u2;
            best_f = f2;
        }
        if (u2 - u1).abs() <= 4.0 * f64::EPSILON * u2.abs().max(1.0) {
            break;
        }
        (u0, f0, u1, f1) = (u1, f1, u2, f2);
    }
    y[k] = best_u;
    Ok(())
}

/// Abnormal iff the solution is itself an extremal of the constraint
/// functional, i.e. the residual of `H = F` is within tolerance.
pub fn classify_normality(
    problem: &Problem,
    solution: &Solution,
    tol: Option<f64>,
) -> Result<Normality, ProblemError> {
    let report = el_residual(problem, &solution.trajectory.y, Multipliers::new(0.0, -1.0))?;
    let tol = tol.unwrap_or_else(|| report.default_tolerance());
    Ok(if report.max_abs <= tol {
        Normality::Abnormal
    } else {
        Normality::Normal
    })
}
