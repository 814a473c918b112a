//! Reflection `t ↦ -t`, which turns a delta problem on `T` into a nabla
//! problem on `-T` and back.
//!
//! Under the reflection `y*(-t) = y(t)`, so `y^σ` becomes `y*^ρ` and `y^Δ`
//! becomes `-y*^∇`. The dual Lagrangian is therefore
//! `L*(t, y, v, z) = L(-t, y, -v, z)` (same for `g` and `F`). The running
//! integral `z` starting at `a` becomes one that ends at `-a`, so the anchor
//! of `z` flips as well; with that, `z*(-t) = z(t)`, the functionals agree
//! and the residuals satisfy `R*(-t) = R(t)`, `P*(-t) = -P(t)`.

use std::sync::Arc;

use thiserror::Error;

use crate::euler_lagrange::el_residual;
use crate::expr::Expr;
use crate::problem::{Multipliers, Problem, ProblemError, ProblemSpec};
use crate::timescale::{GridFunction, ScaleError, TimeScale};

#[derive(Debug, Error)]
pub enum DualityError {
    #[error("primal and dual must have opposite flavors")]
    FlavorMismatch,
    #[error("dual scale is not the reflection of the primal scale")]
    ScaleMismatch,
    #[error("dual interval, boundary data or constants do not mirror the primal")]
    SpecMismatch,
    #[error(transparent)]
    Problem(#[from] ProblemError),
}

impl From<ScaleError> for DualityError {
    fn from(e: ScaleError) -> Self {
        DualityError::Problem(e.into())
    }
}

/// A problem together with its reflection. Scale index `i` of the primal
/// corresponds to index `n - 1 - i` of the dual.
#[derive(Debug, Clone, PartialEq)]
pub struct DualPair {
    pub primal: ProblemSpec,
    pub dual: ProblemSpec,
}

impl DualPair {
    pub fn new(primal: ProblemSpec) -> Self {
        let dual = dualize_problem(&primal);
        Self { primal, dual }
    }

    /// Dual index of primal scale index `i`.
    pub fn map_index(&self, i: usize) -> usize {
        self.primal.scale.len() - 1 - i
    }
}

pub fn dualize_scale(ts: &TimeScale) -> TimeScale {
    ts.reflect()
}

/// `e(-t, y, -v, z)`.
pub fn dualize_expression(e: &Expr) -> Expr {
    let neg = |name: &str| Expr::Neg(Box::new(Expr::var(name)));
    e.substitute("t", &neg("t"))
        .substitute("v", &neg("v"))
        .simplified()
}

/// The reflected problem: scale and interval negated, ends swapped, flavor
/// and `z` anchor switched, expressions substituted. `gamma`, sense and
/// constants are unchanged. Works in both directions.
pub fn dualize_problem(spec: &ProblemSpec) -> ProblemSpec {
    ProblemSpec {
        scale: Arc::new(dualize_scale(&spec.scale)),
        a: 0.0 - spec.b,
        b: 0.0 - spec.a,
        flavor: spec.flavor.dual(),
        sense: spec.sense,
        z_anchor: spec.z_anchor.flipped(),
        lagrangian: dualize_expression(&spec.lagrangian),
        generator: dualize_expression(&spec.generator),
        constraint: spec.constraint.as_ref().map(dualize_expression),
        gamma: spec.gamma,
        left: spec.right,
        right: spec.left,
        params: spec.params.clone(),
    }
}

/// `y*(-t) = y(t)` on the reflected scale.
pub fn reflect_trajectory(
    y: &GridFunction,
    dual_scale: Arc<TimeScale>,
) -> Result<GridFunction, ScaleError> {
    let n = y.scale().len();
    if dual_scale.len() != n {
        return Err(ScaleError::BadParameters("scales differ in size".into()));
    }
    let values = y.values().iter().rev().copied().collect();
    GridFunction::new(dual_scale, n - y.end(), values)
}

fn reflects(primal: &TimeScale, dual: &TimeScale) -> bool {
    primal.len() == dual.len()
        && primal
            .points()
            .iter()
            .zip(dual.points().iter().rev())
            .all(|(p, d)| *p == -*d)
}

/// Largest mismatch between the primal residual at `t` and the dual residual
/// at `-t`, over matched residual points and free-endpoint residuals, divided
/// by `max(1, max |R|)`. `m` is used on both sides.
pub fn duality_check(
    pair: &DualPair,
    y: &GridFunction,
    m: Multipliers,
) -> Result<f64, DualityError> {
    let (p, d) = (&pair.primal, &pair.dual);
    if p.flavor == d.flavor {
        return Err(DualityError::FlavorMismatch);
    }
    if !reflects(&p.scale, &d.scale) {
        return Err(DualityError::ScaleMismatch);
    }
    if d.a != -p.b
        || d.b != -p.a
        || d.left != p.right
        || d.right != p.left
        || d.gamma != p.gamma
        || d.params != p.params
    {
        return Err(DualityError::SpecMismatch);
    }
    let primal = Problem::new(p.clone())?;
    let dual = Problem::new(d.clone())?;
    let y_dual = reflect_trajectory(y, d.scale.clone())?;
    let r = el_residual(&primal, y, m)?;
    let r_dual = el_residual(&dual, &y_dual, m)?;

    let mut worst = 0.0f64;
    for i in r.pointwise.indices() {
        let here = r.pointwise.at_index(i)?;
        let there = r_dual
            .pointwise
            .at_index(pair.map_index(i))
            .map_err(|_| DualityError::ScaleMismatch)?;
        worst = worst.max((here - there).abs());
    }
    if r.pointwise.len() != r_dual.pointwise.len() {
        return Err(DualityError::ScaleMismatch);
    }
    for (a, b) in [
        (r.boundary_left, r_dual.boundary_right),
        (r.boundary_right, r_dual.boundary_left),
    ] {
        if let (Some(a), Some(b)) = (a, b) {
            worst = worst.max((a + b).abs());
        }
    }
    let scale = r.max_abs.max(r.max_boundary()).max(1.0);
    Ok(worst / scale)
}
