//! Euler–Lagrange equations written out for `h`-calculus (`t_k = a + k h`)
//! and `q`-calculus (`t_k = a q^k`), computed with plain index loops.
//! Serves as an independent cross-check of [`crate::euler_lagrange`].

use thiserror::Error;

use crate::problem::{Multipliers, PointState, Problem, ProblemError, ZAnchor};
use crate::timescale::{Flavor, GridFunction, AFFINE_TOL};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CorollaryKind {
    HCalculus { h: f64 },
    QCalculus { q: f64 },
}

#[derive(Debug, Error)]
pub enum CorollaryError {
    #[error("scale points on [a, b] are not of the form {0}")]
    ScaleKindMismatch(&'static str),
    #[error("only delta problems with z accumulated from a are covered")]
    Unsupported,
    #[error(transparent)]
    Problem(#[from] ProblemError),
}

/// Pointwise residual on `t_0, ..., t_{M-2}` where `t_M = b`.
pub fn corollary_residual(
    problem: &Problem,
    y: &GridFunction,
    m: Multipliers,
    kind: CorollaryKind,
) -> Result<GridFunction, CorollaryError> {
    if problem.flavor() != Flavor::Delta || problem.anchor() != ZAnchor::Left {
        return Err(CorollaryError::Unsupported);
    }
    let ts = problem.scale();
    let (ia, ib) = (problem.ia(), problem.ib());
    let a = ts.point(ia);
    let big_m = ib - ia;
    let t: Vec<f64> = (0..=big_m)
        .map(|k| match kind {
            CorollaryKind::HCalculus { h } => a + k as f64 * h,
            CorollaryKind::QCalculus { q } => a * q.powi(k as i32),
        })
        .collect();
    let tol = AFFINE_TOL * ts.span();
    if t.iter()
        .enumerate()
        .any(|(k, tk)| (tk - ts.point(ia + k)).abs() > tol)
    {
        return Err(CorollaryError::ScaleKindMismatch(match kind {
            CorollaryKind::HCalculus { .. } => "a + k h",
            CorollaryKind::QCalculus { .. } => "a q^k",
        }));
    }
    let graininess = |k: usize| match kind {
        CorollaryKind::HCalculus { h } => h,
        CorollaryKind::QCalculus { q } => (q - 1.0) * t[k],
    };
    let y = problem.conform(y)?;
    let yk: Vec<f64> = (0..=big_m).map(|k| y.get(ia + k).unwrap()).collect();

    // states at k = 0..M-1: (t_k, y_{k+1}, difference quotient, z_k)
    let mut states = Vec::with_capacity(big_m);
    let mut z = 0.0;
    for k in 0..big_m {
        let v = (yk[k + 1] - yk[k]) / graininess(k);
        states.push(PointState {
            t: t[k],
            y: yk[k + 1],
            v,
            z,
        });
        z += graininess(k) * problem.eval_generator(t[k], yk[k + 1], v)?;
    }
    let partials = states
        .iter()
        .map(|s| problem.partials(s, m))
        .collect::<Result<Vec<_>, _>>()?;

    // sum over τ = σ(t_k), ..., ρ(b) of the graininess-weighted ∂z H
    let inner: Vec<f64> = (0..big_m)
        .map(|k| {
            (k + 1..big_m)
                .map(|j| graininess(j) * partials[j].h_z)
                .sum()
        })
        .collect();
    let p: Vec<f64> = (0..big_m)
        .map(|k| partials[k].h_v + partials[k].g_v * inner[k])
        .collect();
    let residual = (0..big_m.saturating_sub(1))
        .map(|k| {
            let b = partials[k].h_y + partials[k].g_y * inner[k];
            b - (p[k + 1] - p[k]) / graininess(k)
        })
        .collect();
    GridFunction::new(ts.clone(), ia, residual).map_err(|e| CorollaryError::Problem(e.into()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::{Boundary, ProblemSpec};
    use crate::timescale::TimeScale;
    use std::sync::Arc;

    fn spec(ts: Arc<TimeScale>, a: f64, b: f64, l: &str) -> ProblemSpec {
        ProblemSpec::builder(ts)
            .interval(a, b)
            .lagrangian(l)
            .generator("v")
            .constraint("y", 1.0)
            .boundary(Boundary::Fixed(0.0), Boundary::Fixed(0.0))
            .build()
            .unwrap()
    }

    #[test]
    fn constant_z_weight_counts_remaining_points() {
        let ts = Arc::new(TimeScale::h_z(1.0, 0.0, 5.0).unwrap());
        let p = Problem::new(spec(ts.clone(), 0.0, 5.0, "y + 2*z")).unwrap();
        let y = p.initial_guess();
        let r = corollary_residual(
            &p,
            &y,
            Multipliers::PLAIN,
            CorollaryKind::HCalculus { h: 1.0 },
        )
        .unwrap();
        // ∂y H = 1, P = ∂v g·inner with inner(t) = 2(b - σ(t)), so P^Δ = -2
        assert_eq!(r.len(), 4);
        for v in r.values() {
            assert!((v - 3.0).abs() < 1e-12, "{v}");
        }
    }

    #[test]
    fn wrong_kind_is_rejected() {
        let ts = Arc::new(TimeScale::q_scale(2.0, 1.0, 16.0).unwrap());
        let p = Problem::new(spec(ts, 1.0, 16.0, "v^2")).unwrap();
        let err = corollary_residual(
            &p,
            &p.initial_guess(),
            Multipliers::PLAIN,
            CorollaryKind::HCalculus { h: 1.0 },
        );
        assert!(matches!(err, Err(CorollaryError::ScaleKindMismatch(_))));
        let ok = corollary_residual(
            &p,
            &p.initial_guess(),
            Multipliers::PLAIN,
            CorollaryKind::QCalculus { q: 2.0 },
        );
        assert!(ok.is_ok());
    }
}
