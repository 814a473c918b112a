//! Exhaustive search over a small grid of candidate values.

use thiserror::Error;

use super::settle_carried;
use super::transcription::Transcription;
use crate::problem::{Multipliers, Problem, ProblemError, Sense, Trajectory};
use crate::timescale::GridFunction;

pub const MAX_ORACLE_COORDS: usize = 6;
pub const MAX_ORACLE_VALUES: usize = 41;

#[derive(Debug, Error)]
pub enum OracleError {
    #[error("search space too large: {coords} coordinates, up to {values} values each (limits {MAX_ORACLE_COORDS} and {MAX_ORACLE_VALUES})")]
    SearchSpaceTooLarge { coords: usize, values: usize },
    #[error("grid has {got} value lists, problem has {expected} free coordinates")]
    GridMismatch { expected: usize, got: usize },
    #[error("no candidate satisfies the constraint within the slack")]
    EmptyFeasibleSet,
    #[error(transparent)]
    Problem(#[from] ProblemError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleResult {
    pub trajectory: Trajectory,
    pub objective: f64,
    pub constraint_value: Option<f64>,
    pub candidates: usize,
    pub feasible: usize,
}

/// Best candidate over the Cartesian product of `grid` (one list per free
/// coordinate, in [`Problem::free_indices`] order). Constrained problems
/// keep only candidates with `|F - gamma| <= slack`. Ties go to the
/// lexicographically smallest candidate. Candidates where an expression
/// cannot be evaluated are skipped.
pub fn brute_force_oracle(
    problem: &Problem,
    grid: &[Vec<f64>],
    slack: f64,
) -> Result<OracleResult, OracleError> {
    let tr = Transcription::new(problem);
    let n = tr.free().len();
    if grid.len() != n {
        return Err(OracleError::GridMismatch {
            expected: n,
            got: grid.len(),
        });
    }
    let widest = grid.iter().map(Vec::len).max().unwrap_or(0);
    if n > MAX_ORACLE_COORDS || widest > MAX_ORACLE_VALUES {
        return Err(OracleError::SearchSpaceTooLarge {
            coords: n,
            values: widest,
        });
    }
    let grid: Vec<Vec<f64>> = grid
        .iter()
        .map(|list| {
            let mut list = list.clone();
            list.sort_by(f64::total_cmp);
            list.dedup();
            list
        })
        .collect();
    if grid.iter().any(Vec::is_empty) {
        return Err(OracleError::EmptyFeasibleSet);
    }
    let sign = match problem.spec().sense {
        Sense::Minimize => 1.0,
        Sense::Maximize => -1.0,
    };
    let gamma = problem.spec().gamma;
    let mut y = problem.initial_guess().into_values();
    let mut digits = vec![0usize; n];
    let mut best: Option<(f64, Vec<f64>, Option<f64>)> = None;
    let (mut candidates, mut feasible) = (0, 0);
    loop {
        candidates += 1;
        let x: Vec<f64> = digits.iter().zip(&grid).map(|(&d, list)| list[d]).collect();
        tr.embed(&mut y, &x);
        if let Ok(terms) = tr.terms(&y) {
            let f = terms.f_value();
            let ok = match (f, gamma) {
                (Some(f), Some(g)) => (f - g).abs() <= slack,
                _ => true,
            };
            let value = sign * terms.l_value();
            if ok && value.is_finite() {
                feasible += 1;
                if best.as_ref().map_or(true, |(b, _, _)| value < *b) {
                    best = Some((value, x, f));
                }
            }
        }
        // odometer, last coordinate fastest, so visits are lexicographic
        let mut k = n;
        let exhausted = loop {
            if k == 0 {
                break true;
            }
            k -= 1;
            digits[k] += 1;
            if digits[k] < grid[k].len() {
                break false;
            }
            digits[k] = 0;
        };
        if exhausted {
            break;
        }
    }
    let (value, x, constraint_value) = best.ok_or(OracleError::EmptyFeasibleSet)?;
    tr.embed(&mut y, &x);
    if !problem.has_constraint() {
        settle_carried(problem, &mut y, Multipliers::PLAIN)?;
    }
    let y =
        GridFunction::new(problem.scale().clone(), tr.start(), y).map_err(ProblemError::from)?;
    Ok(OracleResult {
        trajectory: problem.trajectory(&y)?,
        objective: sign * value,
        constraint_value,
        candidates,
        feasible,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::{Boundary, ProblemSpec};
    use crate::timescale::TimeScale;
    use std::sync::Arc;

    fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
        (0..n)
            .map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64)
            .collect()
    }

    #[test]
    fn picks_nearest_grid_value() {
        let ts = Arc::new(TimeScale::new([0.0, 0.3, 0.65, 1.0]).unwrap());
        let spec = ProblemSpec::builder(ts)
            .interval(0.0, 0.65)
            .lagrangian("v^2")
            .boundary(Boundary::Fixed(0.0), Boundary::Fixed(1.0))
            .build()
            .unwrap();
        let p = Problem::new(spec).unwrap();
        let out = brute_force_oracle(&p, &[linspace(0.0, 1.0, 41)], 0.0).unwrap();
        let y1 = out.trajectory.y.at_index(1).unwrap();
        let exact = 0.3 / 0.65;
        let nearest = (exact * 40.0_f64).round() / 40.0;
        assert!((y1 - nearest).abs() < 1e-12, "{y1} vs {nearest}");
        assert_eq!(out.candidates, 41);
    }

    #[test]
    fn ties_go_to_smallest() {
        let ts = Arc::new(TimeScale::uniform(0.0, 1.0, 5).unwrap());
        let spec = ProblemSpec::builder(ts)
            .interval(0.0, 1.0)
            .lagrangian("1")
            .boundary(Boundary::Fixed(0.0), Boundary::Fixed(0.0))
            .build()
            .unwrap();
        let p = Problem::new(spec).unwrap();
        let out = brute_force_oracle(&p, &vec![vec![0.5, -1.0, 2.0]; 3], 0.0).unwrap();
        assert_eq!(&out.trajectory.y.values()[1..4], &[-1.0, -1.0, -1.0]);
        assert_eq!(out.candidates, 27);
    }

    #[test]
    fn limits_and_infeasibility() {
        let ts = Arc::new(TimeScale::uniform(0.0, 1.0, 9).unwrap());
        let spec = ProblemSpec::builder(ts)
            .interval(0.0, 1.0)
            .lagrangian("v^2")
            .constraint("y^2", -1.0)
            .boundary(Boundary::Fixed(0.0), Boundary::Fixed(0.0))
            .build()
            .unwrap();
        let p = Problem::new(spec.clone()).unwrap();
        assert!(matches!(
            brute_force_oracle(&p, &vec![vec![0.0]; 7], 0.1),
            Err(OracleError::SearchSpaceTooLarge { coords: 7, .. })
        ));
        let mut small = spec;
        small.b = 0.5;
        let p = Problem::new(small).unwrap();
        assert!(matches!(
            brute_force_oracle(&p, &vec![linspace(-1.0, 1.0, 5); 3], 0.1),
            Err(OracleError::EmptyFeasibleSet)
        ));
        assert!(matches!(
            brute_force_oracle(&p, &[linspace(-1.0, 1.0, 42), vec![0.0], vec![0.0]], 0.1),
            Err(OracleError::SearchSpaceTooLarge { values: 42, .. })
        ));
    }
}
