//! Compare the solver with exhaustive search on a small convex problem.

use std::sync::Arc;

use tscv::problem::{Boundary, Problem, ProblemSpec};
use tscv::solver::{brute_force_oracle, solve, SolveOptions};
use tscv::timescale::TimeScale;

fn main() {
    let ts = Arc::new(TimeScale::new([0.0, 0.2, 0.5, 0.6, 1.0, 1.3]).unwrap());
    let spec = ProblemSpec::builder(ts)
        .interval(0.0, 1.0)
        .lagrangian("v^2 + y^2 - t*y + z")
        .generator("v")
        .boundary(Boundary::Fixed(0.0), Boundary::Free)
        .build()
        .unwrap();
    let problem = Problem::new(spec).unwrap();
    let sol = solve(&problem, &SolveOptions::default()).unwrap();
    println!(
        "solver: objective {:.10}, y = {:?}",
        sol.objective,
        sol.trajectory.y.values()
    );
    for values in [5, 11, 21] {
        let grid: Vec<f64> = (0..values)
            .map(|k| -0.1 + 0.2 * k as f64 / (values - 1) as f64)
            .collect();
        let out =
            brute_force_oracle(&problem, &vec![grid; problem.free_indices().len()], 0.0).unwrap();
        println!(
            "oracle with {values:>2} values per coordinate: objective {:.10} ({} candidates), gap {:.2e}",
            out.objective,
            out.candidates,
            out.objective - sol.objective
        );
    }
}
