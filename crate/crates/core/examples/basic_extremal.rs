//! Solve a z-dependent problem with fixed ends and certify the result.
//!
//! minimize ∫_0^1 ((y^Δ)^2 + y^σ z) Δt with z(t) = ∫_0^t y^σ Δτ, y(0) = 0, y(1) = 1.

use std::sync::Arc;

use tscv::euler_lagrange::el_residual;
use tscv::problem::{Boundary, Problem, ProblemSpec};
use tscv::solver::{solve, SolveOptions};
use tscv::timescale::TimeScale;

fn main() {
    let ts = Arc::new(TimeScale::uniform(0.0, 1.0, 21).unwrap());
    let spec = ProblemSpec::builder(ts)
        .interval(0.0, 1.0)
        .lagrangian("v^2 + y*z")
        .generator("y")
        .boundary(Boundary::Fixed(0.0), Boundary::Fixed(1.0))
        .build()
        .unwrap();
    let problem = Problem::new(spec).unwrap();
    let sol = solve(&problem, &SolveOptions::default()).unwrap();
    println!(
        "status {} after {} iterations, objective {:.12}",
        sol.status, sol.iterations, sol.objective
    );

    let report = el_residual(&problem, &sol.trajectory.y, sol.multipliers()).unwrap();
    println!(
        "max |R| = {:.2e}, tolerance {:.2e}, satisfied: {}",
        report.max_abs,
        report.default_tolerance(),
        report.satisfied(report.default_tolerance())
    );
    println!("{:>6} {:>12} {:>12}", "t", "y", "z");
    for ((t, y), (_, z)) in sol
        .trajectory
        .y
        .iter()
        .zip(sol.trajectory.z.iter())
        .step_by(4)
    {
        println!("{t:>6.2} {y:>12.8} {z:>12.8}");
    }
}
