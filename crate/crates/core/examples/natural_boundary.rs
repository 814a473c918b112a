//! Free right end: minimize ∫_0^1 ((y^Δ)^2 + z) Δt with z = ∫ y^Δ and y(0) = 0.
//! The scale carries one point beyond b; at b the optimum satisfies
//! 2 y^Δ(b) = μ(b).

use std::sync::Arc;

use tscv::euler_lagrange::{natural_boundary_residual, Endpoint};
use tscv::problem::{Boundary, Problem, ProblemSpec};
use tscv::solver::{solve, SolveOptions};
use tscv::timescale::TimeScale;

fn main() {
    let ts = Arc::new(TimeScale::uniform(0.0, 1.1, 12).unwrap());
    let spec = ProblemSpec::builder(ts.clone())
        .interval(0.0, 1.0)
        .lagrangian("v^2 + z")
        .generator("v")
        .boundary(Boundary::Fixed(0.0), Boundary::Free)
        .build()
        .unwrap();
    let problem = Problem::new(spec).unwrap();
    let sol = solve(&problem, &SolveOptions::default()).unwrap();
    let y = &sol.trajectory.y;
    let ib = problem.ib();
    let mu = ts.mu(ib);
    let dy = (y.at_index(ib + 1).unwrap() - y.at_index(ib).unwrap()) / mu;
    println!(
        "status {}, y(b) = {:.10}",
        sol.status,
        y.at_index(ib).unwrap()
    );
    println!("2 y^Δ(b) = {:.3e}, μ(b) = {mu:.3e}", 2.0 * dy);
    println!(
        "natural boundary residual at b: {:.2e}",
        natural_boundary_residual(&problem, y, Endpoint::Right).unwrap()
    );
}
