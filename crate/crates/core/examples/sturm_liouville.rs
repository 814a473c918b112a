//! Nabla problem L = (y^∇)^2 - q0 (y^ρ)^2 + 2 z, z = ∫ y^∇, with ∫ (y^ρ)^2 = 1.
//! Extremals satisfy y^∇∇ + (λ + q0) y^ρ = a1.

use std::sync::Arc;

use tscv::problem::{Boundary, Problem, ProblemSpec};
use tscv::solver::{solve, SolveOptions};
use tscv::timescale::{Flavor, TimeScale};

fn main() {
    for q0 in [0.0, 2.0] {
        let ts = Arc::new(TimeScale::uniform(0.0, 1.0, 101).unwrap());
        let (a1, _) = ts.condition_h().unwrap();
        let spec = ProblemSpec::builder(ts)
            .interval(0.0, 1.0)
            .flavor(Flavor::Nabla)
            .lagrangian("v^2 - q0*y^2 + 2*z")
            .generator("v")
            .constraint("y^2", 1.0)
            .boundary(Boundary::Fixed(0.0), Boundary::Fixed(0.0))
            .param("q0", q0)
            .build()
            .unwrap();
        let problem = Problem::new(spec).unwrap();
        let sol = solve(&problem, &SolveOptions::default()).unwrap();
        let lam = sol.lam.unwrap();
        let y = &sol.trajectory.y;
        let d2 = y
            .derivative(Flavor::Nabla)
            .unwrap()
            .derivative(Flavor::Nabla)
            .unwrap();
        let worst = d2
            .indices()
            .map(|i| (d2.at_index(i).unwrap() + (lam + q0) * y.at_index(i - 1).unwrap() - a1).abs())
            .fold(0.0, f64::max);
        println!(
            "q0 = {q0}: status {}, λ = {lam:.8}, max |y^∇∇ + (λ + q0) y^ρ - a1| = {worst:.2e}, y(0.5) = {:.6}",
            sol.status,
            y.at(0.5).unwrap()
        );
    }
}
