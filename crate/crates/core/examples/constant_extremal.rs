//! Nabla isoperimetric problem on hZ whose extremizer is the constant
//! α = γ / (b - a): L = y^2 + k z, g = v, F = y. The multiplier is
//! 2 α + k a1 where ρ(t) = a1 t + a0.

use std::sync::Arc;

use tscv::problem::{Boundary, Problem, ProblemSpec};
use tscv::solver::{solve, SolveOptions};
use tscv::timescale::{Flavor, TimeScale};

fn main() {
    let (gamma, k) = (0.5, 0.7);
    for h in [0.25, 0.1, 0.05] {
        let ts = Arc::new(TimeScale::h_z(h, 0.0, 1.0).unwrap());
        let (a1, a0) = ts.condition_h().unwrap();
        let alpha = gamma / 1.0;
        let spec = ProblemSpec::builder(ts)
            .interval(0.0, 1.0)
            .flavor(Flavor::Nabla)
            .lagrangian("y^2 + k*z")
            .generator("v")
            .constraint("y", gamma)
            .boundary(Boundary::Fixed(alpha), Boundary::Fixed(alpha))
            .param("k", k)
            .build()
            .unwrap();
        let sol = solve(&Problem::new(spec).unwrap(), &SolveOptions::default()).unwrap();
        let dev = sol
            .trajectory
            .y
            .iter()
            .fold(0.0f64, |m, (_, y)| m.max((y - alpha).abs()));
        println!(
            "h = {h:<5} (a1, a0) = ({a1}, {a0:<6}) max |y - α| = {dev:.1e}  λ = {:.8}  expected {:.8}",
            sol.lam.unwrap(),
            2.0 * alpha + k * a1
        );
    }
}
