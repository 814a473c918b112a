//! minimize ∫_0^1 (y^Δ)^2 Δt subject to ∫_0^1 y Δt = 1/6, y(0) = y(1) = 0.
//! The continuous answer is t(1 - t) with multiplier 4; the discrete error
//! falls like 1/n^2.

use std::sync::Arc;

use tscv::problem::{Boundary, Problem, ProblemSpec};
use tscv::solver::{classify_normality, solve, SolveOptions};
use tscv::timescale::TimeScale;

fn main() {
    println!(
        "{:>5} {:>12} {:>10} {:>12} {:>8}",
        "n", "sup error", "ratio", "lambda", "outer"
    );
    let mut previous: Option<f64> = None;
    for n in [26, 51, 101, 201] {
        let ts = Arc::new(TimeScale::uniform(0.0, 1.0, n).unwrap());
        let spec = ProblemSpec::builder(ts)
            .interval(0.0, 1.0)
            .lagrangian("v^2")
            .constraint("y", 1.0 / 6.0)
            .boundary(Boundary::Fixed(0.0), Boundary::Fixed(0.0))
            .build()
            .unwrap();
        let problem = Problem::new(spec).unwrap();
        let sol = solve(&problem, &SolveOptions::default()).unwrap();
        let err = sol
            .trajectory
            .y
            .iter()
            .fold(0.0f64, |m, (t, y)| m.max((y - t * (1.0 - t)).abs()));
        let ratio = previous.map_or(String::from("-"), |p| format!("{:.3}", p / err));
        println!(
            "{n:>5} {err:>12.3e} {ratio:>10} {:>12.8} {:>8}",
            sol.lam.unwrap(),
            sol.iterations
        );
        if n == 201 {
            println!(
                "normality: {:?}",
                classify_normality(&problem, &sol, None).unwrap()
            );
        }
        previous = Some(err);
    }
}
