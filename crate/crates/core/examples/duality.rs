//! A delta problem and its nabla reflection give matching residuals and
//! objectives.

use std::sync::Arc;

use tscv::duality::{duality_check, reflect_trajectory, DualPair};
use tscv::io::format_problem;
use tscv::problem::{Boundary, Multipliers, Problem, ProblemSpec};
use tscv::solver::{evaluate_functionals, solve, SolveOptions};
use tscv::timescale::{GridFunction, TimeScale};

fn main() {
    let ts = Arc::new(TimeScale::new([0.0, 0.3, 0.45, 1.0, 1.5, 1.6]).unwrap());
    let primal = ProblemSpec::builder(ts.clone())
        .interval(0.0, 1.5)
        .lagrangian("v^2 + t*v*z + y^2")
        .generator("y + t*v")
        .boundary(Boundary::Fixed(0.2), Boundary::Free)
        .build()
        .unwrap();
    let pair = DualPair::new(primal);
    println!("dual problem file:\n{}", format_problem(&pair.dual));

    let y = GridFunction::new(ts, 0, vec![0.2, -0.4, 0.9, 0.1, 0.7, -0.3]).unwrap();
    println!(
        "duality check on an arbitrary trajectory: {:.2e}",
        duality_check(&pair, &y, Multipliers::PLAIN).unwrap()
    );

    let primal = Problem::new(pair.primal.clone()).unwrap();
    let dual = Problem::new(pair.dual.clone()).unwrap();
    let y_dual = reflect_trajectory(&y, pair.dual.scale.clone()).unwrap();
    println!(
        "objectives: primal {:.15}, dual {:.15}",
        evaluate_functionals(&primal, &y).unwrap().0,
        evaluate_functionals(&dual, &y_dual).unwrap().0
    );
    let (sp, sd) = (
        solve(&primal, &SolveOptions::default()).unwrap(),
        solve(&dual, &SolveOptions::default()).unwrap(),
    );
    println!(
        "optimal values: primal {:.12}, dual {:.12}",
        sp.objective, sd.objective
    );
}
