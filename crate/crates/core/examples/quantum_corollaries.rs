//! The h- and q-calculus forms of the Euler–Lagrange equation agree with the
//! general residual on hZ and q-scales.

use std::sync::Arc;

use tscv::corollary::{corollary_residual, CorollaryKind};
use tscv::euler_lagrange::el_residual;
use tscv::problem::{Boundary, Multipliers, Problem, ProblemSpec};
use tscv::timescale::{GridFunction, TimeScale};

fn main() {
    let cases = [
        (
            "h = 0.25",
            TimeScale::h_z(0.25, 0.0, 2.0).unwrap(),
            CorollaryKind::HCalculus { h: 0.25 },
        ),
        (
            "q = 2",
            TimeScale::q_scale(2.0, 1.0, 16.0).unwrap(),
            CorollaryKind::QCalculus { q: 2.0 },
        ),
    ];
    for (name, ts, kind) in cases {
        let ts = Arc::new(ts);
        let n = ts.len();
        let spec = ProblemSpec::builder(ts.clone())
            .interval(ts.min(), ts.max())
            .lagrangian("v^2 + t*y*z - z^2")
            .generator("y^2 + v")
            .constraint("y", 0.0)
            .boundary(Boundary::Fixed(1.0), Boundary::Fixed(-1.0))
            .build()
            .unwrap();
        let problem = Problem::new(spec).unwrap();
        let y = GridFunction::from_fn(ts.clone(), 0..n, |t| (t / ts.max() * 3.0).cos()).unwrap();
        let y = problem
            .conform(
                &GridFunction::new(ts.clone(), 0, {
                    let mut v = y.into_values();
                    v[0] = 1.0;
                    v[n - 1] = -1.0;
                    v
                })
                .unwrap(),
            )
            .unwrap();
        let m = Multipliers::new(1.0, 0.3);
        let c = corollary_residual(&problem, &y, m, kind).unwrap();
        let r = el_residual(&problem, &y, m).unwrap();
        println!("{name}:");
        for (i, cv) in c.indices().zip(c.values()) {
            println!(
                "  t = {:<6} corollary {:>14.6e}  general {:>14.6e}",
                ts.point(i),
                cv,
                r.pointwise.at_index(i).unwrap()
            );
        }
    }
}
