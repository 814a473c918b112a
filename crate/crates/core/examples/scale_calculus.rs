//! Jump operators, derivatives and Cauchy integrals on an irregular scale.

use std::sync::Arc;

use tscv::timescale::{Flavor, GridFunction, TimeScale};

fn main() {
    let ts = Arc::new(TimeScale::new([0.0, 0.5, 0.75, 1.5, 2.0]).unwrap());
    for t in ts.points() {
        let j = ts.jump_operators(*t).unwrap();
        println!("t = {t:<5} {j:?}");
    }

    let f = GridFunction::from_fn(ts.clone(), 0..ts.len(), |t| t * t).unwrap();
    let delta = f.derivative(Flavor::Delta).unwrap();
    let nabla = f.derivative(Flavor::Nabla).unwrap();
    println!("(t^2)^Δ on {:?}: {:?}", &ts.points()[..4], delta.values());
    println!("(t^2)^∇ on {:?}: {:?}", &ts.points()[1..], nabla.values());

    // (t^2)^Δ = t + σ(t), so its delta integral telescopes back to t^2
    let back = delta.integral(0.0, 2.0, Flavor::Delta).unwrap();
    println!("∫_0^2 (t^2)^Δ Δt = {back}");

    for (name, scale) in [
        ("h_z(0.25, 0, 2)", TimeScale::h_z(0.25, 0.0, 2.0).unwrap()),
        (
            "q_scale(2, 1, 16)",
            TimeScale::q_scale(2.0, 1.0, 16.0).unwrap(),
        ),
        ("irregular", (*ts).clone()),
    ] {
        println!("condition (H) on {name}: {:?}", scale.condition_h());
    }
}
