pub mod cli;
pub mod corollary;
pub mod duality;
pub mod euler_lagrange;
pub mod expr;
pub mod io;
pub mod problem;
pub mod solver;
pub mod timescale;
