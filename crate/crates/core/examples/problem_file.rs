//! Load a problem file, solve it and write the solution CSV to stdout.
//!
//! cargo run --example problem_file -- crates/core/problems/sturm_liouville.toml

use std::path::PathBuf;

use tscv::io::{load_config, write_solution_csv};
use tscv::problem::Problem;
use tscv::solver::{solve, SolveOptions};

fn main() {
    let path = std::env::args_os()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| {
            PathBuf::from(env!("CARGO_MANIFEST_DIR"))
                .join("problems")
                .join("isoperimetric.toml")
        });
    let spec = match load_config(&path) {
        Ok(spec) => spec,
        Err(e) => {
            eprintln!("{}: {e}", path.display());
            std::process::exit(2);
        }
    };
    let problem = Problem::new(spec).unwrap();
    let sol = solve(&problem, &SolveOptions::default()).unwrap();
    eprintln!(
        "status {}, objective {:.12}, lambda {:?}",
        sol.status, sol.objective, sol.lam
    );
    write_solution_csv(std::io::stdout().lock(), &sol).unwrap();
}
