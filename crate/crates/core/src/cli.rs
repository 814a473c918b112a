//! Command-line front end. See [`run`] and `tscv --help`.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Parser, Subcommand, ValueEnum};

use crate::duality::dualize_problem;
use crate::euler_lagrange::{el_residual, fit_multiplier, ResidualReport};
use crate::io::{
    format_problem, format_scale, load_config, read_trajectory_csv, write_report_csv,
    write_solution_csv, write_trajectory_csv, ConfigError,
};
use crate::problem::{Multipliers, Problem, ProblemError};
use crate::solver::{
    brute_force_oracle, classify_normality, solve, Normality, OracleError, SolveError, SolveOptions,
};
use crate::timescale::{GridFunction, TimeScale};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_NUMERIC: i32 = 3;

const AFTER_HELP: &str = r##"PROBLEM FILES (TOML)
  [scale]       kind = "uniform"  with a, b, n
                kind = "h_z"      with h, a, b
                kind = "q_scale"  with q, a, b
                kind = "points"   with points = [t0, t1, ...]
                kind = "file"     with path = "pts.txt" (one point per line,
                                  relative to the problem file)
  [problem]     flavor = "delta" | "nabla"
                L = "<expr in t, y, v, z>"
                g = "<expr in t, y, v>"            (default "0")
                F = "<expr in t, y, v, z>"         (optional)
                extremize = "min" | "max"          (default "min")
                z_anchor = "left" | "right"        (default "left")
  [boundary]    a, b, left, right (a number or "free")
  [constraint]  gamma (required exactly when F is given)
  [params]      name = value, usable in every expression
  Unknown keys are errors.

  In L and F, y is the shifted state (y(σ(t)) for delta, y(ρ(t)) for nabla),
  v the delta or nabla derivative and z the indefinite integral of g.

EXPRESSIONS (EBNF)
  expr    = term , { ( "+" | "-" ) , term } ;
  term    = unary , { ( "*" | "/" ) , unary } ;
  unary   = ( "-" | "+" ) , unary | power ;
  power   = primary , [ "^" , unary ] ;            (* right associative *)
  primary = number | ident | func , "(" , expr , ")" | "(" , expr , ")" ;
  func    = "sin" | "cos" | "exp" | "log" | "sqrt" | "abs" ;
  number  = digits , [ "." , [ digits ] ] , [ exponent ]
          | "." , digits , [ exponent ] ;
  exponent = ( "e" | "E" ) , [ "+" | "-" ] , digits ;
  ident   = ( letter | "_" ) , { letter | digit | "_" } ;
  Identifiers are the state variables or names from [params].

CSV
  Numbers carry 17 significant digits; lines end in LF.
  solve/oracle: t,y,z,residual (empty cells where a value is undefined)
  residual:     "# key,value" summary rows, then t,residual
  --y input:    columns t and y (others ignored), "#" starts a comment

EXIT CODES
  0 success / check passed, 1 check failed, 2 usage or problem-file error,
  3 numeric failure (no convergence, expression not evaluable)"##;

#[derive(Debug, Parser)]
#[command(name = "tscv", version, about = "Variational problems on finite time scales", after_help = AFTER_HELP)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Solve a problem by direct transcription.
    Solve {
        problem: PathBuf,
        /// Solution CSV path (default stdout; the summary then goes to stderr).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Gradient tolerance.
        #[arg(long)]
        tol: Option<f64>,
        #[arg(long)]
        max_iter: Option<usize>,
    },
    /// Euler-Lagrange residual report for a given trajectory.
    Residual {
        problem: PathBuf,
        #[arg(long)]
        y: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        lam0: Option<f64>,
        /// Isoperimetric multiplier; fitted by least squares when omitted.
        #[arg(long)]
        lam: Option<f64>,
    },
    /// Exit 0 iff every residual maximum of a trajectory is within --tol.
    Check {
        problem: PathBuf,
        #[arg(long)]
        y: PathBuf,
        /// Default 1e-6 (1 + max |∂y H|).
        #[arg(long)]
        tol: Option<f64>,
        #[arg(long)]
        lam0: Option<f64>,
        #[arg(long)]
        lam: Option<f64>,
    },
    /// Write the dual problem file.
    Dual {
        problem: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write the points of a generated scale, one per line.
    GenScale {
        #[arg(long, value_enum)]
        kind: KindArg,
        #[arg(long, allow_hyphen_values = true)]
        a: f64,
        #[arg(long, allow_hyphen_values = true)]
        b: f64,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        h: Option<f64>,
        #[arg(long)]
        q: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Exhaustive search over a grid of values for each free coordinate.
    Oracle {
        problem: PathBuf,
        /// lo:hi:n, once for all coordinates or once per coordinate.
        #[arg(long, required = true, allow_hyphen_values = true)]
        grid: Vec<String>,
        /// Accepted |F - gamma| for constrained problems.
        #[arg(long, default_value_t = 1e-6)]
        slack: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum KindArg {
    Uniform,
    #[value(name = "h_z")]
    HZ,
    #[value(name = "q_scale")]
    QScale,
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Numeric(String),
}

impl Failure {
    fn code(&self) -> i32 {
        match self {
            Failure::Usage(_) => EXIT_USAGE,
            Failure::Numeric(_) => EXIT_NUMERIC,
        }
    }
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        Failure::Usage(e.to_string())
    }
}

impl From<ProblemError> for Failure {
    fn from(e: ProblemError) -> Self {
        match e {
            ProblemError::Eval { .. } => Failure::Numeric(e.to_string()),
            other => Failure::Usage(other.to_string()),
        }
    }
}

impl From<SolveError> for Failure {
    fn from(e: SolveError) -> Self {
        match e {
            SolveError::Problem(p) => p.into(),
            other => Failure::Usage(other.to_string()),
        }
    }
}

impl From<OracleError> for Failure {
    fn from(e: OracleError) -> Self {
        match e {
            OracleError::Problem(p) => p.into(),
            OracleError::EmptyFeasibleSet => Failure::Numeric(e.to_string()),
            other => Failure::Usage(other.to_string()),
        }
    }
}

fn io_failure(path: &Path, e: io::Error) -> Failure {
    Failure::Usage(format!("{}: {e}", path.display()))
}

fn sink(out: &Option<PathBuf>) -> Result<Box<dyn Write>, Failure> {
    Ok(match out {
        Some(path) => Box::new(BufWriter::new(
            File::create(path).map_err(|e| io_failure(path, e))?,
        )),
        None => Box::new(io::stdout().lock()),
    })
}

/// Runs the CLI on `args` (including the program name) and returns the exit
/// code. Diagnostics go to stderr.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match dispatch(cli.command) {
        Ok(code) => code,
        Err(f) => {
            match &f {
                Failure::Usage(m) => eprintln!("error: {m}"),
                Failure::Numeric(m) => eprintln!("numeric failure: {m}"),
            }
            f.code()
        }
    }
}

fn load(path: &Path) -> Result<Problem, Failure> {
    Ok(Problem::new(load_config(path)?)?)
}

fn dispatch(command: Command) -> Result<i32, Failure> {
    match command {
        Command::Solve {
            problem,
            out,
            tol,
            max_iter,
        } => cmd_solve(&problem, &out, tol, max_iter),
        Command::Residual {
            problem,
            y,
            out,
            lam0,
            lam,
        } => {
            let problem = load(&problem)?;
            let report = residual_report(&problem, &y, lam0, lam)?;
            write_report_csv(sink(&out)?, &report)?;
            Ok(EXIT_OK)
        }
        Command::Check {
            problem,
            y,
            tol,
            lam0,
            lam,
        } => {
            let problem = load(&problem)?;
            let report = residual_report(&problem, &y, lam0, lam)?;
            let tol = tol.unwrap_or_else(|| report.default_tolerance());
            let maxima = [
                ("max_abs", Some(report.max_abs)),
                ("boundary_left", report.boundary_left.map(f64::abs)),
                ("boundary_right", report.boundary_right.map(f64::abs)),
                (
                    "integral_form_deviation",
                    Some(report.integral_form_deviation),
                ),
            ];
            let mut pass = true;
            for (name, value) in maxima {
                if let Some(v) = value {
                    println!("{name} = {v:.6e}");
                    pass &= v <= tol;
                }
            }
            println!("lam0 = {}", report.multipliers.lam0);
            if problem.has_constraint() {
                println!("lam = {}", report.multipliers.lam);
            }
            println!("tol = {tol:.6e}");
            println!("result = {}", if pass { "pass" } else { "fail" });
            Ok(if pass { EXIT_OK } else { EXIT_CHECK_FAILED })
        }
        Command::Dual { problem, out } => {
            let spec = load_config(&problem)?;
            let mut w = sink(&out)?;
            let path = out.as_deref().unwrap_or(Path::new("<stdout>"));
            w.write_all(format_problem(&dualize_problem(&spec)).as_bytes())
                .and_then(|_| w.flush())
                .map_err(|e| io_failure(path, e))?;
            Ok(EXIT_OK)
        }
        Command::GenScale {
            kind,
            a,
            b,
            n,
            h,
            q,
            out,
        } => {
            let need = |v: Option<f64>, flag: &str| {
                v.ok_or_else(|| Failure::Usage(format!("--kind needs --{flag}")))
            };
            let scale = match kind {
                KindArg::Uniform => TimeScale::uniform(
                    a,
                    b,
                    n.ok_or_else(|| Failure::Usage("--kind uniform needs --n".into()))?,
                ),
                KindArg::HZ => TimeScale::h_z(need(h, "h")?, a, b),
                KindArg::QScale => TimeScale::q_scale(need(q, "q")?, a, b),
            }
            .map_err(|e| Failure::Usage(e.to_string()))?;
            let mut w = sink(&out)?;
            let path = out.as_deref().unwrap_or(Path::new("<stdout>"));
            w.write_all(format_scale(&scale).as_bytes())
                .and_then(|_| w.flush())
                .map_err(|e| io_failure(path, e))?;
            Ok(EXIT_OK)
        }
        Command::Oracle {
            problem,
            grid,
            slack,
            out,
        } => {
            let problem = load(&problem)?;
            let lists = grid
                .iter()
                .map(|g| parse_grid(g))
                .collect::<Result<Vec<_>, _>>()?;
            let coords = problem.free_indices().len();
            let lists = if lists.len() == 1 {
                vec![lists[0].clone(); coords]
            } else {
                lists
            };
            let result = brute_force_oracle(&problem, &lists, slack)?;
            let mut summary = format!(
                "objective = {:.16e}\ncandidates = {}\nfeasible = {}\n",
                result.objective, result.candidates, result.feasible
            );
            if let Some(f) = result.constraint_value {
                summary.push_str(&format!("constraint = {f:.16e}\n"));
            }
            emit_summary(&out, &summary);
            write_trajectory_csv(sink(&out)?, &result.trajectory, None)?;
            Ok(EXIT_OK)
        }
    }
}

fn parse_grid(text: &str) -> Result<Vec<f64>, Failure> {
    let bad = || Failure::Usage(format!("--grid expects lo:hi:n, got `{text}`"));
    let parts: Vec<&str> = text.split(':').collect();
    let [lo, hi, n] = parts.as_slice() else {
        return Err(bad());
    };
    let lo: f64 = lo.parse().map_err(|_| bad())?;
    let hi: f64 = hi.parse().map_err(|_| bad())?;
    let n: usize = n.parse().map_err(|_| bad())?;
    Ok(match n {
        0 => return Err(bad()),
        1 => vec![lo],
        _ => (0..n)
            .map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64)
            .collect(),
    })
}

/// Summary to stdout when the data went to a file, otherwise to stderr.
fn emit_summary(out: &Option<PathBuf>, summary: &str) {
    if out.is_some() {
        print!("{summary}");
    } else {
        eprint!("{summary}");
    }
}

fn residual_report(
    problem: &Problem,
    y_path: &Path,
    lam0: Option<f64>,
    lam: Option<f64>,
) -> Result<ResidualReport, Failure> {
    let y: GridFunction = read_trajectory_csv(y_path, Arc::clone(problem.scale()))?;
    let lam0 = lam0.unwrap_or(1.0);
    let lam = match lam {
        Some(lam) => lam,
        None if problem.has_constraint() => fit_multiplier(problem, &y, lam0)?,
        None => 0.0,
    };
    Ok(el_residual(problem, &y, Multipliers::new(lam0, lam))?)
}

fn cmd_solve(
    path: &Path,
    out: &Option<PathBuf>,
    tol: Option<f64>,
    max_iter: Option<usize>,
) -> Result<i32, Failure> {
    let problem = load(path)?;
    let mut opts = SolveOptions::default();
    if let Some(tol) = tol {
        opts.tol_grad = tol;
    }
    if let Some(max_iter) = max_iter {
        opts.max_iter = max_iter;
    }
    let sol = solve(&problem, &opts)?;
    write_solution_csv(sink(out)?, &sol)?;
    let r = &sol.report;
    let mut s = format!(
        "status = {}\niterations = {}\nobjective = {:.16e}\n",
        sol.status, sol.iterations, sol.objective
    );
    if let Some(f) = sol.constraint_value {
        s.push_str(&format!("constraint = {f:.16e}\n"));
    }
    s.push_str(&format!("lam0 = {}\n", sol.lam0));
    if let Some(lam) = sol.lam {
        s.push_str(&format!("lam = {lam:.16e}\n"));
        let normality = match classify_normality(&problem, &sol, None)? {
            Normality::Normal => "normal",
            Normality::Abnormal => "abnormal",
        };
        s.push_str(&format!("normality = {normality}\n"));
    }
    s.push_str(&format!("residual_max = {:.6e}\n", r.max_abs));
    if let Some(v) = r.boundary_left {
        s.push_str(&format!("boundary_left = {v:.6e}\n"));
    }
    if let Some(v) = r.boundary_right {
        s.push_str(&format!("boundary_right = {v:.6e}\n"));
    }
    s.push_str(&format!(
        "integral_form_deviation = {:.6e}\n",
        r.integral_form_deviation
    ));
    s.push_str(&format!("residual_tol = {:.6e}\n", r.default_tolerance()));
    emit_summary(out, &s);
    if sol.converged {
        Ok(EXIT_OK)
    } else {
        eprintln!("numeric failure: solver stopped with status {}", sol.status);
        Ok(EXIT_NUMERIC)
    }
}
