use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn problems() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("problems")
}

fn tscv(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tscv"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn solve_nabla_example_reports_multiplier() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("sol.csv");
    let o = tscv(&[
        "solve",
        path_str(&problems().join("sturm_liouville.toml")),
        "--out",
        path_str(&out),
    ]);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    let summary = stdout(&o);
    assert!(
        summary.lines().any(|l| l.starts_with("lam = ")),
        "{summary}"
    );
    let csv = fs::read_to_string(&out).unwrap();
    assert!(csv.starts_with("t,y,z,residual\n"));
    assert_eq!(csv.lines().count(), 1 + 101);
}

#[test]
fn check_accepts_exact_extremal_and_rejects_bump() {
    let dir = tempfile::tempdir().unwrap();
    let problem = problems().join("quadratic.toml");
    let linear: String = std::iter::once("t,y\n".to_string())
        .chain((0..11).map(|k| format!("{:.16e},{:.16e}\n", k as f64 / 10.0, k as f64 / 10.0)))
        .collect();
    let good = dir.path().join("linear.csv");
    fs::write(&good, &linear).unwrap();
    let o = tscv(&[
        "check",
        path_str(&problem),
        "--y",
        path_str(&good),
        "--tol",
        "1e-6",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));

    let bumped: String = std::iter::once("t,y\n".to_string())
        .chain((0..11).map(|k| {
            let t = k as f64 / 10.0;
            format!("{t:.16e},{:.16e}\n", if k == 4 { t + 0.1 } else { t })
        }))
        .collect();
    let bad = dir.path().join("perturbed.csv");
    fs::write(&bad, bumped).unwrap();
    let o = tscv(&["check", path_str(&problem), "--y", path_str(&bad)]);
    assert_eq!(o.status.code(), Some(1));
    // a bump d at t_j moves P^Δ(t_{j-1}) by -4 d / h^2
    assert!(
        stdout(&o).contains("max_abs = 4.000000e1"),
        "{}",
        stdout(&o)
    );
}

#[test]
fn check_agrees_with_residual_report() {
    let dir = tempfile::tempdir().unwrap();
    let problem = problems().join("free_endpoint.toml");
    let sol = dir.path().join("sol.csv");
    assert_eq!(
        tscv(&["solve", path_str(&problem), "--out", path_str(&sol)])
            .status
            .code(),
        Some(0)
    );
    let report = dir.path().join("report.csv");
    let o = tscv(&[
        "residual",
        path_str(&problem),
        "--y",
        path_str(&sol),
        "--out",
        path_str(&report),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let text = fs::read_to_string(&report).unwrap();
    let maxima: Vec<f64> = text
        .lines()
        .filter_map(|l| l.strip_prefix("# "))
        .filter(|l| !l.starts_with("lam"))
        .map(|l| l.split(',').nth(1).unwrap().parse::<f64>().unwrap().abs())
        .collect();
    assert_eq!(maxima.len(), 3);
    let worst = maxima.iter().cloned().fold(0.0, f64::max);
    for (tol, code) in [(worst * 1.01, 0), (worst * 0.99, 1)] {
        let o = tscv(&[
            "check",
            path_str(&problem),
            "--y",
            path_str(&sol),
            "--tol",
            &format!("{tol:e}"),
        ]);
        assert_eq!(o.status.code(), Some(code), "tol {tol}");
    }
}

#[test]
fn check_fits_multiplier_when_not_given() {
    let dir = tempfile::tempdir().unwrap();
    let problem = problems().join("isoperimetric.toml");
    let sol = dir.path().join("sol.csv");
    assert_eq!(
        tscv(&["solve", path_str(&problem), "--out", path_str(&sol)])
            .status
            .code(),
        Some(0)
    );
    let o = tscv(&["check", path_str(&problem), "--y", path_str(&sol)]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let o = tscv(&[
        "check",
        path_str(&problem),
        "--y",
        path_str(&sol),
        "--lam",
        "3",
    ]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn dual_file_solves_to_the_same_objective() {
    let dir = tempfile::tempdir().unwrap();
    let dual = dir.path().join("dual.toml");
    let o = tscv(&[
        "dual",
        path_str(&problems().join("free_endpoint.toml")),
        "--out",
        path_str(&dual),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let objective = |p: &Path| -> f64 {
        let o = tscv(&[
            "solve",
            path_str(p),
            "--out",
            path_str(&dir.path().join("s.csv")),
        ]);
        assert_eq!(o.status.code(), Some(0));
        let s = stdout(&o);
        s.lines()
            .find_map(|l| l.strip_prefix("objective = "))
            .unwrap()
            .parse()
            .unwrap()
    };
    let primal = objective(&problems().join("free_endpoint.toml"));
    assert!((objective(&dual) - primal).abs() <= 1e-9 * primal.abs().max(1.0));
    assert!((objective(&problems().join("dual.toml")) - primal).abs() <= 1e-9);
}

#[test]
fn gen_scale_round_trips_through_problem_file() {
    let dir = tempfile::tempdir().unwrap();
    let pts = dir.path().join("pts.txt");
    let o = tscv(&[
        "gen-scale",
        "--kind",
        "q_scale",
        "--q",
        "1.5",
        "--a",
        "0.5",
        "--b",
        "2.53125",
        "--out",
        path_str(&pts),
    ]);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    let listed = fs::read_to_string(&pts).unwrap();
    assert_eq!(listed.lines().count(), 5);
    let problem = dir.path().join("p.toml");
    fs::write(
        &problem,
        "[scale]\nkind = \"file\"\npath = \"pts.txt\"\n\n[problem]\nflavor = \"delta\"\nL = \"v^2\"\n\n\
         [boundary]\na = 0.5\nb = 2.53125\nleft = 0\nright = 1\n",
    )
    .unwrap();
    let again = dir.path().join("again.csv");
    let o = tscv(&["solve", path_str(&problem), "--out", path_str(&again)]);
    assert_eq!(o.status.code(), Some(0));
    let times: Vec<String> = fs::read_to_string(&again)
        .unwrap()
        .lines()
        .skip(1)
        .map(|l| l.split(',').next().unwrap().to_string())
        .collect();
    assert_eq!(
        times,
        listed.lines().map(str::to_string).collect::<Vec<_>>()
    );
}

#[test]
fn oracle_runs_on_small_problem() {
    let dir = tempfile::tempdir().unwrap();
    let problem = dir.path().join("small.toml");
    fs::write(
        &problem,
        "[scale]\nkind = \"uniform\"\na = 0\nb = 1\nn = 4\n\n[problem]\nflavor = \"delta\"\nL = \"v^2\"\n\n\
         [boundary]\na = 0\nb = 1\nleft = 0\nright = 1\n",
    )
    .unwrap();
    let out = dir.path().join("o.csv");
    let o = tscv(&[
        "oracle",
        path_str(&problem),
        "--grid",
        "0:1:31",
        "--out",
        path_str(&out),
    ]);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    assert!(stdout(&o).contains("candidates = 961"));
    let y: Vec<f64> = fs::read_to_string(&out)
        .unwrap()
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(1).unwrap().parse().unwrap())
        .collect();
    assert!(
        (y[1] - 1.0 / 3.0).abs() < 0.02 && (y[2] - 2.0 / 3.0).abs() < 0.02,
        "{y:?}"
    );
}

#[test]
fn usage_and_config_errors_exit_2() {
    assert_eq!(tscv(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(
        tscv(&["solve", "/nonexistent/p.toml"]).status.code(),
        Some(2)
    );
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.toml");
    let text = fs::read_to_string(problems().join("isoperimetric.toml"))
        .unwrap()
        .replace("gamma", "gama");
    fs::write(&bad, text).unwrap();
    let o = tscv(&["solve", path_str(&bad)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("gama"));
    assert_eq!(tscv(&["--help"]).status.code(), Some(0));
    assert!(stdout(&tscv(&["--help"])).contains("EBNF"));
}

#[test]
fn non_convergence_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("s.csv");
    let o = tscv(&[
        "solve",
        path_str(&problems().join("isoperimetric.toml")),
        "--max-iter",
        "2",
        "--out",
        path_str(&out),
    ]);
    assert_eq!(o.status.code(), Some(3));
}
