//! Problem files (TOML), scale point lists and CSV output.
//!
//! ```toml
//! [scale]
//! kind = "uniform"        # uniform | h_z | q_scale | points | file
//! a = 0.0
//! b = 1.0
//! n = 101                 # h_z: h = 0.1; q_scale: q = 2; points: points = [...]; file: path = "pts.txt"
//!
//! [problem]
//! flavor = "delta"        # delta | nabla
//! L = "v^2 + z"
//! g = "v"                 # optional, default "0"
//! F = "y"                 # optional
//! extremize = "min"       # min | max, default min
//! z_anchor = "left"       # left | right, default left
//!
//! [boundary]
//! a = 0.0
//! b = 1.0
//! left = 0.0              # number or "free"
//! right = "free"
//!
//! [constraint]
//! gamma = 0.5
//!
//! [params]
//! k = 1.0
//! ```

use std::fmt::Write as _;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::euler_lagrange::ResidualReport;
use crate::expr::ParseError;
use crate::problem::{
    validate, Boundary, Diagnostic, ProblemError, ProblemSpec, Sense, Trajectory, ZAnchor,
};
use crate::solver::Solution;
use crate::timescale::{Flavor, GridFunction, ScaleError, TimeScale};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("{0}")]
    Parse(String),
    #[error("line {line}: {message}")]
    Value { line: usize, message: String },
    #[error("line {line}: {role}: {source}")]
    Expression {
        line: usize,
        role: &'static str,
        source: ParseError,
    },
    #[error("invalid problem:\n{}", render(.0))]
    Validation(Vec<(usize, Diagnostic)>),
    #[error("scale: {0}")]
    Scale(#[from] ScaleError),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

fn render(diags: &[(usize, Diagnostic)]) -> String {
    diags
        .iter()
        .map(|(line, d)| format!("  line {line}: {d}"))
        .collect::<Vec<_>>()
        .join("\n")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ScaleSection {
    Uniform {
        a: f64,
        b: f64,
        n: usize,
    },
    #[serde(rename = "h_z")]
    HZ {
        h: f64,
        a: f64,
        b: f64,
    },
    QScale {
        q: f64,
        a: f64,
        b: f64,
    },
    Points {
        points: Vec<f64>,
    },
    File {
        path: String,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FlavorName {
    Delta,
    Nabla,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Extremize {
    Min,
    Max,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AnchorName {
    Left,
    Right,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemSection {
    pub flavor: FlavorName,
    #[serde(rename = "L")]
    pub lagrangian: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub g: Option<String>,
    #[serde(rename = "F", default, skip_serializing_if = "Option::is_none")]
    pub constraint: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub extremize: Option<Extremize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub z_anchor: Option<AnchorName>,
}

/// `left`/`right`: a number or the word `"free"`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum BoundaryValue {
    Value(f64),
    Word(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundarySection {
    pub a: f64,
    pub b: f64,
    pub left: BoundaryValue,
    pub right: BoundaryValue,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConstraintSection {
    pub gamma: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemFile {
    pub scale: ScaleSection,
    pub problem: ProblemSection,
    pub boundary: BoundarySection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub constraint: Option<ConstraintSection>,
    #[serde(default, skip_serializing_if = "std::collections::BTreeMap::is_empty")]
    pub params: std::collections::BTreeMap<String, f64>,
}

/// 1-based line of `key = ...` inside `[section]`, or of the section header,
/// or 1.
fn line_of(text: &str, section: &str, key: Option<&str>) -> usize {
    let header = format!("[{section}]");
    let mut in_section = false;
    let mut header_line = None;
    for (k, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.starts_with('[') {
            in_section = line == header;
            if in_section {
                header_line = Some(k + 1);
            }
            continue;
        }
        if let (true, Some(key)) = (in_section, key) {
            if let Some((lhs, _)) = line.split_once('=') {
                if lhs.trim().trim_matches('"') == key {
                    return k + 1;
                }
            }
        }
    }
    header_line.unwrap_or(1)
}

fn diagnostic_line(text: &str, d: &Diagnostic) -> usize {
    match d {
        Diagnostic::EndpointNotInScale { endpoint, .. } => {
            line_of(text, "boundary", Some(endpoint))
        }
        Diagnostic::EmptyInterval { .. } | Diagnostic::NoInteriorPoint => {
            line_of(text, "boundary", Some("a"))
        }
        Diagnostic::NoPointBeyondB => line_of(text, "boundary", Some("right")),
        Diagnostic::NoPointBeforeA => line_of(text, "boundary", Some("left")),
        Diagnostic::MissingGamma => line_of(text, "problem", Some("F")),
        Diagnostic::MissingConstraint => line_of(text, "constraint", Some("gamma")),
        Diagnostic::UnknownVariable { role, .. } => line_of(text, "problem", Some(role)),
        Diagnostic::NonFinite { .. } => 1,
    }
}

/// Reads a scale file: one point per line, `#` starts a comment.
pub fn read_scale_file(path: &Path) -> Result<TimeScale, ConfigError> {
    let text = fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.into(),
        source,
    })?;
    let mut points = Vec::new();
    for (k, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let v: f64 = line.parse().map_err(|_| ConfigError::Value {
            line: k + 1,
            message: format!("`{line}` is not a number"),
        })?;
        points.push(v);
    }
    Ok(TimeScale::new(points)?)
}

/// One point per line with 17 significant digits.
pub fn format_scale(ts: &TimeScale) -> String {
    let mut out = String::new();
    for p in ts.points() {
        writeln!(out, "{p:.16e}").unwrap();
    }
    out
}

fn build_scale(section: &ScaleSection, base: &Path) -> Result<TimeScale, ConfigError> {
    Ok(match section {
        ScaleSection::Uniform { a, b, n } => TimeScale::uniform(*a, *b, *n)?,
        ScaleSection::HZ { h, a, b } => TimeScale::h_z(*h, *a, *b)?,
        ScaleSection::QScale { q, a, b } => TimeScale::q_scale(*q, *a, *b)?,
        ScaleSection::Points { points } => TimeScale::new(points.iter().copied())?,
        ScaleSection::File { path } => read_scale_file(&base.join(path))?,
    })
}

fn boundary(value: &BoundaryValue, line: usize) -> Result<Boundary, ConfigError> {
    match value {
        BoundaryValue::Value(v) => Ok(Boundary::Fixed(*v)),
        BoundaryValue::Word(w) if w == "free" => Ok(Boundary::Free),
        BoundaryValue::Word(w) => Err(ConfigError::Value {
            line,
            message: format!("boundary value must be a number or \"free\", got \"{w}\""),
        }),
    }
}

/// Parses and validates problem-file text. Relative scale paths resolve
/// against `base`.
pub fn parse_config(text: &str, base: &Path) -> Result<ProblemSpec, ConfigError> {
    let file: ProblemFile = toml::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))?;
    let scale = Arc::new(build_scale(&file.scale, base)?);
    let p = &file.problem;
    let mut builder = ProblemSpec::builder(scale)
        .interval(file.boundary.a, file.boundary.b)
        .flavor(match p.flavor {
            FlavorName::Delta => Flavor::Delta,
            FlavorName::Nabla => Flavor::Nabla,
        })
        .sense(match p.extremize {
            Some(Extremize::Max) => Sense::Maximize,
            _ => Sense::Minimize,
        })
        .z_anchor(match p.z_anchor {
            Some(AnchorName::Right) => ZAnchor::Right,
            _ => ZAnchor::Left,
        })
        .lagrangian(&p.lagrangian)
        .boundary(
            boundary(&file.boundary.left, line_of(text, "boundary", Some("left")))?,
            boundary(
                &file.boundary.right,
                line_of(text, "boundary", Some("right")),
            )?,
        );
    if let Some(g) = &p.g {
        builder = builder.generator(g);
    }
    for (name, value) in &file.params {
        builder = builder.param(name, *value);
    }
    if let Some(f) = &p.constraint {
        builder = builder.constraint(f, file.constraint.as_ref().map_or(f64::NAN, |c| c.gamma));
    }
    let mut spec = builder.build().map_err(|e| match e {
        ProblemError::Parse { role, source } => ConfigError::Expression {
            line: line_of(text, "problem", Some(role)),
            role,
            source,
        },
        other => ConfigError::Parse(other.to_string()),
    })?;
    spec.gamma = file.constraint.as_ref().map(|c| c.gamma);
    let diags = validate(&spec);
    if !diags.is_empty() {
        return Err(ConfigError::Validation(
            diags
                .into_iter()
                .map(|d| (diagnostic_line(text, &d), d))
                .collect(),
        ));
    }
    Ok(spec)
}

pub fn load_config(path: &Path) -> Result<ProblemSpec, ConfigError> {
    let text = fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.into(),
        source,
    })?;
    parse_config(&text, path.parent().unwrap_or(Path::new(".")))
}

/// Problem-file text for `spec`; the scale is written as an explicit point
/// list.
pub fn format_problem(spec: &ProblemSpec) -> String {
    let bv = |b: Boundary| match b {
        Boundary::Fixed(v) => BoundaryValue::Value(v),
        Boundary::Free => BoundaryValue::Word("free".into()),
    };
    let file = ProblemFile {
        scale: ScaleSection::Points {
            points: spec.scale.points().to_vec(),
        },
        problem: ProblemSection {
            flavor: match spec.flavor {
                Flavor::Delta => FlavorName::Delta,
                Flavor::Nabla => FlavorName::Nabla,
            },
            lagrangian: spec.lagrangian.to_string(),
            g: Some(spec.generator.to_string()),
            constraint: spec.constraint.as_ref().map(|f| f.to_string()),
            extremize: Some(match spec.sense {
                Sense::Minimize => Extremize::Min,
                Sense::Maximize => Extremize::Max,
            }),
            z_anchor: Some(match spec.z_anchor {
                ZAnchor::Left => AnchorName::Left,
                ZAnchor::Right => AnchorName::Right,
            }),
        },
        boundary: BoundarySection {
            a: spec.a,
            b: spec.b,
            left: bv(spec.left),
            right: bv(spec.right),
        },
        constraint: spec.gamma.map(|gamma| ConstraintSection { gamma }),
        params: spec.params.clone(),
    };
    toml::to_string(&file).expect("problem files serialize")
}

fn num(v: f64) -> String {
    format!("{v:.16e}")
}

/// `t,y,z,residual` at every point of the trajectory; cells without a value
/// are left empty.
pub fn write_trajectory_csv<W: Write>(
    out: W,
    traj: &Trajectory,
    residual: Option<&GridFunction>,
) -> Result<(), ConfigError> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out);
    w.write_record(["t", "y", "z", "residual"])?;
    let scale = traj.y.scale();
    for i in traj.y.indices() {
        let cell = |f: Option<&GridFunction>| f.and_then(|f| f.get(i)).map(num).unwrap_or_default();
        w.write_record([
            num(scale.point(i)),
            cell(Some(&traj.y)),
            cell(Some(&traj.z)),
            cell(residual),
        ])?;
    }
    w.flush().map_err(|source| ConfigError::Io {
        path: "<output>".into(),
        source,
    })?;
    Ok(())
}

pub fn write_solution_csv<W: Write>(out: W, solution: &Solution) -> Result<(), ConfigError> {
    write_trajectory_csv(out, &solution.trajectory, Some(&solution.report.pointwise))
}

/// Summary rows `# key,value`, then `t,residual`.
pub fn write_report_csv<W: Write>(mut out: W, report: &ResidualReport) -> Result<(), ConfigError> {
    let io_err = |source| ConfigError::Io {
        path: "<output>".into(),
        source,
    };
    let mut summary = vec![("max_abs", report.max_abs)];
    if let Some(v) = report.boundary_left {
        summary.push(("boundary_left", v));
    }
    if let Some(v) = report.boundary_right {
        summary.push(("boundary_right", v));
    }
    summary.push(("integral_form_deviation", report.integral_form_deviation));
    summary.push(("lam0", report.multipliers.lam0));
    summary.push(("lam", report.multipliers.lam));
    for (k, v) in summary {
        writeln!(out, "# {k},{}", num(v)).map_err(io_err)?;
    }
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out);
    w.write_record(["t", "residual"])?;
    for (t, r) in report.pointwise.iter() {
        w.write_record([num(t), num(r)])?;
    }
    w.flush().map_err(io_err)?;
    Ok(())
}

#[derive(Debug, Deserialize)]
struct TrajectoryRow {
    t: f64,
    y: f64,
}

/// Reads `t,y` columns (others ignored, `#` lines skipped) into a grid
/// function on `scale`. The times must be a contiguous run of scale points.
pub fn read_trajectory_csv(
    path: &Path,
    scale: Arc<TimeScale>,
) -> Result<GridFunction, ConfigError> {
    let file = fs::File::open(path).map_err(|source| ConfigError::Io {
        path: path.into(),
        source,
    })?;
    read_trajectory(file, scale)
}

pub fn read_trajectory<R: io::Read>(
    input: R,
    scale: Arc<TimeScale>,
) -> Result<GridFunction, ConfigError> {
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(input);
    let mut rows = Vec::new();
    for row in reader.deserialize() {
        let row: TrajectoryRow = row?;
        rows.push((scale.index_of(row.t)?, row.y));
    }
    rows.sort_by_key(|(i, _)| *i);
    let Some(&(start, _)) = rows.first() else {
        return Ok(GridFunction::empty(scale, 0));
    };
    for (k, (i, _)) in rows.iter().enumerate() {
        if *i != start + k {
            return Err(ConfigError::Value {
                line: k + 2,
                message: format!(
                    "times must be consecutive scale points (gap or repeat near t = {})",
                    scale.point(*i)
                ),
            });
        }
    }
    Ok(GridFunction::new(
        scale,
        start,
        rows.into_iter().map(|(_, y)| y).collect(),
    )?)
}
