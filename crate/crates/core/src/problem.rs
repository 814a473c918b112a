//! Variational problems: Lagrangian `L(t,y,v,z)`, generator `g(t,y,v)` of
//! the indefinite integral `z`, optional isoperimetric integrand `F` with
//! target `gamma`, interval, boundary data and flavor.
//!
//! For the delta flavor the state at `t` is `(t, y(σ(t)), y^Δ(t), z(t))`;
//! for nabla it is `(t, y(ρ(t)), y^∇(t), z(t))`.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::ops::Range;
use std::sync::Arc;

use thiserror::Error;

use crate::expr::{
    parse_expression, Compiled, CompiledPartial, EvalError, Expr, ParseError, DEFAULT_PARTIAL_STEP,
};
use crate::timescale::{Flavor, GridFunction, ScaleError, TimeScale};

/// Variables of `L` and `F`, in slot order.
pub const STATE_VARS: [&str; 4] = ["t", "y", "v", "z"];
/// Variables of `g`, in slot order.
pub const GENERATOR_VARS: [&str; 3] = ["t", "y", "v"];

const BOUNDARY_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Boundary {
    Fixed(f64),
    Free,
}

impl Boundary {
    pub fn is_free(self) -> bool {
        matches!(self, Boundary::Free)
    }

    pub fn value(self) -> Option<f64> {
        match self {
            Boundary::Fixed(v) => Some(v),
            Boundary::Free => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Minimize,
    Maximize,
}

/// Which endpoint the indefinite integral `z` starts from.
///
/// `Left` is `z(t) = ∫_a^t g`; `Right` is `z(t) = ∫_t^b g`. Reflecting a
/// left-anchored problem produces a right-anchored one.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ZAnchor {
    Left,
    Right,
}

impl ZAnchor {
    pub fn flipped(self) -> ZAnchor {
        match self {
            ZAnchor::Left => ZAnchor::Right,
            ZAnchor::Right => ZAnchor::Left,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Diagnostic {
    EndpointNotInScale { endpoint: &'static str, value: f64 },
    EmptyInterval { a: f64, b: f64 },
    NoInteriorPoint,
    NoPointBeyondB,
    NoPointBeforeA,
    MissingGamma,
    MissingConstraint,
    UnknownVariable { role: &'static str, name: String },
    NonFinite { what: String },
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Diagnostic::EndpointNotInScale { endpoint, value } => {
                write!(
                    f,
                    "endpoint {endpoint} = {value} is not a point of the scale"
                )
            }
            Diagnostic::EmptyInterval { a, b } => {
                write!(f, "interval needs a < b (a = {a}, b = {b})")
            }
            Diagnostic::NoInteriorPoint => f.write_str("no scale point strictly between a and b"),
            Diagnostic::NoPointBeyondB => {
                f.write_str("free right endpoint in delta flavor needs a scale point beyond b")
            }
            Diagnostic::NoPointBeforeA => {
                f.write_str("free left endpoint in nabla flavor needs a scale point before a")
            }
            Diagnostic::MissingGamma => f.write_str("constraint integrand F given without gamma"),
            Diagnostic::MissingConstraint => {
                f.write_str("gamma given without constraint integrand F")
            }
            Diagnostic::UnknownVariable { role, name } => {
                write!(f, "{role} references undeclared variable `{name}`")
            }
            Diagnostic::NonFinite { what } => write!(f, "{what} is not finite"),
        }
    }
}

#[derive(Debug, Error)]
pub enum ProblemError {
    #[error("invalid problem: {}", join(.0))]
    Invalid(Vec<Diagnostic>),
    #[error("cannot parse {role}: {source}")]
    Parse {
        role: &'static str,
        source: ParseError,
    },
    #[error("missing {0}")]
    Missing(&'static str),
    #[error("{role} at t = {t}: {source}")]
    Eval {
        role: &'static str,
        t: f64,
        source: EvalError,
    },
    #[error("{0}")]
    Compile(EvalError),
    #[error("trajectory: {0}")]
    TrajectoryDomain(String),
    #[error(transparent)]
    Scale(#[from] ScaleError),
}

fn join(diags: &[Diagnostic]) -> String {
    diags
        .iter()
        .map(|d| d.to_string())
        .collect::<Vec<_>>()
        .join("; ")
}

/// A variational problem as entered by the user.
#[derive(Debug, Clone, PartialEq)]
pub struct ProblemSpec {
    pub scale: Arc<TimeScale>,
    pub a: f64,
    pub b: f64,
    pub flavor: Flavor,
    pub sense: Sense,
    pub z_anchor: ZAnchor,
    pub lagrangian: Expr,
    pub generator: Expr,
    pub constraint: Option<Expr>,
    pub gamma: Option<f64>,
    pub left: Boundary,
    pub right: Boundary,
    pub params: BTreeMap<String, f64>,
}

impl ProblemSpec {
    pub fn builder(scale: Arc<TimeScale>) -> ProblemBuilder {
        ProblemBuilder {
            scale,
            interval: None,
            flavor: Flavor::Delta,
            sense: Sense::Minimize,
            z_anchor: ZAnchor::Left,
            lagrangian: None,
            generator: "0".into(),
            constraint: None,
            gamma: None,
            left: None,
            right: None,
            params: BTreeMap::new(),
        }
    }
}

/// Builds a [`ProblemSpec`] from expression text. Parsing is deferred to
/// [`ProblemBuilder::build`] so parameters may be declared in any order.
#[derive(Debug, Clone)]
pub struct ProblemBuilder {
    scale: Arc<TimeScale>,
    interval: Option<(f64, f64)>,
    flavor: Flavor,
    sense: Sense,
    z_anchor: ZAnchor,
    lagrangian: Option<String>,
    generator: String,
    constraint: Option<String>,
    gamma: Option<f64>,
    left: Option<Boundary>,
    right: Option<Boundary>,
    params: BTreeMap<String, f64>,
}

impl ProblemBuilder {
    pub fn interval(mut self, a: f64, b: f64) -> Self {
        self.interval = Some((a, b));
        self
    }

    pub fn flavor(mut self, flavor: Flavor) -> Self {
        self.flavor = flavor;
        self
    }

    pub fn sense(mut self, sense: Sense) -> Self {
        self.sense = sense;
        self
    }

    pub fn z_anchor(mut self, anchor: ZAnchor) -> Self {
        self.z_anchor = anchor;
        self
    }

    pub fn lagrangian(mut self, text: &str) -> Self {
        self.lagrangian = Some(text.to_string());
        self
    }

    pub fn generator(mut self, text: &str) -> Self {
        self.generator = text.to_string();
        self
    }

    pub fn constraint(mut self, text: &str, gamma: f64) -> Self {
        self.constraint = Some(text.to_string());
        self.gamma = Some(gamma);
        self
    }

    pub fn boundary(mut self, left: Boundary, right: Boundary) -> Self {
        self.left = Some(left);
        self.right = Some(right);
        self
    }

    pub fn param(mut self, name: &str, value: f64) -> Self {
        self.params.insert(name.to_string(), value);
        self
    }

    pub fn build(self) -> Result<ProblemSpec, ProblemError> {
        let (a, b) = self
            .interval
            .ok_or(ProblemError::Missing("interval [a, b]"))?;
        let lagrangian = self
            .lagrangian
            .ok_or(ProblemError::Missing("Lagrangian L"))?;
        let left = self.left.ok_or(ProblemError::Missing("left boundary"))?;
        let right = self.right.ok_or(ProblemError::Missing("right boundary"))?;
        let parse = |role: &'static str, text: &str, vars: &[&str]| {
            let mut allowed: Vec<&str> = vars.to_vec();
            allowed.extend(self.params.keys().map(String::as_str));
            parse_expression(text, &allowed).map_err(|source| ProblemError::Parse { role, source })
        };
        Ok(ProblemSpec {
            lagrangian: parse("L", &lagrangian, &STATE_VARS)?,
            generator: parse("g", &self.generator, &GENERATOR_VARS)?,
            constraint: self
                .constraint
                .as_deref()
                .map(|text| parse("F", text, &STATE_VARS))
                .transpose()?,
            scale: self.scale,
            a,
            b,
            flavor: self.flavor,
            sense: self.sense,
            z_anchor: self.z_anchor,
            gamma: self.gamma,
            left,
            right,
            params: self.params,
        })
    }
}

/// Structural checks. Empty iff the spec can be compiled into a [`Problem`].
pub fn validate(spec: &ProblemSpec) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    let ts = &spec.scale;
    for (what, v) in [("a", spec.a), ("b", spec.b)] {
        if !v.is_finite() {
            out.push(Diagnostic::NonFinite { what: what.into() });
        }
    }
    for (name, v) in &spec.params {
        if !v.is_finite() {
            out.push(Diagnostic::NonFinite {
                what: format!("parameter {name}"),
            });
        }
    }
    for (what, bc) in [
        ("left boundary value", spec.left),
        ("right boundary value", spec.right),
    ] {
        if bc.value().is_some_and(|v| !v.is_finite()) {
            out.push(Diagnostic::NonFinite { what: what.into() });
        }
    }
    if spec.gamma.is_some_and(|g| !g.is_finite()) {
        out.push(Diagnostic::NonFinite {
            what: "gamma".into(),
        });
    }
    let ia = ts.index_of(spec.a);
    let ib = ts.index_of(spec.b);
    if ia.is_err() {
        out.push(Diagnostic::EndpointNotInScale {
            endpoint: "a",
            value: spec.a,
        });
    }
    if ib.is_err() {
        out.push(Diagnostic::EndpointNotInScale {
            endpoint: "b",
            value: spec.b,
        });
    }
    if let (Ok(ia), Ok(ib)) = (ia, ib) {
        if ia >= ib {
            out.push(Diagnostic::EmptyInterval {
                a: spec.a,
                b: spec.b,
            });
        } else {
            if ib - ia < 2 {
                out.push(Diagnostic::NoInteriorPoint);
            }
            if spec.flavor == Flavor::Delta && spec.right.is_free() && ib + 1 >= ts.len() {
                out.push(Diagnostic::NoPointBeyondB);
            }
            if spec.flavor == Flavor::Nabla && spec.left.is_free() && ia == 0 {
                out.push(Diagnostic::NoPointBeforeA);
            }
        }
    }
    match (&spec.constraint, spec.gamma) {
        (Some(_), None) => out.push(Diagnostic::MissingGamma),
        (None, Some(_)) => out.push(Diagnostic::MissingConstraint),
        _ => {}
    }
    let mut check_vars = |role: &'static str, e: &Expr, vars: &[&str]| {
        for name in e.variables() {
            if !vars.contains(&name.as_str()) && !spec.params.contains_key(&name) {
                out.push(Diagnostic::UnknownVariable { role, name });
            }
        }
    };
    check_vars("L", &spec.lagrangian, &STATE_VARS);
    check_vars("g", &spec.generator, &GENERATOR_VARS);
    if let Some(f) = &spec.constraint {
        check_vars("F", f, &STATE_VARS);
    }
    out
}

/// `(t, y, v, z)` at one point, with `y` already shifted (`y^σ` or `y^ρ`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointState {
    pub t: f64,
    pub y: f64,
    pub v: f64,
    pub z: f64,
}

impl PointState {
    fn slots(&self) -> [f64; 4] {
        [self.t, self.y, self.v, self.z]
    }
}

/// Partials of `H = lam0 L - lam F` and of `g` at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointPartials {
    pub h_y: f64,
    pub h_v: f64,
    pub h_z: f64,
    pub g_y: f64,
    pub g_v: f64,
}

/// Multipliers `(lam0, lam)` of `H = lam0 L - lam F`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Multipliers {
    pub lam0: f64,
    pub lam: f64,
}

impl Multipliers {
    pub const PLAIN: Multipliers = Multipliers {
        lam0: 1.0,
        lam: 0.0,
    };

    pub fn new(lam0: f64, lam: f64) -> Self {
        Self { lam0, lam }
    }
}

#[derive(Debug, Clone)]
struct Integrand {
    value: Compiled,
    d_y: CompiledPartial,
    d_v: CompiledPartial,
    d_z: CompiledPartial,
    uses_z: bool,
}

impl Integrand {
    fn compile(e: &Expr, consts: &HashMap<String, f64>) -> Result<Self, EvalError> {
        let step = DEFAULT_PARTIAL_STEP;
        Ok(Self {
            value: e.compile(&STATE_VARS, consts)?,
            d_y: CompiledPartial::new(e, &STATE_VARS, 1, consts, step)?,
            d_v: CompiledPartial::new(e, &STATE_VARS, 2, consts, step)?,
            d_z: CompiledPartial::new(e, &STATE_VARS, 3, consts, step)?,
            uses_z: e.references("z"),
        })
    }
}

#[derive(Debug, Clone)]
struct Generator {
    value: Compiled,
    d_y: CompiledPartial,
    d_v: CompiledPartial,
}

/// A validated problem with compiled expressions.
#[derive(Debug, Clone)]
pub struct Problem {
    spec: ProblemSpec,
    ia: usize,
    ib: usize,
    lagrangian: Integrand,
    constraint: Option<Integrand>,
    generator: Generator,
}

/// A trajectory `y` on the problem's required range together with its `z`
/// on `[a, b]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub y: GridFunction,
    pub z: GridFunction,
}

/// Per-point states of a trajectory, indexed from `start`.
#[derive(Debug, Clone, PartialEq)]
pub struct States {
    pub start: usize,
    pub points: Vec<PointState>,
}

impl States {
    pub fn indices(&self) -> Range<usize> {
        self.start..self.start + self.points.len()
    }

    pub fn get(&self, i: usize) -> &PointState {
        &self.points[i - self.start]
    }
}

impl Problem {
    pub fn new(spec: ProblemSpec) -> Result<Self, ProblemError> {
        let diags = validate(&spec);
        if !diags.is_empty() {
            return Err(ProblemError::Invalid(diags));
        }
        let ia = spec.scale.index_of(spec.a)?;
        let ib = spec.scale.index_of(spec.b)?;
        let consts: HashMap<String, f64> =
            spec.params.iter().map(|(k, v)| (k.clone(), *v)).collect();
        let step = DEFAULT_PARTIAL_STEP;
        let g = &spec.generator;
        let generator = Generator {
            value: g
                .compile(&GENERATOR_VARS, &consts)
                .map_err(ProblemError::Compile)?,
            d_y: CompiledPartial::new(g, &GENERATOR_VARS, 1, &consts, step)
                .map_err(ProblemError::Compile)?,
            d_v: CompiledPartial::new(g, &GENERATOR_VARS, 2, &consts, step)
                .map_err(ProblemError::Compile)?,
        };
        let lagrangian =
            Integrand::compile(&spec.lagrangian, &consts).map_err(ProblemError::Compile)?;
        let constraint = spec
            .constraint
            .as_ref()
            .map(|f| Integrand::compile(f, &consts))
            .transpose()
            .map_err(ProblemError::Compile)?;
        Ok(Self {
            spec,
            ia,
            ib,
            lagrangian,
            constraint,
            generator,
        })
    }

    pub fn spec(&self) -> &ProblemSpec {
        &self.spec
    }

    pub fn scale(&self) -> &Arc<TimeScale> {
        &self.spec.scale
    }

    pub fn flavor(&self) -> Flavor {
        self.spec.flavor
    }

    pub fn anchor(&self) -> ZAnchor {
        self.spec.z_anchor
    }

    /// Scale index of `a`.
    pub fn ia(&self) -> usize {
        self.ia
    }

    /// Scale index of `b`.
    pub fn ib(&self) -> usize {
        self.ib
    }

    pub fn has_constraint(&self) -> bool {
        self.constraint.is_some()
    }

    /// Does `L` or `F` depend on `z`?
    pub fn uses_z(&self) -> bool {
        self.lagrangian.uses_z || self.constraint.as_ref().is_some_and(|c| c.uses_z)
    }

    /// The point carried beyond `[a, b]`: `σ(b)` for a free right endpoint in
    /// delta flavor, `ρ(a)` for a free left endpoint in nabla flavor.
    pub fn carried_index(&self) -> Option<usize> {
        match self.spec.flavor {
            Flavor::Delta if self.spec.right.is_free() => Some(self.ib + 1),
            Flavor::Nabla if self.spec.left.is_free() => Some(self.ia - 1),
            _ => None,
        }
    }

    /// Scale indices on which a trajectory must be defined.
    pub fn y_range(&self) -> Range<usize> {
        match self.carried_index() {
            Some(c) if c > self.ib => self.ia..c + 1,
            Some(c) => c..self.ib + 1,
            None => self.ia..self.ib + 1,
        }
    }

    /// Points where `(t, y^σ, y^Δ, z)` (or the nabla analogue) is available.
    pub fn state_range(&self) -> Range<usize> {
        match self.spec.flavor {
            Flavor::Delta => self.ia..self.y_range().end - 1,
            Flavor::Nabla => self.y_range().start + 1..self.ib + 1,
        }
    }

    /// Points summed by the functionals: `[a, b)` or `(a, b]`.
    pub fn objective_range(&self) -> Range<usize> {
        match self.spec.flavor {
            Flavor::Delta => self.ia..self.ib,
            Flavor::Nabla => self.ia + 1..self.ib + 1,
        }
    }

    /// Scale indices of the optimization coordinates: interior points and
    /// free endpoints. The carried point is not a coordinate.
    pub fn free_indices(&self) -> Vec<usize> {
        let lo = if self.spec.left.is_free() {
            self.ia
        } else {
            self.ia + 1
        };
        let hi = if self.spec.right.is_free() {
            self.ib + 1
        } else {
            self.ib
        };
        (lo..hi).collect()
    }

    /// Linear interpolation between boundary values, treating free
    /// endpoints as 0.
    pub fn initial_guess(&self) -> GridFunction {
        let ts = self.scale();
        let ya = self.spec.left.value().unwrap_or(0.0);
        let yb = self.spec.right.value().unwrap_or(0.0);
        let (ta, tb) = (ts.point(self.ia), ts.point(self.ib));
        let range = self.y_range();
        let values = range
            .clone()
            .map(|i| {
                let i = i.clamp(self.ia, self.ib);
                if i == self.ia {
                    ya
                } else if i == self.ib {
                    yb
                } else {
                    ya + (yb - ya) * (ts.point(i) - ta) / (tb - ta)
                }
            })
            .collect();
        GridFunction::new(ts.clone(), range.start, values).expect("finite boundary data")
    }

    /// Checks `y` covers the required range and honors fixed boundary
    /// values; returns `y` restricted to that range.
    pub fn conform(&self, y: &GridFunction) -> Result<GridFunction, ProblemError> {
        if !Arc::ptr_eq(y.scale(), self.scale()) && **y.scale() != **self.scale() {
            return Err(ProblemError::TrajectoryDomain(
                "trajectory lives on a different scale".into(),
            ));
        }
        let range = self.y_range();
        if y.start() > range.start || y.end() < range.end {
            return Err(ProblemError::TrajectoryDomain(format!(
                "needs values on t in [{}, {}], got [{}, {}]",
                self.scale().point(range.start),
                self.scale().point(range.end - 1),
                self.scale().point(y.start()),
                self.scale().point(y.end().max(1) - 1),
            )));
        }
        for (which, idx, bc) in [
            ("left", self.ia, self.spec.left),
            ("right", self.ib, self.spec.right),
        ] {
            if let Boundary::Fixed(v) = bc {
                let got = y.at_index(idx)?;
                if (got - v).abs() > BOUNDARY_TOL * v.abs().max(1.0) {
                    return Err(ProblemError::TrajectoryDomain(format!(
                        "{which} boundary value is {got}, expected {v}"
                    )));
                }
            }
        }
        let values = range.clone().map(|i| y.get(i).unwrap()).collect();
        Ok(GridFunction::new(
            self.scale().clone(),
            range.start,
            values,
        )?)
    }

    /// Builds a [`Trajectory`] (with `z`) from `y`.
    pub fn trajectory(&self, y: &GridFunction) -> Result<Trajectory, ProblemError> {
        let y = self.conform(y)?;
        let z = self.accumulate_z(&y)?;
        Ok(Trajectory { y, z })
    }

    /// Shifted value and derivative at index `i` for values `y` stored from
    /// scale index `start`.
    pub(crate) fn shifted_state(&self, y: &[f64], start: usize, i: usize) -> (f64, f64) {
        let ts = self.scale();
        let flavor = self.spec.flavor;
        let j = ts.jump_index(i, flavor);
        let w = ts.graininess(i, flavor);
        let (yi, yj) = (y[i - start], y[j - start]);
        let v = match flavor {
            Flavor::Delta => (yj - yi) / w,
            Flavor::Nabla => (yi - yj) / w,
        };
        (yj, v)
    }

    pub fn eval_generator(&self, t: f64, y: f64, v: f64) -> Result<f64, ProblemError> {
        self.generator
            .value
            .eval(&[t, y, v])
            .map_err(|source| ProblemError::Eval {
                role: "g",
                t,
                source,
            })
    }

    /// `z` on `[a, b]`: the running Cauchy integral of `g` along `y`, from
    /// `a` (left anchor) or from `b` (right anchor).
    pub fn accumulate_z(&self, y: &GridFunction) -> Result<GridFunction, ProblemError> {
        let y = self.conform(y)?;
        let z = self.z_values(y.values(), y.start())?;
        Ok(GridFunction::new(self.scale().clone(), self.ia, z)?)
    }

    /// `z` on `[a, b]` for values `y` stored from scale index `start`.
    pub(crate) fn z_values(&self, y: &[f64], start: usize) -> Result<Vec<f64>, ProblemError> {
        let ts = self.scale();
        let flavor = self.spec.flavor;
        let (ia, ib) = (self.ia, self.ib);
        let g_at = |i: usize| -> Result<f64, ProblemError> {
            let (ys, v) = self.shifted_state(y, start, i);
            Ok(ts.graininess(i, flavor) * self.eval_generator(ts.point(i), ys, v)?)
        };
        let mut z = vec![0.0; ib - ia + 1];
        match (flavor, self.spec.z_anchor) {
            // z(t_i) = Σ_{k ∈ [a, t_i)} μ g
            (Flavor::Delta, ZAnchor::Left) => {
                for i in ia + 1..=ib {
                    z[i - ia] = z[i - 1 - ia] + g_at(i - 1)?;
                }
            }
            // z(t_i) = Σ_{k ∈ [t_i, b)} μ g
            (Flavor::Delta, ZAnchor::Right) => {
                for i in (ia..ib).rev() {
                    z[i - ia] = z[i + 1 - ia] + g_at(i)?;
                }
            }
            // z(t_i) = Σ_{k ∈ (a, t_i]} ν g
            (Flavor::Nabla, ZAnchor::Left) => {
                for i in ia + 1..=ib {
                    z[i - ia] = z[i - 1 - ia] + g_at(i)?;
                }
            }
            // z(t_i) = Σ_{k ∈ (t_i, b]} ν g
            (Flavor::Nabla, ZAnchor::Right) => {
                for i in (ia..ib).rev() {
                    z[i - ia] = z[i + 1 - ia] + g_at(i + 1)?;
                }
            }
        }
        Ok(z)
    }

    /// States at every point of [`Problem::state_range`].
    pub fn states(&self, y: &GridFunction) -> Result<States, ProblemError> {
        let y = self.conform(y)?;
        let z = self.z_values(y.values(), y.start())?;
        let z = GridFunction::new(self.scale().clone(), self.ia, z)?;
        self.states_with_z(&y, &z)
    }

    pub fn states_with_z(
        &self,
        y: &GridFunction,
        z: &GridFunction,
    ) -> Result<States, ProblemError> {
        let range = self.state_range();
        let ts = self.scale();
        let points = range
            .clone()
            .map(|i| {
                if !y.contains_index(i) || !y.contains_index(ts.jump_index(i, self.spec.flavor)) {
                    return Err(ProblemError::TrajectoryDomain(format!(
                        "no value near t = {}",
                        ts.point(i)
                    )));
                }
                let (ys, v) = self.shifted_state(y.values(), y.start(), i);
                Ok(PointState {
                    t: ts.point(i),
                    y: ys,
                    v,
                    z: z.at_index(i)?,
                })
            })
            .collect::<Result<Vec<_>, ProblemError>>()?;
        Ok(States {
            start: range.start,
            points,
        })
    }

    pub fn eval_lagrangian(&self, s: &PointState) -> Result<f64, ProblemError> {
        self.lagrangian
            .value
            .eval(&s.slots())
            .map_err(|source| ProblemError::Eval {
                role: "L",
                t: s.t,
                source,
            })
    }

    pub fn eval_constraint(&self, s: &PointState) -> Result<Option<f64>, ProblemError> {
        self.constraint
            .as_ref()
            .map(|c| {
                c.value
                    .eval(&s.slots())
                    .map_err(|source| ProblemError::Eval {
                        role: "F",
                        t: s.t,
                        source,
                    })
            })
            .transpose()
    }

    /// Partials of `H = lam0 L - lam F` and of `g` at a state.
    pub fn partials(&self, s: &PointState, m: Multipliers) -> Result<PointPartials, ProblemError> {
        let slots = s.slots();
        let err = |role: &'static str| {
            move |source| ProblemError::Eval {
                role,
                t: s.t,
                source,
            }
        };
        let l = &self.lagrangian;
        let (mut h_y, mut h_v, mut h_z) = (
            m.lam0 * l.d_y.eval(&slots).map_err(err("∂y L"))?,
            m.lam0 * l.d_v.eval(&slots).map_err(err("∂v L"))?,
            m.lam0 * l.d_z.eval(&slots).map_err(err("∂z L"))?,
        );
        if let Some(f) = &self.constraint {
            if m.lam != 0.0 {
                h_y -= m.lam * f.d_y.eval(&slots).map_err(err("∂y F"))?;
                h_v -= m.lam * f.d_v.eval(&slots).map_err(err("∂v F"))?;
                h_z -= m.lam * f.d_z.eval(&slots).map_err(err("∂z F"))?;
            }
        }
        let gs = [s.t, s.y, s.v];
        Ok(PointPartials {
            h_y,
            h_v,
            h_z,
            g_y: self.generator.d_y.eval(&gs).map_err(err("∂y g"))?,
            g_v: self.generator.d_v.eval(&gs).map_err(err("∂v g"))?,
        })
    }
}

/// `sup |y^σ| + sup |y^Δ|` over the summed points (nabla: `y^ρ`, `y^∇`).
pub fn trajectory_norm(problem: &Problem, y: &GridFunction) -> Result<f64, ProblemError> {
    let states = problem.states(y)?;
    let (mut sy, mut sv) = (0.0f64, 0.0f64);
    for i in problem.objective_range() {
        let s = states.get(i);
        sy = sy.max(s.y.abs());
        sv = sv.max(s.v.abs());
    }
    Ok(sy + sv)
}
