//! Dense BFGS with a backtracking Armijo line search.

/// Armijo sufficient-decrease constant.
pub const ARMIJO_C: f64 = 1e-4;
/// Step shrink factor of the backtracking search.
pub const SHRINK: f64 = 0.5;
const MAX_HALVINGS: usize = 60;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Converged,
    MaxIterations,
    LineSearchFailed,
    /// Constraint violation stopped improving while the penalty kept growing.
    Stagnated,
}

impl std::fmt::Display for Status {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Status::Converged => "converged",
            Status::MaxIterations => "max-iterations",
            Status::LineSearchFailed => "line-search-failed",
            Status::Stagnated => "stagnated",
        })
    }
}

/// Something BFGS can minimize.
pub(crate) trait Objective {
    type Error;

    /// Value and a magnitude for the rounding allowance, or `None` where the
    /// objective cannot be evaluated.
    fn value(&mut self, x: &[f64]) -> Option<(f64, f64)>;

    fn gradient(&mut self, x: &[f64]) -> Result<Vec<f64>, Self::Error>;
}

#[derive(Debug, Clone)]
pub(crate) struct Outcome {
    pub x: Vec<f64>,
    /// Final inverse-Hessian estimate, reusable as a warm start.
    pub hessian: InverseHessian,
    pub grad_norm: f64,
    pub iterations: usize,
    pub status: Status,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn inf_norm(a: &[f64]) -> f64 {
    a.iter().fold(0.0, |m, v| m.max(v.abs()))
}

#[derive(Debug, Clone)]
pub(crate) struct InverseHessian {
    n: usize,
    h: Vec<f64>,
    identity: bool,
}

impl InverseHessian {
    pub fn new(n: usize) -> Self {
        let mut me = Self {
            n,
            h: vec![0.0; n * n],
            identity: true,
        };
        me.reset(1.0);
        me
    }

    fn reset(&mut self, scale: f64) {
        self.h.iter_mut().for_each(|v| *v = 0.0);
        for i in 0..self.n {
            self.h[i * self.n + i] = scale;
        }
        self.identity = true;
    }

    fn apply(&self, g: &[f64]) -> Vec<f64> {
        self.h.chunks(self.n).map(|row| dot(row, g)).collect()
    }

    /// Returns false (and leaves `H` untouched) when the curvature condition
    /// fails.
    fn update(&mut self, s: &[f64], y: &[f64]) -> bool {
        let sy = dot(s, y);
        let yy = dot(y, y);
        if !(sy > 1e-12 * dot(s, s).sqrt() * yy.sqrt()) {
            return false;
        }
        if self.identity {
            self.reset(sy / yy);
            self.identity = false;
        }
        let n = self.n;
        let hy = self.apply(y);
        let rho = 1.0 / sy;
        let coef = rho + rho * rho * dot(y, &hy);
        for i in 0..n {
            for j in 0..n {
                self.h[i * n + j] += coef * s[i] * s[j] - rho * (hy[i] * s[j] + s[i] * hy[j]);
            }
        }
        true
    }
}

/// Minimizes from `x0` until `‖∇f‖_∞ ≤ tol_grad` or `max_iter` iterations,
/// starting from the identity or from a previous inverse-Hessian estimate.
pub(crate) fn minimize<O: Objective>(
    obj: &mut O,
    x0: Vec<f64>,
    tol_grad: f64,
    max_iter: usize,
    warm: Option<InverseHessian>,
) -> Result<Outcome, O::Error> {
    let n = x0.len();
    let mut x = x0;
    let (mut f, mut mag) = obj.value(&x).unwrap_or((f64::INFINITY, 0.0));
    let mut g = if n == 0 {
        Vec::new()
    } else {
        obj.gradient(&x)?
    };
    let mut hess = warm
        .filter(|h| h.n == n)
        .unwrap_or_else(|| InverseHessian::new(n));
    let mut iterations = 0;
    let finish = |x, hessian, g: &[f64], iterations, status| Outcome {
        x,
        hessian,
        grad_norm: inf_norm(g),
        iterations,
        status,
    };
    loop {
        if inf_norm(&g) <= tol_grad {
            return Ok(finish(x, hess, &g, iterations, Status::Converged));
        }
        if iterations >= max_iter {
            return Ok(finish(x, hess, &g, iterations, Status::MaxIterations));
        }
        let mut d: Vec<f64> = hess.apply(&g).iter().map(|v| -v).collect();
        let mut slope = dot(&g, &d);
        if !(slope < 0.0) {
            hess.reset(1.0);
            d = g.iter().map(|v| -v).collect();
            slope = dot(&g, &d);
        }
        let step = match line_search(obj, &x, f, mag, &d, slope, hess.identity) {
            Some(step) => step,
            None if !hess.identity => {
                hess.reset(1.0);
                continue;
            }
            None => return Ok(finish(x, hess, &g, iterations, Status::LineSearchFailed)),
        };
        iterations += 1;
        let (x_new, f_new, mag_new) = step;
        let g_new = obj.gradient(&x_new)?;
        let s: Vec<f64> = x_new.iter().zip(&x).map(|(a, b)| a - b).collect();
        let dy: Vec<f64> = g_new.iter().zip(&g).map(|(a, b)| a - b).collect();
        if !hess.update(&s, &dy) {
            hess.reset(1.0);
        }
        x = x_new;
        f = f_new;
        mag = mag_new;
        g = g_new;
    }
}

fn line_search<O: Objective>(
    obj: &mut O,
    x: &[f64],
    f: f64,
    mag: f64,
    d: &[f64],
    slope: f64,
    fresh: bool,
) -> Option<(Vec<f64>, f64, f64)> {
    let mut alpha = if fresh {
        (1.0 / inf_norm(d)).min(1.0)
    } else {
        1.0
    };
    for _ in 0..MAX_HALVINGS {
        let trial: Vec<f64> = x.iter().zip(d).map(|(a, b)| a + alpha * b).collect();
        if let Some((ft, mt)) = obj.value(&trial) {
            let allowance = 4.0 * f64::EPSILON * (mag + mt);
            if ft.is_finite() && ft <= f + ARMIJO_C * alpha * slope + allowance {
                return Some((trial, ft, mt));
            }
        }
        alpha *= SHRINK;
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    struct Rosenbrock;

    impl Objective for Rosenbrock {
        type Error = ();

        fn value(&mut self, x: &[f64]) -> Option<(f64, f64)> {
            let a = 1.0 - x[0];
            let b = x[1] - x[0] * x[0];
            Some((a * a + 100.0 * b * b, 1.0))
        }

        fn gradient(&mut self, x: &[f64]) -> Result<Vec<f64>, ()> {
            let b = x[1] - x[0] * x[0];
            Ok(vec![-2.0 * (1.0 - x[0]) - 400.0 * x[0] * b, 200.0 * b])
        }
    }

    struct Quadratic(Vec<f64>);

    impl Objective for Quadratic {
        type Error = ();

        fn value(&mut self, x: &[f64]) -> Option<(f64, f64)> {
            Some((
                x.iter()
                    .zip(&self.0)
                    .map(|(v, c)| c * (v - 1.0) * (v - 1.0))
                    .sum(),
                1.0,
            ))
        }

        fn gradient(&mut self, x: &[f64]) -> Result<Vec<f64>, ()> {
            Ok(x.iter()
                .zip(&self.0)
                .map(|(v, c)| 2.0 * c * (v - 1.0))
                .collect())
        }
    }

    #[test]
    fn rosenbrock() {
        let out = minimize(&mut Rosenbrock, vec![-1.2, 1.0], 1e-10, 500, None).unwrap();
        assert_eq!(out.status, Status::Converged);
        assert!((out.x[0] - 1.0).abs() < 1e-8 && (out.x[1] - 1.0).abs() < 1e-8);
    }

    #[test]
    fn ill_conditioned_quadratic() {
        let c: Vec<f64> = (0..30).map(|i| 10f64.powf(i as f64 / 6.0)).collect();
        let out = minimize(&mut Quadratic(c), vec![0.0; 30], 1e-9, 500, None).unwrap();
        assert_eq!(out.status, Status::Converged);
        assert!(out.x.iter().all(|v| (v - 1.0).abs() < 1e-9));
    }

    #[test]
    fn iteration_cap() {
        let out = minimize(&mut Rosenbrock, vec![-1.2, 1.0], 1e-12, 3, None).unwrap();
        assert_eq!(out.status, Status::MaxIterations);
        assert_eq!(out.iterations, 3);
    }

    #[test]
    fn empty_problem_converges_immediately() {
        let out = minimize(&mut Quadratic(vec![]), vec![], 1e-9, 10, None).unwrap();
        assert_eq!(out.status, Status::Converged);
    }
}
