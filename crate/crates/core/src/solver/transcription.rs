//! Direct transcription: the functionals as explicit Cauchy sums over the
//! free values of `y`, and their finite-difference gradients.

use std::ops::Range;

use crate::problem::{PointState, Problem, ProblemError};
use crate::timescale::Flavor;

/// Relative step of the central differences.
pub const GRADIENT_STEP: f64 = 1e-6;

/// Weighted per-point terms `μ L` (resp. `ν L`) and the same for `F`.
#[derive(Debug, Clone, PartialEq)]
pub struct Terms {
    pub l: Vec<f64>,
    pub f: Option<Vec<f64>>,
}

impl Terms {
    pub fn l_value(&self) -> f64 {
        self.l.iter().sum()
    }

    pub fn f_value(&self) -> Option<f64> {
        self.f.as_ref().map(|f| f.iter().sum())
    }

    /// `Σ |terms|`, used to size rounding allowances.
    pub fn l_magnitude(&self) -> f64 {
        self.l.iter().map(|v| v.abs()).sum()
    }

    pub fn f_magnitude(&self) -> f64 {
        self.f
            .as_ref()
            .map_or(0.0, |f| f.iter().map(|v| v.abs()).sum())
    }
}

pub(crate) struct Transcription<'a> {
    problem: &'a Problem,
    /// Scale index of `y[0]`.
    start: usize,
    free: Vec<usize>,
    objective: Range<usize>,
    uses_z: bool,
}

impl<'a> Transcription<'a> {
    pub fn new(problem: &'a Problem) -> Self {
        Self {
            problem,
            start: problem.y_range().start,
            free: problem.free_indices(),
            objective: problem.objective_range(),
            uses_z: problem.uses_z(),
        }
    }

    pub fn free(&self) -> &[usize] {
        &self.free
    }

    pub fn start(&self) -> usize {
        self.start
    }

    pub fn embed(&self, template: &mut [f64], x: &[f64]) {
        for (&i, &v) in self.free.iter().zip(x) {
            template[i - self.start] = v;
        }
    }

    pub fn extract(&self, y: &[f64]) -> Vec<f64> {
        self.free.iter().map(|&i| y[i - self.start]).collect()
    }

    fn term_at(&self, y: &[f64], i: usize, z: f64) -> Result<(f64, Option<f64>), ProblemError> {
        let p = self.problem;
        let ts = p.scale();
        let (ys, v) = p.shifted_state(y, self.start, i);
        let s = PointState {
            t: ts.point(i),
            y: ys,
            v,
            z,
        };
        let w = ts.graininess(i, p.flavor());
        Ok((
            w * p.eval_lagrangian(&s)?,
            p.eval_constraint(&s)?.map(|f| w * f),
        ))
    }

    fn z_for(&self, y: &[f64]) -> Result<Option<Vec<f64>>, ProblemError> {
        if self.uses_z {
            Ok(Some(self.problem.z_values(y, self.start)?))
        } else {
            Ok(None)
        }
    }

    pub fn terms(&self, y: &[f64]) -> Result<Terms, ProblemError> {
        let z = self.z_for(y)?;
        let ia = self.problem.ia();
        let mut l = Vec::with_capacity(self.objective.len());
        let mut f = self
            .problem
            .has_constraint()
            .then(|| Vec::with_capacity(self.objective.len()));
        for i in self.objective.clone() {
            let zi = z.as_ref().map_or(0.0, |z| z[i - ia]);
            let (li, fi) = self.term_at(y, i, zi)?;
            l.push(li);
            if let (Some(f), Some(fi)) = (f.as_mut(), fi) {
                f.push(fi);
            }
        }
        Ok(Terms { l, f })
    }

    /// Objective points whose term reads `y` at scale index `j`.
    fn touching(&self, j: usize) -> impl Iterator<Item = usize> + '_ {
        let near = match self.problem.flavor() {
            Flavor::Delta => [j.wrapping_sub(1), j],
            Flavor::Nabla => [j, j + 1],
        };
        near.into_iter().filter(|i| self.objective.contains(i))
    }

    /// Sum of termwise differences `terms(y+) - terms(y-)` for `L` and `F`.
    fn difference(&self, yp: &[f64], ym: &[f64], j: usize) -> Result<(f64, f64), ProblemError> {
        let (mut dl, mut df) = (0.0, 0.0);
        if self.uses_z {
            let (tp, tm) = (self.terms(yp)?, self.terms(ym)?);
            dl = tp.l.iter().zip(&tm.l).map(|(a, b)| a - b).sum();
            if let (Some(fp), Some(fm)) = (&tp.f, &tm.f) {
                df = fp.iter().zip(fm).map(|(a, b)| a - b).sum();
            }
        } else {
            for i in self.touching(j) {
                let (lp, fp) = self.term_at(yp, i, 0.0)?;
                let (lm, fm) = self.term_at(ym, i, 0.0)?;
                dl += lp - lm;
                if let (Some(fp), Some(fm)) = (fp, fm) {
                    df += fp - fm;
                }
            }
        }
        Ok((dl, df))
    }

    /// Central-difference gradients of both functionals over the free
    /// coordinates.
    pub fn gradient(&self, y: &[f64]) -> Result<(Vec<f64>, Option<Vec<f64>>), ProblemError> {
        let mut yp = y.to_vec();
        let mut ym = y.to_vec();
        let mut dl = Vec::with_capacity(self.free.len());
        let mut df = self
            .problem
            .has_constraint()
            .then(|| Vec::with_capacity(self.free.len()));
        for &j in &self.free {
            let k = j - self.start;
            let x = y[k];
            let s = GRADIENT_STEP * x.abs().max(1.0);
            yp[k] = x + s;
            ym[k] = x - s;
            let h = yp[k] - ym[k];
            let (l, f) = self.difference(&yp, &ym, j)?;
            dl.push(l / h);
            if let Some(df) = df.as_mut() {
                df.push(f / h);
            }
            yp[k] = x;
            ym[k] = x;
        }
        Ok((dl, df))
    }
}
