//! Black-box objective interfaces shared by optimizers and robust wrappers.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::problems::Problem;
use crate::space::DesignSpace;
use crate::surrogate::KrigingModel;

/// Name, unit and sense of one objective. Optimizers always minimize; an
/// objective with `maximize = true` is negated on the way in and restored on
/// the way out.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ObjectiveInfo {
    pub name: String,
    pub unit: String,
    pub maximize: bool,
}

impl ObjectiveInfo {
    pub fn minimize(name: &str, unit: &str) -> Self {
        ObjectiveInfo {
            name: name.to_string(),
            unit: unit.to_string(),
            maximize: false,
        }
    }

    pub fn maximize(name: &str, unit: &str) -> Self {
        ObjectiveInfo {
            maximize: true,
            ..ObjectiveInfo::minimize(name, unit)
        }
    }

    /// Natural value to minimization value, and back (the map is an involution).
    #[inline]
    pub fn to_min(&self, v: f64) -> f64 {
        if self.maximize {
            -v
        } else {
            v
        }
    }

    #[inline]
    pub fn to_natural(&self, v: f64) -> f64 {
        self.to_min(v)
    }

    pub fn label(&self) -> String {
        if self.unit.is_empty() {
            self.name.clone()
        } else {
            format!("{} [{}]", self.name, self.unit)
        }
    }
}

/// `m` objectives to minimize over normalized coordinates.
pub trait Objectives: Sync {
    fn dim(&self) -> usize;

    fn n_objectives(&self) -> usize;

    fn evaluate(&self, x: &[f64]) -> Result<Vec<f64>>;

    /// Objective `j` alone. Implementations with separable objectives should
    /// override this to skip the others.
    fn evaluate_one(&self, x: &[f64], j: usize) -> Result<f64> {
        Ok(self.evaluate(x)?[j])
    }

    /// Objective `j` as a function of offsets along `active`, every other
    /// coordinate frozen at `x`. Inner solvers call this once per run, so
    /// implementations may precompute the frozen part.
    fn partial_one<'s>(&'s self, x: &[f64], active: &[usize], j: usize) -> Result<PartialFn<'s>> {
        let active = active.to_vec();
        let mut buf = x.to_vec();
        let x = x.to_vec();
        Ok(Box::new(move |u: &[f64]| {
            buf.copy_from_slice(&x);
            for (&k, du) in active.iter().zip(u) {
                buf[k] += du;
            }
            self.evaluate_one(&buf, j)
        }))
    }
}

/// See [`Objectives::partial_one`].
pub type PartialFn<'s> = Box<dyn FnMut(&[f64]) -> Result<f64> + 's>;

/// Closure-backed objectives, mostly for tests and small studies.
pub struct FnObjectives<F> {
    dim: usize,
    m: usize,
    f: F,
}

impl<F> FnObjectives<F>
where
    F: Fn(&[f64]) -> Vec<f64> + Sync,
{
    pub fn new(dim: usize, m: usize, f: F) -> Self {
        FnObjectives { dim, m, f }
    }
}

impl<F> Objectives for FnObjectives<F>
where
    F: Fn(&[f64]) -> Vec<f64> + Sync,
{
    fn dim(&self) -> usize {
        self.dim
    }

    fn n_objectives(&self) -> usize {
        self.m
    }

    fn evaluate(&self, x: &[f64]) -> Result<Vec<f64>> {
        let v = (self.f)(x);
        if v.iter().any(|y| !y.is_finite()) {
            return Err(Error::Evaluation {
                x: x.to_vec(),
                reason: "non-finite objective value".into(),
            });
        }
        Ok(v)
    }
}

/// A [`Problem`] seen through normalized coordinates and minimization signs.
pub struct ProblemObjectives<'a> {
    problem: &'a dyn Problem,
    space: DesignSpace,
}

impl<'a> ProblemObjectives<'a> {
    pub fn new(problem: &'a dyn Problem) -> Self {
        ProblemObjectives {
            space: problem.space().clone(),
            problem,
        }
    }
}

impl Objectives for ProblemObjectives<'_> {
    fn dim(&self) -> usize {
        self.space.dim()
    }

    fn n_objectives(&self) -> usize {
        self.problem.objectives().len()
    }

    fn evaluate(&self, x: &[f64]) -> Result<Vec<f64>> {
        let native = self.space.denormalize(x);
        let v = self.problem.evaluate(&native).map_err(|e| match e {
            Error::Evaluation { reason, .. } => Error::Evaluation { x: native.clone(), reason },
            other => Error::Evaluation {
                x: native.clone(),
                reason: other.to_string(),
            },
        })?;
        Ok(v
            .iter()
            .zip(self.problem.objectives())
            .map(|(y, info)| info.to_min(*y))
            .collect())
    }
}

/// One Kriging model per objective, over normalized coordinates.
pub struct SurrogateObjectives {
    models: Vec<KrigingModel>,
    infos: Vec<ObjectiveInfo>,
}

impl SurrogateObjectives {
    pub fn new(models: Vec<KrigingModel>, infos: Vec<ObjectiveInfo>) -> Result<Self> {
        if models.is_empty() || models.len() != infos.len() {
            return Err(Error::invalid("need one model per objective"));
        }
        let d = models[0].dim();
        if models.iter().any(|m| m.dim() != d) {
            return Err(Error::invalid("surrogate models disagree on dimension"));
        }
        Ok(SurrogateObjectives { models, infos })
    }

    pub fn models(&self) -> &[KrigingModel] {
        &self.models
    }

    pub fn infos(&self) -> &[ObjectiveInfo] {
        &self.infos
    }
}

impl Objectives for SurrogateObjectives {
    fn dim(&self) -> usize {
        self.models[0].dim()
    }

    fn n_objectives(&self) -> usize {
        self.models.len()
    }

    fn evaluate(&self, x: &[f64]) -> Result<Vec<f64>> {
        (0..self.models.len()).map(|j| self.evaluate_one(x, j)).collect()
    }

    fn evaluate_one(&self, x: &[f64], j: usize) -> Result<f64> {
        let m = &self.models[j];
        if x.len() != m.dim() {
            return Err(Error::DimensionMismatch {
                expected: m.dim(),
                found: x.len(),
            });
        }
        Ok(self.infos[j].to_min(m.mean_unchecked(x)))
    }

    fn partial_one<'s>(&'s self, x: &[f64], active: &[usize], j: usize) -> Result<PartialFn<'s>> {
        let mut pm = self.models[j].partial_mean(x, active)?;
        let info = &self.infos[j];
        Ok(Box::new(move |u: &[f64]| Ok(info.to_min(pm.mean(u)))))
    }
}
