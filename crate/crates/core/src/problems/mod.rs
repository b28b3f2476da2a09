//! Analytic benchmark problems standing in for an expensive simulator.
//!
//! Every problem evaluates in native units and returns objectives in their
//! natural sense; [`crate::objective::ProblemObjectives`] handles
//! normalization and sign conventions. All problems are total on their
//! tolerance-extended spaces.

pub mod motor;

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::objective::ObjectiveInfo;
use crate::space::DesignSpace;

pub use motor::MotorSynthetic;

/// Known reference data shipped with a problem.
#[derive(Clone, Debug, Default)]
pub struct GroundTruth {
    /// Known minimizer (native units) and its objective values.
    pub optimum: Option<(Vec<f64>, Vec<f64>)>,
    /// Closed-form first-order and total Sobol indices (single-output problems).
    pub first_order: Option<Vec<f64>>,
    pub total: Option<Vec<f64>>,
    /// Variables the problem is built to rank as most influential.
    pub influential: Vec<String>,
    /// Known minimizer of the expectation formulation, when there is one.
    pub robust_optimum: Option<Vec<f64>>,
}

pub trait Problem: Send + Sync {
    fn name(&self) -> &str;

    fn description(&self) -> &str;

    /// Nominal design space with the problem's default tolerances.
    fn space(&self) -> &DesignSpace;

    fn objectives(&self) -> &[ObjectiveInfo];

    /// Objective values in their natural sense at a native-unit point.
    fn evaluate(&self, x: &[f64]) -> Result<Vec<f64>>;

    fn ground_truth(&self) -> GroundTruth {
        GroundTruth::default()
    }
}

fn check_dim(x: &[f64], d: usize) -> Result<()> {
    if x.len() == d {
        Ok(())
    } else {
        Err(Error::DimensionMismatch {
            expected: d,
            found: x.len(),
        })
    }
}

pub const ISHIGAMI_A: f64 = 7.0;
pub const ISHIGAMI_B: f64 = 0.1;

/// `sin x1 + a sin^2 x2 + b x3^4 sin x1` with `a = 7`, `b = 0.1`.
pub fn ishigami(x: &[f64]) -> f64 {
    x[0].sin() + ISHIGAMI_A * x[1].sin().powi(2) + ISHIGAMI_B * x[2].powi(4) * x[0].sin()
}

/// Closed-form Sobol indices of the Ishigami function for uniform inputs on
/// `[-pi, pi]^3`: `(first_order, total)`.
pub fn ishigami_indices(a: f64, b: f64) -> (Vec<f64>, Vec<f64>) {
    let pi4 = PI.powi(4);
    let pi8 = PI.powi(8);
    let v1 = 0.5 * (1.0 + b * pi4 / 5.0).powi(2);
    let v2 = a * a / 8.0;
    let v13 = 8.0 * b * b * pi8 / 225.0;
    let v = a * a / 8.0 + b * pi4 / 5.0 + b * b * pi8 / 18.0 + 0.5;
    (vec![v1 / v, v2 / v, 0.0], vec![(v1 + v13) / v, v2 / v, v13 / v])
}

/// ZDT1: `f1 = x1`, `g = 1 + 9 mean(x2..xd)`, `f2 = g (1 - sqrt(f1 / g))`.
/// Coordinates are clamped to `[0, 1]` so the function stays defined on
/// tolerance-extended boxes.
pub fn zdt1(x: &[f64]) -> [f64; 2] {
    let f1 = x[0].clamp(0.0, 1.0);
    let tail = &x[1..];
    let g = 1.0 + 9.0 * tail.iter().map(|v| v.clamp(0.0, 1.0)).sum::<f64>() / tail.len() as f64;
    [f1, g * (1.0 - (f1 / g).sqrt())]
}

/// True ZDT1 front: `f2 = 1 - sqrt(f1)`.
pub fn zdt1_front(f1: f64) -> f64 {
    1.0 - f1.clamp(0.0, 1.0).sqrt()
}

/// Narrow deep valley at 0.25, wide shallower valley at 0.75.
pub fn robust_1d(x: f64) -> f64 {
    -1.2 * (-((x - 0.25) / 0.03).powi(2)).exp() - 1.0 * (-((x - 0.75) / 0.20).powi(2)).exp()
}

pub struct Ishigami {
    space: DesignSpace,
    infos: Vec<ObjectiveInfo>,
}

impl Default for Ishigami {
    fn default() -> Self {
        Ishigami {
            space: DesignSpace::uniform(3, -PI, PI, 0.0, false),
            infos: vec![ObjectiveInfo::minimize("y", "")],
        }
    }
}

impl Problem for Ishigami {
    fn name(&self) -> &str {
        "ishigami"
    }

    fn description(&self) -> &str {
        "Ishigami function (a = 7, b = 0.1) on [-pi, pi]^3; Sobol oracle"
    }

    fn space(&self) -> &DesignSpace {
        &self.space
    }

    fn objectives(&self) -> &[ObjectiveInfo] {
        &self.infos
    }

    fn evaluate(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_dim(x, 3)?;
        Ok(vec![ishigami(x)])
    }

    fn ground_truth(&self) -> GroundTruth {
        let (s, st) = ishigami_indices(ISHIGAMI_A, ISHIGAMI_B);
        GroundTruth {
            first_order: Some(s),
            total: Some(st),
            influential: vec!["x1".into(), "x2".into(), "x3".into()],
            ..GroundTruth::default()
        }
    }
}

pub struct Zdt1 {
    space: DesignSpace,
    infos: Vec<ObjectiveInfo>,
}

impl Zdt1 {
    pub fn new(dim: usize) -> Result<Self> {
        if dim < 2 {
            return Err(Error::invalid("zdt1 needs d >= 2"));
        }
        Ok(Zdt1 {
            space: DesignSpace::uniform(dim, 0.0, 1.0, 0.0, false),
            infos: vec![ObjectiveInfo::minimize("f1", ""), ObjectiveInfo::minimize("f2", "")],
        })
    }
}

impl Problem for Zdt1 {
    fn name(&self) -> &str {
        "zdt1"
    }

    fn description(&self) -> &str {
        "ZDT1 bi-objective benchmark on [0,1]^d; front f2 = 1 - sqrt(f1)"
    }

    fn space(&self) -> &DesignSpace {
        &self.space
    }

    fn objectives(&self) -> &[ObjectiveInfo] {
        &self.infos
    }

    fn evaluate(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_dim(x, self.space.dim())?;
        Ok(zdt1(x).to_vec())
    }
}

pub struct Robust1d {
    space: DesignSpace,
    infos: Vec<ObjectiveInfo>,
}

impl Default for Robust1d {
    fn default() -> Self {
        Robust1d {
            space: DesignSpace::uniform(1, 0.0, 1.0, 0.1, true),
            infos: vec![ObjectiveInfo::minimize("f", "")],
        }
    }
}

impl Problem for Robust1d {
    fn name(&self) -> &str {
        "robust_1d"
    }

    fn description(&self) -> &str {
        "1-D narrow/wide valley pair; deterministic and expectation minimizers differ (tolerance 0.1)"
    }

    fn space(&self) -> &DesignSpace {
        &self.space
    }

    fn objectives(&self) -> &[ObjectiveInfo] {
        &self.infos
    }

    fn evaluate(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_dim(x, 1)?;
        Ok(vec![robust_1d(x[0])])
    }

    fn ground_truth(&self) -> GroundTruth {
        GroundTruth {
            optimum: Some((vec![0.25], vec![robust_1d(0.25)])),
            robust_optimum: Some(vec![0.75]),
            influential: vec!["x1".into()],
            ..GroundTruth::default()
        }
    }
}

/// `sum x_j^2` on `[-1, 1]^2` with tolerance 0.3 on both variables.
pub struct Quadratic {
    space: DesignSpace,
    infos: Vec<ObjectiveInfo>,
}

pub const QUADRATIC_TOLERANCE: f64 = 0.3;

impl Default for Quadratic {
    fn default() -> Self {
        Quadratic {
            space: DesignSpace::uniform(2, -1.0, 1.0, QUADRATIC_TOLERANCE, true),
            infos: vec![ObjectiveInfo::minimize("f", "")],
        }
    }
}

impl Problem for Quadratic {
    fn name(&self) -> &str {
        "quadratic"
    }

    fn description(&self) -> &str {
        "Convex quadratic sum x_j^2 on [-1,1]^2, tolerance 0.3; closed-form expectation and worst case"
    }

    fn space(&self) -> &DesignSpace {
        &self.space
    }

    fn objectives(&self) -> &[ObjectiveInfo] {
        &self.infos
    }

    fn evaluate(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_dim(x, 2)?;
        Ok(vec![x.iter().map(|v| v * v).sum()])
    }

    fn ground_truth(&self) -> GroundTruth {
        GroundTruth {
            optimum: Some((vec![0.0, 0.0], vec![0.0])),
            robust_optimum: Some(vec![0.0, 0.0]),
            influential: vec!["x1".into(), "x2".into()],
            ..GroundTruth::default()
        }
    }
}

/// Registry listing entry.
#[derive(Clone, Debug)]
pub struct RegistryEntry {
    pub name: &'static str,
    pub dim: usize,
    pub objectives: usize,
    pub description: String,
}

pub const NAMES: [&str; 5] = ["ishigami", "zdt1", "robust_1d", "quadratic", "motor_synthetic"];

/// Builds a problem by name; `dim` only applies to problems with a free
/// dimension (zdt1, default 8).
pub fn by_name(name: &str, dim: Option<usize>) -> Result<Box<dyn Problem>> {
    let fixed = |d: usize| match dim {
        Some(k) if k != d => Err(Error::Config(format!("problem `{name}` has fixed dimension {d}, got {k}"))),
        _ => Ok(()),
    };
    Ok(match name {
        "ishigami" => {
            fixed(3)?;
            Box::new(Ishigami::default())
        }
        "zdt1" => Box::new(Zdt1::new(dim.unwrap_or(8))?),
        "robust_1d" => {
            fixed(1)?;
            Box::new(Robust1d::default())
        }
        "quadratic" => {
            fixed(2)?;
            Box::new(Quadratic::default())
        }
        "motor_synthetic" => {
            fixed(12)?;
            Box::new(MotorSynthetic::default())
        }
        other => return Err(Error::Config(format!("unknown problem `{other}` (known: {})", NAMES.join(", ")))),
    })
}

pub fn registry() -> Vec<RegistryEntry> {
    NAMES
        .iter()
        .map(|&n| {
            let p = by_name(n, None).expect("registered problem");
            RegistryEntry {
                name: n,
                dim: p.space().dim(),
                objectives: p.objectives().len(),
                description: p.description().to_string(),
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::moo::dominates;
    use crate::sampling::maximin_lhs;

    #[test]
    fn ishigami_examples() {
        assert_eq!(ishigami(&[0.0, 0.0, 0.0]), 0.0);
        assert!((ishigami(&[PI / 2.0, 0.0, 0.0]) - 1.0).abs() < 1e-15);
        assert!((ishigami(&[0.0, PI / 2.0, 0.0]) - 7.0).abs() < 1e-14);
    }

    #[test]
    fn ishigami_matches_independent_formula() {
        let mut rng = crate::seed::rng(1);
        use rand::Rng;
        for _ in 0..200 {
            let x: Vec<f64> = (0..3).map(|_| rng.gen_range(-PI..PI)).collect();
            let reference = x[0].sin() + 7.0 * x[1].sin() * x[1].sin() + 0.1 * x[2] * x[2] * x[2] * x[2] * x[0].sin();
            assert!((ishigami(&x) - reference).abs() <= 1e-12);
        }
    }

    #[test]
    fn ishigami_closed_form_indices() {
        let (s, st) = ishigami_indices(7.0, 0.1);
        // reference values evaluated with 30-digit arithmetic
        let want_s = [0.313_905_191_147_811_45, 0.442_411_144_790_040_8, 0.0];
        let want_t = [0.557_588_855_209_959_2, 0.442_411_144_790_040_8, 0.243_683_664_062_147_73];
        for j in 0..3 {
            assert!((s[j] - want_s[j]).abs() < 1e-12);
            assert!((st[j] - want_t[j]).abs() < 1e-12);
        }
    }

    #[test]
    fn zdt1_examples() {
        let mut x = vec![0.0; 8];
        x[0] = 0.25;
        assert_eq!(zdt1(&x), [0.25, 0.5]);
        assert_eq!(zdt1(&[0.0; 8]), [0.0, 1.0]);
        for f1 in [0.0, 0.1, 0.5, 0.9, 1.0] {
            let mut x = vec![0.0; 5];
            x[0] = f1;
            assert!((zdt1(&x)[1] - zdt1_front(f1)).abs() < 1e-15);
        }
    }

    #[test]
    fn zdt1_front_points_dominate_interior() {
        let front: Vec<[f64; 2]> = (0..20).map(|i| zdt1(&[i as f64 / 19.0, 0.0, 0.0])).collect();
        for a in &front {
            for b in &front {
                assert!(!dominates(a, b));
            }
        }
        for i in 0..20 {
            let x = [i as f64 / 19.0, 0.3, 0.1];
            let interior = zdt1(&x);
            let on = zdt1(&[x[0], 0.0, 0.0]);
            assert!(dominates(&on, &interior));
        }
    }

    #[test]
    fn robust_1d_valley_facts() {
        assert!(robust_1d(0.25) < robust_1d(0.75));
        assert!(robust_1d(0.25) < -1.2);
    }

    #[test]
    fn every_problem_is_total_on_its_extended_box() {
        for name in NAMES {
            let p = by_name(name, None).unwrap();
            let space = p.space().with_uncertain(&vec![true; p.space().dim()]);
            let space = match space {
                Ok(s) if s.validate().is_empty() => s,
                _ => p.space().clone(),
            };
            let ext = space.extended_space().unwrap();
            let n = 10_000;
            let s = maximin_lhs(n, ext.dim(), 3, 0).unwrap();
            for z in s.rows() {
                let x = ext.from_unit(z);
                let v = p.evaluate(&x).unwrap();
                assert_eq!(v.len(), p.objectives().len());
                assert!(v.iter().all(|y| y.is_finite()), "{name} at {x:?}");
            }
        }
    }

    #[test]
    fn registry_lists_every_problem() {
        let r = registry();
        assert_eq!(r.len(), NAMES.len());
        assert!(r.iter().any(|e| e.name == "motor_synthetic" && e.dim == 12 && e.objectives == 2));
        assert!(by_name("nope", None).is_err());
        assert!(by_name("ishigami", Some(4)).is_err());
        assert_eq!(by_name("zdt1", Some(5)).unwrap().space().dim(), 5);
    }
}
