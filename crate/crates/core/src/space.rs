//! Design variables, manufacturing tolerances and the robust search regions.
//!
//! Variables are stored in native units. Everything downstream of this module
//! (kernels, optimizers, perturbation clouds) works in coordinates normalized
//! against the nominal bounds, so `[lower, upper]` maps to `[0, 1]` and the
//! tolerance-extended region maps slightly outside it.

use std::collections::HashSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One continuous design variable.
///
/// `tolerance` is the half-width of the manufacturing tolerance band as
/// listed for the part. It only takes effect when `uncertain` is set; a
/// variable that is not treated as uncertain contributes a zero-width
/// perturbation regardless of its listed tolerance.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Variable {
    pub name: String,
    pub lower: f64,
    pub upper: f64,
    #[serde(default)]
    pub tolerance: f64,
    #[serde(default)]
    pub uncertain: bool,
}

impl Variable {
    pub fn new(name: impl Into<String>, lower: f64, upper: f64, tolerance: f64) -> Self {
        Variable {
            name: name.into(),
            lower,
            upper,
            tolerance,
            uncertain: false,
        }
    }

    pub fn uncertain(mut self, flag: bool) -> Self {
        self.uncertain = flag;
        self
    }

    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }

    /// Tolerance actually applied in robust evaluations.
    pub fn effective_tolerance(&self) -> f64 {
        if self.uncertain {
            self.tolerance
        } else {
            0.0
        }
    }
}

/// A single invariant violation reported by [`DesignSpace::validate`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Violation {
    pub variable: String,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.variable, self.message)
    }
}

/// Axis-aligned box, one closed interval per dimension.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Bounds {
    intervals: Vec<(f64, f64)>,
}

impl Bounds {
    pub fn new(intervals: Vec<(f64, f64)>) -> Result<Self> {
        let b = Bounds { intervals };
        b.check()?;
        Ok(b)
    }

    pub fn unit(dim: usize) -> Self {
        Bounds {
            intervals: vec![(0.0, 1.0); dim],
        }
    }

    pub fn uniform(dim: usize, low: f64, high: f64) -> Result<Self> {
        Bounds::new(vec![(low, high); dim])
    }

    pub fn check(&self) -> Result<()> {
        for (j, &(lo, hi)) in self.intervals.iter().enumerate() {
            if !(lo.is_finite() && hi.is_finite()) || lo > hi {
                return Err(Error::invalid(format!(
                    "box dimension {j} has invalid interval [{lo}, {hi}]"
                )));
            }
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.intervals.len()
    }

    pub fn intervals(&self) -> &[(f64, f64)] {
        &self.intervals
    }

    pub fn low(&self, j: usize) -> f64 {
        self.intervals[j].0
    }

    pub fn high(&self, j: usize) -> f64 {
        self.intervals[j].1
    }

    pub fn width(&self, j: usize) -> f64 {
        self.intervals[j].1 - self.intervals[j].0
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.dim()
            && x
                .iter()
                .zip(&self.intervals)
                .all(|(v, &(lo, hi))| *v >= lo && *v <= hi)
    }

    pub fn is_zero(&self) -> bool {
        self.intervals.iter().all(|&(lo, hi)| lo == 0.0 && hi == 0.0)
    }

    pub fn clamp(&self, x: &mut [f64]) {
        for (v, &(lo, hi)) in x.iter_mut().zip(&self.intervals) {
            *v = v.clamp(lo, hi);
        }
    }

    /// Maps a point of the unit cube into the box; zero-width dimensions get
    /// the interval's constant value exactly.
    pub fn from_unit(&self, z: &[f64]) -> Vec<f64> {
        z.iter()
            .zip(&self.intervals)
            .map(|(v, &(lo, hi))| if lo == hi { lo } else { lo + v * (hi - lo) })
            .collect()
    }
}

/// Ordered set of design variables.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DesignSpace {
    variables: Vec<Variable>,
}

impl DesignSpace {
    /// Builds a space without validating it; see [`DesignSpace::validate`].
    pub fn new(variables: Vec<Variable>) -> Self {
        DesignSpace { variables }
    }

    /// Builds a space and rejects it if any invariant fails.
    pub fn checked(variables: Vec<Variable>) -> Result<Self> {
        let s = DesignSpace::new(variables);
        s.ensure_valid()?;
        Ok(s)
    }

    /// A space of `dim` unnamed variables `x1..xd` on a common interval.
    pub fn uniform(dim: usize, lower: f64, upper: f64, tolerance: f64, uncertain: bool) -> Self {
        DesignSpace::new(
            (0..dim)
                .map(|j| {
                    Variable::new(format!("x{}", j + 1), lower, upper, tolerance).uncertain(uncertain)
                })
                .collect(),
        )
    }

    pub fn variables(&self) -> &[Variable] {
        &self.variables
    }

    pub fn dim(&self) -> usize {
        self.variables.len()
    }

    pub fn names(&self) -> Vec<String> {
        self.variables.iter().map(|v| v.name.clone()).collect()
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.variables.iter().position(|v| v.name == name)
    }

    /// Every invariant violation, tagged with the offending variable's name.
    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        let mut push = |name: &str, message: &str| {
            out.push(Violation {
                variable: name.to_string(),
                message: message.to_string(),
            })
        };
        if self.variables.is_empty() {
            push("<space>", "space has no variables");
        }
        let mut seen = HashSet::new();
        for v in &self.variables {
            if !seen.insert(v.name.as_str()) {
                push(&v.name, "duplicate variable name");
            }
            if v.name.trim().is_empty() {
                push(&v.name, "empty variable name");
            }
            if !(v.lower.is_finite() && v.upper.is_finite()) {
                push(&v.name, "non-finite bound");
                continue;
            }
            if !(v.lower < v.upper) {
                push(&v.name, "lower < upper");
            }
            if !(v.tolerance >= 0.0) || !v.tolerance.is_finite() {
                push(&v.name, "tolerance >= 0");
            }
            if v.uncertain && v.tolerance == 0.0 {
                push(&v.name, "zero tolerance on uncertain variable");
            }
            if v.lower < v.upper && v.tolerance >= (v.upper - v.lower) / 2.0 {
                push(&v.name, "tolerance < (upper - lower) / 2");
            }
        }
        out
    }

    pub fn ensure_valid(&self) -> Result<()> {
        let v = self.validate();
        if v.is_empty() {
            Ok(())
        } else {
            let msgs: Vec<String> = v.iter().map(ToString::to_string).collect();
            Err(Error::InvalidSpace(msgs.join("; ")))
        }
    }

    /// Nominal box `[lower, upper]` per dimension.
    pub fn nominal(&self) -> Bounds {
        Bounds {
            intervals: self.variables.iter().map(|v| (v.lower, v.upper)).collect(),
        }
    }

    /// The perturbation box: `[-u, u]` per uncertain dimension, `[0, 0]` elsewhere.
    pub fn perturbation_box(&self) -> Result<Bounds> {
        self.ensure_valid()?;
        Ok(Bounds {
            intervals: self
                .variables
                .iter()
                .map(|v| {
                    let u = v.effective_tolerance();
                    if u == 0.0 {
                        (0.0, 0.0)
                    } else {
                        (-u, u)
                    }
                })
                .collect(),
        })
    }

    /// The tolerance-extended space `[lower - u, upper + u]`.
    pub fn extended_space(&self) -> Result<Bounds> {
        self.ensure_valid()?;
        Ok(Bounds {
            intervals: self
                .variables
                .iter()
                .map(|v| {
                    let u = v.effective_tolerance();
                    (v.lower - u, v.upper + u)
                })
                .collect(),
        })
    }

    /// Perturbation half-widths expressed in normalized coordinates.
    pub fn normalized_half_widths(&self) -> Vec<f64> {
        self.variables
            .iter()
            .map(|v| v.effective_tolerance() / v.width())
            .collect()
    }

    /// Perturbation box in normalized coordinates.
    pub fn normalized_perturbation_box(&self) -> Result<Bounds> {
        self.ensure_valid()?;
        Ok(Bounds {
            intervals: self
                .normalized_half_widths()
                .into_iter()
                .map(|h| if h == 0.0 { (0.0, 0.0) } else { (-h, h) })
                .collect(),
        })
    }

    /// Extended space in normalized coordinates.
    pub fn normalized_extended(&self) -> Bounds {
        Bounds {
            intervals: self
                .normalized_half_widths()
                .into_iter()
                .map(|h| (-h, 1.0 + h))
                .collect(),
        }
    }

    /// Affine map of a native point into normalized coordinates. Points must
    /// lie in the extended space (a relative slack of 1e-9 absorbs round-off).
    pub fn normalize(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: x.len(),
            });
        }
        let mut z = Vec::with_capacity(x.len());
        for (j, (v, var)) in x.iter().zip(&self.variables).enumerate() {
            let u = var.effective_tolerance();
            let (lo, hi) = (var.lower - u, var.upper + u);
            let slack = 1e-9 * (hi - lo).abs().max(1.0);
            if !(*v >= lo - slack && *v <= hi + slack) {
                return Err(Error::OutOfBounds {
                    dim: j,
                    value: *v,
                    low: lo,
                    high: hi,
                });
            }
            z.push((v - var.lower) / var.width());
        }
        Ok(z)
    }

    /// The affine map of [`DesignSpace::normalize`] without the bounds check.
    pub fn normalize_unchecked(&self, x: &[f64]) -> Vec<f64> {
        x.iter()
            .zip(&self.variables)
            .map(|(v, var)| (v - var.lower) / var.width())
            .collect()
    }

    /// Inverse of [`DesignSpace::normalize`]; accepts any real coordinates.
    pub fn denormalize(&self, z: &[f64]) -> Vec<f64> {
        z.iter()
            .zip(&self.variables)
            .map(|(v, var)| var.lower + v * var.width())
            .collect()
    }

    /// Same variables with the uncertain flags replaced.
    pub fn with_uncertain(&self, flags: &[bool]) -> Result<Self> {
        if flags.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: flags.len(),
            });
        }
        Ok(DesignSpace {
            variables: self
                .variables
                .iter()
                .zip(flags)
                .map(|(v, &f)| v.clone().uncertain(f))
                .collect(),
        })
    }

    pub fn uncertain_flags(&self) -> Vec<bool> {
        self.variables.iter().map(|v| v.uncertain).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::motor::machine_space;
    use rand::Rng;

    fn table_all_uncertain() -> DesignSpace {
        let s = machine_space();
        s.with_uncertain(&vec![true; s.dim()]).unwrap()
    }

    #[test]
    fn machine_space_is_valid() {
        assert!(machine_space().validate().is_empty());
        assert!(table_all_uncertain().validate().is_empty());
        assert_eq!(machine_space().dim(), 12);
    }

    #[test]
    fn degenerate_interval_is_reported() {
        let s = DesignSpace::new(vec![Variable::new("a", 1.0, 1.0, 0.0)]);
        let v = s.validate();
        assert!(v.iter().any(|v| v.variable == "a" && v.message == "lower < upper"));
    }

    #[test]
    fn uncertain_without_tolerance_is_reported() {
        let s = DesignSpace::new(vec![Variable::new("a", 0.0, 1.0, 0.0).uncertain(true)]);
        let v = s.validate();
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].message, "zero tolerance on uncertain variable");
    }

    #[test]
    fn oversized_tolerance_and_duplicates_are_reported() {
        let s = DesignSpace::new(vec![
            Variable::new("a", 0.0, 1.0, 0.5),
            Variable::new("a", 0.0, 1.0, 0.1),
        ]);
        let v = s.validate();
        assert!(v.iter().any(|v| v.message.starts_with("tolerance <")));
        assert!(v.iter().any(|v| v.message == "duplicate variable name"));
        assert!(s.perturbation_box().is_err());
    }

    #[test]
    fn perturbation_box_follows_uncertain_flags() {
        let mut flags = vec![false; 12];
        flags[0] = true;
        let s = machine_space().with_uncertain(&flags).unwrap();
        let omega = s.perturbation_box().unwrap();
        assert_eq!(omega.intervals()[0], (-0.1, 0.1));
        let airgap = s.index_of("Airgap").unwrap();
        assert_eq!(omega.intervals()[airgap], (0.0, 0.0));
        assert!(machine_space().perturbation_box().unwrap().is_zero());
    }

    #[test]
    fn extended_space_widens_by_tolerance() {
        let s = table_all_uncertain();
        let ext = s.extended_space().unwrap();
        let (lo, hi) = ext.intervals()[0];
        assert!((lo - 2.37).abs() < 1e-12 && (hi - 3.37).abs() < 1e-12);
        let b = s.index_of("Beta_L1_P1").unwrap();
        let (lo, hi) = ext.intervals()[b];
        assert!((lo - 26.70).abs() < 1e-12 && (hi - 29.99).abs() < 1e-12);
        assert_eq!(machine_space().extended_space().unwrap(), machine_space().nominal());
    }

    #[test]
    fn normalize_maps_bounds_and_midpoint() {
        let s = table_all_uncertain();
        let lo: Vec<f64> = s.variables().iter().map(|v| v.lower).collect();
        let hi: Vec<f64> = s.variables().iter().map(|v| v.upper).collect();
        let mid: Vec<f64> = lo.iter().zip(&hi).map(|(a, b)| 0.5 * (a + b)).collect();
        for (z, want) in [(s.normalize(&lo), 0.0), (s.normalize(&hi), 1.0), (s.normalize(&mid), 0.5)] {
            for v in z.unwrap() {
                assert!((v - want).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn normalize_rejects_points_outside_extended_box() {
        let s = table_all_uncertain();
        let mut x: Vec<f64> = s.variables().iter().map(|v| v.lower).collect();
        x[0] = 2.37;
        assert!(s.normalize(&x).is_ok());
        x[0] = 2.30;
        assert!(matches!(s.normalize(&x), Err(Error::OutOfBounds { dim: 0, .. })));
        assert!(matches!(s.normalize(&x[..3]), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn normalize_round_trip() {
        let s = table_all_uncertain();
        let ext = s.extended_space().unwrap();
        let mut rng = crate::seed::rng(11);
        for _ in 0..100 {
            let x: Vec<f64> = ext
                .intervals()
                .iter()
                .map(|&(lo, hi)| rng.gen_range(lo..=hi))
                .collect();
            let back = s.denormalize(&s.normalize(&x).unwrap());
            for (a, b) in x.iter().zip(&back) {
                assert!((a - b).abs() <= 1e-12 * a.abs().max(1.0));
            }
        }
    }

    #[test]
    fn nominal_plus_perturbation_stays_in_extended_space() {
        let s = table_all_uncertain();
        let nominal = s.nominal();
        let omega = s.perturbation_box().unwrap();
        let ext = s.extended_space().unwrap();
        let mut rng = crate::seed::rng(5);
        for _ in 0..1000 {
            let x: Vec<f64> = (0..s.dim())
                .map(|j| {
                    let x = rng.gen_range(nominal.low(j)..=nominal.high(j));
                    let u = rng.gen_range(omega.low(j)..=omega.high(j));
                    x + u
                })
                .collect();
            assert!(ext.contains(&x));
        }
        for (j, &(lo, hi)) in omega.intervals().iter().enumerate() {
            assert_eq!(lo, -hi, "dimension {j} not symmetric");
            assert!(ext.low(j) <= nominal.low(j) && ext.high(j) >= nominal.high(j));
        }
    }
}
