//! Synthetic bi-objective problem over the twelve-variable machine design
//! space. It has no electromagnetic meaning; it only reproduces the
//! qualitative structure the robust workflow is meant to expose.
//!
//! With `z` the nominal-normalized coordinates and `s, a, b, c, e` the
//! normalized slot angle and the four layer-1/2 barrier angles:
//!
//! ```text
//! G      = 0.30 a + 0.20 b + 0.25 c + 0.20 e
//! torque = 416.5 + 38 G + 0.8 sin(pi a) sin(pi c) + sum_k t_k (z_k - 1/2)
//!
//! H      = 0.15 s + 0.30 a + 0.25 b + 0.15 c + 0.15 e
//! valley = 1.2 exp(-((s - 0.2) / 0.04)^2) + 1.0 exp(-((s - 0.7) / 0.3)^2)
//! ridges = 0.5 |c - e| + 0.4 |a - 0.3|
//! osc    = 0.08 sin(12 pi e)
//! ripple = 4.4 + 4.6 H - valley + ridges + osc + sum_k r_k z_k
//! ```
//!
//! where `t_k`, `r_k` are small weights on the seven minor variables. The
//! slot angle has two ripple valleys: a deep one much narrower than the
//! slot-angle tolerance band and a shallower broad one. Nominal designs
//! sit in the deep valley; under perturbation the broad one has the lower
//! mean, spread and worst case. Torque and ripple both grow with the
//! barrier angles, so the objectives conflict. Torque ignores the slot
//! angle, so the choice of valley is a pure ripple trade-off at every
//! torque level.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::objective::ObjectiveInfo;
use crate::problems::{check_dim, GroundTruth, Problem};
use crate::space::{DesignSpace, Variable};

/// The twelve continuous design variables with bounds and manufacturing
/// tolerances (degrees for angles, millimetres for widths). No variable is
/// flagged uncertain; screening decides that.
pub fn machine_space() -> DesignSpace {
    DesignSpace::new(vec![
        Variable::new("Slot_angle", 2.47, 3.27, 0.1),
        Variable::new("Beta_L1_P1", 27.03, 29.66, 0.33),
        Variable::new("Beta_L1_P2", 37.03, 39.66, 0.33),
        Variable::new("Beta_L2_P1", 31.03, 33.66, 0.33),
        Variable::new("Beta_L2_P2", 47.03, 49.66, 0.33),
        Variable::new("Beta_L3_P1", 33.7, 37.0, 0.33),
        Variable::new("Beta_L3_P2", 59.7, 63.0, 0.33),
        Variable::new("Airgap", 0.55, 0.65, 0.03),
        Variable::new("Bridge_L1", 2.6, 2.98, 0.05),
        Variable::new("Bridge_L2", 0.9, 1.18, 0.05),
        Variable::new("Bridge_L3", 0.5, 0.62, 0.03),
        Variable::new("Bridge_tang", 0.4, 0.6, 0.05),
    ])
}

/// Variables the synthetic problem is built to rank first.
pub const INFLUENTIAL: [&str; 5] = ["Slot_angle", "Beta_L1_P1", "Beta_L1_P2", "Beta_L2_P1", "Beta_L2_P2"];

const TORQUE_MINOR: [f64; 7] = [0.5, 0.3, -0.6, 0.2, -0.2, 0.1, -0.3];
const RIPPLE_MINOR: [f64; 7] = [0.05, 0.04, 0.15, 0.03, 0.1, 0.02, 0.06];

pub struct MotorSynthetic {
    space: DesignSpace,
    // extended bounds with every listed tolerance active
    lo: Vec<f64>,
    hi: Vec<f64>,
    infos: Vec<ObjectiveInfo>,
}

impl Default for MotorSynthetic {
    fn default() -> Self {
        let space = machine_space();
        let (lo, hi) = space
            .variables()
            .iter()
            .map(|v| (v.lower - v.tolerance, v.upper + v.tolerance))
            .unzip();
        MotorSynthetic {
            space,
            lo,
            hi,
            infos: vec![
                ObjectiveInfo::maximize("torque_like", "N·m"),
                ObjectiveInfo::minimize("ripple_like", "%"),
            ],
        }
    }
}

/// Torque-like output at normalized coordinates.
pub fn torque_like(z: &[f64]) -> f64 {
    let (a, b, c, e) = (z[1], z[2], z[3], z[4]);
    let g = 0.30 * a + 0.20 * b + 0.25 * c + 0.20 * e;
    let minor: f64 = z[5..].iter().zip(TORQUE_MINOR).map(|(v, w)| w * (v - 0.5)).sum();
    416.5 + 38.0 * g + 0.8 * (PI * a).sin() * (PI * c).sin() + minor
}

/// Ripple-like output at normalized coordinates.
pub fn ripple_like(z: &[f64]) -> f64 {
    let (s, a, b, c, e) = (z[0], z[1], z[2], z[3], z[4]);
    let h = 0.15 * s + 0.30 * a + 0.25 * b + 0.15 * c + 0.15 * e;
    let valley = 1.2 * (-((s - 0.2) / 0.04).powi(2)).exp() + 1.0 * (-((s - 0.7) / 0.3).powi(2)).exp();
    let ridges = 0.5 * (c - e).abs() + 0.4 * (a - 0.3).abs();
    let osc = 0.08 * (12.0 * PI * e).sin();
    let minor: f64 = z[5..].iter().zip(RIPPLE_MINOR).map(|(v, w)| w * v).sum();
    4.4 + 4.6 * h - valley + ridges + osc + minor
}

impl Problem for MotorSynthetic {
    fn name(&self) -> &str {
        "motor_synthetic"
    }

    fn description(&self) -> &str {
        "Synthetic torque/ripple pair over the 12-variable machine design space"
    }

    fn space(&self) -> &DesignSpace {
        &self.space
    }

    fn objectives(&self) -> &[ObjectiveInfo] {
        &self.infos
    }

    fn evaluate(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_dim(x, 12)?;
        for (j, v) in x.iter().enumerate() {
            let slack = 1e-9 * (self.hi[j] - self.lo[j]);
            if !(*v >= self.lo[j] - slack && *v <= self.hi[j] + slack) {
                return Err(Error::OutOfBounds {
                    dim: j,
                    value: *v,
                    low: self.lo[j],
                    high: self.hi[j],
                });
            }
        }
        let z = self.space.normalize_unchecked(x);
        Ok(vec![torque_like(&z), ripple_like(&z)])
    }

    fn ground_truth(&self) -> GroundTruth {
        GroundTruth {
            influential: INFLUENTIAL.iter().map(|s| s.to_string()).collect(),
            ..GroundTruth::default()
        }
    }
}
