use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::objective::ObjectiveInfo;

/// Boxplot summary of one sample.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub min: f64,
    pub q1: f64,
    pub q2: f64,
    pub q3: f64,
    pub max: f64,
    pub mean: f64,
    /// Population (divide-by-n) standard deviation.
    pub std: f64,
}

/// Min, quartiles by linear interpolation of order statistics at rank
/// `(n - 1) p`, max, mean and population standard deviation.
pub fn boxplot_stats(sample: &[f64]) -> Result<Summary> {
    if sample.is_empty() {
        return Err(Error::invalid("boxplot_stats needs a non-empty sample"));
    }
    if let Some(v) = sample.iter().find(|v| !v.is_finite()) {
        return Err(Error::invalid(format!("non-finite sample value {v}")));
    }
    let mut s = sample.to_vec();
    s.sort_by(f64::total_cmp);
    let n = s.len();
    let quantile = |p: f64| {
        let h = (n - 1) as f64 * p;
        let lo = h.floor() as usize;
        let hi = (lo + 1).min(n - 1);
        s[lo] + (h - lo as f64) * (s[hi] - s[lo])
    };
    let mean = (s.iter().sum::<f64>() / n as f64).clamp(s[0], s[n - 1]);
    let var = s.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n as f64;
    Ok(Summary {
        min: s[0],
        q1: quantile(0.25),
        q2: quantile(0.5),
        q3: quantile(0.75),
        max: s[n - 1],
        mean,
        std: var.sqrt(),
    })
}

impl Summary {
    /// Summary of the negated sample.
    pub fn negated(&self) -> Summary {
        Summary {
            min: -self.max,
            q1: -self.q3,
            q2: -self.q2,
            q3: -self.q1,
            max: -self.min,
            mean: -self.mean,
            std: self.std,
        }
    }
}

/// Posterior statistics of one objective.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ObjectiveStats {
    pub summary: Summary,
    /// Largest value over the perturbation box in minimization form; the
    /// worst performance in either sign.
    pub worst_case: Option<f64>,
}

impl ObjectiveStats {
    /// Statistics in the objective's natural sign. For a maximized
    /// objective the worst case becomes the smallest natural value.
    pub fn natural(&self, info: &ObjectiveInfo) -> ObjectiveStats {
        if info.maximize {
            ObjectiveStats {
                summary: self.summary.negated(),
                worst_case: self.worst_case.map(|v| -v),
            }
        } else {
            *self
        }
    }
}

/// Posterior statistics of one design, minimization form.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RobustStats {
    /// Normalized design point.
    pub x: Vec<f64>,
    pub n: usize,
    pub objectives: Vec<ObjectiveStats>,
}

impl RobustStats {
    pub fn natural(&self, infos: &[ObjectiveInfo]) -> Vec<ObjectiveStats> {
        self.objectives.iter().zip(infos).map(|(s, i)| s.natural(i)).collect()
    }
}
