//! Robust formulations (deterministic, expectation, worst case) and
//! posterior uncertainty analysis of optimized designs.
//!
//! Everything here works in normalized coordinates and minimization signs,
//! like [`Objectives`]; perturbations live in the normalized perturbation
//! box of the design space.

mod stats;
mod zones;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::moo::{pso_with_init, PsoConfig};
use crate::objective::Objectives;
use crate::sampling::{qmc_box_with, QmcMode};
use crate::seed;
use crate::space::{Bounds, DesignSpace};

pub use crate::moo::Formulation;
pub use stats::{boxplot_stats, ObjectiveStats, RobustStats, Summary};
pub use zones::{compare_fronts, zone_select, Zone, ZoneKey, ZonePair, ZoneStatistic};

#[derive(Clone, Debug)]
pub struct RobustConfig {
    /// Perturbation samples per expectation estimate.
    pub n_expectation: usize,
    /// Inner maximizer budget for the worst case.
    pub inner: PsoConfig,
    pub qmc: QmcMode,
    pub seed: u64,
}

impl Default for RobustConfig {
    fn default() -> Self {
        RobustConfig {
            n_expectation: 128,
            inner: PsoConfig::with_budget(40, 60, 0),
            qmc: QmcMode::MaximinLhs,
            seed: 0,
        }
    }
}

/// A base objective seen through one robust formulation.
pub struct UncertainObjective<'a> {
    base: &'a dyn Objectives,
    mode: Formulation,
    /// Indices of the perturbed (non-zero half-width) dimensions.
    active: Vec<usize>,
    /// Perturbation box restricted to `active`.
    omega: Bounds,
    /// Shared perturbation cloud over `active` (common random numbers).
    cloud: Vec<Vec<f64>>,
    inner: PsoConfig,
    seed: u64,
}

impl<'a> UncertainObjective<'a> {
    pub fn new(base: &'a dyn Objectives, space: &DesignSpace, mode: Formulation, cfg: &RobustConfig) -> Result<Self> {
        if space.dim() != base.dim() {
            return Err(Error::DimensionMismatch {
                expected: base.dim(),
                found: space.dim(),
            });
        }
        if cfg.n_expectation == 0 {
            return Err(Error::invalid("n_expectation must be >= 1"));
        }
        let full = space.normalized_perturbation_box()?;
        let active: Vec<usize> = (0..full.dim()).filter(|&j| full.width(j) > 0.0).collect();
        let omega = Bounds::new(active.iter().map(|&j| (full.low(j), full.high(j))).collect())?;
        let cloud = if active.is_empty() {
            vec![Vec::new(); cfg.n_expectation]
        } else {
            qmc_box_with(cfg.n_expectation, &omega, seed::derive(cfg.seed, seed::stream::CRN, 0), cfg.qmc)?.to_rows()
        };
        Ok(UncertainObjective {
            base,
            mode,
            active,
            omega,
            cloud,
            inner: cfg.inner.clone(),
            seed: cfg.seed,
        })
    }

    pub fn mode(&self) -> Formulation {
        self.mode
    }

    /// Perturbed dimensions, in order.
    pub fn active_dims(&self) -> &[usize] {
        &self.active
    }

    /// The shared perturbation sample over [`active_dims`](Self::active_dims).
    pub fn cloud(&self) -> &[Vec<f64>] {
        &self.cloud
    }

    fn shifted(&self, x: &[f64], u: &[f64], buf: &mut Vec<f64>) {
        buf.clear();
        buf.extend_from_slice(x);
        for (&j, du) in self.active.iter().zip(u) {
            buf[j] += du;
        }
    }

    fn check_dim(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.base.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.base.dim(),
                found: x.len(),
            });
        }
        Ok(())
    }

    /// `f(x + u_k)` for every cloud member, one row per sample.
    pub fn cloud_values(&self, x: &[f64]) -> Result<Vec<Vec<f64>>> {
        self.check_dim(x)?;
        let mut buf = Vec::with_capacity(x.len());
        self.cloud
            .iter()
            .map(|u| {
                self.shifted(x, u, &mut buf);
                self.base.evaluate(&buf)
            })
            .collect()
    }

    /// Equal-weight average of `f` over the shared cloud.
    pub fn expectation(&self, x: &[f64]) -> Result<Vec<f64>> {
        let values = self.cloud_values(x)?;
        let m = self.base.n_objectives();
        Ok((0..m)
            .map(|j| {
                let col = values.iter().map(|v| v[j]);
                let (lo, hi) = col.clone().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
                // the clamp only bites on round-off, e.g. a constant cloud
                (col.sum::<f64>() / values.len() as f64).clamp(lo, hi)
            })
            .collect())
    }

    /// Per-objective maximum of `f_j(x + u)` over the perturbation box.
    pub fn worst_case(&self, x: &[f64]) -> Result<Vec<f64>> {
        (0..self.base.n_objectives()).map(|j| self.worst_case_one(x, j, &[])).collect()
    }

    /// Inner maximization of objective `j`, with optional extra warm-start
    /// perturbations. The nominal point `u = 0` is always a starting particle,
    /// so the result is never below `f_j(x)`; the corners of the box join the
    /// swarm when the particle budget allows.
    pub fn worst_case_one(&self, x: &[f64], j: usize, warm: &[Vec<f64>]) -> Result<f64> {
        self.check_dim(x)?;
        if self.active.is_empty() {
            return self.base.evaluate_one(x, j);
        }
        let k = self.active.len();
        let mut init = vec![vec![0.0; k]];
        init.extend(warm.iter().take(self.inner.particles - 1).cloned());
        // the box corners, when they all fit: a maximum over a box often sits
        // on one, and gbest PSO can settle on the wrong corner
        if k < usize::BITS as usize && init.len() + (1 << k) <= self.inner.particles {
            for mask in 0..1usize << k {
                init.push(
                    (0..k)
                        .map(|i| if mask >> i & 1 == 1 { self.omega.high(i) } else { self.omega.low(i) })
                        .collect(),
                );
            }
        }
        let cfg = PsoConfig {
            seed: seed::derive(seed::derive(self.seed, seed::stream::INNER, seed::hash_point(x)), seed::stream::INNER, j as u64),
            ..self.inner.clone()
        };
        let mut f = self.base.partial_one(x, &self.active, j)?;
        let r = pso_with_init(|u| Ok(-f(u)?), &self.omega, &cfg, &init)?;
        Ok(-r.f_best)
    }
}

impl Objectives for UncertainObjective<'_> {
    fn dim(&self) -> usize {
        self.base.dim()
    }

    fn n_objectives(&self) -> usize {
        self.base.n_objectives()
    }

    fn evaluate(&self, x: &[f64]) -> Result<Vec<f64>> {
        match self.mode {
            Formulation::Deterministic => self.base.evaluate(x),
            Formulation::Expectation => self.expectation(x),
            Formulation::WorstCase => self.worst_case(x),
        }
    }

    fn evaluate_one(&self, x: &[f64], j: usize) -> Result<f64> {
        match self.mode {
            Formulation::Deterministic => self.base.evaluate_one(x, j),
            Formulation::Expectation => Ok(self.expectation(x)?[j]),
            Formulation::WorstCase => self.worst_case_one(x, j, &[]),
        }
    }
}

#[derive(Clone, Debug)]
pub struct PosteriorConfig {
    pub n: usize,
    /// Compute the PSO worst case next to the sampled statistics.
    pub worst_case: bool,
    pub inner: PsoConfig,
    pub qmc: QmcMode,
    pub seed: u64,
}

impl Default for PosteriorConfig {
    fn default() -> Self {
        PosteriorConfig {
            n: 512,
            worst_case: true,
            inner: PsoConfig::with_budget(40, 60, 0),
            qmc: QmcMode::MaximinLhs,
            seed: 0,
        }
    }
}

/// Outcome of the posterior analysis of one design.
#[derive(Clone, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct PosteriorRecord {
    pub x: Vec<f64>,
    pub stats: Option<RobustStats>,
    pub error: Option<String>,
}

/// Re-evaluates every design under a perturbation cloud drawn from a seed
/// stream distinct from the optimization's. A failing design yields a record
/// carrying the error; the others are unaffected.
pub fn posterior_perturbation(
    designs: &[Vec<f64>],
    base: &dyn Objectives,
    space: &DesignSpace,
    cfg: &PosteriorConfig,
) -> Result<Vec<PosteriorRecord>> {
    if cfg.n == 0 {
        return Err(Error::invalid("posterior sample size must be >= 1"));
    }
    let rc = RobustConfig {
        n_expectation: cfg.n,
        inner: cfg.inner.clone(),
        qmc: cfg.qmc,
        seed: seed::derive(cfg.seed, seed::stream::POSTERIOR, 0),
    };
    let wrapper = UncertainObjective::new(base, space, Formulation::Deterministic, &rc)?;
    Ok(designs
        .par_iter()
        .map(|x| match analyze_one(&wrapper, x, cfg.worst_case) {
            Ok(s) => PosteriorRecord {
                x: x.clone(),
                stats: Some(s),
                error: None,
            },
            Err(e) => PosteriorRecord {
                x: x.clone(),
                stats: None,
                error: Some(e.to_string()),
            },
        })
        .collect())
}

fn analyze_one(w: &UncertainObjective<'_>, x: &[f64], worst_case: bool) -> Result<RobustStats> {
    let values = w.cloud_values(x)?;
    let m = w.n_objectives();
    let mut objectives = Vec::with_capacity(m);
    for j in 0..m {
        let col: Vec<f64> = values.iter().map(|v| v[j]).collect();
        let summary = boxplot_stats(&col)?;
        let wc = if worst_case {
            let argmax = (0..col.len()).max_by(|&a, &b| col[a].total_cmp(&col[b])).unwrap_or(0);
            let found = w.worst_case_one(x, j, &[w.cloud[argmax].clone()])?;
            Some(found.max(summary.max))
        } else {
            None
        };
        objectives.push(ObjectiveStats { summary, worst_case: wc });
    }
    Ok(RobustStats {
        x: x.to_vec(),
        n: values.len(),
        objectives,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::objective::{FnObjectives, ProblemObjectives};
    use crate::problems::{robust_1d, Problem, Quadratic, Robust1d};

    fn line_space(tol: f64) -> DesignSpace {
        DesignSpace::uniform(1, 0.0, 1.0, tol, true)
    }

    #[test]
    fn linear_expectation_is_exact() {
        let f = FnObjectives::new(3, 1, |x: &[f64]| vec![2.0 * x[0] - 3.0 * x[1] + 0.5 * x[2] + 1.0]);
        let space = DesignSpace::uniform(3, 0.0, 1.0, 0.2, true);
        let w = UncertainObjective::new(&f, &space, Formulation::Expectation, &RobustConfig::default()).unwrap();
        for x in [[0.1, 0.5, 0.9], [0.3, 0.3, 0.3]] {
            let e = w.evaluate(&x).unwrap()[0];
            assert!((e - f.evaluate(&x).unwrap()[0]).abs() < 1e-12);
        }
    }

    #[test]
    fn quadratic_expectation_matches_closed_form() {
        // x^2 with U ~ Unif(-0.3, 0.3): E = x^2 + 0.03
        let f = FnObjectives::new(1, 1, |x: &[f64]| vec![x[0] * x[0]]);
        let space = line_space(0.3);
        let w = UncertainObjective::new(&f, &space, Formulation::Expectation, &RobustConfig::default()).unwrap();
        for x in [0.35, 0.5, 0.7] {
            let e = w.evaluate(&[x]).unwrap()[0];
            assert!((e - (x * x + 0.03)).abs() <= 0.003, "{x}: {e}");
        }
    }

    #[test]
    fn zero_tolerance_formulations_coincide() {
        let f = FnObjectives::new(2, 2, |x: &[f64]| vec![(x[0] * 9.0).sin() + x[1], x[0] * x[1]]);
        let space = DesignSpace::uniform(2, 0.0, 1.0, 0.0, false);
        let cfg = RobustConfig::default();
        let x = [0.37, 0.81];
        let det = f.evaluate(&x).unwrap();
        for mode in Formulation::ALL {
            let w = UncertainObjective::new(&f, &space, mode, &cfg).unwrap();
            assert_eq!(w.evaluate(&x).unwrap(), det, "{mode}");
        }
    }

    #[test]
    fn expectation_calls_base_n_times_and_is_repeatable() {
        use std::sync::atomic::{AtomicUsize, Ordering};
        let calls = AtomicUsize::new(0);
        let f = FnObjectives::new(1, 1, |x: &[f64]| {
            calls.fetch_add(1, Ordering::Relaxed);
            vec![(x[0] * 13.0).cos()]
        });
        let space = line_space(0.1);
        let cfg = RobustConfig {
            n_expectation: 64,
            ..Default::default()
        };
        let w = UncertainObjective::new(&f, &space, Formulation::Expectation, &cfg).unwrap();
        let a = w.evaluate(&[0.4]).unwrap();
        assert_eq!(calls.load(Ordering::Relaxed), 64);
        assert_eq!(a, w.evaluate(&[0.4]).unwrap());
        let d = UncertainObjective::new(&f, &space, Formulation::Deterministic, &cfg).unwrap();
        d.evaluate(&[0.4]).unwrap();
        assert_eq!(calls.load(Ordering::Relaxed), 129);
    }

    #[test]
    fn worst_case_examples() {
        let f = FnObjectives::new(1, 1, |x: &[f64]| vec![x[0]]);
        let space = line_space(0.1);
        let w = UncertainObjective::new(&f, &space, Formulation::WorstCase, &RobustConfig::default()).unwrap();
        assert!((w.evaluate(&[0.5]).unwrap()[0] - 0.6).abs() < 1e-6);

        let g = FnObjectives::new(1, 1, |x: &[f64]| vec![(x[0] - 0.5) * (x[0] - 0.5)]);
        let w = UncertainObjective::new(&g, &space, Formulation::WorstCase, &RobustConfig::default()).unwrap();
        assert!((w.evaluate(&[0.5]).unwrap()[0] - 0.01).abs() < 1e-6);
    }

    #[test]
    fn robust_1d_worst_case_matches_grid() {
        let p = Robust1d::default();
        let obj = ProblemObjectives::new(&p);
        let w = UncertainObjective::new(&obj, p.space(), Formulation::WorstCase, &RobustConfig::default()).unwrap();
        let x = 0.25;
        let grid = (0..10_000)
            .map(|k| robust_1d(x - 0.1 + 0.2 * k as f64 / 9999.0))
            .fold(f64::NEG_INFINITY, f64::max);
        let wc = w.evaluate(&[x]).unwrap()[0];
        assert!((wc - grid).abs() < 1e-4, "{wc} vs {grid}");
    }

    #[test]
    fn conservatism_ordering_on_convex_benchmark() {
        let p = Quadratic::default();
        let obj = ProblemObjectives::new(&p);
        let cfg = RobustConfig::default();
        let ws: Vec<_> = Formulation::ALL
            .iter()
            .map(|&m| UncertainObjective::new(&obj, p.space(), m, &cfg).unwrap())
            .collect();
        let mut rng = seed::rng(11);
        use rand::Rng;
        for _ in 0..20 {
            let x = [rng.gen::<f64>(), rng.gen::<f64>()];
            let v: Vec<f64> = ws.iter().map(|w| w.evaluate(&x).unwrap()[0]).collect();
            assert!(v[0] <= v[1] && v[1] <= v[2], "{v:?}");
        }
    }

    #[test]
    fn posterior_of_zero_tolerance_design_is_degenerate() {
        let f = FnObjectives::new(1, 2, |x: &[f64]| vec![x[0], -x[0]]);
        let space = DesignSpace::uniform(1, 0.0, 1.0, 0.0, false);
        let cfg = PosteriorConfig {
            n: 16,
            ..Default::default()
        };
        let r = posterior_perturbation(&[vec![0.3]], &f, &space, &cfg).unwrap();
        let s = r[0].stats.as_ref().unwrap();
        for (j, want) in [0.3, -0.3].into_iter().enumerate() {
            let o = &s.objectives[j];
            let sm = &o.summary;
            for v in [sm.min, sm.q1, sm.q2, sm.q3, sm.max, sm.mean, o.worst_case.unwrap()] {
                assert_eq!(v, want);
            }
            assert_eq!(sm.std, 0.0);
        }
    }

    #[test]
    fn posterior_linear_design() {
        let f = FnObjectives::new(2, 1, |x: &[f64]| vec![3.0 * x[0] - x[1]]);
        let space = DesignSpace::uniform(2, 0.0, 1.0, 0.1, true);
        let r = posterior_perturbation(&[vec![0.5, 0.5]], &f, &space, &PosteriorConfig::default()).unwrap();
        let o = &r[0].stats.as_ref().unwrap().objectives[0];
        assert!((o.summary.mean - 1.0).abs() < 1e-12);
        // corner (+0.1, -0.1)
        assert!((o.worst_case.unwrap() - 1.4).abs() < 1e-6);
        assert!(o.worst_case.unwrap() >= o.summary.max);
    }

    #[test]
    fn posterior_narrow_vs_wide_valley() {
        let p = Robust1d::default();
        let obj = ProblemObjectives::new(&p);
        let r = posterior_perturbation(&[vec![0.25], vec![0.75]], &obj, p.space(), &PosteriorConfig::default()).unwrap();
        let narrow = &r[0].stats.as_ref().unwrap().objectives[0];
        let wide = &r[1].stats.as_ref().unwrap().objectives[0];
        assert!(narrow.summary.std > wide.summary.std);
        assert!(narrow.worst_case.unwrap() > wide.worst_case.unwrap());
        assert!(narrow.summary.mean > wide.summary.mean);
    }

    #[test]
    fn posterior_errors_stay_per_design() {
        let f = FnObjectives::new(1, 1, |x: &[f64]| vec![if x[0] > 0.8 { f64::NAN } else { x[0] }]);
        let space = line_space(0.05);
        let cfg = PosteriorConfig {
            n: 8,
            ..Default::default()
        };
        let r = posterior_perturbation(&[vec![0.2], vec![0.9]], &f, &space, &cfg).unwrap();
        assert!(r[0].stats.is_some() && r[0].error.is_none());
        assert!(r[1].stats.is_none() && r[1].error.is_some());
    }
}
