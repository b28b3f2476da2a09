use rand::Rng;

use crate::error::{Error, Result};
use crate::seed;
use crate::space::Bounds;

/// Global-best particle swarm with constriction-style coefficients.
#[derive(Clone, Debug)]
pub struct PsoConfig {
    pub particles: usize,
    pub iterations: usize,
    pub inertia: f64,
    pub cognitive: f64,
    pub social: f64,
    pub seed: u64,
}

impl Default for PsoConfig {
    fn default() -> Self {
        PsoConfig {
            particles: 150,
            iterations: 300,
            inertia: 0.729,
            cognitive: 1.494,
            social: 1.494,
            seed: 0,
        }
    }
}

impl PsoConfig {
    pub fn with_budget(particles: usize, iterations: usize, seed: u64) -> Self {
        PsoConfig {
            particles,
            iterations,
            seed,
            ..PsoConfig::default()
        }
    }
}

#[derive(Clone, Debug)]
pub struct SwarmState {
    pub positions: Vec<Vec<f64>>,
    pub velocities: Vec<Vec<f64>>,
    pub personal_best: Vec<Vec<f64>>,
    pub personal_best_f: Vec<f64>,
    pub global_best: Vec<f64>,
    pub global_best_f: f64,
    pub iteration: usize,
}

#[derive(Clone, Debug)]
pub struct PsoResult {
    pub x_best: Vec<f64>,
    pub f_best: f64,
    /// Best value after initialization, then after every iteration.
    pub trace: Vec<f64>,
    pub evaluations: usize,
}

/// Minimizes `f` over `bounds`.
pub fn pso(f: impl FnMut(&[f64]) -> Result<f64>, bounds: &Bounds, cfg: &PsoConfig) -> Result<PsoResult> {
    pso_with_init(f, bounds, cfg, &[])
}

/// As [`pso`], with the first particles started at `init` (clamped to the
/// box) instead of random positions.
pub fn pso_with_init(
    mut f: impl FnMut(&[f64]) -> Result<f64>,
    bounds: &Bounds,
    cfg: &PsoConfig,
    init: &[Vec<f64>],
) -> Result<PsoResult> {
    if cfg.particles < 2 {
        return Err(Error::invalid(format!("PSO needs at least 2 particles, got {}", cfg.particles)));
    }
    if init.len() > cfg.particles {
        return Err(Error::invalid("more warm-start points than particles"));
    }
    let d = bounds.dim();
    let mut rng = seed::rng(cfg.seed);
    let mut eval = |x: &[f64]| -> Result<f64> {
        let v = f(x)?;
        if v.is_nan() {
            return Err(Error::Evaluation {
                x: x.to_vec(),
                reason: "objective returned NaN".into(),
            });
        }
        Ok(v)
    };

    let mut positions = Vec::with_capacity(cfg.particles);
    let mut velocities = Vec::with_capacity(cfg.particles);
    for p in 0..cfg.particles {
        let random: Vec<f64> = (0..d).map(|j| bounds.low(j) + rng.gen::<f64>() * bounds.width(j)).collect();
        let x = match init.get(p) {
            Some(x0) => {
                if x0.len() != d {
                    return Err(Error::DimensionMismatch { expected: d, found: x0.len() });
                }
                let mut x = x0.clone();
                bounds.clamp(&mut x);
                x
            }
            None => random,
        };
        let v: Vec<f64> = (0..d)
            .map(|j| 0.5 * (bounds.low(j) + rng.gen::<f64>() * bounds.width(j) - x[j]))
            .collect();
        positions.push(x);
        velocities.push(v);
    }
    let mut state = SwarmState {
        personal_best: positions.clone(),
        personal_best_f: Vec::with_capacity(cfg.particles),
        positions,
        velocities,
        global_best: Vec::new(),
        global_best_f: f64::INFINITY,
        iteration: 0,
    };
    for p in 0..cfg.particles {
        let v = eval(&state.positions[p])?;
        state.personal_best_f.push(v);
        if v < state.global_best_f || state.global_best.is_empty() {
            state.global_best_f = v;
            state.global_best = state.positions[p].clone();
        }
    }
    let mut evaluations = cfg.particles;
    let mut trace = Vec::with_capacity(cfg.iterations + 1);
    trace.push(state.global_best_f);

    for it in 1..=cfg.iterations {
        for p in 0..cfg.particles {
            for j in 0..d {
                let (r1, r2) = (rng.gen::<f64>(), rng.gen::<f64>());
                let x = state.positions[p][j];
                let v = cfg.inertia * state.velocities[p][j]
                    + cfg.cognitive * r1 * (state.personal_best[p][j] - x)
                    + cfg.social * r2 * (state.global_best[j] - x);
                let mut nx = x + v;
                let mut nv = v;
                if nx < bounds.low(j) || nx > bounds.high(j) {
                    nx = nx.clamp(bounds.low(j), bounds.high(j));
                    nv = 0.0;
                }
                state.positions[p][j] = nx;
                state.velocities[p][j] = nv;
            }
            let v = eval(&state.positions[p])?;
            if v < state.personal_best_f[p] {
                state.personal_best_f[p] = v;
                state.personal_best[p].clone_from(&state.positions[p]);
                if v < state.global_best_f {
                    state.global_best_f = v;
                    state.global_best.clone_from(&state.positions[p]);
                }
            }
        }
        evaluations += cfg.particles;
        state.iteration = it;
        trace.push(state.global_best_f);
    }
    Ok(PsoResult {
        x_best: state.global_best,
        f_best: state.global_best_f,
        trace,
        evaluations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sphere_reaches_tight_tolerance() {
        let b = Bounds::uniform(5, -1.0, 1.0).unwrap();
        let r = pso(|x| Ok(x.iter().map(|v| v * v).sum()), &b, &PsoConfig::with_budget(150, 300, 1)).unwrap();
        assert!(r.f_best <= 1e-6, "{}", r.f_best);
        assert_eq!(r.trace.len(), 301);
        assert_eq!(r.evaluations, 150 * 301);
        assert!(r.trace.windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn one_dimensional_minimizer() {
        let b = Bounds::unit(1);
        let r = pso(|x| Ok((x[0] - 0.3).powi(2)), &b, &PsoConfig::with_budget(30, 100, 7)).unwrap();
        assert!((r.x_best[0] - 0.3).abs() < 1e-4);
    }

    #[test]
    fn constant_objective() {
        let b = Bounds::unit(3);
        let r = pso(|_| Ok(2.5), &b, &PsoConfig::with_budget(5, 10, 0)).unwrap();
        assert_eq!(r.f_best, 2.5);
        assert!(b.contains(&r.x_best));
    }

    #[test]
    fn warm_start_is_never_beaten_by_worse() {
        let b = Bounds::uniform(2, -1.0, 1.0).unwrap();
        let f = |x: &[f64]| Ok(-((x[0] - 0.9).powi(2) + (x[1] + 0.9).powi(2)).sqrt());
        let r = pso_with_init(f, &b, &PsoConfig::with_budget(4, 0, 3), &[vec![-1.0, 1.0]]).unwrap();
        assert!(r.f_best <= f(&[-1.0, 1.0]).unwrap());
    }

    #[test]
    fn deterministic_per_seed_and_rejects_tiny_swarm() {
        let b = Bounds::unit(2);
        let f = |x: &[f64]| Ok((x[0] * 7.0).sin() + x[1]);
        let a = pso(f, &b, &PsoConfig::with_budget(10, 20, 5)).unwrap();
        let c = pso(f, &b, &PsoConfig::with_budget(10, 20, 5)).unwrap();
        assert_eq!(a.x_best, c.x_best);
        assert_eq!(a.trace, c.trace);
        assert!(pso(f, &b, &PsoConfig::with_budget(1, 20, 5)).is_err());
    }

    #[test]
    fn evaluation_errors_propagate() {
        let b = Bounds::unit(1);
        let r = pso(|x| if x[0] > 0.5 { Err(Error::invalid("boom")) } else { Ok(x[0]) }, &b, &PsoConfig::with_budget(20, 5, 0));
        assert!(r.is_err());
    }
}
