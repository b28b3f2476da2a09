use rand::Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::objective::Objectives;
use crate::seed;
use crate::space::Bounds;

use super::{crowding_distance, non_dominated_sort, ParetoArchive};

#[derive(Clone, Debug)]
pub struct Nsga2Config {
    pub population: usize,
    pub generations: usize,
    pub crossover_prob: f64,
    pub eta_c: f64,
    pub eta_m: f64,
    /// Per-variable mutation probability; `None` means `1/d`.
    pub mutation_prob: Option<f64>,
    pub seed: u64,
}

impl Default for Nsga2Config {
    fn default() -> Self {
        Nsga2Config {
            population: 150,
            generations: 300,
            crossover_prob: 0.9,
            eta_c: 15.0,
            eta_m: 20.0,
            mutation_prob: None,
            seed: 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Individual {
    pub x: Vec<f64>,
    pub objectives: Vec<f64>,
    pub rank: usize,
    pub crowding: f64,
}

#[derive(Clone, Debug)]
pub struct Nsga2Result {
    /// Front 0 of the final population merged with every non-dominated
    /// point evaluated during the run.
    pub archive: ParetoArchive,
    pub population: Vec<Individual>,
    pub evaluations: usize,
}

pub fn nsga2(problem: &dyn Objectives, bounds: &Bounds, cfg: &Nsga2Config) -> Result<Nsga2Result> {
    nsga2_with_observer(problem, bounds, cfg, |_, _| {})
}

/// NSGA-II with a callback invoked after the initial population
/// (generation 0) and after every generation with the current archive.
pub fn nsga2_with_observer(
    problem: &dyn Objectives,
    bounds: &Bounds,
    cfg: &Nsga2Config,
    mut observer: impl FnMut(usize, &ParetoArchive),
) -> Result<Nsga2Result> {
    let n = cfg.population;
    if n < 4 || n % 2 != 0 {
        return Err(Error::invalid(format!("population must be even and >= 4, got {n}")));
    }
    let d = bounds.dim();
    if d != problem.dim() {
        return Err(Error::DimensionMismatch {
            expected: problem.dim(),
            found: d,
        });
    }
    if !(0.0..=1.0).contains(&cfg.crossover_prob) {
        return Err(Error::invalid("crossover probability outside [0, 1]"));
    }
    let pm = cfg.mutation_prob.unwrap_or(1.0 / d as f64);
    let m = problem.n_objectives();
    let mut archive = ParetoArchive::anonymous(m);

    let mut rng = seed::rng(seed::derive(cfg.seed, seed::stream::OPTIMIZE, 0));
    let xs: Vec<Vec<f64>> = (0..n)
        .map(|_| (0..d).map(|j| bounds.low(j) + rng.gen::<f64>() * bounds.width(j)).collect())
        .collect();
    let mut pop = evaluate_all(problem, xs, &mut archive)?;
    let mut evaluations = n;
    assign_rank_and_crowding(&mut pop);
    observer(0, &archive);

    for gen in 1..=cfg.generations {
        let mut rng = seed::rng(seed::derive(cfg.seed, seed::stream::OPTIMIZE, gen as u64));
        let mut children = Vec::with_capacity(n);
        while children.len() < n {
            let a = tournament(&pop, &mut rng);
            let b = tournament(&pop, &mut rng);
            let (mut c1, mut c2) = (pop[a].x.clone(), pop[b].x.clone());
            if rng.gen::<f64>() < cfg.crossover_prob {
                sbx(&mut c1, &mut c2, bounds, cfg.eta_c, &mut rng);
            }
            polynomial_mutation(&mut c1, bounds, cfg.eta_m, pm, &mut rng);
            polynomial_mutation(&mut c2, bounds, cfg.eta_m, pm, &mut rng);
            children.push(c1);
            children.push(c2);
        }
        let offspring = evaluate_all(problem, children, &mut archive)?;
        evaluations += n;
        pop.extend(offspring);
        pop = survivors(pop, n);
        observer(gen, &archive);
    }

    for ind in pop.iter().filter(|i| i.rank == 0) {
        archive.insert(&ind.x, &ind.objectives);
    }
    Ok(Nsga2Result {
        archive,
        population: pop,
        evaluations,
    })
}

fn evaluate_all(problem: &dyn Objectives, xs: Vec<Vec<f64>>, archive: &mut ParetoArchive) -> Result<Vec<Individual>> {
    let values: Vec<Result<Vec<f64>>> = xs.par_iter().map(|x| problem.evaluate(x)).collect();
    let mut out = Vec::with_capacity(xs.len());
    for (x, v) in xs.into_iter().zip(values) {
        let objectives = match v {
            Ok(v) if v.iter().all(|y| y.is_finite()) => v,
            Ok(_) => {
                return Err(Error::Evaluation {
                    x,
                    reason: "non-finite objective value".into(),
                })
            }
            Err(Error::Evaluation { x, reason }) => return Err(Error::Evaluation { x, reason }),
            Err(e) => return Err(Error::Evaluation { x, reason: e.to_string() }),
        };
        archive.insert(&x, &objectives);
        out.push(Individual {
            x,
            objectives,
            rank: 0,
            crowding: 0.0,
        });
    }
    Ok(out)
}

fn assign_rank_and_crowding(pop: &mut [Individual]) {
    let objs: Vec<&[f64]> = pop.iter().map(|i| i.objectives.as_slice()).collect();
    let fronts = non_dominated_sort(&objs);
    let mut ranked = vec![(0usize, 0.0f64); pop.len()];
    for (r, front) in fronts.iter().enumerate() {
        let pts: Vec<&[f64]> = front.iter().map(|&i| objs[i]).collect();
        for (&i, c) in front.iter().zip(crowding_distance(&pts)) {
            ranked[i] = (r, c);
        }
    }
    for (ind, (r, c)) in pop.iter_mut().zip(ranked) {
        ind.rank = r;
        ind.crowding = c;
    }
}

fn survivors(pop: Vec<Individual>, n: usize) -> Vec<Individual> {
    let objs: Vec<&[f64]> = pop.iter().map(|i| i.objectives.as_slice()).collect();
    let fronts = non_dominated_sort(&objs);
    let mut keep: Vec<(usize, usize, f64)> = Vec::with_capacity(n);
    for (r, front) in fronts.iter().enumerate() {
        let pts: Vec<&[f64]> = front.iter().map(|&i| objs[i]).collect();
        let crowd = crowding_distance(&pts);
        if keep.len() + front.len() <= n {
            keep.extend(front.iter().zip(&crowd).map(|(&i, &c)| (i, r, c)));
        } else {
            let mut order: Vec<usize> = (0..front.len()).collect();
            order.sort_by(|&a, &b| crowd[b].total_cmp(&crowd[a]));
            let room = n - keep.len();
            keep.extend(order[..room].iter().map(|&k| (front[k], r, crowd[k])));
        }
        if keep.len() == n {
            break;
        }
    }
    let mut slots: Vec<Option<Individual>> = pop.into_iter().map(Some).collect();
    keep.into_iter()
        .map(|(i, r, c)| {
            let mut ind = slots[i].take().expect("survivor selected twice");
            ind.rank = r;
            ind.crowding = c;
            ind
        })
        .collect()
}

/// Binary tournament under the crowded-comparison order.
fn tournament(pop: &[Individual], rng: &mut impl Rng) -> usize {
    let a = rng.gen_range(0..pop.len());
    let b = rng.gen_range(0..pop.len());
    let (pa, pb) = (&pop[a], &pop[b]);
    if pb.rank < pa.rank || (pb.rank == pa.rank && pb.crowding > pa.crowding) {
        b
    } else {
        a
    }
}

/// Bounded simulated binary crossover.
fn sbx(c1: &mut [f64], c2: &mut [f64], bounds: &Bounds, eta: f64, rng: &mut impl Rng) {
    for j in 0..c1.len() {
        let (lo, hi) = (bounds.low(j), bounds.high(j));
        // draws are consumed unconditionally so the stream does not depend on
        // the parents' values
        let (r_var, u, r_swap) = (rng.gen::<f64>(), rng.gen::<f64>(), rng.gen::<f64>());
        if r_var > 0.5 || (c1[j] - c2[j]).abs() <= 1e-14 || hi <= lo {
            continue;
        }
        let (y1, y2) = if c1[j] < c2[j] { (c1[j], c2[j]) } else { (c2[j], c1[j]) };
        let spread = |beta: f64| {
            let alpha = 2.0 - beta.powf(-(eta + 1.0));
            if u <= 1.0 / alpha {
                (u * alpha).powf(1.0 / (eta + 1.0))
            } else {
                (1.0 / (2.0 - u * alpha)).powf(1.0 / (eta + 1.0))
            }
        };
        let bq1 = spread(1.0 + 2.0 * (y1 - lo) / (y2 - y1));
        let bq2 = spread(1.0 + 2.0 * (hi - y2) / (y2 - y1));
        let a = (0.5 * ((y1 + y2) - bq1 * (y2 - y1))).clamp(lo, hi);
        let b = (0.5 * ((y1 + y2) + bq2 * (y2 - y1))).clamp(lo, hi);
        if r_swap < 0.5 {
            c1[j] = b;
            c2[j] = a;
        } else {
            c1[j] = a;
            c2[j] = b;
        }
    }
}

fn polynomial_mutation(x: &mut [f64], bounds: &Bounds, eta: f64, pm: f64, rng: &mut impl Rng) {
    let pow = 1.0 / (eta + 1.0);
    for (j, xj) in x.iter_mut().enumerate() {
        let (r, u) = (rng.gen::<f64>(), rng.gen::<f64>());
        let (lo, hi) = (bounds.low(j), bounds.high(j));
        if r >= pm || hi <= lo {
            continue;
        }
        let width = hi - lo;
        let (d1, d2) = ((*xj - lo) / width, (hi - *xj) / width);
        let dq = if u < 0.5 {
            let v = 2.0 * u + (1.0 - 2.0 * u) * (1.0 - d1).powf(eta + 1.0);
            v.powf(pow) - 1.0
        } else {
            let v = 2.0 * (1.0 - u) + 2.0 * (u - 0.5) * (1.0 - d2).powf(eta + 1.0);
            1.0 - v.powf(pow)
        };
        *xj = (*xj + dq * width).clamp(lo, hi);
    }
}
