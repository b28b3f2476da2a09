//! Multi-objective machinery: Pareto dominance, non-dominated sorting,
//! crowding distance, NSGA-II and particle swarm optimization.
//!
//! All objectives are minimized.

mod archive;
mod nsga2;
mod pso;

pub use archive::{Formulation, Member, ParetoArchive};
pub use nsga2::{nsga2, nsga2_with_observer, Individual, Nsga2Config, Nsga2Result};
pub use pso::{pso, pso_with_init, PsoConfig, PsoResult, SwarmState};

/// `a` dominates `b`: no worse everywhere and strictly better somewhere.
#[inline]
pub fn dominates(a: &[f64], b: &[f64]) -> bool {
    let mut strictly = false;
    for (x, y) in a.iter().zip(b) {
        if x > y {
            return false;
        }
        if x < y {
            strictly = true;
        }
    }
    strictly
}

/// Fast non-dominated sort. Returns fronts as index lists into `points`,
/// each front in ascending index order.
pub fn non_dominated_sort<P: AsRef<[f64]>>(points: &[P]) -> Vec<Vec<usize>> {
    let n = points.len();
    let mut dominated_by_count = vec![0usize; n];
    let mut dominates_list: Vec<Vec<usize>> = vec![Vec::new(); n];
    for i in 0..n {
        for k in i + 1..n {
            let (a, b) = (points[i].as_ref(), points[k].as_ref());
            if dominates(a, b) {
                dominates_list[i].push(k);
                dominated_by_count[k] += 1;
            } else if dominates(b, a) {
                dominates_list[k].push(i);
                dominated_by_count[i] += 1;
            }
        }
    }
    let mut fronts = Vec::new();
    let mut current: Vec<usize> = (0..n).filter(|&i| dominated_by_count[i] == 0).collect();
    while !current.is_empty() {
        let mut next = Vec::new();
        for &i in &current {
            for &k in &dominates_list[i] {
                dominated_by_count[k] -= 1;
                if dominated_by_count[k] == 0 {
                    next.push(k);
                }
            }
        }
        next.sort_unstable();
        fronts.push(current);
        current = next;
    }
    fronts
}

/// Crowding distance of each point of one front. Boundary points of every
/// objective get `+inf`; an objective with zero range contributes nothing to
/// interior points.
pub fn crowding_distance<P: AsRef<[f64]>>(front: &[P]) -> Vec<f64> {
    let n = front.len();
    if n == 0 {
        return Vec::new();
    }
    if n <= 2 {
        return vec![f64::INFINITY; n];
    }
    let m = front[0].as_ref().len();
    let mut dist = vec![0.0; n];
    let mut order: Vec<usize> = (0..n).collect();
    for j in 0..m {
        // stable sort keeps insertion order among ties
        order.sort_by(|&a, &b| front[a].as_ref()[j].total_cmp(&front[b].as_ref()[j]));
        let lo = front[order[0]].as_ref()[j];
        let hi = front[order[n - 1]].as_ref()[j];
        dist[order[0]] = f64::INFINITY;
        dist[order[n - 1]] = f64::INFINITY;
        let range = hi - lo;
        if range <= 0.0 {
            continue;
        }
        for w in 1..n - 1 {
            let i = order[w];
            if dist[i].is_finite() {
                dist[i] += (front[order[w + 1]].as_ref()[j] - front[order[w - 1]].as_ref()[j]) / range;
            }
        }
    }
    dist
}

/// Indices of the non-dominated points (front 0), ascending.
pub fn pareto_filter<P: AsRef<[f64]>>(points: &[P]) -> Vec<usize> {
    (0..points.len())
        .filter(|&i| !points.iter().any(|q| dominates(q.as_ref(), points[i].as_ref())))
        .collect()
}

/// Hypervolume of a bi-objective point set with respect to `reference`.
/// Points not strictly better than the reference in both objectives add
/// nothing.
pub fn hypervolume_2d<P: AsRef<[f64]>>(points: &[P], reference: [f64; 2]) -> f64 {
    let mut pts: Vec<[f64; 2]> = points
        .iter()
        .map(|p| [p.as_ref()[0], p.as_ref()[1]])
        .filter(|p| p[0] < reference[0] && p[1] < reference[1])
        .collect();
    pts.sort_by(|a, b| a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1])));
    let mut front: Vec<[f64; 2]> = Vec::new();
    let mut last = reference[1];
    for p in &pts {
        if p[1] < last {
            front.push(*p);
            last = p[1];
        }
    }
    let mut total = 0.0;
    for (i, p) in front.iter().enumerate() {
        let right = front.get(i + 1).map_or(reference[0], |q| q[0]);
        total += (right - p[0]) * (reference[1] - p[1]);
    }
    total
}
