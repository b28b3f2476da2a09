//! Variance-based global sensitivity: pick-freeze estimates of first-order
//! and total Sobol indices, and uncertain-variable screening.

use std::io::Write;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sampling::{csv_err, fmt_f64, maximin_lhs};
use crate::seed;
use crate::space::{Bounds, DesignSpace};

/// Coordinate exchanges spent on each base design. Space filling matters
/// little for the estimator, so large designs get only a light polish.
pub const BASE_DESIGN_EXCHANGES: usize = 2_000;

/// Smallest accepted base sample.
pub const MIN_BASE: usize = 64;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SobolResult {
    /// Name of the analysed output.
    pub output: String,
    pub variables: Vec<String>,
    /// Indices clamped to `[0, 1]`.
    pub first_order: Vec<f64>,
    pub total: Vec<f64>,
    /// Unclamped estimates.
    pub raw_first_order: Vec<f64>,
    pub raw_total: Vec<f64>,
    pub variance: f64,
    pub n_base: usize,
    pub seed: u64,
}

impl SobolResult {
    pub fn dim(&self) -> usize {
        self.variables.len()
    }

    /// Variable indices by decreasing clamped total index; ties keep
    /// variable order.
    pub fn ranking(&self) -> Vec<usize> {
        let mut order: Vec<usize> = (0..self.dim()).collect();
        order.sort_by(|&a, &b| self.total[b].total_cmp(&self.total[a]));
        order
    }

    /// Columns `variable, S, S_total, raw_S, raw_S_total`.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        wr.write_record(["variable", "S", "S_total", "raw_S", "raw_S_total"]).map_err(csv_err)?;
        for i in 0..self.dim() {
            wr.write_record([
                self.variables[i].clone(),
                fmt_f64(self.first_order[i]),
                fmt_f64(self.total[i]),
                fmt_f64(self.raw_first_order[i]),
                fmt_f64(self.raw_total[i]),
            ])
            .map_err(csv_err)?;
        }
        wr.flush().map_err(|e| Error::io("<csv>", e))?;
        Ok(())
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let f = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        self.write_csv(std::io::BufWriter::new(f))
    }
}

/// Sobol indices of a scalar function with independent uniform inputs on
/// `bounds`. Uses `n_base * (d + 2)` evaluations.
pub fn sobol_indices<F>(f: F, bounds: &Bounds, n_base: usize, seed: u64) -> Result<SobolResult>
where
    F: Fn(&[f64]) -> Result<f64> + Sync,
{
    let names = (1..=bounds.dim()).map(|j| format!("x{j}")).collect();
    let mut r = sobol_indices_multi(|x| Ok(vec![f(x)?]), 1, bounds, n_base, seed, names)?;
    Ok(r.remove(0))
}

/// Sobol indices of every output of a vector function, sharing one set of
/// evaluations. Results are named `y1..ym`; callers relabel `output`.
pub fn sobol_indices_multi<F>(
    f: F,
    m: usize,
    bounds: &Bounds,
    n_base: usize,
    seed: u64,
    variables: Vec<String>,
) -> Result<Vec<SobolResult>>
where
    F: Fn(&[f64]) -> Result<Vec<f64>> + Sync,
{
    let d = bounds.dim();
    if n_base < MIN_BASE {
        return Err(Error::invalid(format!("n_base must be >= {MIN_BASE}, got {n_base}")));
    }
    if d == 0 || variables.len() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: variables.len(),
        });
    }
    bounds.check()?;
    let exchanges = BASE_DESIGN_EXCHANGES.min(10 * n_base * d);
    let a = maximin_lhs(n_base, d, seed::derive(seed, seed::stream::SOBOL, 0), exchanges)?;
    let b = maximin_lhs(n_base, d, seed::derive(seed, seed::stream::SOBOL, 1), exchanges)?;

    // row r holds f(A_r), f(B_r), f(AB^1_r) .. f(AB^d_r)
    let stride = d + 2;
    let values: Vec<Result<Vec<f64>>> = (0..n_base * stride)
        .into_par_iter()
        .map(|k| {
            let (r, slot) = (k / stride, k % stride);
            let z: Vec<f64> = match slot {
                0 => a.row(r).to_vec(),
                1 => b.row(r).to_vec(),
                s => {
                    let mut z = a.row(r).to_vec();
                    z[s - 2] = b.row(r)[s - 2];
                    z
                }
            };
            let x = bounds.from_unit(&z);
            let y = f(&x)?;
            if y.len() != m || y.iter().any(|v| !v.is_finite()) {
                return Err(Error::Evaluation {
                    x,
                    reason: format!("expected {m} finite outputs, got {y:?}"),
                });
            }
            Ok(y)
        })
        .collect();
    let values: Vec<Vec<f64>> = values.into_iter().collect::<Result<_>>()?;

    (0..m)
        .map(|out| {
            let y = |r: usize, slot: usize| values[r * stride + slot][out];
            let n = n_base as f64;
            let mean = (0..n_base).map(|r| y(r, 0) + y(r, 1)).sum::<f64>() / (2.0 * n);
            let var = (0..n_base)
                .map(|r| (y(r, 0) - mean).powi(2) + (y(r, 1) - mean).powi(2))
                .sum::<f64>()
                / (2.0 * n);
            let scale = mean.abs().max(1.0);
            if !(var > 1e-24 * scale * scale) {
                return Err(Error::Undefined(format!(
                    "output {} has (near) zero variance; Sobol indices are undefined",
                    out + 1
                )));
            }
            let mut raw_s = Vec::with_capacity(d);
            let mut raw_t = Vec::with_capacity(d);
            for i in 0..d {
                let (mut sb, mut sa) = (0.0, 0.0);
                for r in 0..n_base {
                    let ab = y(r, i + 2);
                    sb += (y(r, 1) - ab).powi(2);
                    sa += (y(r, 0) - ab).powi(2);
                }
                raw_s.push((var - sb / (2.0 * n)) / var);
                raw_t.push(sa / (2.0 * n) / var);
            }
            Ok(SobolResult {
                output: format!("y{}", out + 1),
                variables: variables.clone(),
                first_order: raw_s.iter().map(|v| v.clamp(0.0, 1.0)).collect(),
                total: raw_t.iter().map(|v| v.clamp(0.0, 1.0)).collect(),
                raw_first_order: raw_s,
                raw_total: raw_t,
                variance: var,
                n_base,
                seed,
            })
        })
        .collect()
}

/// How many variables screening keeps.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Selection {
    TopK(usize),
    /// Every variable whose score exceeds the threshold.
    Threshold(f64),
}

/// Marks as uncertain the variables with the largest max-over-outputs total
/// index. Variables with zero tolerance are never marked; all others are
/// cleared.
pub fn select_uncertain(results: &[SobolResult], space: &DesignSpace, selection: Selection) -> Result<DesignSpace> {
    let d = space.dim();
    if results.is_empty() {
        return Err(Error::invalid("no sensitivity results to select from"));
    }
    if let Some(r) = results.iter().find(|r| r.dim() != d) {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: r.dim(),
        });
    }
    let score: Vec<f64> = (0..d)
        .map(|i| results.iter().map(|r| r.total[i]).fold(f64::NEG_INFINITY, f64::max))
        .collect();
    let mut order: Vec<usize> = (0..d).filter(|&i| space.variables()[i].tolerance > 0.0).collect();
    order.sort_by(|&a, &b| score[b].total_cmp(&score[a]));
    let chosen: Vec<usize> = match selection {
        Selection::TopK(k) => {
            if k > d {
                return Err(Error::invalid(format!("cannot select {k} of {d} variables")));
            }
            order.into_iter().take(k).collect()
        }
        Selection::Threshold(t) => order.into_iter().filter(|&i| score[i] > t).collect(),
    };
    let mut flags = vec![false; d];
    for i in chosen {
        flags[i] = true;
    }
    space.with_uncertain(&flags)
}
