//! Universal Kriging with a linear trend and tensorized kernels.
//!
//! Outputs are standardized before fitting. Length-scales maximize the
//! profile log-likelihood (process variance and trend coefficients are
//! profiled out analytically) with a multi-start Nelder–Mead search in
//! `log10(theta)`. The nugget is a zero-lag covariance term, so the
//! predictor reproduces the training outputs exactly. A fitted
//! [`KrigingModel`] is immutable.

mod kernel;
mod nelder_mead;

use std::path::Path;

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use kernel::{kernel_value, KernelKind, KernelSpec};

use crate::error::{Error, Result};
use crate::sampling;

const SQRT5: f64 = 2.236_067_977_499_79;
const ARTIFACT_FORMAT: &str = "rdopt-kriging-v1";

/// Settings for [`fit`].
#[derive(Clone, Debug)]
pub struct FitOptions {
    pub restarts: usize,
    pub seed: u64,
    /// Starting nugget on the standardized problem.
    pub nugget: f64,
    /// Largest nugget tried before giving up on factorization.
    pub max_nugget: f64,
    /// Search interval for `log10(theta)` in normalized coordinates.
    pub log10_bounds: (f64, f64),
    /// Likelihood evaluations per restart; `None` means `40 * (d + 1)`.
    pub max_evals: Option<usize>,
    /// Skip the search and use these length-scales.
    pub length_scales: Option<Vec<f64>>,
}

impl Default for FitOptions {
    fn default() -> Self {
        FitOptions {
            restarts: 8,
            seed: 0,
            nugget: 1e-8,
            max_nugget: 1e-4,
            log10_bounds: (-2.0, 2.0),
            max_evals: None,
            length_scales: None,
        }
    }
}

/// Summary of the hyperparameter search.
#[derive(Clone, Debug, Default)]
pub struct FitReport {
    /// Best log-likelihood reached by each restart, in restart order.
    pub restart_best: Vec<f64>,
    /// Running maximum of `restart_best`.
    pub best_so_far: Vec<f64>,
    pub evaluations: usize,
}

/// Mean and variance of the Kriging predictor.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Prediction {
    pub mean: f64,
    pub variance: f64,
}

/// Fitted universal Kriging model.
#[derive(Clone, Debug)]
pub struct KrigingModel {
    kernel: KernelSpec,
    nugget: f64,
    trend: Vec<f64>,
    y_mean: f64,
    y_std: f64,
    n: usize,
    d: usize,
    x: Vec<f64>,
    y: Vec<f64>,
    log_likelihood: f64,
    // prediction caches
    alpha: Vec<f64>,
    chol: Cholesky<f64, Dyn>,
    rinv_f: DMatrix<f64>,
    gls_inv: DMatrix<f64>,
    cols: Vec<f64>,
    inv_theta: Vec<f64>,
}

/// A [`KrigingModel`] mean restricted to a few coordinates; see
/// [`KrigingModel::partial_mean`].
#[derive(Clone, Debug)]
pub struct PartialMean {
    matern: bool,
    origin: Vec<f64>,
    inv_theta: Vec<f64>,
    slope: Vec<f64>,
    trend: f64,
    /// alpha times the frozen coordinates' correlation factor, per training point
    weight: Vec<f64>,
    /// nugget times alpha where the frozen coordinates match the training point
    coincident: Vec<f64>,
    /// training points on the active coordinates, one column per coordinate
    points: Vec<f64>,
    sum: Vec<f64>,
    poly: Vec<f64>,
    y_mean: f64,
    y_std: f64,
}

impl PartialMean {
    /// Mean at the offset `u` along the active coordinates.
    pub fn mean(&mut self, u: &[f64]) -> f64 {
        debug_assert_eq!(u.len(), self.origin.len());
        let n = self.weight.len();
        self.sum.clear();
        self.sum.resize(n, 0.0);
        self.poly.clear();
        self.poly.resize(n, 1.0);
        for (k, ((o, du), it)) in self.origin.iter().zip(u).zip(&self.inv_theta).enumerate() {
            let z = o + du;
            let col = &self.points[k * n..(k + 1) * n];
            if self.matern {
                for ((s, p), c) in self.sum.iter_mut().zip(self.poly.iter_mut()).zip(col) {
                    let r = (z - c).abs() * it;
                    *s += r;
                    *p *= 1.0 + r * (SQRT5 + r * (5.0 / 3.0));
                }
            } else {
                for (s, c) in self.sum.iter_mut().zip(col) {
                    *s += (z - c).abs() * it;
                }
            }
        }
        let mut acc = self.trend + self.slope.iter().zip(u).map(|(b, du)| b * du).sum::<f64>();
        let c = if self.matern { SQRT5 } else { 1.0 };
        for (((w, p), s), z) in self.weight.iter().zip(&self.poly).zip(&self.sum).zip(&self.coincident) {
            acc += w * p * (-c * s).exp();
            if *s == 0.0 {
                acc += z;
            }
        }
        self.y_mean + self.y_std * acc
    }
}

/// Serialized form of a [`KrigingModel`].
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelArtifact {
    pub format: String,
    pub kernel: KernelSpec,
    pub nugget: f64,
    pub trend: Vec<f64>,
    pub y_mean: f64,
    pub y_std: f64,
    pub log_likelihood: f64,
    /// Training inputs (normalized coordinates), one row per point.
    pub x_train: Vec<Vec<f64>>,
    /// Standardized training outputs.
    pub y_train: Vec<f64>,
}

struct Profile {
    nugget: f64,
    chol: Cholesky<f64, Dyn>,
    beta: Vec<f64>,
    alpha: Vec<f64>,
    sigma2: f64,
    log_likelihood: f64,
    rinv_f: DMatrix<f64>,
    gls_inv: DMatrix<f64>,
}

fn trend_row(x: &[f64]) -> impl Iterator<Item = f64> + '_ {
    std::iter::once(1.0).chain(x.iter().copied())
}

fn correlation_matrix(kind: KernelKind, theta: &[f64], x: &[f64], n: usize, d: usize, nugget: f64) -> DMatrix<f64> {
    let mut r = DMatrix::<f64>::zeros(n, n);
    for i in 0..n {
        r[(i, i)] = 1.0 + nugget;
        let xi = &x[i * d..(i + 1) * d];
        for k in 0..i {
            let v = kernel::correlation(kind, theta, xi, &x[k * d..(k + 1) * d]);
            r[(i, k)] = v;
            r[(k, i)] = v;
        }
    }
    r
}

/// Profiles out trend and variance for fixed length-scales and nugget.
fn profile(kind: KernelKind, theta: &[f64], x: &[f64], y: &[f64], n: usize, d: usize, nugget: f64) -> Option<Profile> {
    let r = correlation_matrix(kind, theta, x, n, d, nugget);
    let chol = r.cholesky()?;
    let p = d + 1;
    let f = DMatrix::from_fn(n, p, |i, j| if j == 0 { 1.0 } else { x[i * d + j - 1] });
    let yv = DVector::from_column_slice(y);
    let rinv_f = chol.solve(&f);
    let rinv_y = chol.solve(&yv);
    let ftrf = f.transpose() * &rinv_f;
    let gls = ftrf.clone().cholesky()?;
    let beta = gls.solve(&(f.transpose() * &rinv_y));
    let resid = &yv - &f * &beta;
    let alpha = chol.solve(&resid);
    let sigma2 = (resid.dot(&alpha) / n as f64).max(1e-14);
    let log_det: f64 = 2.0 * chol.l_dirty().diagonal().iter().map(|v| v.ln()).sum::<f64>();
    let nf = n as f64;
    let log_likelihood = -0.5 * nf * sigma2.ln() - 0.5 * log_det - 0.5 * nf * (1.0 + (2.0 * std::f64::consts::PI).ln());
    if !log_likelihood.is_finite() {
        return None;
    }
    let gls_inv = gls.inverse();
    Some(Profile {
        nugget,
        chol,
        beta: beta.iter().copied().collect(),
        alpha: alpha.iter().copied().collect(),
        sigma2,
        log_likelihood,
        rinv_f,
        gls_inv,
    })
}

fn profile_with_repair(
    kind: KernelKind,
    theta: &[f64],
    x: &[f64],
    y: &[f64],
    n: usize,
    d: usize,
    nugget: f64,
    max_nugget: f64,
) -> Result<Profile> {
    let mut nu = nugget;
    loop {
        if let Some(p) = profile(kind, theta, x, y, n, d, nu) {
            return Ok(p);
        }
        nu *= 10.0;
        if nu > max_nugget * (1.0 + 1e-12) {
            return Err(Error::NotPositiveDefinite(nu / 10.0));
        }
    }
}

fn check_duplicates(rows: &[Vec<f64>]) -> Result<()> {
    let mut idx: Vec<usize> = (0..rows.len()).collect();
    idx.sort_by(|&a, &b| {
        rows[a]
            .iter()
            .zip(&rows[b])
            .map(|(x, y)| x.total_cmp(y))
            .find(|o| o.is_ne())
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    for w in idx.windows(2) {
        if rows[w[0]] == rows[w[1]] {
            let (a, b) = (w[0].min(w[1]), w[0].max(w[1]));
            return Err(Error::DuplicateRows(a, b));
        }
    }
    Ok(())
}

/// Fits a universal Kriging model with linear trend to `(x, y)`; `x` rows
/// are expected in normalized coordinates.
pub fn fit(x: &[Vec<f64>], y: &[f64], kind: KernelKind, opts: &FitOptions) -> Result<KrigingModel> {
    fit_with_report(x, y, kind, opts).map(|(m, _)| m)
}

pub fn fit_with_report(
    x: &[Vec<f64>],
    y: &[f64],
    kind: KernelKind,
    opts: &FitOptions,
) -> Result<(KrigingModel, FitReport)> {
    let n = x.len();
    if y.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: y.len(),
        });
    }
    let d = x.first().map_or(0, Vec::len);
    if d == 0 {
        return Err(Error::invalid("training points must have dimension >= 1"));
    }
    if n < d + 2 {
        return Err(Error::invalid(format!(
            "need at least d + 2 = {} training points for a linear trend, got {n}",
            d + 2
        )));
    }
    if let Some(r) = x.iter().find(|r| r.len() != d) {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: r.len(),
        });
    }
    if x.iter().flatten().chain(y).any(|v| !v.is_finite()) {
        return Err(Error::invalid("training data contains non-finite values"));
    }
    check_duplicates(x)?;

    let y_mean = y.iter().sum::<f64>() / n as f64;
    let var = y.iter().map(|v| (v - y_mean).powi(2)).sum::<f64>() / n as f64;
    let y_std = if var > 0.0 { var.sqrt() } else { 1.0 };
    let ys: Vec<f64> = y.iter().map(|v| (v - y_mean) / y_std).collect();
    let flat: Vec<f64> = x.iter().flatten().copied().collect();

    let mut report = FitReport::default();
    let theta = match &opts.length_scales {
        Some(t) => {
            if t.len() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    found: t.len(),
                });
            }
            t.clone()
        }
        None => {
            let (lo, hi) = opts.log10_bounds;
            let restarts = opts.restarts.max(1);
            let starts: Vec<Vec<f64>> = if restarts == 1 {
                vec![vec![0.5 * (lo + hi); d]]
            } else {
                sampling::maximin_lhs(restarts, d, opts.seed, sampling::default_lhs_iterations(restarts, d))?
                    .rows()
                    .map(|r| r.iter().map(|z| lo + z * (hi - lo)).collect())
                    .collect()
            };
            let max_evals = opts.max_evals.unwrap_or(40 * (d + 1));
            let runs: Vec<nelder_mead::Minimum> = starts
                .par_iter()
                .map(|s| {
                    let mut nll = |lt: &[f64]| {
                        let th: Vec<f64> = lt.iter().map(|v| 10f64.powf(*v)).collect();
                        profile_with_repair(kind, &th, &flat, &ys, n, d, opts.nugget, opts.max_nugget)
                            .map_or(f64::INFINITY, |p| -p.log_likelihood)
                    };
                    nelder_mead::minimize(&mut nll, s, 0.5, lo, hi, max_evals, 1e-9)
                })
                .collect();
            let mut best: Option<&nelder_mead::Minimum> = None;
            for r in &runs {
                report.restart_best.push(-r.f);
                report.evaluations += r.evaluations;
                if best.map_or(true, |b| r.f < b.f) {
                    best = Some(r);
                }
                let prev = report.best_so_far.last().copied().unwrap_or(f64::NEG_INFINITY);
                report.best_so_far.push(prev.max(-r.f));
            }
            match best {
                Some(b) if b.f.is_finite() => b.x.iter().map(|v| 10f64.powf(*v)).collect(),
                _ => return Err(Error::NotPositiveDefinite(opts.max_nugget)),
            }
        }
    };

    let prof = profile_with_repair(kind, &theta, &flat, &ys, n, d, opts.nugget, opts.max_nugget)?;
    let kernel = KernelSpec::new(kind, theta, prof.sigma2)?;
    let model = KrigingModel::assemble(kernel, prof, y_mean, y_std, n, d, flat, ys);
    Ok((model, report))
}

impl KrigingModel {
    #[allow(clippy::too_many_arguments)]
    fn assemble(
        kernel: KernelSpec,
        prof: Profile,
        y_mean: f64,
        y_std: f64,
        n: usize,
        d: usize,
        x: Vec<f64>,
        y: Vec<f64>,
    ) -> Self {
        let mut cols = vec![0.0; n * d];
        for i in 0..n {
            for j in 0..d {
                cols[j * n + i] = x[i * d + j];
            }
        }
        let inv_theta = kernel.length_scales.iter().map(|t| 1.0 / t).collect();
        KrigingModel {
            kernel,
            nugget: prof.nugget,
            trend: prof.beta,
            y_mean,
            y_std,
            n,
            d,
            x,
            y,
            log_likelihood: prof.log_likelihood,
            alpha: prof.alpha,
            chol: prof.chol,
            rinv_f: prof.rinv_f,
            gls_inv: prof.gls_inv,
            cols,
            inv_theta,
        }
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn n_train(&self) -> usize {
        self.n
    }

    pub fn kernel(&self) -> &KernelSpec {
        &self.kernel
    }

    pub fn nugget(&self) -> f64 {
        self.nugget
    }

    /// Trend coefficients `[intercept, slope_1, ..., slope_d]` in data units.
    pub fn trend_coefficients(&self) -> Vec<f64> {
        let mut c: Vec<f64> = self.trend.iter().map(|b| b * self.y_std).collect();
        c[0] += self.y_mean;
        c
    }

    pub fn log_likelihood(&self) -> f64 {
        self.log_likelihood
    }

    pub fn training_point(&self, i: usize) -> &[f64] {
        &self.x[i * self.d..(i + 1) * self.d]
    }

    pub fn training_value(&self, i: usize) -> f64 {
        self.y_mean + self.y_std * self.y[i]
    }

    /// The linear trend alone at `x`, in data units.
    pub fn trend_at(&self, x: &[f64]) -> f64 {
        let t: f64 = trend_row(x).zip(&self.trend).map(|(f, b)| f * b).sum();
        self.y_mean + self.y_std * t
    }

    fn check_dim(&self, x: &[f64]) -> Result<()> {
        if x.len() == self.d {
            Ok(())
        } else {
            Err(Error::DimensionMismatch {
                expected: self.d,
                found: x.len(),
            })
        }
    }

    /// Predictor mean and variance at `x` (normalized coordinates).
    pub fn predict(&self, x: &[f64]) -> Result<Prediction> {
        self.check_dim(x)?;
        // the nugget is a zero-lag covariance term, so training points are
        // reproduced exactly
        let mut prior = 1.0;
        let r: Vec<f64> = (0..self.n)
            .map(|i| {
                let t = self.training_point(i);
                if x == t {
                    prior = 1.0 + self.nugget;
                    1.0 + self.nugget
                } else {
                    self.kernel.correlation(x, t)
                }
            })
            .collect();
        let mean_std: f64 = trend_row(x).zip(&self.trend).map(|(f, b)| f * b).sum::<f64>()
            + r.iter().zip(&self.alpha).map(|(a, b)| a * b).sum::<f64>();
        let rv = DVector::from_vec(r);
        let rinv_r = self.chol.solve(&rv);
        let u: DVector<f64> =
            self.rinv_f.transpose() * &rv - DVector::from_iterator(self.d + 1, trend_row(x));
        let s2 = prior - rv.dot(&rinv_r) + u.dot(&(&self.gls_inv * &u));
        Ok(Prediction {
            mean: self.y_mean + self.y_std * mean_std,
            variance: (self.kernel.variance * s2 * self.y_std * self.y_std).max(0.0),
        })
    }

    /// Predictor mean only; the hot path used by the optimizers.
    pub fn predict_mean(&self, x: &[f64]) -> Result<f64> {
        self.check_dim(x)?;
        Ok(self.mean_unchecked(x))
    }

    /// Predictor mean over the coordinates in `active` only, the others
    /// frozen at `x`. Agrees with [`predict_mean`](Self::predict_mean) at
    /// `x + u` up to round-off.
    pub fn partial_mean(&self, x: &[f64], active: &[usize]) -> Result<PartialMean> {
        self.check_dim(x)?;
        if let Some(&j) = active.iter().find(|&&j| j >= self.d) {
            return Err(Error::DimensionMismatch { expected: self.d, found: j + 1 });
        }
        let n = self.n;
        let matern = self.kernel.kind == KernelKind::Matern52;
        let frozen: Vec<usize> = (0..self.d).filter(|j| !active.contains(j)).collect();
        let weight = (0..n)
            .map(|i| {
                let (mut s, mut p) = (0.0, 1.0);
                for &j in &frozen {
                    let r = (x[j] - self.cols[j * n + i]).abs() * self.inv_theta[j];
                    s += r;
                    if matern {
                        p *= 1.0 + r * (SQRT5 + r * (5.0 / 3.0));
                    }
                }
                let c = if matern { SQRT5 } else { 1.0 };
                self.alpha[i] * p * (-c * s).exp()
            })
            .collect();
        let coincident = (0..n)
            .map(|i| {
                let same = frozen.iter().all(|&j| x[j] == self.cols[j * n + i]);
                if same { self.nugget * self.alpha[i] } else { 0.0 }
            })
            .collect();
        let points = active.iter().flat_map(|&j| self.cols[j * n..(j + 1) * n].iter().copied()).collect();
        Ok(PartialMean {
            matern,
            origin: active.iter().map(|&j| x[j]).collect(),
            inv_theta: active.iter().map(|&j| self.inv_theta[j]).collect(),
            slope: active.iter().map(|&j| self.trend[j + 1]).collect(),
            trend: trend_row(x).zip(&self.trend).map(|(f, b)| f * b).sum(),
            weight,
            coincident,
            points,
            sum: Vec::with_capacity(n),
            poly: Vec::with_capacity(n),
            y_mean: self.y_mean,
            y_std: self.y_std,
        })
    }

    pub(crate) fn mean_unchecked(&self, x: &[f64]) -> f64 {
        let n = self.n;
        let mut sum = vec![0.0; n];
        let matern = self.kernel.kind == KernelKind::Matern52;
        let mut poly = if matern { vec![1.0; n] } else { Vec::new() };
        for (j, (&xj, &it)) in x.iter().zip(&self.inv_theta).enumerate() {
            let col = &self.cols[j * n..(j + 1) * n];
            if matern {
                for ((s, p), c) in sum.iter_mut().zip(poly.iter_mut()).zip(col) {
                    let r = (xj - c).abs() * it;
                    *s += r;
                    *p *= 1.0 + r * (SQRT5 + r * (5.0 / 3.0));
                }
            } else {
                for (s, c) in sum.iter_mut().zip(col) {
                    *s += (xj - c).abs() * it;
                }
            }
        }
        let mut acc: f64 = trend_row(x).zip(&self.trend).map(|(f, b)| f * b).sum();
        if matern {
            for ((s, p), a) in sum.iter().zip(&poly).zip(&self.alpha) {
                acc += a * p * (-SQRT5 * s).exp();
            }
        } else {
            for (s, a) in sum.iter().zip(&self.alpha) {
                acc += a * (-s).exp();
            }
        }
        for (s, a) in sum.iter().zip(&self.alpha) {
            if *s == 0.0 {
                acc += self.nugget * a;
            }
        }
        self.y_mean + self.y_std * acc
    }

    pub fn to_artifact(&self) -> ModelArtifact {
        ModelArtifact {
            format: ARTIFACT_FORMAT.to_string(),
            kernel: self.kernel.clone(),
            nugget: self.nugget,
            trend: self.trend.clone(),
            y_mean: self.y_mean,
            y_std: self.y_std,
            log_likelihood: self.log_likelihood,
            x_train: (0..self.n).map(|i| self.training_point(i).to_vec()).collect(),
            y_train: self.y.clone(),
        }
    }

    /// Rebuilds the factorization from a stored artifact. Predictions match
    /// the model that produced the artifact bit for bit.
    pub fn from_artifact(a: &ModelArtifact) -> Result<Self> {
        if a.format != ARTIFACT_FORMAT {
            return Err(Error::invalid(format!("unsupported model format `{}`", a.format)));
        }
        let n = a.x_train.len();
        let d = a.kernel.dim();
        if a.y_train.len() != n || a.x_train.iter().any(|r| r.len() != d) || a.trend.len() != d + 1 {
            return Err(Error::invalid("inconsistent model artifact dimensions"));
        }
        let kernel = KernelSpec::new(a.kernel.kind, a.kernel.length_scales.clone(), a.kernel.variance)?;
        let flat: Vec<f64> = a.x_train.iter().flatten().copied().collect();
        let prof = profile(kernel.kind, &kernel.length_scales, &flat, &a.y_train, n, d, a.nugget)
            .ok_or(Error::NotPositiveDefinite(a.nugget))?;
        Ok(KrigingModel::assemble(kernel, prof, a.y_mean, a.y_std, n, d, flat, a.y_train.clone()))
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string_pretty(&self.to_artifact()).map_err(|e| Error::artifact(path, e))?;
        std::fs::write(path, text).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let a: ModelArtifact = serde_json::from_str(&text).map_err(|e| Error::artifact(path, e))?;
        KrigingModel::from_artifact(&a).map_err(|e| Error::artifact(path, e))
    }
}

/// Normalized root-mean-square error in percent:
/// `100 * ||y_real - y_pred|| / ||y_real||`.
pub fn nrmse(y_real: &[f64], y_pred: &[f64]) -> Result<f64> {
    if y_real.len() != y_pred.len() {
        return Err(Error::DimensionMismatch {
            expected: y_real.len(),
            found: y_pred.len(),
        });
    }
    if y_real.is_empty() {
        return Err(Error::invalid("nrmse needs at least one value"));
    }
    let norm = y_real.iter().map(|v| v * v).sum::<f64>().sqrt();
    if norm == 0.0 {
        return Err(Error::Undefined("nrmse with ||y_real|| = 0".into()));
    }
    let err = y_real
        .iter()
        .zip(y_pred)
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt();
    Ok(err / norm * 100.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling::maximin_lhs;

    fn grid_1d(n: usize) -> Vec<Vec<f64>> {
        (0..n).map(|i| vec![i as f64 / (n - 1) as f64]).collect()
    }

    #[test]
    fn nrmse_examples() {
        assert_eq!(nrmse(&[3.0, 4.0], &[3.0, 4.0]).unwrap(), 0.0);
        assert!((nrmse(&[3.0, 4.0], &[0.0, 0.0]).unwrap() - 100.0).abs() < 1e-12);
        assert!((nrmse(&[3.0, 4.0], &[3.0, 0.0]).unwrap() - 80.0).abs() < 1e-12);
        assert!(matches!(nrmse(&[0.0, 0.0], &[1.0, 1.0]), Err(Error::Undefined(_))));
        assert!(nrmse(&[1.0], &[1.0, 2.0]).is_err());
    }

    #[test]
    fn interpolates_sine_samples() {
        let x = grid_1d(5);
        let y: Vec<f64> = x.iter().map(|r| (2.0 * std::f64::consts::PI * r[0]).sin()).collect();
        let m = fit(&x, &y, KernelKind::Matern52, &FitOptions::default()).unwrap();
        for (xi, yi) in x.iter().zip(&y) {
            let p = m.predict(xi).unwrap();
            assert!((p.mean - yi).abs() < 1e-6, "{} vs {}", p.mean, yi);
            assert!(p.variance <= 1e-6);
            assert!((p.mean - m.predict_mean(xi).unwrap()).abs() < 1e-12);
        }
    }

    #[test]
    fn fast_mean_matches_reference_path() {
        let s = maximin_lhs(30, 3, 2, 500).unwrap();
        let x = s.to_rows();
        let y: Vec<f64> = x.iter().map(|r| r[0].sin() + r[1] * r[2] - (3.0 * r[2]).cos()).collect();
        for kind in [KernelKind::Matern52, KernelKind::AbsExponential] {
            let m = fit(&x, &y, kind, &FitOptions::default()).unwrap();
            for t in maximin_lhs(20, 3, 9, 0).unwrap().rows() {
                let a = m.predict(t).unwrap().mean;
                let b = m.predict_mean(t).unwrap();
                assert!((a - b).abs() <= 1e-10 * a.abs().max(1.0));
            }
        }
    }

    #[test]
    fn nugget_does_not_blur_training_points() {
        // long length-scales make alpha large, so a diagonal-only nugget
        // would leave residuals of nugget * alpha
        let x = maximin_lhs(30, 3, 5, 500).unwrap().to_rows();
        let y: Vec<f64> = x.iter().map(|r| (2.0 * r[0] + 1.0).sin() + r[1] * r[1] - 0.5 * r[2]).collect();
        let opts = FitOptions {
            length_scales: Some(vec![3.0, 5.0, 8.0]),
            nugget: 1e-6,
            ..FitOptions::default()
        };
        let m = fit(&x, &y, KernelKind::Matern52, &opts).unwrap();
        for (xi, yi) in x.iter().zip(&y) {
            let p = m.predict(xi).unwrap();
            assert!((p.mean - yi).abs() < 1e-9, "{} vs {yi}", p.mean);
            assert!((m.predict_mean(xi).unwrap() - yi).abs() < 1e-9);
            assert!(p.variance < 1e-9);
            let mut pm = m.partial_mean(xi, &[0, 2]).unwrap();
            assert!((pm.mean(&[0.0, 0.0]) - yi).abs() < 1e-9);
        }
        let mid: Vec<f64> = x[0].iter().zip(&x[1]).map(|(a, b)| 0.5 * (a + b)).collect();
        assert!(m.predict(&mid).unwrap().variance > 0.0);
    }

    #[test]
    fn partial_mean_matches_full_mean() {
        let s = maximin_lhs(30, 3, 2, 500).unwrap();
        let x = s.to_rows();
        let y: Vec<f64> = x.iter().map(|r| r[0].sin() + r[1] * r[2] - (3.0 * r[2]).cos()).collect();
        for kind in [KernelKind::Matern52, KernelKind::AbsExponential] {
            let m = fit(&x, &y, kind, &FitOptions::default()).unwrap();
            let x0 = [0.3, 0.6, 0.45];
            for active in [vec![], vec![1], vec![2, 0], vec![0, 1, 2]] {
                let mut pm = m.partial_mean(&x0, &active).unwrap();
                for t in maximin_lhs(10, active.len().max(1), 4, 0).unwrap().rows() {
                    let u: Vec<f64> = t.iter().take(active.len()).map(|v| 0.2 * v - 0.1).collect();
                    let mut z = x0.to_vec();
                    for (&j, du) in active.iter().zip(&u) {
                        z[j] += du;
                    }
                    let full = m.predict_mean(&z).unwrap();
                    assert!((pm.mean(&u) - full).abs() <= 1e-10 * full.abs().max(1.0), "{kind:?} {active:?}");
                }
            }
        }
        let m = fit(&x, &y, KernelKind::Matern52, &FitOptions::default()).unwrap();
        assert!(m.partial_mean(&[0.1, 0.2, 0.3], &[3]).is_err());
        assert!(m.partial_mean(&[0.1, 0.2], &[0]).is_err());
    }

    #[test]
    fn linear_data_is_reproduced_by_the_trend() {
        let s = maximin_lhs(20, 3, 4, 300).unwrap();
        let x = s.to_rows();
        let lin = |r: &[f64]| 2.0 - 3.0 * r[0] + 0.5 * r[1] + 7.0 * r[2];
        let y: Vec<f64> = x.iter().map(|r| lin(r)).collect();
        for kind in [KernelKind::Matern52, KernelKind::AbsExponential] {
            let m = fit(&x, &y, kind, &FitOptions::default()).unwrap();
            for t in maximin_lhs(15, 3, 77, 0).unwrap().rows() {
                assert!((m.predict(t).unwrap().mean - lin(t)).abs() < 1e-6);
            }
            let c = m.trend_coefficients();
            assert!((c[0] - 2.0).abs() < 1e-6 && (c[3] - 7.0).abs() < 1e-6);
        }
    }

    #[test]
    fn reverts_to_trend_far_away() {
        let x = grid_1d(8);
        let y: Vec<f64> = x.iter().map(|r| (5.0 * r[0]).sin()).collect();
        let opts = FitOptions {
            length_scales: Some(vec![0.05]),
            ..FitOptions::default()
        };
        let m = fit(&x, &y, KernelKind::Matern52, &opts).unwrap();
        let far = [40.0];
        assert!((m.predict(&far).unwrap().mean - m.trend_at(&far)).abs() < 1e-9);
    }

    #[test]
    fn symmetric_zero_data_predicts_zero_midpoint() {
        let x = vec![vec![0.0], vec![1.0], vec![0.3]];
        let y = vec![0.0, 0.0, 0.0];
        let m = fit(&x, &y, KernelKind::Matern52, &FitOptions::default()).unwrap();
        assert_eq!(m.predict(&[0.5]).unwrap().mean, 0.0);
    }

    #[test]
    fn rejects_bad_training_sets() {
        let x = vec![vec![0.1, 0.2], vec![0.3, 0.4], vec![0.1, 0.2], vec![0.9, 0.1]];
        let y = vec![1.0, 2.0, 3.0, 4.0];
        assert!(matches!(
            fit(&x, &y, KernelKind::Matern52, &FitOptions::default()),
            Err(Error::DuplicateRows(0, 2))
        ));
        assert!(fit(&x[..3], &y[..3], KernelKind::Matern52, &FitOptions::default()).is_err());
        let m = fit(&grid_1d(4), &[0.0, 1.0, 0.0, 1.0], KernelKind::Matern52, &FitOptions::default()).unwrap();
        assert!(matches!(m.predict(&[0.1, 0.2]), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn restart_trace_is_monotone() {
        let s = maximin_lhs(25, 2, 1, 200).unwrap();
        let x = s.to_rows();
        let y: Vec<f64> = x.iter().map(|r| (4.0 * r[0]).sin() * r[1]).collect();
        let (_, rep) = fit_with_report(&x, &y, KernelKind::AbsExponential, &FitOptions::default()).unwrap();
        assert_eq!(rep.restart_best.len(), 8);
        assert!(rep.best_so_far.windows(2).all(|w| w[1] >= w[0]));
    }

    #[test]
    fn artifact_round_trip_reproduces_predictions() {
        let s = maximin_lhs(25, 2, 3, 200).unwrap();
        let x = s.to_rows();
        let y: Vec<f64> = x.iter().map(|r| (3.0 * r[0]).cos() + r[1] * r[1]).collect();
        let m = fit(&x, &y, KernelKind::Matern52, &FitOptions::default()).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.json");
        m.save(&path).unwrap();
        let back = KrigingModel::load(&path).unwrap();
        for t in maximin_lhs(10, 2, 5, 0).unwrap().rows() {
            let (a, b) = (m.predict(t).unwrap(), back.predict(t).unwrap());
            assert!((a.mean - b.mean).abs() <= 1e-12);
            assert!((a.variance - b.variance).abs() <= 1e-12);
        }
    }
}
