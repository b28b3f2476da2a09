//! Space-filling designs: Latin hypercubes improved for the maximin
//! criterion, train/test splitting, and perturbation clouds over a box.

use std::io::{Read, Write};
use std::path::Path;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seed;
use crate::space::Bounds;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SampleKind {
    MaximinLhs,
    PlainLhs,
    Qmc,
    Grid,
    Explicit,
}

/// How perturbation clouds are generated.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QmcMode {
    #[default]
    MaximinLhs,
    Sobol,
}

/// An `n x d` set of points, optionally with `n x m` attached outputs.
#[derive(Clone, Debug, PartialEq)]
pub struct SampleMatrix {
    n: usize,
    d: usize,
    points: Vec<f64>,
    values: Option<Vec<f64>>,
    m: usize,
    pub columns: Vec<String>,
    pub value_names: Vec<String>,
    pub seed: u64,
    pub kind: SampleKind,
    pub normalized: bool,
}

impl SampleMatrix {
    pub fn from_rows(rows: &[Vec<f64>], kind: SampleKind, seed: u64) -> Result<Self> {
        let d = rows.first().map_or(0, Vec::len);
        let mut points = Vec::with_capacity(rows.len() * d);
        for r in rows {
            if r.len() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    found: r.len(),
                });
            }
            points.extend_from_slice(r);
        }
        Ok(SampleMatrix {
            n: rows.len(),
            d,
            points,
            values: None,
            m: 0,
            columns: default_names("x", d),
            value_names: Vec::new(),
            seed,
            kind,
            normalized: true,
        })
    }

    fn from_flat(n: usize, d: usize, points: Vec<f64>, kind: SampleKind, seed: u64) -> Self {
        debug_assert_eq!(points.len(), n * d);
        SampleMatrix {
            n,
            d,
            points,
            values: None,
            m: 0,
            columns: default_names("x", d),
            value_names: Vec::new(),
            seed,
            kind,
            normalized: true,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn n_values(&self) -> usize {
        self.m
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.points[i * self.d..(i + 1) * self.d]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        (0..self.n).map(move |i| self.row(i))
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.rows().map(<[f64]>::to_vec).collect()
    }

    pub fn values(&self) -> Option<&[f64]> {
        self.values.as_deref()
    }

    pub fn value_row(&self, i: usize) -> Option<&[f64]> {
        self.values.as_ref().map(|v| &v[i * self.m..(i + 1) * self.m])
    }

    /// Column `j` of the attached outputs.
    pub fn value_column(&self, j: usize) -> Option<Vec<f64>> {
        let v = self.values.as_ref()?;
        (j < self.m).then(|| (0..self.n).map(|i| v[i * self.m + j]).collect())
    }

    pub fn with_columns(mut self, names: Vec<String>) -> Result<Self> {
        if names.len() != self.d {
            return Err(Error::DimensionMismatch {
                expected: self.d,
                found: names.len(),
            });
        }
        self.columns = names;
        Ok(self)
    }

    /// Attaches one output row per point.
    pub fn with_values(mut self, names: Vec<String>, rows: &[Vec<f64>]) -> Result<Self> {
        if rows.len() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                found: rows.len(),
            });
        }
        let m = names.len();
        let mut flat = Vec::with_capacity(self.n * m);
        for r in rows {
            if r.len() != m {
                return Err(Error::DimensionMismatch {
                    expected: m,
                    found: r.len(),
                });
            }
            flat.extend_from_slice(r);
        }
        self.values = Some(flat);
        self.m = m;
        self.value_names = names;
        Ok(self)
    }

    /// Applies `f` to every point (used to switch between native and
    /// normalized coordinates).
    pub fn map_points(&self, normalized: bool, f: impl Fn(&[f64]) -> Result<Vec<f64>>) -> Result<Self> {
        let mut points = Vec::with_capacity(self.points.len());
        for r in self.rows() {
            let y = f(r)?;
            if y.len() != self.d {
                return Err(Error::DimensionMismatch {
                    expected: self.d,
                    found: y.len(),
                });
            }
            points.extend(y);
        }
        Ok(SampleMatrix {
            points,
            normalized,
            ..self.clone()
        })
    }

    fn select(&self, idx: &[usize]) -> Self {
        let mut points = Vec::with_capacity(idx.len() * self.d);
        let mut values = self.values.as_ref().map(|_| Vec::with_capacity(idx.len() * self.m));
        for &i in idx {
            points.extend_from_slice(self.row(i));
            if let (Some(out), Some(v)) = (values.as_mut(), self.value_row(i)) {
                out.extend_from_slice(v);
            }
        }
        SampleMatrix {
            n: idx.len(),
            points,
            values,
            ..self.clone()
        }
    }

    /// Smallest pairwise Euclidean distance.
    pub fn min_distance(&self) -> f64 {
        min_pairwise_distance(&self.points, self.n, self.d)
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        let mut header: Vec<&str> = self.columns.iter().map(String::as_str).collect();
        header.extend(self.value_names.iter().map(String::as_str));
        wr.write_record(&header).map_err(csv_err)?;
        for i in 0..self.n {
            let mut rec: Vec<String> = self.row(i).iter().map(|v| fmt_f64(*v)).collect();
            if let Some(v) = self.value_row(i) {
                rec.extend(v.iter().map(|v| fmt_f64(*v)));
            }
            wr.write_record(&rec).map_err(csv_err)?;
        }
        wr.flush().map_err(|e| Error::io("<csv>", e))?;
        Ok(())
    }

    /// Reads a matrix whose first `d` columns are points and whose remaining
    /// columns are outputs.
    pub fn read_csv<R: Read>(r: R, d: usize) -> Result<Self> {
        let mut rd = csv::Reader::from_reader(r);
        let header: Vec<String> = rd
            .headers()
            .map_err(csv_err)?
            .iter()
            .map(str::to_string)
            .collect();
        if header.len() < d {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: header.len(),
            });
        }
        let m = header.len() - d;
        let (mut pts, mut vals) = (Vec::new(), Vec::new());
        for rec in rd.records() {
            let rec = rec.map_err(csv_err)?;
            let row: Vec<f64> = rec
                .iter()
                .map(|s| s.trim().parse::<f64>().map_err(|e| Error::invalid(format!("bad number `{s}`: {e}"))))
                .collect::<Result<_>>()?;
            pts.push(row[..d].to_vec());
            vals.push(row[d..].to_vec());
        }
        let mut s = SampleMatrix::from_rows(&pts, SampleKind::Explicit, 0)?;
        if pts.is_empty() {
            s.d = d;
        }
        s.columns = header[..d].to_vec();
        if m > 0 {
            s = s.with_values(header[d..].to_vec(), &vals)?;
        }
        Ok(s)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let f = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        self.write_csv(std::io::BufWriter::new(f))
    }

    pub fn load(path: &Path, d: usize) -> Result<Self> {
        let f = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        SampleMatrix::read_csv(f, d).map_err(|e| Error::artifact(path, e))
    }
}

/// Decimal text with 17 significant digits; round-trips every `f64` exactly.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

pub(crate) fn csv_err(e: csv::Error) -> Error {
    Error::invalid(format!("csv: {e}"))
}

fn default_names(prefix: &str, d: usize) -> Vec<String> {
    (1..=d).map(|j| format!("{prefix}{j}")).collect()
}

fn dist2(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn min_pairwise_distance(points: &[f64], n: usize, d: usize) -> f64 {
    let mut best = f64::INFINITY;
    for i in 0..n {
        for k in i + 1..n {
            best = best.min(dist2(&points[i * d..(i + 1) * d], &points[k * d..(k + 1) * d]));
        }
    }
    best.sqrt()
}

/// Latin hypercube stored as one stratum permutation per dimension.
struct Strata {
    n: usize,
    d: usize,
    // perm[j * n + i] = stratum of row i in dimension j
    perm: Vec<usize>,
}

impl Strata {
    fn random(n: usize, d: usize, rng: &mut impl Rng) -> Self {
        let mut perm = Vec::with_capacity(n * d);
        for _ in 0..d {
            let mut p: Vec<usize> = (0..n).collect();
            p.shuffle(rng);
            perm.extend(p);
        }
        Strata { n, d, perm }
    }

    fn centers(&self) -> Vec<f64> {
        let nf = self.n as f64;
        let mut pts = vec![0.0; self.n * self.d];
        for j in 0..self.d {
            for i in 0..self.n {
                pts[i * self.d + j] = (self.perm[j * self.n + i] as f64 + 0.5) / nf;
            }
        }
        pts
    }

    fn jittered(&self, rng: &mut impl Rng) -> Vec<f64> {
        let nf = self.n as f64;
        let mut pts = vec![0.0; self.n * self.d];
        for i in 0..self.n {
            for j in 0..self.d {
                pts[i * self.d + j] = (self.perm[j * self.n + i] as f64 + rng.gen::<f64>()) / nf;
            }
        }
        pts
    }
}

/// Maximin exchange state: points at stratum centers plus each row's nearest
/// neighbour (squared distance and index).
struct Exchanger {
    n: usize,
    d: usize,
    pts: Vec<f64>,
    nn: Vec<f64>,
    partner: Vec<usize>,
}

impl Exchanger {
    fn new(pts: Vec<f64>, n: usize, d: usize) -> Self {
        let mut ex = Exchanger {
            n,
            d,
            pts,
            nn: vec![f64::INFINITY; n],
            partner: vec![usize::MAX; n],
        };
        for i in 0..n {
            ex.refresh(i, &[]);
        }
        ex
    }

    fn row(&self, i: usize) -> &[f64] {
        &self.pts[i * self.d..(i + 1) * self.d]
    }

    /// Recomputes the nearest neighbour of `i`, ignoring rows in `skip`.
    fn nearest(&self, i: usize, skip: &[usize]) -> (f64, usize) {
        let mut best = (f64::INFINITY, usize::MAX);
        for r in 0..self.n {
            if r == i || skip.contains(&r) {
                continue;
            }
            let dd = dist2(self.row(i), self.row(r));
            if dd < best.0 {
                best = (dd, r);
            }
        }
        best
    }

    fn refresh(&mut self, i: usize, skip: &[usize]) {
        let (dd, p) = self.nearest(i, skip);
        self.nn[i] = dd;
        self.partner[i] = p;
    }

    fn min(&self) -> (f64, usize) {
        self.nn
            .iter()
            .enumerate()
            .fold((f64::INFINITY, 0), |acc, (i, &v)| if v < acc.0 { (v, i) } else { acc })
    }

    /// Tries swapping coordinate `k` of rows `a` and `b`; keeps the swap iff
    /// the minimum pairwise distance does not decrease.
    fn try_swap(&mut self, a: usize, b: usize, k: usize, strata: &mut Strata) -> bool {
        let old_min = self.min().0;
        let d = self.d;
        self.pts.swap(a * d + k, b * d + k);
        let mut cand_nn = self.nn.clone();
        let mut cand_partner = self.partner.clone();
        let mut new_min = f64::INFINITY;
        for r in 0..self.n {
            if r == a || r == b {
                continue;
            }
            let da = dist2(self.row(r), self.row(a));
            let db = dist2(self.row(r), self.row(b));
            let (mut best, mut who) = if cand_partner[r] == a || cand_partner[r] == b {
                self.nearest(r, &[a, b])
            } else {
                (cand_nn[r], cand_partner[r])
            };
            if da < best {
                best = da;
                who = a;
            }
            if db < best {
                best = db;
                who = b;
            }
            cand_nn[r] = best;
            cand_partner[r] = who;
            new_min = new_min.min(best);
        }
        for &i in &[a, b] {
            let (dd, p) = self.nearest(i, &[]);
            cand_nn[i] = dd;
            cand_partner[i] = p;
            new_min = new_min.min(dd);
        }
        if new_min >= old_min {
            self.nn = cand_nn;
            self.partner = cand_partner;
            strata.perm.swap(k * self.n + a, k * self.n + b);
            true
        } else {
            self.pts.swap(a * d + k, b * d + k);
            false
        }
    }
}

/// Options for [`maximin_lhs_with`].
#[derive(Clone, Copy, Debug)]
pub struct LhsOptions {
    /// Number of attempted coordinate exchanges.
    pub iterations: usize,
    /// Place points uniformly inside their strata instead of at centers.
    pub jitter: bool,
    /// Record the minimum distance after every exchange.
    pub trace: bool,
}

/// A design together with its maximin improvement trace.
pub struct LhsDesign {
    pub sample: SampleMatrix,
    /// Minimum pairwise distance after each attempted exchange (empty unless
    /// requested); the first entry is the initial random design.
    pub trace: Vec<f64>,
}

/// Default exchange budget, `10 * n * d`.
pub fn default_lhs_iterations(n: usize, d: usize) -> usize {
    10 * n * d
}

/// Maximin Latin hypercube on `[0,1]^d` with stratum-centered points.
pub fn maximin_lhs(n: usize, d: usize, seed: u64, iterations: usize) -> Result<SampleMatrix> {
    Ok(maximin_lhs_with(
        n,
        d,
        seed,
        LhsOptions {
            iterations,
            jitter: false,
            trace: false,
        },
    )?
    .sample)
}

pub fn maximin_lhs_with(n: usize, d: usize, seed: u64, opts: LhsOptions) -> Result<LhsDesign> {
    if n < 2 {
        return Err(Error::invalid(format!("maximin LHS needs n >= 2, got {n}")));
    }
    if d == 0 {
        return Err(Error::invalid("maximin LHS needs d >= 1"));
    }
    let mut rng = seed::rng(seed);
    let mut strata = Strata::random(n, d, &mut rng);
    let mut ex = Exchanger::new(strata.centers(), n, d);
    let mut trace = Vec::new();
    if opts.trace {
        trace.push(ex.min().0.sqrt());
    }
    for _ in 0..opts.iterations {
        // exchange around the row that currently attains the minimum distance
        let a = ex.min().1;
        let mut b = rng.gen_range(0..n - 1);
        if b >= a {
            b += 1;
        }
        let k = rng.gen_range(0..d);
        ex.try_swap(a, b, k, &mut strata);
        if opts.trace {
            trace.push(ex.min().0.sqrt());
        }
    }
    let pts = if opts.jitter {
        strata.jittered(&mut rng)
    } else {
        ex.pts
    };
    Ok(LhsDesign {
        sample: SampleMatrix::from_flat(n, d, pts, SampleKind::MaximinLhs, seed),
        trace,
    })
}

/// Unoptimized random Latin hypercube with stratum-centered points.
pub fn plain_lhs(n: usize, d: usize, seed: u64) -> Result<SampleMatrix> {
    if n < 1 || d == 0 {
        return Err(Error::invalid("plain LHS needs n >= 1 and d >= 1"));
    }
    let mut rng = seed::rng(seed);
    let strata = Strata::random(n, d, &mut rng);
    Ok(SampleMatrix::from_flat(n, d, strata.centers(), SampleKind::PlainLhs, seed))
}

/// Seeded random partition into `n_train` and `n - n_train` rows; each part
/// keeps the original row order.
pub fn train_test_split(doe: &SampleMatrix, n_train: usize, seed: u64) -> Result<(SampleMatrix, SampleMatrix)> {
    if n_train >= doe.n() {
        return Err(Error::invalid(format!(
            "n_train ({n_train}) must be smaller than the number of rows ({})",
            doe.n()
        )));
    }
    let mut idx: Vec<usize> = (0..doe.n()).collect();
    idx.shuffle(&mut seed::rng(seed));
    let (mut train, mut test) = (idx[..n_train].to_vec(), idx[n_train..].to_vec());
    train.sort_unstable();
    test.sort_unstable();
    Ok((doe.select(&train), doe.select(&test)))
}

/// `n` points inside `bounds`: a maximin LHS (or scrambled Sobol points)
/// rescaled into the box. Zero-width dimensions receive the constant value.
pub fn qmc_box(n: usize, bounds: &Bounds, seed: u64) -> Result<SampleMatrix> {
    qmc_box_with(n, bounds, seed, QmcMode::MaximinLhs)
}

pub fn qmc_box_with(n: usize, bounds: &Bounds, seed: u64, mode: QmcMode) -> Result<SampleMatrix> {
    bounds.check()?;
    if n == 0 {
        return Err(Error::invalid("qmc_box needs n >= 1"));
    }
    let d = bounds.dim();
    if d == 0 {
        return Err(Error::invalid("qmc_box needs a box of dimension >= 1"));
    }
    let unit: Vec<f64> = match mode {
        QmcMode::MaximinLhs if n == 1 => vec![0.5; d],
        QmcMode::MaximinLhs => {
            let iters = default_lhs_iterations(n, d).min(LARGE_CLOUD_EXCHANGES.max(n));
            maximin_lhs(n, d, seed, iters)?.points
        }
        QmcMode::Sobol => {
            if d > sobol_burley::NUM_DIMENSIONS as usize {
                return Err(Error::invalid(format!("Sobol mode supports at most {} dimensions", sobol_burley::NUM_DIMENSIONS)));
            }
            let scramble = (seed ^ (seed >> 32)) as u32;
            let mut pts = Vec::with_capacity(n * d);
            for i in 0..n {
                for j in 0..d {
                    pts.push(f64::from(sobol_burley::sample(i as u32, j as u32, scramble)));
                }
            }
            pts
        }
    };
    let mut pts = Vec::with_capacity(n * d);
    for i in 0..n {
        pts.extend(bounds.from_unit(&unit[i * d..(i + 1) * d]));
    }
    let mut s = SampleMatrix::from_flat(n, d, pts, SampleKind::Qmc, seed);
    s.normalized = false;
    Ok(s)
}

/// Exchange cap for large clouds, where each exchange costs O(n d).
pub const LARGE_CLOUD_EXCHANGES: usize = 20_000;

#[cfg(test)]
mod tests {
    use super::*;

    fn assert_stratified(s: &SampleMatrix) {
        let n = s.n();
        for j in 0..s.dim() {
            let mut strata: Vec<usize> = s.rows().map(|r| (r[j] * n as f64).floor() as usize).collect();
            strata.sort_unstable();
            assert_eq!(strata, (0..n).collect::<Vec<_>>(), "dimension {j} not stratified");
        }
    }

    #[test]
    fn two_points_in_one_dimension() {
        let s = maximin_lhs(2, 1, 3, 100).unwrap();
        let mut v: Vec<f64> = s.rows().map(|r| r[0]).collect();
        v.sort_by(f64::total_cmp);
        assert!(v[0] < 0.5 && v[1] >= 0.5);
    }

    #[test]
    fn rejects_tiny_designs() {
        assert!(maximin_lhs(1, 3, 0, 10).is_err());
        assert!(maximin_lhs(5, 0, 0, 10).is_err());
    }

    #[test]
    fn exchange_never_decreases_min_distance() {
        for seed in 0..5 {
            let d = maximin_lhs_with(30, 4, seed, LhsOptions { iterations: 2000, jitter: false, trace: true }).unwrap();
            assert!(d.trace.windows(2).all(|w| w[1] >= w[0]));
            assert_stratified(&d.sample);
            let short = maximin_lhs(4, 2, seed, 0).unwrap();
            let long = maximin_lhs(4, 2, seed, 5000).unwrap();
            assert!(long.min_distance() >= short.min_distance());
        }
    }

    #[test]
    fn same_seed_is_bit_identical() {
        let a = maximin_lhs(40, 3, 9, 500).unwrap();
        let b = maximin_lhs(40, 3, 9, 500).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, maximin_lhs(40, 3, 10, 500).unwrap());
    }

    #[test]
    fn jittered_points_stay_in_strata() {
        let d = maximin_lhs_with(25, 3, 1, LhsOptions { iterations: 200, jitter: true, trace: false }).unwrap();
        assert_stratified(&d.sample);
    }

    #[test]
    fn split_partitions_rows() {
        let doe = maximin_lhs(234, 2, 0, 0).unwrap();
        let (tr, te) = train_test_split(&doe, 175, 4).unwrap();
        assert_eq!((tr.n(), te.n()), (175, 59));
        let mut all: Vec<Vec<u64>> = tr
            .rows()
            .chain(te.rows())
            .map(|r| r.iter().map(|v| v.to_bits()).collect())
            .collect();
        let mut orig: Vec<Vec<u64>> = doe.rows().map(|r| r.iter().map(|v| v.to_bits()).collect()).collect();
        all.sort();
        orig.sort();
        assert_eq!(all, orig);
        let (tr2, _) = train_test_split(&doe, 175, 4).unwrap();
        assert_eq!(tr, tr2);
        let (_, single) = train_test_split(&doe, 233, 4).unwrap();
        assert_eq!(single.n(), 1);
        assert!(train_test_split(&doe, 234, 4).is_err());
    }

    #[test]
    fn qmc_zero_width_dimension_is_constant() {
        let b = Bounds::new(vec![(0.0, 0.0), (-1.0, 1.0)]).unwrap();
        let s = qmc_box(8, &b, 2).unwrap();
        assert!(s.rows().all(|r| r[0] == 0.0 && (-1.0..=1.0).contains(&r[1])));
        let s = qmc_box_with(8, &b, 2, QmcMode::Sobol).unwrap();
        assert!(s.rows().all(|r| r[0] == 0.0 && (-1.0..=1.0).contains(&r[1])));
    }

    #[test]
    fn qmc_mean_is_centered() {
        let b = Bounds::new(vec![(-0.1, 0.1)]).unwrap();
        let s = qmc_box(100, &b, 6).unwrap();
        let mean: f64 = s.rows().map(|r| r[0]).sum::<f64>() / 100.0;
        assert!(mean.abs() <= 0.02);
        let one = qmc_box(1, &b, 6).unwrap();
        assert_eq!(one.n(), 1);
        assert!(b.contains(one.row(0)));
    }

    #[test]
    fn csv_round_trip_is_exact() {
        let s = maximin_lhs(12, 3, 1, 50)
            .unwrap()
            .with_values(vec!["f".into()], &(0..12).map(|i| vec![1.0 / (i as f64 + 3.0)]).collect::<Vec<_>>())
            .unwrap();
        let mut buf = Vec::new();
        s.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("x1,x2,x3,f\n"));
        let back = SampleMatrix::read_csv(&buf[..], 3).unwrap();
        assert_eq!(back.to_rows(), s.to_rows());
        assert_eq!(back.value_column(0), s.value_column(0));
    }
}
