//! C ABI over `rdopt`.
//!
//! Every function returns an [`RdoptStatus`]; on failure the message is
//! available from [`rdopt_last_error_message`] on the same thread. Handles
//! are opaque and must be released with their `_free` function. Point
//! matrices are row-major `n x d` arrays of `double`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::ptr;

use rdopt::config::PipelineConfig;
use rdopt::problems::Problem;
use rdopt::surrogate::{FitOptions, KernelKind, KrigingModel};
use rdopt::Error;

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RdoptStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    DimensionMismatch = 3,
    OutOfBounds = 4,
    Numerical = 5,
    Evaluation = 6,
    Config = 7,
    Io = 8,
    Artifact = 9,
    Stage = 10,
    Panic = 11,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RdoptKernel {
    Matern52 = 0,
    AbsExponential = 1,
}

/// Sample summary; `q1..q3` use the `(n - 1) p` quantile position and
/// `std` is the population standard deviation.
#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct RdoptBoxplot {
    pub min: f64,
    pub q1: f64,
    pub q2: f64,
    pub q3: f64,
    pub max: f64,
    pub mean: f64,
    pub std: f64,
}

/// Fitted Kriging model.
pub struct RdoptModel(KrigingModel);

/// Benchmark problem from the registry.
pub struct RdoptProblem(Box<dyn Problem>);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("nul bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> RdoptStatus {
    match e {
        Error::InvalidSpace(_) | Error::InvalidArgument(_) | Error::DuplicateRows(..) => RdoptStatus::InvalidArgument,
        Error::DimensionMismatch { .. } => RdoptStatus::DimensionMismatch,
        Error::OutOfBounds { .. } => RdoptStatus::OutOfBounds,
        Error::NotPositiveDefinite(_) | Error::Undefined(_) => RdoptStatus::Numerical,
        Error::Evaluation { .. } => RdoptStatus::Evaluation,
        Error::Config(_) => RdoptStatus::Config,
        Error::Io { .. } => RdoptStatus::Io,
        Error::Artifact { .. } => RdoptStatus::Artifact,
        Error::Stage { .. } => RdoptStatus::Stage,
    }
}

struct Fail(RdoptStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail(status_of(&e), e.to_string())
    }
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> RdoptStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            RdoptStatus::Ok
        }
        Ok(Err(Fail(s, msg))) => {
            set_error(msg);
            s
        }
        Err(_) => {
            set_error("internal panic".into());
            RdoptStatus::Panic
        }
    }
}

fn null(what: &str) -> Fail {
    Fail(RdoptStatus::NullPointer, format!("null pointer: {what}"))
}

unsafe fn slice<'a>(p: *const f64, n: usize, what: &str) -> Result<&'a [f64], Fail> {
    if n == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts(p, n))
}

unsafe fn slice_mut<'a>(p: *mut f64, n: usize, what: &str) -> Result<&'a mut [f64], Fail> {
    if n == 0 {
        return Ok(&mut []);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts_mut(p, n))
}

unsafe fn string(p: *const c_char, what: &str) -> Result<String, Fail> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map(str::to_string)
        .map_err(|_| Fail(RdoptStatus::InvalidArgument, format!("{what} is not valid UTF-8")))
}

/// Message of the last failed call on this thread, or NULL. The pointer is
/// valid until the next call into the library on the same thread.
#[no_mangle]
pub extern "C" fn rdopt_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn rdopt_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Fits a Kriging model on `n` points of dimension `d` (row-major `x`).
/// `restarts = 0` uses the default.
///
/// # Safety
/// `x` must hold `n * d` doubles, `y` `n` doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rdopt_model_fit(
    x: *const f64,
    n: usize,
    d: usize,
    y: *const f64,
    kernel: RdoptKernel,
    nugget: f64,
    restarts: usize,
    seed: u64,
    out: *mut *mut RdoptModel,
) -> RdoptStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        if d == 0 {
            return Err(Fail(RdoptStatus::InvalidArgument, "dimension must be >= 1".into()));
        }
        let flat = slice(x, n.checked_mul(d).ok_or_else(|| Fail(RdoptStatus::InvalidArgument, "n * d overflows".into()))?, "x")?;
        let y = slice(y, n, "y")?;
        let rows: Vec<Vec<f64>> = flat.chunks(d).map(<[f64]>::to_vec).collect();
        let kind = match kernel {
            RdoptKernel::Matern52 => KernelKind::Matern52,
            RdoptKernel::AbsExponential => KernelKind::AbsExponential,
        };
        let defaults = FitOptions::default();
        let opts = FitOptions {
            restarts: if restarts == 0 { defaults.restarts } else { restarts },
            seed,
            nugget,
            ..defaults
        };
        let model = rdopt::surrogate::fit(&rows, y, kind, &opts)?;
        *out = Box::into_raw(Box::new(RdoptModel(model)));
        Ok(())
    })
}

/// Loads a model artifact written by `rdopt_model_save` or the CLI.
///
/// # Safety
/// `path` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rdopt_model_load(path: *const c_char, out: *mut *mut RdoptModel) -> RdoptStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let p = PathBuf::from(string(path, "path")?);
        *out = Box::into_raw(Box::new(RdoptModel(KrigingModel::load(&p)?)));
        Ok(())
    })
}

/// # Safety
/// `model` must come from this library; `path` must be NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn rdopt_model_save(model: *const RdoptModel, path: *const c_char) -> RdoptStatus {
    guard(|| {
        let m = model.as_ref().ok_or_else(|| null("model"))?;
        let p = PathBuf::from(string(path, "path")?);
        m.0.save(&p)?;
        Ok(())
    })
}

/// Input dimension of the model, 0 for NULL.
///
/// # Safety
/// `model` must be NULL or come from this library.
#[no_mangle]
pub unsafe extern "C" fn rdopt_model_dim(model: *const RdoptModel) -> usize {
    model.as_ref().map_or(0, |m| m.0.dim())
}

/// Predicts at `n` points. `variance` may be NULL.
///
/// # Safety
/// `x` must hold `n * dim` doubles, `mean` (and `variance` if not NULL) `n`.
#[no_mangle]
pub unsafe extern "C" fn rdopt_model_predict(
    model: *const RdoptModel,
    x: *const f64,
    n: usize,
    mean: *mut f64,
    variance: *mut f64,
) -> RdoptStatus {
    guard(|| {
        let m = &model.as_ref().ok_or_else(|| null("model"))?.0;
        let d = m.dim();
        let xs = slice(x, n * d, "x")?;
        let mean = slice_mut(mean, n, "mean")?;
        let mut var = if variance.is_null() { None } else { Some(slice_mut(variance, n, "variance")?) };
        for (i, row) in xs.chunks(d).enumerate() {
            if let Some(v) = var.as_deref_mut() {
                let p = m.predict(row)?;
                mean[i] = p.mean;
                v[i] = p.variance;
            } else {
                mean[i] = m.predict_mean(row)?;
            }
        }
        Ok(())
    })
}

/// # Safety
/// `model` must be NULL or come from this library, and not be used again.
#[no_mangle]
pub unsafe extern "C" fn rdopt_model_free(model: *mut RdoptModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// Builds a registered problem. `dim = 0` keeps its default dimension.
///
/// # Safety
/// `name` must be NUL-terminated; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rdopt_problem_new(name: *const c_char, dim: usize, out: *mut *mut RdoptProblem) -> RdoptStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let name = string(name, "name")?;
        let p = rdopt::problems::by_name(&name, (dim > 0).then_some(dim))?;
        *out = Box::into_raw(Box::new(RdoptProblem(p)));
        Ok(())
    })
}

/// # Safety
/// `problem` must be NULL or come from this library.
#[no_mangle]
pub unsafe extern "C" fn rdopt_problem_dim(problem: *const RdoptProblem) -> usize {
    problem.as_ref().map_or(0, |p| p.0.space().dim())
}

/// # Safety
/// `problem` must be NULL or come from this library.
#[no_mangle]
pub unsafe extern "C" fn rdopt_problem_n_objectives(problem: *const RdoptProblem) -> usize {
    problem.as_ref().map_or(0, |p| p.0.objectives().len())
}

/// Evaluates at one native-unit point; writes the objectives in their
/// natural sense.
///
/// # Safety
/// `x` must hold `dim` doubles and `out` `n_objectives` doubles.
#[no_mangle]
pub unsafe extern "C" fn rdopt_problem_evaluate(problem: *const RdoptProblem, x: *const f64, out: *mut f64) -> RdoptStatus {
    guard(|| {
        let p = &problem.as_ref().ok_or_else(|| null("problem"))?.0;
        let x = slice(x, p.space().dim(), "x")?;
        let out = slice_mut(out, p.objectives().len(), "out")?;
        out.copy_from_slice(&p.evaluate(x)?);
        Ok(())
    })
}

/// # Safety
/// `problem` must be NULL or come from this library, and not be used again.
#[no_mangle]
pub unsafe extern "C" fn rdopt_problem_free(problem: *mut RdoptProblem) {
    if !problem.is_null() {
        drop(Box::from_raw(problem));
    }
}

/// NRMSE in percent of `n` predictions.
///
/// # Safety
/// `y_real` and `y_pred` must hold `n` doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rdopt_nrmse(y_real: *const f64, y_pred: *const f64, n: usize, out: *mut f64) -> RdoptStatus {
    guard(|| {
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        *out = rdopt::surrogate::nrmse(slice(y_real, n, "y_real")?, slice(y_pred, n, "y_pred")?)?;
        Ok(())
    })
}

/// Boxplot summary of `n` finite values.
///
/// # Safety
/// `values` must hold `n` doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rdopt_boxplot_stats(values: *const f64, n: usize, out: *mut RdoptBoxplot) -> RdoptStatus {
    guard(|| {
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        let s = rdopt::robust::boxplot_stats(slice(values, n, "values")?)?;
        *out = RdoptBoxplot {
            min: s.min,
            q1: s.q1,
            q2: s.q2,
            q3: s.q3,
            max: s.max,
            mean: s.mean,
            std: s.std,
        };
        Ok(())
    })
}

/// Runs the full pipeline from a TOML config. `out_dir` may be NULL to keep
/// the config's output directory.
///
/// # Safety
/// `config_path` and, if not NULL, `out_dir` must be NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn rdopt_run_pipeline(config_path: *const c_char, out_dir: *const c_char) -> RdoptStatus {
    guard(|| {
        let path = PathBuf::from(string(config_path, "config_path")?);
        let mut cfg = PipelineConfig::load(&path)?;
        if !out_dir.is_null() {
            cfg.out = Some(PathBuf::from(string(out_dir, "out_dir")?));
        }
        rdopt::pipeline::run_pipeline(&cfg)?;
        Ok(())
    })
}
