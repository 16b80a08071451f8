//! C ABI for the blockamc simulator.
//!
//! Objects cross the boundary as opaque handles (`BamcMatrix`,
//! `BamcReport`) owned by the caller and released with the matching
//! `*_free` function. Every fallible call returns a `BamcStatus`; on
//! failure `bamc_last_error()` describes the error for the calling thread.
//! Strings returned through out-parameters are released with
//! `bamc_string_free`. Panics never unwind into C; they surface as
//! `BAMC_STATUS_PANIC`.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use blockamc::analog::{CircuitConfig, Engine};
use blockamc::cost::{cost_reports, CostConfig};
use blockamc::linalg::solve_dense;
use blockamc::mapping::MapConfig;
use blockamc::matgen::{gen_rhs, generate, GenSpec, MatrixKind};
use blockamc::metrics::relative_error;
use blockamc::solver::{solve_multi_stage, SolveConfig, SolveReport};
use blockamc::{Error, Matrix};

/// Result of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BamcStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Config = 3,
    Dimension = 4,
    Singular = 5,
    ArrayTooLarge = 6,
    Numerical = 7,
    Io = 8,
    Parse = 9,
    Panic = 10,
}

pub const BAMC_KIND_WISHART: u32 = 0;
pub const BAMC_KIND_TOEPLITZ: u32 = 1;
pub const BAMC_KIND_UNIFORM: u32 = 2;

pub const BAMC_ENGINE_IDEAL: u32 = 0;
pub const BAMC_ENGINE_NETWORK: u32 = 1;

/// Dense row-major matrix.
pub struct BamcMatrix(Matrix);

/// Result of one solve.
pub struct BamcReport(SolveReport);

/// Solve settings. Initialize with `bamc_solve_options_default`.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct BamcSolveOptions {
    /// Partitioning stages: 0 original, 1 one-stage, 2 two-stage.
    pub depth: u32,
    /// `BAMC_ENGINE_IDEAL` or `BAMC_ENGINE_NETWORK`.
    pub engine: u32,
    /// Wire segment resistance, ohms.
    pub r_seg: f64,
    /// Programming noise relative to `g0`.
    pub sigma_rel: f64,
    /// Unit conductance, siemens.
    pub g0: f64,
    /// Programming-noise seed.
    pub seed: u64,
    /// Largest physical array; 0 picks the smallest that fits.
    pub array_max: usize,
    /// Top-level split index; 0 picks the default.
    pub k: usize,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_last_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(e: &Error) -> BamcStatus {
    match e {
        Error::Dimension(_) => BamcStatus::Dimension,
        Error::Config(_) => BamcStatus::Config,
        Error::Singular(_) => BamcStatus::Singular,
        Error::ArrayTooLarge { .. } => BamcStatus::ArrayTooLarge,
        Error::Range { .. } | Error::Equilibrium(_) | Error::NonConvergence { .. } => BamcStatus::Numerical,
        Error::Io(_) => BamcStatus::Io,
        Error::Parse(_) => BamcStatus::Parse,
    }
}

enum Fail {
    Null(&'static str),
    Arg(String),
    Lib(Error),
}

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail::Lib(e)
    }
}

/// Runs `f`, converting errors and panics into a status and a thread-local
/// message.
fn guard(f: impl FnOnce() -> Result<(), Fail>) -> BamcStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_last_error("");
            BamcStatus::Ok
        }
        Ok(Err(Fail::Null(what))) => {
            set_last_error(&format!("null pointer: {what}"));
            BamcStatus::NullPointer
        }
        Ok(Err(Fail::Arg(msg))) => {
            set_last_error(&msg);
            BamcStatus::InvalidArgument
        }
        Ok(Err(Fail::Lib(e))) => {
            set_last_error(&e.to_string());
            status_of(&e)
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_last_error(&format!("panic: {msg}"));
            BamcStatus::Panic
        }
    }
}

unsafe fn slice<'a>(p: *const f64, len: usize, what: &'static str) -> Result<&'a [f64], Fail> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(Fail::Null(what));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn slice_mut<'a>(p: *mut f64, len: usize, what: &'static str) -> Result<&'a mut [f64], Fail> {
    if len == 0 {
        return Ok(&mut []);
    }
    if p.is_null() {
        return Err(Fail::Null(what));
    }
    Ok(std::slice::from_raw_parts_mut(p, len))
}

unsafe fn put<T>(out: *mut *mut T, value: T) -> Result<(), Fail> {
    if out.is_null() {
        return Err(Fail::Null("out"));
    }
    *out = Box::into_raw(Box::new(value));
    Ok(())
}

unsafe fn put_string(out: *mut *mut c_char, s: String) -> Result<(), Fail> {
    if out.is_null() {
        return Err(Fail::Null("out"));
    }
    let c = CString::new(s).map_err(|e| Fail::Arg(e.to_string()))?;
    *out = c.into_raw();
    Ok(())
}

fn copy_into(src: &[f64], dst: &mut [f64]) -> Result<(), Fail> {
    if src.len() != dst.len() {
        return Err(Fail::Arg(format!("buffer holds {} values, need {}", dst.len(), src.len())));
    }
    dst.copy_from_slice(src);
    Ok(())
}

/// Message describing the last failure on this thread; empty after a
/// success. Valid until the next call into this library on the same thread.
#[no_mangle]
pub extern "C" fn bamc_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn bamc_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Fills `opts` with the defaults: one-stage, ideal engine, 1 ohm wires,
/// 5% programming noise, G0 = 100 µS, seed 0, automatic array size and split.
///
/// # Safety
/// `opts` must be null or point to writable memory for one `BamcSolveOptions`.
#[no_mangle]
pub unsafe extern "C" fn bamc_solve_options_default(opts: *mut BamcSolveOptions) -> BamcStatus {
    guard(|| {
        if opts.is_null() {
            return Err(Fail::Null("opts"));
        }
        let map = MapConfig::default();
        let circuit = CircuitConfig::default();
        *opts = BamcSolveOptions {
            depth: 1,
            engine: BAMC_ENGINE_IDEAL,
            r_seg: circuit.r_seg,
            sigma_rel: map.sigma_rel,
            g0: map.g0,
            seed: 0,
            array_max: 0,
            k: 0,
        };
        Ok(())
    })
}

/// Copies `rows * cols` row-major values into a new matrix.
///
/// # Safety
/// `data` must point to `rows * cols` readable doubles; `out` must be
/// writable.
#[no_mangle]
pub unsafe extern "C" fn bamc_matrix_new(
    rows: usize,
    cols: usize,
    data: *const f64,
    out: *mut *mut BamcMatrix,
) -> BamcStatus {
    guard(|| {
        let len = rows.checked_mul(cols).ok_or_else(|| Fail::Arg("rows * cols overflows".into()))?;
        let values = slice(data, len, "data")?.to_vec();
        put(out, BamcMatrix(Matrix::new(rows, cols, values)?))
    })
}

/// Generates an `n x n` test matrix of the given `BAMC_KIND_*`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn bamc_matrix_generate(kind: u32, n: usize, seed: u64, out: *mut *mut BamcMatrix) -> BamcStatus {
    guard(|| {
        let kind = match kind {
            BAMC_KIND_WISHART => MatrixKind::Wishart,
            BAMC_KIND_TOEPLITZ => MatrixKind::Toeplitz,
            BAMC_KIND_UNIFORM => MatrixKind::Uniform,
            other => return Err(Fail::Arg(format!("unknown matrix kind {other}"))),
        };
        put(out, BamcMatrix(generate(&GenSpec::new(kind, n, seed))?))
    })
}

/// Releases a matrix. Null is ignored.
///
/// # Safety
/// `m` must be null or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn bamc_matrix_free(m: *mut BamcMatrix) {
    if !m.is_null() {
        drop(Box::from_raw(m));
    }
}

/// Row count, or 0 for null.
///
/// # Safety
/// `m` must be null or a live matrix handle.
#[no_mangle]
pub unsafe extern "C" fn bamc_matrix_rows(m: *const BamcMatrix) -> usize {
    m.as_ref().map_or(0, |m| m.0.rows())
}

/// Column count, or 0 for null.
///
/// # Safety
/// `m` must be null or a live matrix handle.
#[no_mangle]
pub unsafe extern "C" fn bamc_matrix_cols(m: *const BamcMatrix) -> usize {
    m.as_ref().map_or(0, |m| m.0.cols())
}

/// Copies the row-major entries into `out`, which must hold exactly
/// `rows * cols` values.
///
/// # Safety
/// `m` must be a live matrix handle; `out` must point to `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn bamc_matrix_copy(m: *const BamcMatrix, out: *mut f64, len: usize) -> BamcStatus {
    guard(|| {
        let m = m.as_ref().ok_or(Fail::Null("matrix"))?;
        copy_into(m.0.data(), slice_mut(out, len, "out")?)
    })
}

/// Fills `out[0..n]` with a seeded right-hand side, entries in [-1, 1].
///
/// # Safety
/// `out` must point to `n` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn bamc_rhs_generate(n: usize, seed: u64, out: *mut f64) -> BamcStatus {
    guard(|| copy_into(&gen_rhs(n, seed)?, slice_mut(out, n, "out")?))
}

/// Direct dense solve of `A x = b` with partial pivoting.
///
/// # Safety
/// `a` must be a live handle; `b` and `x` must each hold `n` doubles.
#[no_mangle]
pub unsafe extern "C" fn bamc_direct_solve(a: *const BamcMatrix, b: *const f64, n: usize, x: *mut f64) -> BamcStatus {
    guard(|| {
        let a = a.as_ref().ok_or(Fail::Null("matrix"))?;
        let sol = solve_dense(&a.0, slice(b, n, "b")?)?;
        copy_into(&sol, slice_mut(x, n, "x")?)
    })
}

/// Solves `A x = b` on simulated analog hardware. `opts` may be null for
/// the defaults. When `A` is invertible digitally the report carries the
/// relative error against the direct solution.
///
/// # Safety
/// `a` must be a live handle; `b` must hold `n` doubles; `opts` must be
/// null or valid; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn bamc_solve(
    a: *const BamcMatrix,
    b: *const f64,
    n: usize,
    opts: *const BamcSolveOptions,
    out: *mut *mut BamcReport,
) -> BamcStatus {
    guard(|| {
        let a = a.as_ref().ok_or(Fail::Null("matrix"))?;
        let b = slice(b, n, "b")?;
        let o = match opts.as_ref() {
            Some(o) => *o,
            None => {
                let mut d = std::mem::MaybeUninit::<BamcSolveOptions>::uninit();
                bamc_solve_options_default(d.as_mut_ptr());
                d.assume_init()
            }
        };
        let engine = match o.engine {
            BAMC_ENGINE_IDEAL => Engine::Ideal,
            BAMC_ENGINE_NETWORK => Engine::Network,
            other => return Err(Fail::Arg(format!("unknown engine {other}"))),
        };
        let cfg = SolveConfig {
            map: MapConfig { g0: o.g0, sigma_rel: o.sigma_rel, ..MapConfig::default() },
            circuit: CircuitConfig { r_seg: o.r_seg, engine, ..CircuitConfig::default() },
            array_max: (o.array_max > 0).then_some(o.array_max),
            k: (o.k > 0).then_some(o.k),
            seed: o.seed,
        };
        let mut report = solve_multi_stage(&a.0, b, o.depth as usize, &cfg)?;
        if let Ok(x) = solve_dense(&a.0, b) {
            report.attach_reference(&x)?;
        }
        put(out, BamcReport(report))
    })
}

/// Releases a report. Null is ignored.
///
/// # Safety
/// `r` must be null or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn bamc_report_free(r: *mut BamcReport) {
    if !r.is_null() {
        drop(Box::from_raw(r));
    }
}

/// Length of the solution vector, or 0 for null.
///
/// # Safety
/// `r` must be null or a live report handle.
#[no_mangle]
pub unsafe extern "C" fn bamc_report_len(r: *const BamcReport) -> usize {
    r.as_ref().map_or(0, |r| r.0.x_hat.len())
}

/// Copies the solution into `out`, which must hold exactly
/// `bamc_report_len` values.
///
/// # Safety
/// `r` must be a live handle; `out` must point to `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn bamc_report_solution(r: *const BamcReport, out: *mut f64, len: usize) -> BamcStatus {
    guard(|| {
        let r = r.as_ref().ok_or(Fail::Null("report"))?;
        copy_into(&r.0.x_hat, slice_mut(out, len, "out")?)
    })
}

/// Relative error stored in the report; NaN when no reference was
/// available or `r` is null.
///
/// # Safety
/// `r` must be null or a live report handle.
#[no_mangle]
pub unsafe extern "C" fn bamc_report_relative_error(r: *const BamcReport) -> f64 {
    r.as_ref().and_then(|r| r.0.relative_error).unwrap_or(f64::NAN)
}

/// Full report as JSON (solution, intermediates, programmed arrays,
/// configuration). Release with `bamc_string_free`.
///
/// # Safety
/// `r` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn bamc_report_json(r: *const BamcReport, out: *mut *mut c_char) -> BamcStatus {
    guard(|| {
        let r = r.as_ref().ok_or(Fail::Null("report"))?;
        put_string(out, r.0.to_json()?)
    })
}

/// `sum |x_ref - x_hat| / sum |x_ref|`.
///
/// # Safety
/// `x_ref` and `x_hat` must hold `n` doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn bamc_relative_error(x_ref: *const f64, x_hat: *const f64, n: usize, out: *mut f64) -> BamcStatus {
    guard(|| {
        let e = relative_error(slice(x_ref, n, "x_ref")?, slice(x_hat, n, "x_hat")?)?;
        if out.is_null() {
            return Err(Fail::Null("out"));
        }
        *out = e;
        Ok(())
    })
}

/// Area, power and latency of every solver for an `n x n` system under the
/// shipped calibration, as a JSON array. `array_max` 0 means automatic.
/// Release with `bamc_string_free`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn bamc_cost_json(n: usize, array_max: usize, out: *mut *mut c_char) -> BamcStatus {
    guard(|| {
        if n == 0 {
            return Err(Fail::Arg("n must be >= 1".into()));
        }
        let reports = cost_reports(n, (array_max > 0).then_some(array_max), &CostConfig::calibrated());
        let json = serde_json::to_string_pretty(&reports).map_err(|e| Fail::Lib(Error::Parse(e.to_string())))?;
        put_string(out, json)
    })
}

/// Releases a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must be null or a string from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn bamc_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
