//! C ABI over `povm_learn`.
//!
//! Every function returns a [`PovmStatus`] and writes results through out
//! pointers. On failure a message for the calling thread can be fetched
//! with [`povm_last_error`]. Experiments live behind the opaque
//! [`PovmExperiment`] handle, released with [`povm_experiment_free`].
//! Panics never cross the boundary; they are reported as `POVM_STATUS_PANIC`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;

use povm_learn::bloch::{perp_in_plane, prob_plus};
use povm_learn::constz::cos_theta_z;
use povm_learn::decomposition::{cos_theta, decompose, mixture_targets, success_prob};
use povm_learn::equal_prior::solve_alpha;
use povm_learn::experiment::output::render;
use povm_learn::experiment::{run_sweep, ExperimentOutput, OutputFormat, Settings, SweepGrid, TrialResult};
use povm_learn::helstrom::helstrom;
use povm_learn::{BlochVec, Case, Error, PlaneTag, Priors};

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PovmStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Contract = 3,
    Degenerate = 4,
    WeakSignal = 5,
    InvalidPriors = 6,
    CosThetaOutOfRange = 7,
    Config = 8,
    Io = 9,
    /// The experiment has not been run yet.
    NotRun = 10,
    Panic = 11,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct PovmBlochVec {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl From<PovmBlochVec> for BlochVec {
    fn from(v: PovmBlochVec) -> Self {
        BlochVec::new(v.x, v.y, v.z)
    }
}

impl From<BlochVec> for PovmBlochVec {
    fn from(v: BlochVec) -> Self {
        PovmBlochVec { x: v.x, y: v.y, z: v.z }
    }
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PovmPlaneKind {
    Xz = 0,
    ConstZ = 1,
}

/// Measurement plane; `kind` is a `PovmPlaneKind` and `n_z` is read only
/// for `POVM_PLANE_KIND_CONST_Z`.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PovmPlane {
    pub kind: u32,
    pub n_z: f64,
}

fn plane_from(p: PovmPlane) -> Result<PlaneTag, Failure> {
    match p.kind {
        k if k == PovmPlaneKind::Xz as u32 => Ok(PlaneTag::XZ),
        k if k == PovmPlaneKind::ConstZ as u32 => Ok(PlaneTag::ConstZ(p.n_z)),
        k => Err(invalid(format!("unknown plane kind {k}"))),
    }
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PovmCase {
    A = 0,
    B = 1,
}

fn case_from(raw: u32) -> Result<Case, Failure> {
    match raw {
        c if c == PovmCase::A as u32 => Ok(Case::A),
        c if c == PovmCase::B as u32 => Ok(Case::B),
        c => Err(invalid(format!("unknown case {c}"))),
    }
}

#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct PovmHelstrom {
    pub p0_axis: PovmBlochVec,
    pub lambda: f64,
    pub success: f64,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PovmFormat {
    Csv = 0,
    Json = 1,
}

/// One trial row. Fields guarded by a `has_` flag are zero when the flag is false.
#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct PovmTrialRow {
    pub trial: u64,
    /// -1 when the scenario has no case, 0 for A, 1 for B.
    pub case_tag: i32,
    /// `POVM_STATUS_OK` or the error that stopped the trial.
    pub status: i32,
    pub eta0: f64,
    pub theta_true: f64,
    pub alpha_true: f64,
    pub beta_true: f64,
    pub has_axis: bool,
    pub axis: PovmBlochVec,
    pub alpha_hat: f64,
    pub has_success_emp: bool,
    pub success_emp: f64,
    pub has_success_analytic: bool,
    pub success_analytic: f64,
    pub has_success_oracle: bool,
    pub success_oracle: f64,
    pub has_z_score: bool,
    pub z_score: f64,
    pub shots_learn: u64,
    pub shots_holdout: u64,
}

/// Opaque experiment handle.
pub struct PovmExperiment {
    grid: SweepGrid,
    output: Option<ExperimentOutput>,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).ok());
}

fn status_of(e: &Error) -> PovmStatus {
    match e {
        Error::Contract(_) => PovmStatus::Contract,
        Error::DegenerateEnsemble(_) => PovmStatus::Degenerate,
        Error::WeakSignal { .. } => PovmStatus::WeakSignal,
        Error::InvalidPriors(_) => PovmStatus::InvalidPriors,
        Error::CosThetaOutOfRange { .. } => PovmStatus::CosThetaOutOfRange,
        Error::Config(_) => PovmStatus::Config,
        Error::Io { .. } => PovmStatus::Io,
    }
}

fn status_of_tag(tag: &str) -> PovmStatus {
    match tag {
        "ok" => PovmStatus::Ok,
        "contract_violation" => PovmStatus::Contract,
        "degenerate_ensemble" => PovmStatus::Degenerate,
        "weak_signal" => PovmStatus::WeakSignal,
        "invalid_priors" => PovmStatus::InvalidPriors,
        "cos_theta_out_of_range" => PovmStatus::CosThetaOutOfRange,
        "config_error" => PovmStatus::Config,
        _ => PovmStatus::Io,
    }
}

enum Failure {
    Status(PovmStatus, String),
    Lib(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

fn null() -> Failure {
    Failure::Status(PovmStatus::NullPointer, "null pointer argument".into())
}

fn invalid(msg: impl Into<String>) -> Failure {
    Failure::Status(PovmStatus::InvalidArgument, msg.into())
}

/// Runs `f`, mapping errors and panics to a status and the thread's last error.
fn guard(f: impl FnOnce() -> Result<(), Failure>) -> PovmStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => PovmStatus::Ok,
        Ok(Err(Failure::Status(s, msg))) => {
            set_last_error(msg);
            s
        }
        Ok(Err(Failure::Lib(e))) => {
            set_last_error(e.to_string());
            status_of(&e)
        }
        Err(_) => {
            set_last_error("internal panic");
            PovmStatus::Panic
        }
    }
}

/// Writes `value` through `out`.
///
/// # Safety
/// `out` must be null or valid for writes.
unsafe fn put<T>(out: *mut T, value: T) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null());
    }
    out.write(value);
    Ok(())
}

/// # Safety
/// `ptr` must be null or point to a NUL-terminated string.
unsafe fn text<'a>(ptr: *const c_char) -> Result<&'a str, Failure> {
    if ptr.is_null() {
        return Err(null());
    }
    CStr::from_ptr(ptr).to_str().map_err(|_| invalid("string is not valid UTF-8"))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn povm_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Copies the calling thread's last error message into `buf` (truncated,
/// always NUL-terminated when `len > 0`). Returns the full message length
/// excluding the terminator; 0 when there is no error recorded.
///
/// # Safety
/// `buf` must be null or valid for `len` bytes of writes.
#[no_mangle]
pub unsafe extern "C" fn povm_last_error(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let e = e.borrow();
        let Some(msg) = e.as_ref() else { return 0 };
        let bytes = msg.as_bytes();
        if !buf.is_null() && len > 0 {
            let n = bytes.len().min(len - 1);
            std::ptr::copy_nonoverlapping(bytes.as_ptr().cast::<c_char>(), buf, n);
            *buf.add(n) = 0;
        }
        bytes.len()
    })
}

/// Born probability of the `+1` outcome of axis `s` on state `n`.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn povm_prob_plus(s: PovmBlochVec, n: PovmBlochVec, out: *mut f64) -> PovmStatus {
    guard(|| put(out, prob_plus(&s.into(), &n.into())?))
}

/// In-plane unit vector at +90 degrees from `n`.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn povm_perp_in_plane(n: PovmBlochVec, plane: PovmPlane, out: *mut PovmBlochVec) -> PovmStatus {
    guard(|| put(out, perp_in_plane(&n.into(), plane_from(plane)?)?.into()))
}

/// Helstrom measurement for two equiprobable states with Bloch vectors `m0`, `m1`.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn povm_helstrom(m0: PovmBlochVec, m1: PovmBlochVec, out: *mut PovmHelstrom) -> PovmStatus {
    guard(|| {
        let h = helstrom(&m0.into(), &m1.into())?;
        put(out, PovmHelstrom { p0_axis: h.p0_axis.into(), lambda: h.lambda, success: h.success })
    })
}

/// `cos(theta)` between the two states from the ensemble vector length.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn povm_cos_theta(n_norm: f64, eta0: f64, out: *mut f64) -> PovmStatus {
    guard(|| put(out, cos_theta(n_norm, Priors::new(eta0)?)?))
}

/// `cos(theta)` between the in-plane parts for a constant-z plane.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn povm_cos_theta_z(r_norm: f64, n_z: f64, eta0: f64, out: *mut f64) -> PovmStatus {
    guard(|| put(out, cos_theta_z(r_norm, n_z, Priors::new(eta0)?)?))
}

/// Success probability of the equal-count measurement, averaged over cases.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn povm_success_prob(eta0: f64, theta: f64, n_norm: f64, out: *mut f64) -> PovmStatus {
    guard(|| put(out, success_prob(Priors::new(eta0)?, theta, n_norm)?))
}

/// Pure states of one case (a `PovmCase`) reproducing the x-z ensemble vector `n`.
///
/// # Safety
/// `n0` and `n1` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn povm_decompose(
    n: PovmBlochVec,
    theta: f64,
    eta0: f64,
    case_: u32,
    n0: *mut PovmBlochVec,
    n1: *mut PovmBlochVec,
) -> PovmStatus {
    guard(|| {
        if n0.is_null() || n1.is_null() {
            return Err(null());
        }
        let d = decompose(&n.into(), theta, Priors::new(eta0)?, case_from(case_)?)?;
        put(n0, d.n0.into())?;
        put(n1, d.n1.into())
    })
}

/// Bloch vectors of the two case-averaged mixtures.
///
/// # Safety
/// `m0` and `m1` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn povm_mixture_targets(
    n: PovmBlochVec,
    theta: f64,
    eta0: f64,
    m0: *mut PovmBlochVec,
    m1: *mut PovmBlochVec,
) -> PovmStatus {
    guard(|| {
        if m0.is_null() || m1.is_null() {
            return Err(null());
        }
        let t = mixture_targets(&n.into(), theta, Priors::new(eta0)?)?;
        put(m0, t.m0.into())?;
        put(m1, t.m1.into())
    })
}

/// Recovers `alpha` in `[0, 2 pi)` from the two tuning differences.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn povm_solve_alpha(
    delta0: f64,
    delta1: f64,
    phi0: f64,
    weak_threshold: f64,
    out: *mut f64,
) -> PovmStatus {
    guard(|| put(out, solve_alpha(delta0, delta1, phi0, weak_threshold)?.radians()))
}

/// Creates an experiment from `key = value` text (the config-file format).
/// With `allow_lists` false, comma lists are rejected.
///
/// # Safety
/// `config` must be a NUL-terminated string; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn povm_experiment_new(
    config: *const c_char,
    allow_lists: bool,
    out: *mut *mut PovmExperiment,
) -> PovmStatus {
    guard(|| {
        if out.is_null() {
            return Err(null());
        }
        let settings = Settings::parse(text(config)?)?;
        let grid = SweepGrid::from_settings(&settings, allow_lists)?;
        put(out, Box::into_raw(Box::new(PovmExperiment { grid, output: None })))
    })
}

/// # Safety
/// `exp` must be null or a live handle.
unsafe fn handle<'a>(exp: *mut PovmExperiment) -> Result<&'a mut PovmExperiment, Failure> {
    exp.as_mut().ok_or_else(null)
}

fn rows(exp: &PovmExperiment) -> Result<&[TrialResult], Failure> {
    match &exp.output {
        Some(o) => Ok(&o.rows),
        None => Err(Failure::Status(PovmStatus::NotRun, "experiment has not been run".into())),
    }
}

/// Runs all trials, replacing any earlier results.
///
/// # Safety
/// `exp` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn povm_experiment_run(exp: *mut PovmExperiment) -> PovmStatus {
    guard(|| {
        let exp = handle(exp)?;
        exp.output = Some(run_sweep(&exp.grid)?);
        Ok(())
    })
}

/// # Safety
/// `exp` must be a live handle; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn povm_experiment_row_count(exp: *mut PovmExperiment, out: *mut usize) -> PovmStatus {
    guard(|| put(out, rows(handle(exp)?)?.len()))
}

/// # Safety
/// `exp` must be a live handle; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn povm_experiment_get_row(
    exp: *mut PovmExperiment,
    index: usize,
    out: *mut PovmTrialRow,
) -> PovmStatus {
    guard(|| {
        let rows = rows(handle(exp)?)?;
        let r = rows.get(index).ok_or_else(|| invalid(format!("row {index} of {}", rows.len())))?;
        let flag = |v: Option<f64>| (v.is_some(), v.unwrap_or(0.0));
        let (has_success_emp, success_emp) = flag(r.success_emp);
        let (has_success_analytic, success_analytic) = flag(r.success_analytic);
        let (has_success_oracle, success_oracle) = flag(r.success_oracle);
        let (has_z_score, z_score) = flag(r.z_score);
        put(
            out,
            PovmTrialRow {
                trial: r.trial,
                case_tag: match r.case {
                    None => -1,
                    Some(Case::A) => 0,
                    Some(Case::B) => 1,
                },
                status: status_of_tag(&r.status) as i32,
                eta0: r.eta0,
                theta_true: r.theta_true,
                alpha_true: r.alpha_true,
                beta_true: r.beta_true,
                has_axis: r.axis.is_some(),
                axis: r.axis.map(Into::into).unwrap_or_default(),
                alpha_hat: r.alpha_hat.unwrap_or(0.0),
                has_success_emp,
                success_emp,
                has_success_analytic,
                success_analytic,
                has_success_oracle,
                success_oracle,
                has_z_score,
                z_score,
                shots_learn: r.shots_learn,
                shots_holdout: r.shots_holdout,
            },
        )
    })
}

/// Writes the results to `path` in `format`, a `PovmFormat`.
///
/// # Safety
/// `exp` must be a live handle; `path` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn povm_experiment_write(
    exp: *mut PovmExperiment,
    path: *const c_char,
    format: u32,
) -> PovmStatus {
    guard(|| {
        let exp = handle(exp)?;
        rows(exp)?;
        let path = Path::new(text(path)?);
        let format = match format {
            f if f == PovmFormat::Csv as u32 => OutputFormat::Csv,
            f if f == PovmFormat::Json as u32 => OutputFormat::Json,
            f => return Err(invalid(format!("unknown format {f}"))),
        };
        let body = render(exp.output.as_ref().expect("checked above"), format)?;
        std::fs::write(path, body).map_err(|source| Error::Io { path: path.to_path_buf(), source })?;
        Ok(())
    })
}

/// Releases a handle; null is ignored.
///
/// # Safety
/// `exp` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn povm_experiment_free(exp: *mut PovmExperiment) {
    if !exp.is_null() {
        let _ = catch_unwind(AssertUnwindSafe(|| drop(Box::from_raw(exp))));
    }
}
