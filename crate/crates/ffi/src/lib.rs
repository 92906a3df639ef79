//! C interface to the subell solver.
//!
//! Objects are opaque handles created by `*_new`/`*_load` functions and
//! released with the matching `*_free`. Every fallible call returns a
//! [`SubellStatus`]; the message of the most recent failure on the calling
//! thread is available from [`subell_last_error`].

use std::cell::RefCell;
use std::ffi::{CStr, CString};
use std::os::raw::c_char;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use subell::certificates::CertificateError;
use subell::cli::{checkpoint, Checkpoint};
use subell::oracles::{Problem, ProblemError};
use subell::solver::{AlphaSchedule, Solver, SolverError, StepOutcome, StorageMode, StrategyConfig, Termination, Variant};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SubellStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Io = 3,
    Parse = 4,
    InvalidProblem = 5,
    Solver = 6,
    Certificate = 7,
    Terminated = 8,
    BufferTooSmall = 9,
    Panic = 10,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SubellVariant {
    Subgradient = 0,
    Ellipsoid = 1,
    EllipsoidCert = 2,
    SubgradEllipsoid = 3,
}

impl From<SubellVariant> for Variant {
    fn from(v: SubellVariant) -> Self {
        match v {
            SubellVariant::Subgradient => Variant::Subgradient,
            SubellVariant::Ellipsoid => Variant::StandardEllipsoid,
            SubellVariant::EllipsoidCert => Variant::EllipsoidPrelimCert,
            SubellVariant::SubgradEllipsoid => Variant::SubgradientEllipsoid,
        }
    }
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SubellTermination {
    Running = 0,
    MaxIter = 1,
    SmallSupport = 2,
    ExactSolution = 3,
}

impl From<Option<Termination>> for SubellTermination {
    fn from(t: Option<Termination>) -> Self {
        match t {
            None => SubellTermination::Running,
            Some(Termination::MaxIter) => SubellTermination::MaxIter,
            Some(Termination::SmallSupport) => SubellTermination::SmallSupport,
            Some(Termination::ExactSolution) => SubellTermination::ExactSolution,
        }
    }
}

pub struct SubellProblem {
    inner: Problem,
}

pub struct SubellSolver {
    problem: Problem,
    solver: Solver,
}

pub struct SubellCertificate {
    inner: Checkpoint,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

struct Failure(SubellStatus, String);

impl From<ProblemError> for Failure {
    fn from(e: ProblemError) -> Self {
        let status = match e {
            ProblemError::Io(_) => SubellStatus::Io,
            ProblemError::Parse(_) => SubellStatus::Parse,
            _ => SubellStatus::InvalidProblem,
        };
        Failure(status, e.to_string())
    }
}

impl From<SolverError> for Failure {
    fn from(e: SolverError) -> Self {
        let status = match e {
            SolverError::Terminated => SubellStatus::Terminated,
            SolverError::InvalidConfig(_) => SubellStatus::InvalidArgument,
            _ => SubellStatus::Solver,
        };
        Failure(status, e.to_string())
    }
}

impl From<CertificateError> for Failure {
    fn from(e: CertificateError) -> Self {
        Failure(SubellStatus::Certificate, e.to_string())
    }
}

fn set_last_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("interior nul removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn guard<F>(f: F) -> SubellStatus
where
    F: FnOnce() -> Result<(), Failure>,
{
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => SubellStatus::Ok,
        Ok(Err(Failure(status, msg))) => {
            set_last_error(msg);
            status
        }
        Err(_) => {
            set_last_error("panic inside subell".into());
            SubellStatus::Panic
        }
    }
}

fn null() -> Failure {
    Failure(SubellStatus::NullPointer, "null pointer argument".into())
}

unsafe fn deref<'a, T>(p: *const T) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(null)
}

unsafe fn deref_mut<'a, T>(p: *mut T) -> Result<&'a mut T, Failure> {
    p.as_mut().ok_or_else(null)
}

unsafe fn write_out<T>(out: *mut T, value: T) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null());
    }
    out.write(value);
    Ok(())
}

unsafe fn str_arg<'a>(s: *const c_char) -> Result<&'a str, Failure> {
    if s.is_null() {
        return Err(null());
    }
    CStr::from_ptr(s)
        .to_str()
        .map_err(|_| Failure(SubellStatus::InvalidArgument, "string is not valid UTF-8".into()))
}

unsafe fn copy_to(values: &[f64], buf: *mut f64, len: usize) -> Result<(), Failure> {
    if len < values.len() {
        return Err(Failure(
            SubellStatus::BufferTooSmall,
            format!("buffer holds {len} values, {} needed", values.len()),
        ));
    }
    if buf.is_null() {
        return Err(null());
    }
    ptr::copy_nonoverlapping(values.as_ptr(), buf, values.len());
    Ok(())
}

/// Message of the last failed call on this thread, or null. The pointer stays
/// valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn subell_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// # Safety
/// `path` must be a nul-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn subell_problem_load(path: *const c_char, out: *mut *mut SubellProblem) -> SubellStatus {
    guard(|| {
        let problem = Problem::load(str_arg(path)?)?;
        write_out(out, Box::into_raw(Box::new(SubellProblem { inner: problem })))
    })
}

/// # Safety
/// `json` must be a nul-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn subell_problem_from_json(json: *const c_char, out: *mut *mut SubellProblem) -> SubellStatus {
    guard(|| {
        let problem = Problem::from_json(str_arg(json)?)?;
        write_out(out, Box::into_raw(Box::new(SubellProblem { inner: problem })))
    })
}

/// # Safety
/// `problem` must come from a problem constructor; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn subell_problem_dim(problem: *const SubellProblem, out: *mut usize) -> SubellStatus {
    guard(|| write_out(out, deref(problem)?.inner.dim))
}

/// # Safety
/// `problem` must come from a problem constructor and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn subell_problem_free(problem: *mut SubellProblem) {
    if !problem.is_null() {
        drop(Box::from_raw(problem));
    }
}

/// Create a solver for `problem`. `horizon = 0` selects the time-varying
/// schedule, otherwise `β_i = 1/√horizon`; `delta ≤ 0` disables early
/// termination. The solver keeps its own copy of the problem.
///
/// # Safety
/// `problem` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn subell_solver_new(
    problem: *const SubellProblem,
    variant: SubellVariant,
    horizon: usize,
    delta: f64,
    out: *mut *mut SubellSolver,
) -> SubellStatus {
    guard(|| {
        let problem = deref(problem)?.inner.clone();
        let schedule = match horizon {
            0 => AlphaSchedule::TimeVarying,
            k => AlphaSchedule::Constant { horizon: k },
        };
        let mut config = StrategyConfig::new(variant.into(), problem.dim, schedule)?;
        if delta > 0.0 {
            config = config.with_delta(delta);
        }
        let solver = Solver::for_problem(&problem, config, StorageMode::Full)?;
        write_out(out, Box::into_raw(Box::new(SubellSolver { problem, solver })))
    })
}

fn step_once(s: &mut SubellSolver) -> Result<StepOutcome, Failure> {
    let response = s.problem.oracle(s.solver.point());
    Ok(s.solver.step(response)?)
}

/// Query the oracle at the current point and advance one iteration.
///
/// # Safety
/// `solver` must be a live handle; `out` must be writable or null.
#[no_mangle]
pub unsafe extern "C" fn subell_solver_step(solver: *mut SubellSolver, out: *mut SubellTermination) -> SubellStatus {
    guard(|| {
        let s = deref_mut(solver)?;
        let outcome = step_once(s)?;
        if !out.is_null() {
            let t = match outcome {
                StepOutcome::Continue => None,
                StepOutcome::Stop(t) => Some(t),
            };
            out.write(t.into());
        }
        Ok(())
    })
}

/// Advance up to `max_iter` iterations, stopping early on termination.
///
/// # Safety
/// `solver` must be a live handle; `out` must be writable or null.
#[no_mangle]
pub unsafe extern "C" fn subell_solver_run(
    solver: *mut SubellSolver,
    max_iter: usize,
    out: *mut SubellTermination,
) -> SubellStatus {
    guard(|| {
        let s = deref_mut(solver)?;
        let mut stop = None;
        for _ in 0..max_iter {
            if let StepOutcome::Stop(t) = step_once(s)? {
                stop = Some(t);
                break;
            }
        }
        if !out.is_null() {
            out.write(stop.or(Some(Termination::MaxIter)).into());
        }
        Ok(())
    })
}

/// # Safety
/// `solver` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn subell_solver_iteration(solver: *const SubellSolver, out: *mut usize) -> SubellStatus {
    guard(|| write_out(out, deref(solver)?.solver.state().k))
}

/// Copy the current test point into `buf`, which holds `len` values.
///
/// # Safety
/// `solver` must be a live handle; `buf` must hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn subell_solver_point(solver: *const SubellSolver, buf: *mut f64, len: usize) -> SubellStatus {
    guard(|| copy_to(deref(solver)?.solver.point().as_slice(), buf, len))
}

/// # Safety
/// `solver` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn subell_solver_sliding_gap(solver: *const SubellSolver, out: *mut f64) -> SubellStatus {
    guard(|| {
        let gap = deref(solver)?.solver.sliding_gap()?;
        write_out(out, gap)
    })
}

/// # Safety
/// `solver` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn subell_solver_avrad(solver: *const SubellSolver, out: *mut f64) -> SubellStatus {
    guard(|| write_out(out, deref(solver)?.solver.avg_radius()))
}

/// # Safety
/// `solver` must be a live handle and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn subell_solver_free(solver: *mut SubellSolver) {
    if !solver.is_null() {
        drop(Box::from_raw(solver));
    }
}

/// Build a certificate for the solver's current iterate.
///
/// # Safety
/// `solver` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn subell_certify(solver: *const SubellSolver, out: *mut *mut SubellCertificate) -> SubellStatus {
    guard(|| {
        let s = deref(solver)?;
        let cp = checkpoint(&s.problem, &s.solver)?;
        write_out(out, Box::into_raw(Box::new(SubellCertificate { inner: cp })))
    })
}

/// Gap of the certificate over the initial ball.
///
/// # Safety
/// `cert` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn subell_certificate_gap(cert: *const SubellCertificate, out: *mut f64) -> SubellStatus {
    guard(|| {
        let gap = deref(cert)?
            .inner
            .cert_gap
            .ok_or_else(|| Failure(SubellStatus::Certificate, "the certificate gap is undefined".into()))?;
        write_out(out, gap)
    })
}

/// Residual of the certificate; fails when no productive step has weight.
///
/// # Safety
/// `cert` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn subell_certificate_residual(cert: *const SubellCertificate, out: *mut f64) -> SubellStatus {
    guard(|| {
        let residual = deref(cert)?
            .inner
            .residual
            .ok_or_else(|| Failure(SubellStatus::Certificate, "not a certificate: S(λ) = 0".into()))?;
        write_out(out, residual)
    })
}

/// Number of weights in the certificate.
///
/// # Safety
/// `cert` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn subell_certificate_len(cert: *const SubellCertificate, out: *mut usize) -> SubellStatus {
    guard(|| write_out(out, deref(cert)?.inner.weights.len()))
}

/// # Safety
/// `cert` must be a live handle; `buf` must hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn subell_certificate_weights(
    cert: *const SubellCertificate,
    buf: *mut f64,
    len: usize,
) -> SubellStatus {
    guard(|| copy_to(&deref(cert)?.inner.weights, buf, len))
}

/// # Safety
/// `cert` must be a live handle and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn subell_certificate_free(cert: *mut SubellCertificate) {
    if !cert.is_null() {
        drop(Box::from_raw(cert));
    }
}
