//! C ABI over the normforge toolkit.
//!
//! Rationals cross the boundary as `"p/q"` strings and vectors as JSON
//! arrays of such strings. Every function returns an [`NfStatus`]; on
//! failure [`nf_last_error_message`] describes the error. Strings handed
//! out by the library are released with [`nf_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use normforge::renorming;
use normforge::space::BasisSpace;
use normforge::suite::{self, SuiteConfig};
use normforge::{Error, PolytopeBall, Rat, RatVec};

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NfStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    Parse = 3,
    DimensionMismatch = 4,
    NotANorm = 5,
    InvalidArgument = 6,
    Undecided = 7,
    ResourceGuard = 8,
    Failed = 9,
    Panic = 10,
}

/// Opaque unit ball of a polytope norm.
pub struct NfBall {
    ball: PolytopeBall,
}

/// Opaque normed space with an ordered basis.
pub struct NfSpace {
    space: BasisSpace,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(e: &Error) -> NfStatus {
    match e {
        Error::DimensionMismatch { .. } => NfStatus::DimensionMismatch,
        Error::NotANorm(_) => NfStatus::NotANorm,
        Error::Parse(_) => NfStatus::Parse,
        Error::Undecided(_) => NfStatus::Undecided,
        Error::ResourceGuard(_) | Error::BudgetExceeded { .. } => NfStatus::ResourceGuard,
        Error::InvalidArgument(_)
        | Error::OutOfRange(_)
        | Error::Precondition(_)
        | Error::ExactNormRequired
        | Error::Coherence(..) => NfStatus::InvalidArgument,
        Error::Io(_) => NfStatus::Failed,
    }
}

enum Fail {
    Status(NfStatus, String),
    Core(Error),
}

impl From<Error> for Fail {
    fn from(e: Error) -> Fail {
        Fail::Core(e)
    }
}

impl From<serde_json::Error> for Fail {
    fn from(e: serde_json::Error) -> Fail {
        Fail::Status(NfStatus::Parse, e.to_string())
    }
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> NfStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            NfStatus::Ok
        }
        Ok(Err(Fail::Core(e))) => {
            set_error(&e.to_string());
            status_of(&e)
        }
        Ok(Err(Fail::Status(s, msg))) => {
            set_error(&msg);
            s
        }
        Err(_) => {
            set_error("internal panic");
            NfStatus::Panic
        }
    }
}

unsafe fn str_arg<'a>(p: *const c_char) -> Result<&'a str, Fail> {
    if p.is_null() {
        return Err(Fail::Status(NfStatus::NullPointer, "null string argument".into()));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Fail::Status(NfStatus::InvalidUtf8, "argument is not UTF-8".into()))
}

unsafe fn rat_arg(p: *const c_char) -> Result<Rat, Fail> {
    Ok(str_arg(p)?.parse::<Rat>()?)
}

unsafe fn vec_arg(p: *const c_char) -> Result<RatVec, Fail> {
    Ok(serde_json::from_str(str_arg(p)?)?)
}

unsafe fn out_string(out: *mut *mut c_char, s: String) -> Result<(), Fail> {
    if out.is_null() {
        return Err(Fail::Status(NfStatus::NullPointer, "null output pointer".into()));
    }
    let c = CString::new(s).map_err(|_| Fail::Status(NfStatus::Failed, "interior nul".into()))?;
    *out = c.into_raw();
    Ok(())
}

fn null_check<T>(p: *const T, what: &str) -> Result<(), Fail> {
    if p.is_null() {
        return Err(Fail::Status(NfStatus::NullPointer, format!("null {what}")));
    }
    Ok(())
}

/// Message of the last failing call on this thread; valid until the next
/// call into the library on the same thread. Never null.
#[no_mangle]
pub extern "C" fn nf_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Release a string returned by the library.
///
/// # Safety
/// `s` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn nf_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Parse a ball `{"dim": d, "generators": [["p/q", ...], ...]}`.
///
/// # Safety
/// `json` must be a nul-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn nf_ball_from_json(json: *const c_char, out: *mut *mut NfBall) -> NfStatus {
    guard(|| {
        null_check(out, "output pointer")?;
        let ball: PolytopeBall = serde_json::from_str(str_arg(json)?)?;
        *out = Box::into_raw(Box::new(NfBall { ball }));
        Ok(())
    })
}

/// # Safety
/// `ball` must come from [`nf_ball_from_json`] and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn nf_ball_free(ball: *mut NfBall) {
    if !ball.is_null() {
        drop(Box::from_raw(ball));
    }
}

/// # Safety
/// `ball` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn nf_ball_dim(ball: *const NfBall) -> usize {
    if ball.is_null() {
        return 0;
    }
    (*ball).ball.dim()
}

/// Exact gauge of a vector, written as `"p/q"` to `out`.
///
/// # Safety
/// `ball` must be a live handle, `vec_json` a nul-terminated string and
/// `out` writable.
#[no_mangle]
pub unsafe extern "C" fn nf_ball_gauge(ball: *const NfBall, vec_json: *const c_char, out: *mut *mut c_char) -> NfStatus {
    guard(|| {
        null_check(ball, "ball")?;
        let x = vec_arg(vec_json)?;
        let g = (*ball).ball.gauge(&x)?;
        out_string(out, g.to_string())
    })
}

/// Exact membership test.
///
/// # Safety
/// As [`nf_ball_gauge`]; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn nf_ball_contains(ball: *const NfBall, vec_json: *const c_char, out: *mut bool) -> NfStatus {
    guard(|| {
        null_check(ball, "ball")?;
        null_check(out, "output pointer")?;
        let x = vec_arg(vec_json)?;
        *out = (*ball).ball.contains(&x)?;
        Ok(())
    })
}

/// Enclosure `[lo, hi]` of `ρ(r, s, t)` with width at most `eps`.
///
/// # Safety
/// All string arguments must be nul-terminated; `lo` and `hi` writable.
#[no_mangle]
pub unsafe extern "C" fn nf_rho(
    r: *const c_char,
    s: *const c_char,
    t: *const c_char,
    eps: *const c_char,
    lo: *mut *mut c_char,
    hi: *mut *mut c_char,
) -> NfStatus {
    guard(|| {
        null_check(lo, "output pointer")?;
        null_check(hi, "output pointer")?;
        let iv = renorming::rho(&rat_arg(r)?, &rat_arg(s)?, &rat_arg(t)?, &rat_arg(eps)?)?;
        out_string(lo, iv.lo.to_string())?;
        out_string(hi, iv.hi.to_string())
    })
}

/// Parse a space `{"dim": d, "norm": {...}, "tags": [...]}`.
///
/// # Safety
/// `json` must be nul-terminated; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn nf_space_from_json(json: *const c_char, out: *mut *mut NfSpace) -> NfStatus {
    guard(|| {
        null_check(out, "output pointer")?;
        let space: BasisSpace = serde_json::from_str(str_arg(json)?)?;
        space.validate()?;
        *out = Box::into_raw(Box::new(NfSpace { space }));
        Ok(())
    })
}

/// # Safety
/// `space` must come from [`nf_space_from_json`] and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn nf_space_free(space: *mut NfSpace) {
    if !space.is_null() {
        drop(Box::from_raw(space));
    }
}

/// Norm of a vector as JSON: `{"exact": "p/q"}`, `{"sqrt": "p/q"}` or
/// `{"enclosure": {"lo": ..., "hi": ...}}`; enclosing nodes use width
/// `eps`.
///
/// # Safety
/// `space` must be a live handle, strings nul-terminated, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn nf_space_eval(
    space: *const NfSpace,
    vec_json: *const c_char,
    eps: *const c_char,
    out: *mut *mut c_char,
) -> NfStatus {
    guard(|| {
        null_check(space, "space")?;
        let x = vec_arg(vec_json)?;
        let v = (*space).space.norm.eval_eps(&x, &rat_arg(eps)?)?;
        out_string(out, serde_json::to_string(&v)?)
    })
}

/// Run a verification suite (or `"all"`) and return the JSON report.
/// `passed` receives whether every check passed.
///
/// # Safety
/// `name` must be nul-terminated; `report` and `passed` writable.
#[no_mangle]
pub unsafe extern "C" fn nf_verify(
    name: *const c_char,
    seed: u64,
    samples: usize,
    report: *mut *mut c_char,
    passed: *mut bool,
) -> NfStatus {
    guard(|| {
        null_check(passed, "output pointer")?;
        let cfg = SuiteConfig { seed, samples, ..SuiteConfig::default() };
        let r = suite::run(str_arg(name)?, &cfg)?;
        *passed = r.passed();
        out_string(report, serde_json::to_string(&r)?)
    })
}
