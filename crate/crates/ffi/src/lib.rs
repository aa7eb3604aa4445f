//! C interface. Objects are opaque heap handles released with their `_free`
//! function; strings returned to the caller are released with
//! `pcsp_string_free`. Every fallible call returns a [`PcspStatus`] and, on
//! failure, leaves a message for `pcsp_last_error_message`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::ptr;
use std::sync::Arc;

use polycsp::algebra::SchaeferOp;
use polycsp::classify::schaefer_witnesses;
use polycsp::equality::{game_oracle_eval, EqSentence};
use polycsp::model::{parse_instance, parse_language, parse_qcsp, ConstraintLanguage, CspInstance, QcspInstance};
use polycsp::oracle::brute_eval_qcsp;
use polycsp::qcsp::pi2_solve;
use polycsp::solvers::dispatch_solve;
use polycsp::{Budget, Error};

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PcspStatus {
    Ok = 0,
    NullPointer,
    Utf8,
    Parse,
    Budget,
    Precondition,
    Internal,
}

pub struct PcspLanguage(Arc<ConstraintLanguage>);
pub struct PcspInstance(CspInstance);
pub struct PcspQcsp(QcspInstance);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = CString::new(msg.into().replace('\0', " ")).expect("no interior nul");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(msg));
}

fn fail(status: PcspStatus, msg: impl Into<String>) -> PcspStatus {
    set_error(msg);
    status
}

fn lib_status(e: &Error) -> PcspStatus {
    if e.is_input_error() {
        return PcspStatus::Parse;
    }
    match e {
        Error::BudgetExceeded { .. } => PcspStatus::Budget,
        Error::Precondition(_) | Error::NoTractableMethod | Error::UnsupportedPrefixClass(_) => PcspStatus::Precondition,
        _ => PcspStatus::Internal,
    }
}

fn lib_fail(e: Error) -> PcspStatus {
    fail(lib_status(&e), e.to_string())
}

unsafe fn text<'a>(p: *const c_char) -> Result<&'a str, PcspStatus> {
    if p.is_null() {
        return Err(fail(PcspStatus::NullPointer, "null string argument"));
    }
    CStr::from_ptr(p).to_str().map_err(|e| fail(PcspStatus::Utf8, e.to_string()))
}

unsafe fn handle<'a, T>(p: *const T) -> Result<&'a T, PcspStatus> {
    p.as_ref().ok_or_else(|| fail(PcspStatus::NullPointer, "null handle"))
}

fn budget() -> Result<Budget, PcspStatus> {
    Budget::from_env().map_err(lib_fail)
}

macro_rules! tri {
    ($e:expr) => {
        match $e {
            Ok(v) => v,
            Err(status) => return status,
        }
    };
}

/// Message for the most recent failure on this thread, or null. Valid until
/// the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn pcsp_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// # Safety
/// `s` must be null or a string returned by this library.
#[no_mangle]
pub unsafe extern "C" fn pcsp_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// # Safety
/// `src` must be a nul-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn pcsp_language_parse(src: *const c_char, out: *mut *mut PcspLanguage) -> PcspStatus {
    if out.is_null() {
        return fail(PcspStatus::NullPointer, "null output pointer");
    }
    let src = tri!(text(src));
    match parse_language(src) {
        Ok(lang) => {
            *out = Box::into_raw(Box::new(PcspLanguage(Arc::new(lang))));
            PcspStatus::Ok
        }
        Err(e) => lib_fail(e),
    }
}

/// # Safety
/// `lang` must be null or a handle from `pcsp_language_parse`, freed once.
#[no_mangle]
pub unsafe extern "C" fn pcsp_language_free(lang: *mut PcspLanguage) {
    if !lang.is_null() {
        drop(Box::from_raw(lang));
    }
}

/// Bit `i` of `out_mask` is set when operation `i` of const0, const1, and,
/// or, majority, minority is a polymorphism. Zero means NP-complete.
///
/// # Safety
/// `lang` must be a live handle; `out_mask` must be writable.
#[no_mangle]
pub unsafe extern "C" fn pcsp_classify(lang: *const PcspLanguage, out_mask: *mut u32) -> PcspStatus {
    let lang = tri!(handle(lang));
    if out_mask.is_null() {
        return fail(PcspStatus::NullPointer, "null output pointer");
    }
    match schaefer_witnesses(&lang.0) {
        Ok(ws) => {
            *out_mask = SchaeferOp::ALL
                .iter()
                .enumerate()
                .filter(|(_, op)| ws.contains(op))
                .fold(0, |m, (i, _)| m | 1 << i);
            PcspStatus::Ok
        }
        Err(e) => lib_fail(e),
    }
}

/// # Safety
/// `lang` must be a live handle, `src` a nul-terminated string and `out`
/// writable.
#[no_mangle]
pub unsafe extern "C" fn pcsp_instance_parse(
    lang: *const PcspLanguage,
    src: *const c_char,
    out: *mut *mut PcspInstance,
) -> PcspStatus {
    let lang = tri!(handle(lang));
    let src = tri!(text(src));
    if out.is_null() {
        return fail(PcspStatus::NullPointer, "null output pointer");
    }
    match parse_instance(src, lang.0.clone()) {
        Ok(inst) => {
            *out = Box::into_raw(Box::new(PcspInstance(inst)));
            PcspStatus::Ok
        }
        Err(e) => lib_fail(e),
    }
}

/// # Safety
/// `inst` must be null or a handle from `pcsp_instance_parse`, freed once.
#[no_mangle]
pub unsafe extern "C" fn pcsp_instance_free(inst: *mut PcspInstance) {
    if !inst.is_null() {
        drop(Box::from_raw(inst));
    }
}

/// Solve with the dispatched polynomial method. `out_json` receives
/// `{"satisfiable":…,"assignment":…,"method":…}`.
///
/// # Safety
/// `inst` must be a live handle; `out_json` must be writable.
#[no_mangle]
pub unsafe extern "C" fn pcsp_solve(inst: *const PcspInstance, out_json: *mut *mut c_char) -> PcspStatus {
    let inst = tri!(handle(inst));
    if out_json.is_null() {
        return fail(PcspStatus::NullPointer, "null output pointer");
    }
    let result = match dispatch_solve(&inst.0) {
        Ok(r) => r,
        Err(e) => return lib_fail(e),
    };
    let json = serde_json::to_string(&result).expect("serializable");
    *out_json = CString::new(json).expect("no interior nul").into_raw();
    PcspStatus::Ok
}

/// # Safety
/// As for `pcsp_instance_parse`; the source needs a `prefix` line.
#[no_mangle]
pub unsafe extern "C" fn pcsp_qcsp_parse(
    lang: *const PcspLanguage,
    src: *const c_char,
    out: *mut *mut PcspQcsp,
) -> PcspStatus {
    let lang = tri!(handle(lang));
    let src = tri!(text(src));
    if out.is_null() {
        return fail(PcspStatus::NullPointer, "null output pointer");
    }
    match parse_qcsp(src, lang.0.clone()) {
        Ok(q) => {
            *out = Box::into_raw(Box::new(PcspQcsp(q)));
            PcspStatus::Ok
        }
        Err(e) => lib_fail(e),
    }
}

/// # Safety
/// `q` must be null or a handle from `pcsp_qcsp_parse`, freed once.
#[no_mangle]
pub unsafe extern "C" fn pcsp_qcsp_free(q: *mut PcspQcsp) {
    if !q.is_null() {
        drop(Box::from_raw(q));
    }
}

/// Truth of a quantified instance: the universal-family procedure where it
/// applies, exhaustive game search otherwise.
///
/// # Safety
/// `q` must be a live handle; `out_truth` must be writable.
#[no_mangle]
pub unsafe extern "C" fn pcsp_qsolve(q: *const PcspQcsp, out_truth: *mut bool) -> PcspStatus {
    let q = tri!(handle(q));
    if out_truth.is_null() {
        return fail(PcspStatus::NullPointer, "null output pointer");
    }
    let budget = tri!(budget());
    let truth = match pi2_solve(&q.0, &budget) {
        Ok(outcome) => Ok(outcome.holds),
        Err(Error::UnsupportedPrefixClass(_) | Error::NoTractableMethod) => brute_eval_qcsp(&q.0, &budget),
        Err(e) => Err(e),
    };
    match truth {
        Ok(t) => {
            *out_truth = t;
            PcspStatus::Ok
        }
        Err(e) => lib_fail(e),
    }
}

/// Truth of a quantified equality sentence such as `A x . E y . (x=y)`.
///
/// # Safety
/// `src` must be a nul-terminated string; `out_truth` must be writable.
#[no_mangle]
pub unsafe extern "C" fn pcsp_eq_decide(src: *const c_char, out_truth: *mut bool) -> PcspStatus {
    let src = tri!(text(src));
    if out_truth.is_null() {
        return fail(PcspStatus::NullPointer, "null output pointer");
    }
    let budget = tri!(budget());
    let result = src.parse::<EqSentence>().and_then(|s| game_oracle_eval(&s, &budget));
    match result {
        Ok(t) => {
            *out_truth = t;
            PcspStatus::Ok
        }
        Err(e) => lib_fail(e),
    }
}
