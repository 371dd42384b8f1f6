//! C interface to `marked_groups`.
//!
//! Groups and balls are opaque handles owned by the caller and released with
//! `mg_group_free` / `mg_ball_free`. Every fallible function returns an `MgStatus`;
//! on failure `mg_last_error_message` describes the error for the calling thread.
//! Strings returned through `char **` out-parameters are released with
//! `mg_string_free`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use marked_groups::cayley::{
    build_ball, kernel_agreement, local_agreement_radius, r_locally_isomorphic, Ball, BallOptions, MarkedGroup,
};
use marked_groups::families::parse_selector;
use marked_groups::oracles::{check_metric_condition, symmetrize, Presentation};
use marked_groups::qiwitness::search_witness;
use marked_groups::{Decision, Word};
use num_rational::Ratio;

/// Status code returned by every fallible entry point.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MgStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    Parse = 3,
    Library = 4,
    Panic = 5,
}

/// A marked group.
pub struct MgGroup {
    group: MarkedGroup,
}

/// A rooted labeled Cayley ball.
pub struct MgBall {
    ball: Ball,
}

/// Word-problem answer for `mg_group_decide`.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MgDecision {
    Identity = 0,
    NonIdentity = 1,
    Unknown = 2,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

struct Failure(MgStatus, String);

fn set_error(message: &str) {
    let text = CString::new(message.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = text);
}

fn guard(body: impl FnOnce() -> Result<(), Failure>) -> MgStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => {
            set_error("");
            MgStatus::Ok
        }
        Ok(Err(Failure(status, message))) => {
            set_error(&message);
            status
        }
        Err(panic) => {
            let message = panic
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| panic.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".to_string());
            set_error(&message);
            MgStatus::Panic
        }
    }
}

fn null(what: &str) -> Failure {
    Failure(MgStatus::NullPointer, format!("{what} is null"))
}

fn library(e: impl ToString) -> Failure {
    Failure(MgStatus::Library, e.to_string())
}

fn parse_failure(e: impl ToString) -> Failure {
    Failure(MgStatus::Parse, e.to_string())
}

unsafe fn text<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|e| Failure(MgStatus::InvalidUtf8, format!("{what}: {e}")))
}

unsafe fn group<'a>(p: *const MgGroup, what: &str) -> Result<&'a MgGroup, Failure> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn write<T>(out: *mut T, value: T) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null("output pointer"));
    }
    out.write(value);
    Ok(())
}

unsafe fn write_string(out: *mut *mut c_char, s: String) -> Result<(), Failure> {
    let c = CString::new(s).map_err(library)?;
    if out.is_null() {
        return Err(null("output pointer"));
    }
    out.write(c.into_raw());
    Ok(())
}

fn options(word_budget: u64) -> BallOptions {
    BallOptions {
        word_budget: if word_budget == 0 { BallOptions::default().word_budget } else { word_budget },
        ..BallOptions::default()
    }
}

/// Message for the last failed call on this thread; empty after a successful call.
/// The pointer stays valid until the next call into this library on the same thread.
#[no_mangle]
pub extern "C" fn mg_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Releases a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn mg_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Builds a group from a selector such as `hall:finite:{1,3}`, `free:2` or `bowditch:finite:{1}:4`.
///
/// # Safety
/// `selector` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mg_group_from_selector(selector: *const c_char, out: *mut *mut MgGroup) -> MgStatus {
    guard(|| {
        let s = text(selector, "selector")?;
        let oracle = parse_selector(s).map_err(parse_failure)?;
        let handle = Box::new(MgGroup { group: MarkedGroup::new(oracle) });
        write(out, Box::into_raw(handle))
    })
}

/// Releases a group. Null is ignored.
///
/// # Safety
/// `g` must come from `mg_group_from_selector` and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn mg_group_free(g: *mut MgGroup) {
    if !g.is_null() {
        drop(Box::from_raw(g));
    }
}

/// # Safety
/// `g` must be a live group handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mg_group_rank(g: *const MgGroup, out: *mut usize) -> MgStatus {
    guard(|| write(out, group(g, "group")?.group.rank()))
}

/// Decides whether `word` (letters `x<i>` / `X<i>`) is the identity.
///
/// # Safety
/// `g` must be a live group handle, `word` NUL-terminated, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn mg_group_decide(g: *const MgGroup, word: *const c_char, out: *mut MgDecision) -> MgStatus {
    guard(|| {
        let g = group(g, "group")?;
        let w = Word::parse(g.group.rank(), text(word, "word")?).map_err(parse_failure)?;
        let d = match g.group.oracle().decide(&w) {
            Decision::Identity => MgDecision::Identity,
            Decision::NonIdentity => MgDecision::NonIdentity,
            Decision::Unknown => MgDecision::Unknown,
        };
        write(out, d)
    })
}

/// Builds the ball of radius `radius`. A `word_budget` of 0 selects the default.
///
/// # Safety
/// `g` must be a live group handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mg_ball_build(
    g: *const MgGroup,
    radius: usize,
    word_budget: u64,
    out: *mut *mut MgBall,
) -> MgStatus {
    guard(|| {
        let g = group(g, "group")?;
        let ball = build_ball(&g.group, radius, &options(word_budget)).map_err(library)?;
        write(out, Box::into_raw(Box::new(MgBall { ball })))
    })
}

/// Releases a ball. Null is ignored.
///
/// # Safety
/// `b` must come from `mg_ball_build` and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn mg_ball_free(b: *mut MgBall) {
    if !b.is_null() {
        drop(Box::from_raw(b));
    }
}

/// # Safety
/// `b` must be a live ball handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mg_ball_vertex_count(b: *const MgBall, out: *mut usize) -> MgStatus {
    guard(|| write(out, b.as_ref().ok_or_else(|| null("ball"))?.ball.len()))
}

/// Number of labeled directed edges, one per vertex and letter with both ends in the ball.
///
/// # Safety
/// `b` must be a live ball handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mg_ball_edge_count(b: *const MgBall, out: *mut usize) -> MgStatus {
    guard(|| write(out, b.as_ref().ok_or_else(|| null("ball"))?.ball.edge_count()))
}

/// SHA-256 of the canonical ball signature, as hex.
///
/// # Safety
/// `b` must be a live ball handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mg_ball_fingerprint(b: *const MgBall, out: *mut *mut c_char) -> MgStatus {
    guard(|| {
        let b = b.as_ref().ok_or_else(|| null("ball"))?;
        write_string(out, b.ball.signature().fingerprint())
    })
}

/// # Safety
/// `b` must be a live ball handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mg_ball_to_json(b: *const MgBall, out: *mut *mut c_char) -> MgStatus {
    guard(|| {
        let b = b.as_ref().ok_or_else(|| null("ball"))?;
        write_string(out, b.ball.to_json().to_string())
    })
}

/// # Safety
/// `a`, `b` must be live group handles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mg_locally_isomorphic(
    a: *const MgGroup,
    b: *const MgGroup,
    radius: usize,
    word_budget: u64,
    out: *mut bool,
) -> MgStatus {
    guard(|| {
        let (a, b) = (group(a, "first group")?, group(b, "second group")?);
        let same = r_locally_isomorphic(&a.group, &b.group, radius, &options(word_budget)).map_err(library)?;
        write(out, same)
    })
}

/// Largest `r <= max_radius` with isomorphic balls; `max_radius` when they all agree.
///
/// # Safety
/// `a`, `b` must be live group handles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mg_agreement_radius(
    a: *const MgGroup,
    b: *const MgGroup,
    max_radius: usize,
    word_budget: u64,
    out: *mut i64,
) -> MgStatus {
    guard(|| {
        let (a, b) = (group(a, "first group")?, group(b, "second group")?);
        let r = local_agreement_radius(&a.group, &b.group, max_radius, &options(word_budget)).map_err(library)?;
        write(out, r)
    })
}

/// Whether both groups kill the same words of length at most `max_len`.
///
/// # Safety
/// `a`, `b` must be live group handles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mg_kernel_agreement(
    a: *const MgGroup,
    b: *const MgGroup,
    max_len: usize,
    out: *mut bool,
) -> MgStatus {
    guard(|| {
        let (a, b) = (group(a, "first group")?, group(b, "second group")?);
        write(out, kernel_agreement(&a.group, &b.group, max_len).map_err(library)?)
    })
}

/// Checks `C'(num/den)` for a presentation in the text format (`rank <n>` line, then
/// one relator per line). Writes a JSON report.
///
/// # Safety
/// `presentation` must be NUL-terminated; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mg_check_sc(
    presentation: *const c_char,
    lambda_num: u64,
    lambda_den: u64,
    out: *mut *mut c_char,
) -> MgStatus {
    guard(|| {
        let p = Presentation::parse(text(presentation, "presentation")?).map_err(parse_failure)?;
        if lambda_den == 0 {
            return Err(parse_failure("lambda denominator is zero"));
        }
        let report = check_metric_condition(&symmetrize(&p), Ratio::new(lambda_num, lambda_den)).map_err(library)?;
        write_string(out, serde_json::to_string(&report).map_err(library)?)
    })
}

/// Searches for a `(C, M)` witnessing pair. Writes the outcome as JSON, with a
/// `status` of `Found`, `NonExistent` or `BudgetExceeded`.
///
/// # Safety
/// `a`, `b` must be live group handles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mg_qi_search(
    a: *const MgGroup,
    b: *const MgGroup,
    c: u64,
    m: usize,
    node_budget: u64,
    out: *mut *mut c_char,
) -> MgStatus {
    guard(|| {
        let (a, b) = (group(a, "first group")?, group(b, "second group")?);
        let outcome = search_witness(&a.group, &b.group, c, m, node_budget, &BallOptions::default()).map_err(library)?;
        write_string(out, outcome.to_json().to_string())
    })
}
