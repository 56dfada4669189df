//! C ABI for the rwcake engine.
//!
//! Handles are opaque pointers owned by the caller and released with the
//! matching `*_free` function. Rationals cross the boundary as `"p/q"`
//! strings. Every call returns an [`RwcakeStatus`]; on failure the message is
//! available from [`rwcake_last_error`] until the next call on the same thread.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use rwcake::cli::{execute, Cli, Command, DuelArgs};
use rwcake::gen::{default_band, random_profile};
use rwcake::protocols::{run_protocol, ProtocolKind};
use rwcake::query::{QueryModel, Referee};
use rwcake::rational::{fmt_q, parse_q};
use rwcake::valuation::{parse_profile, profile_to_json, PiecewiseDensity};
use rwcake::Error;

/// Status codes; the non-zero engine codes match the CLI exit codes.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RwcakeStatus {
    Ok = 0,
    Parse = 2,
    Precondition = 3,
    ModelViolation = 4,
    Certification = 5,
    NullArgument = 6,
    Panic = 7,
}

/// A list of player valuations.
pub struct RwcakeProfile {
    vals: Vec<PiecewiseDensity>,
}

/// Output of a protocol run or duel as JSON plus headline numbers.
pub struct RwcakeResult {
    json: CString,
    gap: Option<CString>,
    queries: usize,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("interior NULs removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn fail(e: Error) -> RwcakeStatus {
    let status = match e.exit_code() {
        2 => RwcakeStatus::Parse,
        4 => RwcakeStatus::ModelViolation,
        5 => RwcakeStatus::Certification,
        _ => RwcakeStatus::Precondition,
    };
    set_error(e.to_string());
    status
}

/// Runs `f`, translating errors and panics into status codes.
fn guard<F: FnOnce() -> Result<(), RwcakeStatus>>(f: F) -> RwcakeStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => RwcakeStatus::Ok,
        Ok(Err(s)) => s,
        Err(_) => {
            set_error("internal panic".into());
            RwcakeStatus::Panic
        }
    }
}

unsafe fn arg_str<'a>(p: *const c_char, name: &str) -> Result<&'a str, RwcakeStatus> {
    if p.is_null() {
        set_error(format!("{name} is null"));
        return Err(RwcakeStatus::NullArgument);
    }
    CStr::from_ptr(p).to_str().map_err(|_| fail(Error::Parse(format!("{name} is not UTF-8"))))
}

unsafe fn arg_ref<'a, T>(p: *const T, name: &str) -> Result<&'a T, RwcakeStatus> {
    p.as_ref().ok_or_else(|| {
        set_error(format!("{name} is null"));
        RwcakeStatus::NullArgument
    })
}

fn out_ptr<T>(out: *mut *mut T) -> Result<(), RwcakeStatus> {
    if out.is_null() {
        set_error("output pointer is null".into());
        return Err(RwcakeStatus::NullArgument);
    }
    Ok(())
}

fn to_cstring(s: String) -> CString {
    CString::new(s).expect("engine output has no NUL bytes")
}

/// Message for the last failed call on this thread, or NULL. Owned by the library.
#[no_mangle]
pub extern "C" fn rwcake_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Parses a valuation profile (a JSON array of densities, or `{"players": [...]}`).
///
/// # Safety
/// `json` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rwcake_profile_from_json(json: *const c_char, out: *mut *mut RwcakeProfile) -> RwcakeStatus {
    guard(|| {
        out_ptr(out)?;
        let vals = parse_profile(arg_str(json, "json")?).map_err(fail)?;
        *out = Box::into_raw(Box::new(RwcakeProfile { vals }));
        Ok(())
    })
}

/// Random hungry profile with squared densities in (1/2, 2).
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rwcake_profile_generate(
    players: usize,
    segments: usize,
    seed: u64,
    out: *mut *mut RwcakeProfile,
) -> RwcakeStatus {
    guard(|| {
        out_ptr(out)?;
        let (lo, hi) = default_band();
        let vals = random_profile(players, segments, &lo, &hi, seed).map_err(fail)?;
        *out = Box::into_raw(Box::new(RwcakeProfile { vals }));
        Ok(())
    })
}

/// Number of players, or 0 for a NULL handle.
///
/// # Safety
/// `profile` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn rwcake_profile_players(profile: *const RwcakeProfile) -> usize {
    profile.as_ref().map_or(0, |p| p.vals.len())
}

/// Serializes the profile; free the string with `rwcake_string_free`.
///
/// # Safety
/// `profile` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rwcake_profile_to_json(profile: *const RwcakeProfile, out: *mut *mut c_char) -> RwcakeStatus {
    guard(|| {
        out_ptr(out)?;
        let p = arg_ref(profile, "profile")?;
        *out = to_cstring(profile_to_json(&p.vals).to_string()).into_raw();
        Ok(())
    })
}

/// Player `player`'s (0-based) value of `[0, y]` as a `"p/q"` string.
///
/// # Safety
/// `profile` must be a live handle, `y` a NUL-terminated string, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn rwcake_profile_eval(
    profile: *const RwcakeProfile,
    player: usize,
    y: *const c_char,
    out: *mut *mut c_char,
) -> RwcakeStatus {
    guard(|| {
        out_ptr(out)?;
        let p = arg_ref(profile, "profile")?;
        let y = parse_q(arg_str(y, "y")?).map_err(fail)?;
        let d = p.vals.get(player).ok_or_else(|| fail(Error::Precondition(format!("player {player} out of range"))))?;
        *out = to_cstring(fmt_q(&d.eval_prefix(&y).map_err(fail)?)).into_raw();
        Ok(())
    })
}

/// # Safety
/// `profile` must be NULL or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn rwcake_profile_free(profile: *mut RwcakeProfile) {
    if !profile.is_null() {
        drop(Box::from_raw(profile));
    }
}

/// Runs a named protocol under `model` (`"rw"`, `"rw+"`, `"rw-"`; NULL means rw).
///
/// # Safety
/// String arguments must be NUL-terminated (`model` may be NULL); `out` writable.
#[no_mangle]
pub unsafe extern "C" fn rwcake_run_protocol(
    profile: *const RwcakeProfile,
    protocol: *const c_char,
    eps: *const c_char,
    model: *const c_char,
    out: *mut *mut RwcakeResult,
) -> RwcakeStatus {
    guard(|| {
        out_ptr(out)?;
        let p = arg_ref(profile, "profile")?;
        let kind: ProtocolKind = arg_str(protocol, "protocol")?.parse().map_err(fail)?;
        let eps = parse_q(arg_str(eps, "eps")?).map_err(fail)?;
        let model: QueryModel =
            if model.is_null() { QueryModel::Rw } else { arg_str(model, "model")?.parse().map_err(fail)? };
        let mut referee = Referee::concrete(model, p.vals.clone());
        let output = run_protocol(&kind, &mut referee, &eps).map_err(fail)?;
        let gap = output.gap(&p.vals).map_err(fail)?;
        let json = output.to_json(Some(&gap));
        *out = Box::into_raw(Box::new(RwcakeResult {
            json: to_cstring(json.to_string()),
            gap: Some(to_cstring(fmt_q(&gap))),
            queries: output.queries_used(),
        }));
        Ok(())
    })
}

/// Runs `protocol` (NULL picks the adversary's default) against an adversary
/// with a query cap, then finalizes, replays and certifies.
///
/// # Safety
/// String arguments must be NUL-terminated (`protocol` may be NULL); `out` writable.
#[no_mangle]
pub unsafe extern "C" fn rwcake_duel(
    adversary: *const c_char,
    protocol: *const c_char,
    max_queries: usize,
    eps: *const c_char,
    out: *mut *mut RwcakeResult,
) -> RwcakeStatus {
    guard(|| {
        out_ptr(out)?;
        let args = DuelArgs {
            adversary: Some(arg_str(adversary, "adversary")?.to_string()),
            protocol: if protocol.is_null() { None } else { Some(arg_str(protocol, "protocol")?.to_string()) },
            max_queries: Some(max_queries),
            eps: Some(arg_str(eps, "eps")?.to_string()),
            model: None,
        };
        let cli = Cli { config: None, approx: false, command: Command::Duel(args) };
        let text = execute(cli).map_err(fail)?.stdout;
        let v: serde_json::Value = serde_json::from_str(&text).map_err(|e| fail(e.into()))?;
        *out = Box::into_raw(Box::new(RwcakeResult {
            gap: v["certified_gap"].as_str().map(|s| to_cstring(s.to_string())),
            queries: v["queries"].as_u64().unwrap_or(0) as usize,
            json: to_cstring(text.trim_end().to_string()),
        }));
        Ok(())
    })
}

/// Full JSON output. Owned by the result handle.
///
/// # Safety
/// `result` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn rwcake_result_json(result: *const RwcakeResult) -> *const c_char {
    result.as_ref().map_or(ptr::null(), |r| r.json.as_ptr())
}

/// The recomputed gap (protocol runs) or certified residual gap (duels), or NULL.
///
/// # Safety
/// `result` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn rwcake_result_gap(result: *const RwcakeResult) -> *const c_char {
    result.as_ref().and_then(|r| r.gap.as_ref()).map_or(ptr::null(), |g| g.as_ptr())
}

/// # Safety
/// `result` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn rwcake_result_queries(result: *const RwcakeResult) -> usize {
    result.as_ref().map_or(0, |r| r.queries)
}

/// # Safety
/// `result` must be NULL or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn rwcake_result_free(result: *mut RwcakeResult) {
    if !result.is_null() {
        drop(Box::from_raw(result));
    }
}

/// Frees a string returned through an output parameter.
///
/// # Safety
/// `s` must be NULL or a string from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn rwcake_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
