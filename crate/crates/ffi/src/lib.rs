//! C interface to the algeff engine.
//!
//! Theories are opaque handles. Every call returns an [`AlgeffStatus`]; text
//! results are written through `char **out` and must be released with
//! [`algeff_string_free`]. After a non-OK status, [`algeff_last_error`]
//! describes the failure on the calling thread.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::sync::Arc;

use algeff::cli::commands::{EXIT_FAILURE, EXIT_INPUT, EXIT_OK, EXIT_STUCK};
use algeff::cli::{
    cmd_check, cmd_normalize, cmd_run, cmd_type, parse_theory, resolve_theory, CheckKind, Output,
};
use algeff::sigterm::Theory;

/// Result codes shared by every entry point.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AlgeffStatus {
    Ok = 0,
    /// Type error, violated law, inconclusive check, or evaluation failure.
    Failure = 1,
    /// The program performed an operation the comodel cannot answer.
    Stuck = 2,
    /// Syntax error or unresolvable reference.
    InvalidInput = 3,
    NullArgument = 4,
    InvalidUtf8 = 5,
    Panic = 6,
}

/// Which kind of definition `algeff_check` validates.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AlgeffCheckKind {
    Model = 0,
    Comodel = 1,
    Handler = 2,
}

/// An equational theory.
pub struct AlgeffTheory {
    inner: Arc<Theory>,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', "?")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn clear_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

struct Fail(AlgeffStatus, String);

unsafe fn text<'a>(p: *const c_char, what: &str) -> Result<&'a str, Fail> {
    if p.is_null() {
        return Err(Fail(AlgeffStatus::NullArgument, format!("{what} is null")));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Fail(AlgeffStatus::InvalidUtf8, format!("{what} is not UTF-8")))
}

unsafe fn theory<'a>(p: *const AlgeffTheory) -> Result<&'a Arc<Theory>, Fail> {
    p.as_ref()
        .map(|t| &t.inner)
        .ok_or_else(|| Fail(AlgeffStatus::NullArgument, "theory is null".into()))
}

fn into_c(s: String) -> *mut c_char {
    CString::new(s.replace('\0', "?"))
        .map(CString::into_raw)
        .unwrap_or(ptr::null_mut())
}

fn status_of(code: i32) -> AlgeffStatus {
    match code {
        EXIT_OK => AlgeffStatus::Ok,
        EXIT_STUCK => AlgeffStatus::Stuck,
        EXIT_INPUT => AlgeffStatus::InvalidInput,
        EXIT_FAILURE => AlgeffStatus::Failure,
        _ => AlgeffStatus::Failure,
    }
}

/// Runs `body`, storing its error and converting panics into a status.
fn guard(body: impl FnOnce() -> Result<(), Fail>) -> AlgeffStatus {
    clear_error();
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => AlgeffStatus::Ok,
        Ok(Err(Fail(status, msg))) => {
            set_error(&msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            AlgeffStatus::Panic
        }
    }
}

/// Writes the command's stdout to `out`; a nonzero exit becomes the status,
/// with stderr (or stdout if empty) as the error message.
unsafe fn deliver(o: Output, out: *mut *mut c_char) -> Result<(), Fail> {
    let status = status_of(o.code);
    let stdout = o.stdout.trim_end_matches('\n').to_string();
    let stderr = o.stderr.trim_end_matches('\n');
    let stderr = stderr.strip_prefix("error: ").unwrap_or(stderr).to_string();
    *out = into_c(stdout.clone());
    if status == AlgeffStatus::Ok {
        Ok(())
    } else if stderr.is_empty() {
        Err(Fail(status, stdout))
    } else {
        Err(Fail(status, stderr))
    }
}

fn check_out<T>(out: *mut *mut T) -> Result<(), Fail> {
    if out.is_null() {
        return Err(Fail(AlgeffStatus::NullArgument, "out is null".into()));
    }
    unsafe { *out = ptr::null_mut() };
    Ok(())
}

/// Looks up a theory by built-in key (e.g. `single-state(fin 10)`), file
/// path, or a sum `a + b`.
///
/// # Safety
/// `spec` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn algeff_theory_new(
    spec: *const c_char,
    out: *mut *mut AlgeffTheory,
) -> AlgeffStatus {
    guard(|| {
        check_out(out)?;
        let spec = text(spec, "spec")?;
        let t =
            resolve_theory(spec).map_err(|e| Fail(AlgeffStatus::InvalidInput, e.to_string()))?;
        *out = Box::into_raw(Box::new(AlgeffTheory { inner: t }));
        Ok(())
    })
}

/// Parses a theory from definition text.
///
/// # Safety
/// `src` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn algeff_theory_parse(
    src: *const c_char,
    out: *mut *mut AlgeffTheory,
) -> AlgeffStatus {
    guard(|| {
        check_out(out)?;
        let src = text(src, "src")?;
        let t = parse_theory(src).map_err(|e| Fail(AlgeffStatus::InvalidInput, e.to_string()))?;
        *out = Box::into_raw(Box::new(AlgeffTheory { inner: Arc::new(t) }));
        Ok(())
    })
}

/// Prints a theory in definition syntax.
///
/// # Safety
/// `theory` must come from this library and `out` be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn algeff_theory_describe(
    theory: *const AlgeffTheory,
    out: *mut *mut c_char,
) -> AlgeffStatus {
    guard(|| {
        check_out(out)?;
        let t = self::theory(theory)?;
        *out = into_c(t.to_string().trim_end().to_string());
        Ok(())
    })
}

/// Releases a theory. Null is ignored.
///
/// # Safety
/// `theory` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn algeff_theory_free(theory: *mut AlgeffTheory) {
    if !theory.is_null() {
        drop(Box::from_raw(theory));
    }
}

/// Evaluates `program` and runs it against `comodel` (`state`,
/// `transcript`, `transcript:<k>` or a file) from `world`. `world` may be
/// null for comodels with a default world. On `Stuck`, `out` still holds
/// the rendered outcome.
///
/// # Safety
/// String arguments must be NUL-terminated; `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn algeff_run(
    theory: *const AlgeffTheory,
    program: *const c_char,
    comodel: *const c_char,
    world: *const c_char,
    out: *mut *mut c_char,
) -> AlgeffStatus {
    guard(|| {
        check_out(out)?;
        let t = self::theory(theory)?;
        let program = text(program, "program")?;
        let comodel = text(comodel, "comodel")?;
        let world = if world.is_null() {
            None
        } else {
            Some(text(world, "world")?)
        };
        deliver(cmd_run(program, t, comodel, world), out)
    })
}

/// Writes the canonical form of the program's tree.
///
/// # Safety
/// `program` must be NUL-terminated; `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn algeff_normalize(
    theory: *const AlgeffTheory,
    program: *const c_char,
    out: *mut *mut c_char,
) -> AlgeffStatus {
    guard(|| {
        check_out(out)?;
        let t = self::theory(theory)?;
        deliver(cmd_normalize(text(program, "program")?, t), out)
    })
}

/// Writes the program's inferred type.
///
/// # Safety
/// `program` must be NUL-terminated; `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn algeff_typecheck(
    theory: *const AlgeffTheory,
    program: *const c_char,
    out: *mut *mut c_char,
) -> AlgeffStatus {
    guard(|| {
        check_out(out)?;
        let t = self::theory(theory)?;
        deliver(cmd_type(text(program, "program")?, t), out)
    })
}

/// Validates a model table, comodel table, or handler against the theory.
/// The verdict is written to `out`; a violation returns `Failure`.
/// `budget` bounds the congruence search; 0 selects the default.
///
/// # Safety
/// `src` must be NUL-terminated; `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn algeff_check(
    theory: *const AlgeffTheory,
    kind: AlgeffCheckKind,
    src: *const c_char,
    budget: usize,
    out: *mut *mut c_char,
) -> AlgeffStatus {
    guard(|| {
        check_out(out)?;
        let t = self::theory(theory)?;
        let kind = match kind {
            AlgeffCheckKind::Model => CheckKind::Model,
            AlgeffCheckKind::Comodel => CheckKind::Comodel,
            AlgeffCheckKind::Handler => CheckKind::Handler,
        };
        let budget = if budget == 0 {
            algeff::free::DEFAULT_BUDGET
        } else {
            budget
        };
        deliver(cmd_check(kind, text(src, "src")?, t, budget), out)
    })
}

/// Releases a string returned through an `out` parameter. Null is ignored.
///
/// # Safety
/// `s` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn algeff_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// The message for the last failed call on this thread, or null. The
/// pointer stays valid until the next call into this library.
#[no_mangle]
pub extern "C" fn algeff_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}
