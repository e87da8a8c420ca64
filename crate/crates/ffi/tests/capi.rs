use std::ffi::{c_char, CStr, CString};
use std::path::Path;
use std::process::Command;
use std::ptr;

use algeff_ffi::*;

fn c(s: &str) -> CString {
    CString::new(s).unwrap()
}

unsafe fn take(s: *mut c_char) -> String {
    assert!(!s.is_null());
    let out = CStr::from_ptr(s).to_str().unwrap().to_string();
    algeff_string_free(s);
    out
}

fn last_error() -> String {
    let p = algeff_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p).to_str().unwrap().to_string() }
}

unsafe fn theory(spec: &str) -> *mut AlgeffTheory {
    let mut t = ptr::null_mut();
    assert_eq!(
        algeff_theory_new(c(spec).as_ptr(), &mut t),
        AlgeffStatus::Ok
    );
    t
}

#[test]
fn run_increment() {
    unsafe {
        let t = theory("single-state(fin 10)");
        let mut out = ptr::null_mut();
        let prog = c("do x <- get!() in do _ <- put!(x+1) in return x");
        let st = algeff_run(
            t,
            prog.as_ptr(),
            c("state").as_ptr(),
            c("5").as_ptr(),
            &mut out,
        );
        assert_eq!(st, AlgeffStatus::Ok);
        assert_eq!(take(out), "5 @ 6");
        algeff_theory_free(t);
    }
}

#[test]
fn stuck_and_default_world() {
    unsafe {
        let t = theory("single-state(fin 10) + exception");
        let mut out = ptr::null_mut();
        let prog = c("do x <- get!() in do _ <- abort!() in return x");
        let st = algeff_run(
            t,
            prog.as_ptr(),
            c("state").as_ptr(),
            c("5").as_ptr(),
            &mut out,
        );
        assert_eq!(st, AlgeffStatus::Stuck);
        assert_eq!(take(out), "unhandled toplevel operation: abort");
        algeff_theory_free(t);

        let t = theory("io(enum {\"Hello world!\"})");
        let prog = c("print!(\"Hello world!\")");
        let st = algeff_run(
            t,
            prog.as_ptr(),
            c("transcript").as_ptr(),
            ptr::null(),
            &mut out,
        );
        assert_eq!(st, AlgeffStatus::Ok);
        assert_eq!(take(out), "() @ [\"Hello world!\"]");
        algeff_theory_free(t);
    }
}

#[test]
fn typecheck_and_errors() {
    unsafe {
        let t = theory("io(enum {hi})");
        let mut out = ptr::null_mut();
        assert_eq!(
            algeff_typecheck(t, c("print!(\"hi\")").as_ptr(), &mut out),
            AlgeffStatus::Ok
        );
        assert_eq!(take(out), "unit ! {print}");
        assert_eq!(
            algeff_typecheck(t, c("return").as_ptr(), &mut out),
            AlgeffStatus::InvalidInput
        );
        algeff_string_free(out);
        assert!(last_error().starts_with("syntax error at 1:7"));
        assert_eq!(
            algeff_typecheck(t, c("if () then return 1 else return 2").as_ptr(), &mut out),
            AlgeffStatus::Failure
        );
        algeff_string_free(out);
        assert!(last_error().starts_with("type error at 1:4"));
        algeff_theory_free(t);
    }
}

#[test]
fn normalize_and_check() {
    unsafe {
        let t = theory("single-state(fin 2)");
        let mut out = ptr::null_mut();
        let prog = c("do x <- get!() in do y <- get!() in return (x, y)");
        assert_eq!(
            algeff_normalize(t, prog.as_ptr(), &mut out),
            AlgeffStatus::Ok
        );
        assert_eq!(
            take(out),
            "get((); [put(0; [return (0, 0)]), put(1; [return (1, 1)])])"
        );
        let h = c("handler { return x -> return fun s -> return (x, s) \
                   | get(_; k) -> return fun s -> do f <- k s in f s \
                   | put(s; k) -> return fun _ -> do f <- k () in f s }");
        let st = algeff_check(t, AlgeffCheckKind::Handler, h.as_ptr(), 0, &mut out);
        assert_eq!(st, AlgeffStatus::Ok);
        assert_eq!(take(out), "Respected (bounded)");
        algeff_theory_free(t);

        let t = theory("semilattice");
        let m = c("model left : bool\n\
                   bot(()) = false\n\
                   join((); false, false) = false\n\
                   join((); false, true) = false\n\
                   join((); true, false) = true\n\
                   join((); true, true) = true\n");
        let st = algeff_check(t, AlgeffCheckKind::Model, m.as_ptr(), 0, &mut out);
        assert_eq!(st, AlgeffStatus::Failure);
        assert!(take(out).starts_with("Violated"));
        algeff_theory_free(t);
    }
}

#[test]
fn parsed_theories() {
    unsafe {
        let mut t = ptr::null_mut();
        let src = c("theory flip { op flip : unit ~> bool; }");
        assert_eq!(algeff_theory_parse(src.as_ptr(), &mut t), AlgeffStatus::Ok);
        let mut out = ptr::null_mut();
        assert_eq!(algeff_theory_describe(t, &mut out), AlgeffStatus::Ok);
        assert!(take(out).starts_with("theory flip {"));
        algeff_theory_free(t);

        let bad = c("theory { }");
        assert_eq!(
            algeff_theory_parse(bad.as_ptr(), &mut t),
            AlgeffStatus::InvalidInput
        );
        assert!(t.is_null());
        assert_eq!(
            algeff_theory_new(c("no-such-theory").as_ptr(), &mut t),
            AlgeffStatus::InvalidInput
        );
    }
}

#[test]
fn null_arguments() {
    unsafe {
        let mut t = ptr::null_mut();
        assert_eq!(
            algeff_theory_new(ptr::null(), &mut t),
            AlgeffStatus::NullArgument
        );
        assert_eq!(last_error(), "spec is null");
        let mut out = ptr::null_mut();
        assert_eq!(
            algeff_typecheck(ptr::null(), c("return 1").as_ptr(), &mut out),
            AlgeffStatus::NullArgument
        );
        assert_eq!(
            algeff_theory_new(c("choice").as_ptr(), ptr::null_mut()),
            AlgeffStatus::NullArgument
        );
        algeff_string_free(ptr::null_mut());
        algeff_theory_free(ptr::null_mut());
    }
}

#[test]
fn success_clears_the_error() {
    unsafe {
        let mut t = ptr::null_mut();
        algeff_theory_new(ptr::null(), &mut t);
        assert!(!algeff_last_error().is_null());
        let t = theory("choice");
        assert!(algeff_last_error().is_null());
        algeff_theory_free(t);
    }
}

#[test]
fn header_compiles_as_c() {
    let header = Path::new(env!("CARGO_MANIFEST_DIR")).join("include/algeff.h");
    assert!(header.is_file());
    let Ok(status) = Command::new("cc")
        .args(["-fsyntax-only", "-x", "c", "-Wall", "-Werror"])
        .arg(&header)
        .status()
    else {
        eprintln!("no C compiler; skipping");
        return;
    };
    assert!(status.success());
}

#[test]
fn c_program_links_and_runs() {
    let manifest = Path::new(env!("CARGO_MANIFEST_DIR"));
    // target/<profile>/deps/<this test> -> target/<profile>
    let exe = std::env::current_exe().unwrap();
    let profile = exe.parent().and_then(Path::parent).unwrap();
    let lib = profile.join("libalgeff_ffi.a");
    if !lib.is_file() {
        eprintln!("no static library at {}; skipping", lib.display());
        return;
    }
    let bin = profile.join("algeff_c_smoke");
    let Ok(status) = Command::new("cc")
        .arg(manifest.join("tests/c/smoke.c"))
        .arg("-I")
        .arg(manifest.join("include"))
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&bin)
        .status()
    else {
        eprintln!("no C compiler; skipping");
        return;
    };
    assert!(status.success());
    let out = Command::new(&bin).output().unwrap();
    assert!(
        out.status.success(),
        "{}{}",
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
}
