use std::ffi::{CStr, CString};
use std::ptr;

use rwcake_ffi::*;

fn c(s: &str) -> CString {
    CString::new(s).unwrap()
}

fn read(p: *const std::ffi::c_char) -> String {
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_str().unwrap().to_string()
}

const UNIFORM_PAIR: &str = r#"[{"breakpoints":["0","1"],"values":["1"]},{"breakpoints":["0","1"],"values":["1"]}]"#;

#[test]
fn profile_round_trip_and_eval() {
    let mut p = ptr::null_mut();
    unsafe {
        assert_eq!(rwcake_profile_from_json(c(UNIFORM_PAIR).as_ptr(), &mut p), RwcakeStatus::Ok);
        assert_eq!(rwcake_profile_players(p), 2);
        let mut v = ptr::null_mut();
        assert_eq!(rwcake_profile_eval(p, 1, c("1/3").as_ptr(), &mut v), RwcakeStatus::Ok);
        assert_eq!(read(v), "1/3");
        rwcake_string_free(v);
        let mut j = ptr::null_mut();
        assert_eq!(rwcake_profile_to_json(p, &mut j), RwcakeStatus::Ok);
        assert!(read(j).contains("players"));
        rwcake_string_free(j);
        rwcake_profile_free(p);
    }
}

#[test]
fn protocol_run_reports_gap_and_queries() {
    let mut p = ptr::null_mut();
    let mut r = ptr::null_mut();
    unsafe {
        assert_eq!(rwcake_profile_generate(3, 4, 9, &mut p), RwcakeStatus::Ok);
        let status = rwcake_run_protocol(p, c("ef3").as_ptr(), c("1/1024").as_ptr(), ptr::null(), &mut r);
        assert_eq!(status, RwcakeStatus::Ok);
        assert!(rwcake_result_queries(r) > 0);
        let gap = rwcake::rational::parse_q(&read(rwcake_result_gap(r))).unwrap();
        assert!(gap <= rwcake::rational::q(1, 1024));
        assert!(read(rwcake_result_json(r)).contains("allocation"));
        rwcake_result_free(r);
        rwcake_profile_free(p);
    }
}

#[test]
fn errors_carry_codes_and_messages() {
    let mut p = ptr::null_mut();
    unsafe {
        assert_eq!(rwcake_profile_from_json(c("not json").as_ptr(), &mut p), RwcakeStatus::Parse);
        assert!(!rwcake_last_error().is_null());
        assert_eq!(rwcake_profile_from_json(ptr::null(), &mut p), RwcakeStatus::NullArgument);
        assert_eq!(rwcake_profile_from_json(c(UNIFORM_PAIR).as_ptr(), &mut p), RwcakeStatus::Ok);
        assert!(rwcake_last_error().is_null());
        let mut r = ptr::null_mut();
        let pre = rwcake_run_protocol(p, c("ef3").as_ptr(), c("1/10").as_ptr(), ptr::null(), &mut r);
        assert_eq!(pre, RwcakeStatus::Precondition);
        let model = rwcake_run_protocol(p, c("cut-and-choose").as_ptr(), c("1/10").as_ptr(), c("rw-").as_ptr(), &mut r);
        assert_eq!(model, RwcakeStatus::ModelViolation);
        assert!(r.is_null());
        rwcake_profile_free(p);
        rwcake_profile_free(ptr::null_mut());
    }
}

#[test]
fn duel_certifies_residual() {
    let mut r = ptr::null_mut();
    unsafe {
        let status = rwcake_duel(c("equitable").as_ptr(), ptr::null(), 0, c("1/1000000").as_ptr(), &mut r);
        assert_eq!(status, RwcakeStatus::Ok);
        let g = rwcake::rational::parse_q(&read(rwcake_result_gap(r))).unwrap();
        assert!(g >= rwcake::rational::q(1, 100));
        rwcake_result_free(r);
    }
}

#[test]
fn generated_header_declares_the_api() {
    let header = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/rwcake.h")).unwrap();
    for name in [
        "rwcake_profile_from_json",
        "rwcake_run_protocol",
        "rwcake_duel",
        "rwcake_result_free",
        "typedef struct RwcakeProfile RwcakeProfile",
        "RWCAKE_STATUS_CERTIFICATION = 5",
    ] {
        assert!(header.contains(name), "header lacks {name}");
    }
}

#[test]
fn header_compiles_as_c() {
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("use.c");
    std::fs::write(
        &src,
        "#include \"rwcake.h\"\nint main(void) {\n  RwcakeProfile *p = NULL;\n  \
         RwcakeStatus s = rwcake_profile_generate(2, 4, 1, &p);\n  rwcake_profile_free(p);\n  \
         return s == RWCAKE_STATUS_OK ? 0 : 1;\n}\n",
    )
    .unwrap();
    let include = concat!(env!("CARGO_MANIFEST_DIR"), "/include");
    let status = match std::process::Command::new("cc")
        .args(["-fsyntax-only", "-Wall", "-Werror", "-I", include])
        .arg(&src)
        .status()
    {
        Ok(s) => s,
        Err(_) => {
            eprintln!("no C compiler on PATH; header syntax not checked");
            return;
        }
    };
    assert!(status.success());
}
