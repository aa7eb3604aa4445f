use std::ffi::{CStr, CString};
use std::ptr;

use polycsp_ffi::*;

fn c(s: &str) -> CString {
    CString::new(s).unwrap()
}

fn last_error() -> String {
    let p = pcsp_last_error_message();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

const TWO_SAT: &str = "domain 2\nrelation OR2 2\n01 10 11\nrelation IMP 2\n00 01 11\nrelation NAND 2\n00 01 10\n";
const GAMMA3: &str = "domain 2\nrelation R03 3\n001 010 011 100 101 110 111\nrelation R33 3\n000 001 010 011 100 101 110\n";

#[test]
fn classify_masks() {
    unsafe {
        let mut lang = ptr::null_mut();
        assert_eq!(pcsp_language_parse(c(TWO_SAT).as_ptr(), &mut lang), PcspStatus::Ok);
        let mut mask = 0u32;
        assert_eq!(pcsp_classify(lang, &mut mask), PcspStatus::Ok);
        assert_eq!(mask, 1 << 4, "majority only");
        pcsp_language_free(lang);

        let mut g = ptr::null_mut();
        assert_eq!(pcsp_language_parse(c(GAMMA3).as_ptr(), &mut g), PcspStatus::Ok);
        assert_eq!(pcsp_classify(g, &mut mask), PcspStatus::Ok);
        assert_eq!(mask, 0);
        pcsp_language_free(g);
    }
}

#[test]
fn solve_returns_json() {
    unsafe {
        let mut lang = ptr::null_mut();
        assert_eq!(pcsp_language_parse(c(TWO_SAT).as_ptr(), &mut lang), PcspStatus::Ok);
        let mut inst = ptr::null_mut();
        let src = c("vars a b c\nconstraint OR2 a b\nconstraint NAND a b\nconstraint IMP b c\n");
        assert_eq!(pcsp_instance_parse(lang, src.as_ptr(), &mut inst), PcspStatus::Ok);
        let mut json = ptr::null_mut();
        assert_eq!(pcsp_solve(inst, &mut json), PcspStatus::Ok);
        let v: serde_json::Value = serde_json::from_str(CStr::from_ptr(json).to_str().unwrap()).unwrap();
        assert_eq!(v["satisfiable"], true);
        assert_eq!(v["method"], "majority");
        pcsp_string_free(json);
        pcsp_instance_free(inst);
        pcsp_language_free(lang);
    }
}

#[test]
fn hard_language_is_a_precondition_failure() {
    unsafe {
        let mut lang = ptr::null_mut();
        assert_eq!(pcsp_language_parse(c(GAMMA3).as_ptr(), &mut lang), PcspStatus::Ok);
        let mut inst = ptr::null_mut();
        assert_eq!(pcsp_instance_parse(lang, c("vars x y z\nconstraint R03 x y z\n").as_ptr(), &mut inst), PcspStatus::Ok);
        let mut json = ptr::null_mut();
        assert_eq!(pcsp_solve(inst, &mut json), PcspStatus::Precondition);
        assert!(json.is_null());
        assert!(last_error().contains("no tractable method"));
        pcsp_instance_free(inst);
        pcsp_language_free(lang);
    }
}

#[test]
fn qsolve_and_eq() {
    unsafe {
        let horn = c("domain 2\nrelation IMP 2\n00 01 11\nrelation R23 3\n000 001 010 011 100 101 111\nrelation NAND 2\n00 01 10\n");
        let mut lang = ptr::null_mut();
        assert_eq!(pcsp_language_parse(horn.as_ptr(), &mut lang), PcspStatus::Ok);
        let src = c("vars y y1 y2 x1 x2\nconstraint IMP y x1\nconstraint R23 y1 x1 y\nconstraint NAND x2 y\nconstraint R23 y2 x1 x2\nprefix A y A y1 A y2 E x1 E x2\n");
        let mut q = ptr::null_mut();
        assert_eq!(pcsp_qcsp_parse(lang, src.as_ptr(), &mut q), PcspStatus::Ok);
        let mut truth = true;
        assert_eq!(pcsp_qsolve(q, &mut truth), PcspStatus::Ok);
        assert!(!truth);
        pcsp_qcsp_free(q);

        // three alternations: falls back to game search
        let src = c("vars a b c\nconstraint IMP a b\nconstraint IMP b a\nconstraint IMP b c\nprefix E a A b E c\n");
        assert_eq!(pcsp_qcsp_parse(lang, src.as_ptr(), &mut q), PcspStatus::Ok);
        assert_eq!(pcsp_qsolve(q, &mut truth), PcspStatus::Ok);
        assert!(!truth);
        pcsp_qcsp_free(q);
        pcsp_language_free(lang);

        assert_eq!(pcsp_eq_decide(c("A w . E x . (w=x)").as_ptr(), &mut truth), PcspStatus::Ok);
        assert!(truth);
        assert_eq!(pcsp_eq_decide(c("A u . A v . (u!=v)").as_ptr(), &mut truth), PcspStatus::Ok);
        assert!(!truth);
    }
}

#[test]
fn bad_arguments() {
    unsafe {
        let mut lang = ptr::null_mut();
        assert_eq!(pcsp_language_parse(ptr::null(), &mut lang), PcspStatus::NullPointer);
        assert_eq!(pcsp_language_parse(c("domain 2\nrelation R 2\n0\n").as_ptr(), &mut lang), PcspStatus::Parse);
        assert!(lang.is_null());
        assert!(!last_error().is_empty());
        let bad = [0xffu8, 0];
        assert_eq!(pcsp_language_parse(bad.as_ptr().cast(), &mut lang), PcspStatus::Utf8);
        let mut mask = 0;
        assert_eq!(pcsp_classify(ptr::null(), &mut mask), PcspStatus::NullPointer);
        let mut truth = false;
        assert_eq!(pcsp_eq_decide(c("A x . (x=z)").as_ptr(), &mut truth), PcspStatus::Parse);
        pcsp_language_free(ptr::null_mut());
        pcsp_string_free(ptr::null_mut());
    }
}

#[test]
fn header_declares_every_export() {
    let header = include_str!("../include/polycsp.h");
    let src = include_str!("../src/lib.rs");
    let exports: Vec<&str> = src
        .lines()
        .filter_map(|l| l.split("extern \"C\" fn ").nth(1))
        .map(|rest| rest.split('(').next().unwrap())
        .collect();
    assert!(exports.len() >= 12);
    for name in exports {
        assert!(header.contains(&format!("{name}(")), "{name} missing from header");
    }
}
