use std::path::PathBuf;

use serde_json::Value;

fn fixture(name: &str) -> String {
    let p: PathBuf = [env!("CARGO_MANIFEST_DIR"), "tests", "fixtures", name].iter().collect();
    p.to_string_lossy().into_owned()
}

fn run(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("polycsp").chain(args.iter().copied());
    let code = polycsp::cli::run(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn report(args: &[&str]) -> Value {
    let (code, out, err) = run(args);
    assert_eq!(code, 0, "stderr: {err}");
    serde_json::from_str(&out).unwrap()
}

#[test]
fn classify_gamma3() {
    let r = report(&["classify", &fixture("gamma3.lang")]);
    assert_eq!(r["result"]["csp"]["class"], "NP-complete");
    assert_eq!(r["result"]["qcsp"]["class"], "PSPACE-complete");
    assert_eq!(r["command"][0], "classify");
}

#[test]
fn classify_horn_and_empty() {
    let r = report(&["classify", &fixture("horn.lang")]);
    let ws = r["result"]["csp"]["witnesses"].as_array().unwrap();
    assert!(ws.iter().any(|w| w == "and"), "{ws:?}");
    assert_eq!(r["result"]["csp"]["verdict"], "tractable");

    let r = report(&["classify", &fixture("empty.lang")]);
    assert_eq!(r["result"]["csp"]["witnesses"].as_array().unwrap().len(), 6);
}

#[test]
fn solve_two_sat_with_verify() {
    let r = report(&["solve", &fixture("twosat.lang"), &fixture("twosat.csp"), "--verify"]);
    assert_eq!(r["result"]["method"], "majority");
    assert_eq!(r["result"]["satisfiable"], true);
    assert_eq!(r["result"]["verify"]["agrees"], true);
}

#[test]
fn solve_gamma3_needs_brute() {
    let (code, out, err) = run(&["solve", &fixture("gamma3.lang"), &fixture("gamma3.csp")]);
    assert_eq!(code, 2);
    assert!(out.is_empty());
    assert!(err.contains("no tractable method"));
    let r = report(&["solve", &fixture("gamma3.lang"), &fixture("gamma3.csp"), "--method", "brute"]);
    assert_eq!(r["result"]["satisfiable"], true);
}

#[test]
fn solve_method_precondition() {
    let (code, _, _) = run(&["solve", &fixture("gamma3.lang"), &fixture("gamma3.csp"), "--method", "ac-and"]);
    assert_eq!(code, 2);
}

#[test]
fn qsolve_horn_certificate() {
    let r = report(&["qsolve", &fixture("horn.lang"), &fixture("horn.qcsp"), "--method", "pi2"]);
    assert_eq!(r["result"]["truth"], false);
    let cert = &r["result"]["certificate"];
    for y in ["y", "y1", "y2"] {
        assert_eq!(cert[y], 1, "{cert}");
    }
    let r = report(&["qsolve", &fixture("horn.lang"), &fixture("horn.qcsp"), "--method", "brute"]);
    assert_eq!(r["result"]["truth"], false);
}

#[test]
fn qsolve_sigma1_as_csp() {
    let r = report(&["qsolve", &fixture("twosat.lang"), &fixture("sigma1.qcsp")]);
    assert_eq!(r["result"]["truth"], true);
    assert!(r["result"]["method"].as_str().unwrap().starts_with("csp"));
}

#[test]
fn qsolve_pi2_rejects_wrong_prefix() {
    let dir = tempfile::tempdir().unwrap();
    let q = dir.path().join("eae.qcsp");
    std::fs::write(&q, "vars a b c\nconstraint OR2 a b\nconstraint IMP b c\nprefix E a A b E c\n").unwrap();
    let (code, _, err) = run(&["qsolve", &fixture("twosat.lang"), q.to_str().unwrap(), "--method", "pi2"]);
    assert_eq!(code, 2, "{err}");
}

#[test]
fn ppmember_neq_over_gamma3() {
    let r = report(&["ppmember", &fixture("gamma3.lang"), &fixture("neq.lang")]);
    let rel = &r["result"]["relations"][0];
    assert_eq!(rel["relation"], "NEQ");
    assert_eq!(rel["member"], true);
}

#[test]
fn reduce_lift_constants_writes_four_tuples() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("lifted.lang");
    let r = report(&["reduce", "lift-constants", &fixture("r01.lang"), "--out", out.to_str().unwrap()]);
    assert_eq!(r["result"]["gadget"], "lift-constants");
    let lang = polycsp::model::parse_language(&std::fs::read_to_string(&out).unwrap()).unwrap();
    let rel = lang.get("R").unwrap();
    assert_eq!(rel.arity(), 3);
    assert_eq!(rel.len(), 4);
}

#[test]
fn reduce_negation_instance() {
    let r = report(&["reduce", "negation", &fixture("twosat.lang"), &fixture("twosat.csp")]);
    let text = r["result"]["instance"].as_str().unwrap();
    assert!(text.contains("b0"), "{text}");
}

#[test]
fn eq_commands() {
    let r = report(&["eq", "A w . E x . (w=x)"]);
    assert_eq!(r["result"]["truth"], true);
    let r = report(&["eq", "A u . A v . (u!=v)"]);
    assert_eq!(r["result"]["truth"], false);
    assert_eq!(r["result"]["method"], "game");
    let (code, _, err) = run(&["eq", "A x . (x=z)"]);
    assert_eq!(code, 1, "{err}");
    let (code, _, _) = run(&["eq", "A x . (x="]);
    assert_eq!(code, 1);
}

#[test]
fn polymorphisms_report() {
    let r = report(&["polymorphisms", &fixture("twosat.lang"), "--arity", "3"]);
    assert_eq!(r["result"]["all_essentially_unary"], false);
    let r = report(&["polymorphisms", &fixture("gamma3.lang"), "--arity", "2"]);
    assert_eq!(r["result"]["all_essentially_unary"], true);
}

#[test]
fn exit_codes_for_bad_input() {
    assert_eq!(run(&["classify", "/nonexistent/lang"]).0, 1);
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.lang");
    std::fs::write(&bad, "domain 2\nrelation R 2\n012\n").unwrap();
    assert_eq!(run(&["classify", bad.to_str().unwrap()]).0, 1);
    assert_eq!(run(&["frobnicate"]).0, 1);
    assert_eq!(run(&["--help"]).0, 0);
}

#[test]
fn selfcheck_passes() {
    let r = report(&["selfcheck", "--count", "30"]);
    assert_eq!(r["result"]["ok"], true);
}

#[test]
fn reports_are_deterministic_modulo_timing() {
    let strip = |mut v: Value| {
        v.as_object_mut().unwrap().remove("timing");
        serde_json::to_string(&v).unwrap()
    };
    for args in [
        vec!["classify".to_string(), fixture("horn.lang")],
        vec!["qsolve".to_string(), fixture("horn.lang"), fixture("horn.qcsp")],
        vec!["ppmember".to_string(), fixture("gamma3.lang"), fixture("neq.lang")],
        vec!["selfcheck".to_string(), "--count".to_string(), "10".to_string()],
    ] {
        let a: Vec<&str> = args.iter().map(String::as_str).collect();
        let (_, first, _) = run(&a);
        let (_, second, _) = run(&a);
        let (first, second): (Value, Value) = (serde_json::from_str(&first).unwrap(), serde_json::from_str(&second).unwrap());
        assert_eq!(first["inputs_digest"], second["inputs_digest"]);
        assert_eq!(strip(first), strip(second));
    }
}
