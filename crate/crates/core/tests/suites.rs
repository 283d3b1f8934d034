use ctoq::suites::{run_suite, SUITES};
use ctoq::Tolerances;

#[test]
fn every_suite_passes_small() {
    let tol = Tolerances::default();
    for s in SUITES {
        let r = run_suite(s, 12, 7, &tol).unwrap();
        assert!(r.passed(), "{r:#?}");
    }
}

#[test]
fn unknown_suite_is_rejected() {
    assert!(run_suite("nope", 1, 0, &Tolerances::default()).is_err());
}

#[test]
fn suites_are_deterministic() {
    let tol = Tolerances::default();
    let a = run_suite("thm1", 4, 3, &tol).unwrap();
    let b = run_suite("thm1", 4, 3, &tol).unwrap();
    assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
}
