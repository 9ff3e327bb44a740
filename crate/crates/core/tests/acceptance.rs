//! End-to-end acceptance gate. Each test runs one verification probe with
//! the default pinned tolerances and prints its summary line, so
//! `cargo test --test acceptance -- --nocapture` doubles as a report.

use walkline_core::verify::{run_all, Tolerances};

fn check(name: &str) {
    let tol = Tolerances::default();
    let results = run_all(&tol, Some(name));
    assert_eq!(results.len(), 1, "probe filter {name:?} must select exactly one criterion");
    let r = &results[0];
    println!("ACCEPTANCE {}", r.line());
    assert!(r.passed, "{}", r.line());
}

#[test]
fn path_law_equivalence() {
    check("path-law-equivalence");
}

#[test]
fn metropolis_equivalence() {
    check("metropolis-equivalence");
}

#[test]
fn general_step_equivalence() {
    check("general-step-equivalence");
}

#[test]
fn continued_fraction_roundtrip() {
    check("continued-fraction-roundtrip");
}

#[test]
fn square_well_closed_forms() {
    check("square-well-closed-forms");
}

#[test]
fn double_step_boundary() {
    check("double-step-boundary");
}

#[test]
fn tail_asymptotics() {
    check("tail-asymptotics");
}

#[test]
fn ground_state_kernel() {
    check("ground-state-kernel");
}

#[test]
fn sampler_exactness() {
    check("sampler-exactness");
}

#[test]
fn wetting_dichotomy() {
    check("wetting-dichotomy");
}
