//! The acceptance gate: every reproduction criterion as its own test, all
//! sharing one execution of the full training matrix. Each test prints its
//! one-line PASS/FAIL verdict (visible with `--nocapture`) and asserts it.
//!
//! Run with `cargo test --test acceptance -- --nocapture` to see the lines.

use boltzfim::harness::report::{evaluate_criteria, execute_matrix, CriterionResult, MatrixResults};
use std::sync::OnceLock;

fn criteria() -> &'static [CriterionResult] {
    static MATRIX: OnceLock<MatrixResults> = OnceLock::new();
    static CRITERIA: OnceLock<Vec<CriterionResult>> = OnceLock::new();
    CRITERIA.get_or_init(|| {
        let m = MATRIX.get_or_init(|| execute_matrix(0).expect("training matrix failed to run"));
        evaluate_criteria(m)
    })
}

fn check(id: usize) {
    let c = criteria()
        .iter()
        .find(|c| c.id == id)
        .unwrap_or_else(|| panic!("no criterion with id {id}"));
    println!("{}", c.line());
    assert!(c.pass, "{}", c.line());
}

#[test]
fn criterion_01_encoding_equivalence() {
    check(1);
}

#[test]
fn criterion_02_fim_definition() {
    check(2);
}

#[test]
fn criterion_03_zero_model_spectra() {
    check(3);
}

#[test]
fn criterion_04_sampler_fidelity() {
    check(4);
}

#[test]
fn criterion_05_gradient_and_descent() {
    check(5);
}

#[test]
fn criterion_06_sgd_encoding_gap() {
    check(6);
}

#[test]
fn criterion_07_ngd_invariance() {
    check(7);
}

#[test]
fn criterion_08_entropy_ordering() {
    check(8);
}

#[test]
fn criterion_09_small_eigenvalue_persistence() {
    check(9);
}

#[test]
fn criterion_10_schur_bound() {
    check(10);
}

#[test]
fn criterion_11_moment_statistics() {
    check(11);
}

#[test]
fn criterion_12_determinism() {
    check(12);
}

/// Prints the whole scoreboard in one place (handy with --nocapture).
#[test]
fn scoreboard() {
    let all = criteria();
    for c in all {
        println!("{}", c.line());
    }
    let passed = all.iter().filter(|c| c.pass).count();
    println!("{passed}/{} criteria passed", all.len());
}
