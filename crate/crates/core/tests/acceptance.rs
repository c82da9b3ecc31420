//! End-to-end acceptance gate: runs the thirteen verification criteria
//! and prints one pass/fail line per criterion.  Tolerances live next to
//! their reference values in the verify module.

use ellipsephic::verify::{run_criterion, CRITERION_COUNT};

#[test]
fn acceptance_criteria() {
    let mut all_passed = true;
    for id in 1..=CRITERION_COUNT {
        let r = run_criterion(id);
        let status = if r.passed { "pass" } else { "FAIL" };
        println!("criterion {:2} [{status}] {} -- {}", r.id, r.name, r.detail);
        all_passed &= r.passed;
    }
    assert!(all_passed, "one or more acceptance criteria failed");
}
