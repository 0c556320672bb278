//! Acceptance battery: one line of output per criterion.

use minkhoro::verify;

#[test]
fn acceptance_criteria() {
    let outcomes = verify::run_all().expect("criteria must run to completion");
    let mut all = true;
    for o in &outcomes {
        let status = if o.passed { "PASS" } else { "FAIL" };
        println!("criterion {:2} [{status}] {} — {}", o.id, o.name, o.detail);
        all &= o.passed;
    }
    assert!(all, "one or more acceptance criteria failed");
}
