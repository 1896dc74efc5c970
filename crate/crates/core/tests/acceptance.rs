//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Run with `cargo test --release --test acceptance -- --nocapture` to see
//! the report; runtime budgets assume an optimized build.

use rgld_core::harness::checks::Checker;

#[test]
fn acceptance_criteria() {
    let workers = std::thread::available_parallelism().map_or(1, |n| n.get());
    let scratch = tempfile::tempdir().expect("scratch dir");
    let mut checker = Checker::new(workers);
    let outcomes = checker.run_all(scratch.path());
    println!();
    for o in &outcomes {
        println!("{o}");
    }
    let failed: Vec<&str> = outcomes
        .iter()
        .filter(|o| !o.passed)
        .map(|o| o.name)
        .collect();
    println!(
        "acceptance: {}/{} passed",
        outcomes.len() - failed.len(),
        outcomes.len()
    );
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
