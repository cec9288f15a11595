//! Running a seeded invariant suite and reading its report.

use banachkit::{run_suite, SUITES};

pub fn run_example() -> banachkit::Result<()> {
    for name in SUITES {
        let report = run_suite(name, 1, 10)?;
        println!("{:<15} {:>4} checks, {} failed", report.suite, report.cases.len(), report.failed);
    }
    let report = run_suite("sb", 1, 2)?;
    let first = &report.cases[0];
    println!("first record: {}", serde_json::to_string(first)?);
    Ok(())
}

#[allow(dead_code)]
fn main() -> banachkit::Result<()> {
    run_example()
}
