//! Runs every acceptance criterion and prints one line per criterion.
//! Set `SCHMIDT_LDP_ONLY=1,3` to run a subset.

use std::process::ExitCode;

use schmidt_ldp::acceptance::{run, Settings};

fn main() -> ExitCode {
    let only: Vec<u8> = std::env::var("SCHMIDT_LDP_ONLY")
        .ok()
        .map(|v| v.split(',').filter_map(|s| s.trim().parse().ok()).collect())
        .unwrap_or_default();
    let reports = run(&only, &Settings::default());
    let mut failed = 0;
    for r in &reports {
        println!("{}", r.summary_line());
        for c in &r.checks {
            println!("    {:<60} {:>14.6e}  ({})", c.label, c.observed, c.condition);
        }
        failed += usize::from(!r.passed());
    }
    println!("acceptance: {} passed, {} failed", reports.len() - failed, failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
