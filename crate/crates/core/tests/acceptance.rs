//! Acceptance gate: runs every criterion at full Monte Carlo depth and
//! prints one PASS/FAIL line per criterion. Exits nonzero on any failure.
//!
//! `FR_LEVEL=fast` drops to 10^5 samples for quick local runs.

use std::process::ExitCode;

use fading_rates::verify::{run_criterion, Level, VerifyOptions, CRITERIA};

fn main() -> ExitCode {
    let level = match std::env::var("FR_LEVEL") {
        Ok(s) => s.parse().expect("FR_LEVEL"),
        Err(_) => Level::Full,
    };
    let opts = VerifyOptions::new(level);
    println!("acceptance: level {level}, seed {:#x}, {} workers", opts.seed, opts.workers);
    let mut failed = 0;
    for &id in &CRITERIA {
        let report = run_criterion(id, &opts).expect("known criterion");
        if report.passed() {
            println!("{report}");
        } else {
            failed += 1;
            print!("{}", report.details());
        }
    }
    if failed == 0 {
        println!("acceptance: all {} criteria passed", CRITERIA.len());
        ExitCode::SUCCESS
    } else {
        println!("acceptance: {failed} of {} criteria failed", CRITERIA.len());
        ExitCode::FAILURE
    }
}
