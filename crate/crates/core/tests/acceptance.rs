//! Acceptance battery: one PASS/FAIL line per criterion, non-zero exit if any fails.
//! Runs without the libtest harness so the lines are always printed.

use std::process::ExitCode;

use degseq::verify::CHECKS;

const SEED: u64 = 20240601;

fn main() -> ExitCode {
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = Vec::new();
    for (id, check) in CHECKS {
        if !filter.is_empty() && !filter.iter().any(|f| f == id) {
            continue;
        }
        match check(SEED) {
            Ok(r) => {
                println!("{}", r.line());
                if !r.passed {
                    failed.push(id);
                }
            }
            Err(e) => {
                println!("{id} FAIL error: {e}");
                failed.push(id);
            }
        }
    }
    if failed.is_empty() {
        println!("acceptance: all criteria passed");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: failed {failed:?}");
        ExitCode::FAILURE
    }
}
