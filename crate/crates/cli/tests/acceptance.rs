//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
//! failure. Set `DPNFDM_ACCEPTANCE_QUICK=1` for reduced symbol counts.

use std::process::ExitCode;

use dpnfdm::acceptance::{run_all, Scale};

fn main() -> ExitCode {
    if std::env::args().any(|a| a == "--list") {
        println!("acceptance: test");
        return ExitCode::SUCCESS;
    }
    let quick = std::env::var("DPNFDM_ACCEPTANCE_QUICK").is_ok_and(|v| v == "1");
    let scale = if quick { Scale::quick() } else { Scale::full() };
    println!("acceptance suite ({} scale)", if quick { "quick" } else { "full" });
    let outcomes = run_all(scale, 7);
    for o in &outcomes {
        println!("{o}");
    }
    let failed = outcomes.iter().filter(|o| !o.passed).count();
    println!("{} of {} criteria passed", outcomes.len() - failed, outcomes.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
