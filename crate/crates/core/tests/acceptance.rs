//! Prints one `[PASS]` or `[FAIL]` line per criterion and fails if any criterion fails.
//!
//! `OM_FORGE_SEED` overrides the seed.

use std::process::ExitCode;

use om_forge::acceptance::{AcceptanceOptions, Campaign};

fn main() -> ExitCode {
    let mut opts = AcceptanceOptions::default();
    if let Some(seed) = std::env::var("OM_FORGE_SEED").ok().and_then(|s| s.parse().ok()) {
        opts.seed = seed;
    }
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    println!("acceptance suite, seed {}", opts.seed);
    let campaign = Campaign::new(opts);
    let mut failed = 0;
    for id in 1..=10 {
        if !filter.is_empty() && !filter.iter().any(|f| om_forge::acceptance::criterion_id(f) == Some(id)) {
            continue;
        }
        let report = campaign.run(id);
        println!("{}", report.line());
        if !report.passed() {
            failed += 1;
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    }
}
