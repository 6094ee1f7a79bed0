//! Runs the fourteen acceptance criteria and prints one line per criterion.
//!
//! `cargo test -p logcorr --test acceptance -- 4 clt` runs a subset.

use std::process::ExitCode;

use logcorr::acceptance::{criterion_id, run_criterion, CRITERIA, DEFAULT_SEED};

fn main() -> ExitCode {
    let picked: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let ids: Vec<u8> = if picked.is_empty() {
        CRITERIA.iter().map(|c| c.0).collect()
    } else {
        match picked.iter().map(|k| criterion_id(k)).collect() {
            Ok(ids) => ids,
            Err(e) => {
                eprintln!("{e}");
                return ExitCode::from(2);
            }
        }
    };
    let seed = std::env::var("LOGCORR_SEED").ok().and_then(|s| s.parse().ok()).unwrap_or(DEFAULT_SEED);
    let mut failed = 0;
    for id in &ids {
        match run_criterion(*id, seed) {
            Ok(o) => {
                if !o.passed() {
                    failed += 1;
                }
                println!("{}", o.line());
            }
            Err(e) => {
                failed += 1;
                println!("criterion {id:>2} FAIL: {e}");
            }
        }
    }
    println!("acceptance: {} of {} criteria passed (seed {seed})", ids.len() - failed, ids.len());
    if failed == 0 { ExitCode::SUCCESS } else { ExitCode::FAILURE }
}
