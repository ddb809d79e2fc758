//! Acceptance criteria. Runs every check, prints one PASS/FAIL line per
//! criterion and exits nonzero if any fails. A plain `main` rather than the
//! libtest harness, so the lines appear without `--nocapture`.
//!
//! Pass criterion ids (`cargo test --test acceptance -- 3 11`) to run a
//! subset.

use conespec::verify::{run_check, CHECKS};

fn main() {
    let wanted: Vec<usize> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let ids: Vec<usize> =
        CHECKS.iter().map(|c| c.0).filter(|id| wanted.is_empty() || wanted.contains(id)).collect();
    let mut failed = 0;
    for id in &ids {
        let result = run_check(*id);
        println!("{result}");
        failed += usize::from(!result.pass);
    }
    println!("acceptance: {} of {} criteria pass", ids.len() - failed, ids.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
