//! Prints one PASS/FAIL line per acceptance criterion and exits non-zero if
//! any fails. Pass criterion numbers (`-- 3 10`) to run a subset.

use std::collections::BTreeSet;
use std::time::Instant;

use workday_core::{preset, Preset};
use workday_verify::{check, sweep, NAMES};

fn main() {
    // Non-numeric arguments (libtest flags such as --nocapture) are ignored.
    let selected: BTreeSet<u32> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let wanted = |id: u32| selected.is_empty() || selected.contains(&id);

    let fig2 = (wanted(3) || wanted(10)).then(|| sweep(&preset(Preset::Fig2), 1));
    let mut failed = Vec::new();
    for id in (1..=11u32).filter(|&id| wanted(id)) {
        let started = Instant::now();
        let v = check(id, fig2.as_ref());
        println!(
            "{} criterion {id:>2} ({}) [{:.1}s]: {}",
            if v.passed { "PASS" } else { "FAIL" },
            NAMES[id as usize - 1],
            started.elapsed().as_secs_f64(),
            v.detail
        );
        if !v.passed {
            failed.push(id);
        }
    }
    if failed.is_empty() {
        println!("acceptance: all selected criteria passed");
    } else {
        println!("acceptance: FAILED criteria {failed:?}");
        std::process::exit(1);
    }
}
