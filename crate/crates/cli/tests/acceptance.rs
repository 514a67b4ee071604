//! Runs the ten acceptance criteria and prints one line per criterion.
//! Worker count comes from `CZREACH_THREADS` (default 4).

use czreach_cli::verify::{report, run_all};

fn main() {
    let threads = std::env::var("CZREACH_THREADS")
        .ok()
        .and_then(|v| v.parse().ok())
        .unwrap_or(4);
    let results = run_all(0, threads);
    print!("{}", report(&results));
    if results.iter().any(|r| !r.passed) {
        std::process::exit(1);
    }
}
