//! Acceptance suite: one line per criterion. Criteria listed as known
//! unattainable are reported but do not fail the target.

use nlkpp::acceptance::{run, ALL};

fn main() {
    let mut blocking = Vec::new();
    for id in ALL {
        let started = std::time::Instant::now();
        let o = run(id);
        println!("{o} ({:.0} s)", started.elapsed().as_secs_f64());
        if !o.passed && !o.known_unattainable() {
            blocking.push(id);
        }
    }
    if blocking.is_empty() {
        println!("acceptance: all attainable criteria pass");
    } else {
        println!("acceptance: failing criteria {blocking:?}");
        std::process::exit(1);
    }
}
