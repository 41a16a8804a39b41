//! Full acceptance suite at the pinned seed and tolerances.
//!
//! Runs as a plain binary so the per-criterion lines are always printed.
//! Criterion 5 is known not to hold for the first half of its check: at
//! `eps = 1e-4` the constant term of `Phi_1(2 +- eps)` still contributes about
//! 30% next to `-log(eps)/2`. It is run and reported as it is; the target fails
//! if anything else fails, or if criterion 5 unexpectedly starts passing.

use ltlab::accept::{run_suite, AcceptOptions, DEFAULT_SEED};

const KNOWN_FAILING: &[u8] = &[5];

fn main() {
    let outcome = run_suite(&AcceptOptions::new(DEFAULT_SEED));
    let mut unexpected = Vec::new();
    for c in &outcome.criteria {
        let known = KNOWN_FAILING.contains(&c.id);
        let note = if known && !c.passed { "  (known failure)" } else { "" };
        println!("{}{note}", c.line());
        for a in c.checks.iter().filter(|a| !a.passed) {
            println!("    {}: value {:?}, bound {:?}", a.name, a.value, a.bound);
        }
        if let Some(e) = &c.error {
            println!("    error: {e}");
        }
        if c.passed == known {
            unexpected.push(c.id);
        }
    }
    assert_eq!(outcome.criteria.len(), 15);
    println!("suite time {:.1} s", outcome.elapsed.as_secs_f64());
    if !unexpected.is_empty() {
        eprintln!("unexpected acceptance outcome for criteria {unexpected:?}");
        std::process::exit(1);
    }
}
