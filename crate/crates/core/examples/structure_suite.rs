//! Randomized comparison, contraction and stability checks of the one-step
//! map, with a deliberately oversized step as negative control.

use fpme::harness::{property_suite, PropertyConfig, PropertyReport};

pub fn run_example() -> fpme::Result<PropertyReport> {
    let report = property_suite(&PropertyConfig::default())?;
    for m in report.modes.iter().chain(&report.negative_controls) {
        println!(
            "{} tau x{}: {} pairs, {} checks, {} violations",
            m.mode,
            m.tau_multiplier,
            m.pairs,
            m.checks,
            m.violations.len()
        );
    }
    if let Some(v) = report.negative_controls.iter().flat_map(|m| &m.violations).next() {
        print!("example counterexample:\n{v}");
    }
    println!("translation: {} mismatches", report.translation.mismatches);
    Ok(report)
}

fn main() -> fpme::Result<()> {
    run_example().map(|_| ())
}
