//! Two smooth bumps with `m = 4`, measured against a fine-grid run.
//!
//! The preset uses a reference at `h = 2^-9`; this example uses `2^-7` and
//! a shorter ladder to stay quick.

use fpme::harness::{preset, run, Preset, Reference, RunOutcome};

pub fn run_example() -> fpme::Result<RunOutcome> {
    let mut cfg = preset(Preset::Exp3, 0.5)?;
    cfg.reference = Reference::FineGrid { h: 2f64.powi(-7) };
    cfg.ladder = vec![0.125, 0.0625, 0.03125];
    let out = run(&cfg)?;
    let fine = out.reference_rung.as_ref().expect("fine-grid reference");
    println!("reference h = {}, {} steps", fine.h, fine.time.steps);
    for r in out.table.rows() {
        println!("h = {:<8} tau = {:.3e}  E_v = {:.3e}  E_u = {:.3e}", r.h, r.tau, r.e_v, r.e_u);
    }
    Ok(out)
}

fn main() -> fpme::Result<()> {
    run_example().map(|_| ())
}
