//! Fundamental solution: a Dirac mass evolved through its integrated step.

use fpme::harness::{preset, run, Preset, RunOutcome};

/// `V̄(±1, t)` for `t ∈ {0.5, 1}` on every rung, next to the exact values.
pub fn run_example() -> fpme::Result<(RunOutcome, Vec<[f64; 4]>, [f64; 4])> {
    let cfg = preset(Preset::Exp2, 0.5)?;
    let out = run(&cfg)?;
    let sol = match cfg.reference {
        fpme::harness::Reference::Analytic(sol) => sol,
        _ => unreachable!("exp2 compares against the explicit solution"),
    };
    let probes = [(-1.0, 0.5), (1.0, 0.5), (-1.0, 1.0), (1.0, 1.0)];
    let mut exact = [0.0; 4];
    for (e, (x, t)) in exact.iter_mut().zip(probes) {
        *e = sol.v(x, t)?;
    }
    let mut values = Vec::new();
    for rung in &out.rungs {
        let mut row = [0.0; 4];
        for (slot, (x, t)) in row.iter_mut().zip(probes) {
            let snap = rung.trajectory.at(t).expect("snapshot recorded");
            let i = (x / rung.h).round() as i64;
            *slot = snap.field.value(i);
        }
        println!("h = {:<9} E_v = {:.3e}  V(±1, 0.5) = {:.6} {:.6}  V(±1, 1) = {:.6} {:.6}",
            rung.h, rung.errors.map_or(f64::NAN, |e| e.e_v), row[0], row[1], row[2], row[3]);
        values.push(row);
    }
    println!("exact                           {:.6} {:.6}             {:.6} {:.6}", exact[0], exact[1], exact[2], exact[3]);
    Ok((out, values, exact))
}

fn main() -> fpme::Result<()> {
    run_example().map(|_| ())
}
