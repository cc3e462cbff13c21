//! Convergence towards the explicit solution from `t0 = 1`, `R = 1/2`, for
//! three fractional orders. Output files land in the system temp directory.

use fpme::harness::{preset, run, Preset, RunOutcome};
use fpme::metrics::{observed_order, Metric};

pub fn run_example() -> fpme::Result<Vec<RunOutcome>> {
    let mut all = Vec::new();
    for s in [0.25, 0.5, 0.75] {
        let mut cfg = preset(Preset::Exp1, s)?;
        cfg.out_dir = Some(std::env::temp_dir().join(format!("fpme-exp1-s{s}")));
        let out = run(&cfg)?;
        println!("s = {s}");
        for r in out.table.rows() {
            println!("  h = {:<9} E_v = {:.3e}  E_u = {:.3e}  d0 <= {:.3e}", r.h, r.e_v, r.e_u, r.d0_bound);
        }
        println!("  orders E_v {:.3?}", observed_order(&out.table, Metric::Ev)?);
        for rung in &out.rungs {
            println!(
                "  h = {:<9} mass drift {:.1e}, sup U {:.4} -> {:.4}",
                rung.h, rung.stats.mass_drift, rung.stats.sup_u_initial, rung.stats.sup_u_final
            );
        }
        all.push(out);
    }
    Ok(all)
}

fn main() -> fpme::Result<()> {
    run_example().map(|_| ())
}
