//! Quadrature weights of the discrete fractional Laplacian and the constants
//! entering the CFL conditions.
//!
//! ```text
//! cargo run --release --example weights
//! ```

use fpme::oplib::{build_weights, check_am, closed_form_weight, AmReport, WeightTable};

pub fn run_example() -> fpme::Result<Vec<(f64, f64, AmReport)>> {
    for s in [0.25, 0.5, 0.75] {
        let t = WeightTable::with_len(s, 1.0, 8)?;
        println!("s = {s}");
        println!("  k   recurrence          log-gamma");
        for (k, w) in t.weights().iter().enumerate() {
            println!("  {:<3} {:<19.12e} {:.12e}", k + 1, w, closed_form_weight(s, k as u64 + 1));
        }
        println!("  total {:.15} (tail beyond 8: {:.3e})", t.sum_all(), t.tail());
    }

    // the tail decays like K^{-2s}, so small s needs long tables
    for (s, eps) in [(0.5, 1e-6), (0.75, 1e-8), (0.25, 1e-8)] {
        match build_weights(s, 1.0, eps) {
            Ok(t) => println!("s = {s}: K = {} for eps_tail = {eps:e}", t.len()),
            Err(e) => println!("s = {s}: {e}"),
        }
    }

    let mut rows = Vec::new();
    println!("\n   s      h          c1       c2       c3       Cs");
    for s in [0.25, 0.5, 0.75] {
        for k in 4..=8 {
            let h = 2f64.powi(-k);
            let am = check_am(&WeightTable::with_len(s, h, 1)?)?;
            println!("  {s:<5} 2^-{k:<7} {:<8.4} {:<8.4} {:<8.4} {:.4}", am.c1, am.c2, am.c3, am.cs);
            rows.push((s, h, am));
        }
    }
    Ok(rows)
}

fn main() -> fpme::Result<()> {
    run_example().map(|_| ())
}
