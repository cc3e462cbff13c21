//! Consistency of the discrete operator on `cos x`, whose fractional
//! Laplacian is `cos x` itself for every `s`.

use fpme::oplib::{check_ac, AcReport, Cosine, WeightTable};

pub fn run_example() -> fpme::Result<AcReport> {
    let tables = (3..=7)
        .map(|k| WeightTable::with_len(0.5, 2f64.powi(-k), 1 << 20))
        .collect::<fpme::Result<Vec<_>>>()?;
    let points: Vec<f64> = (0..8).map(|j| j as f64 * 0.4).collect();
    let report = check_ac(&tables, &Cosine { freq: 1.0 }, &points);
    for r in &report.rows {
        println!("h = {:<10} max error {:.4e}", r.h, r.max_error);
    }
    println!("orders {:.3?}", report.orders());
    Ok(report)
}

fn main() -> fpme::Result<()> {
    run_example().map(|_| ())
}
