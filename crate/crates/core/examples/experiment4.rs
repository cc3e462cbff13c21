//! Ordered integrated data whose densities stop being ordered.

use fpme::harness::{preset, run, PairRecord, Preset};

pub fn run_example() -> fpme::Result<PairRecord> {
    let cfg = preset(Preset::Exp4, 0.5)?;
    let mut out = run(&cfg)?;
    let pair = out.pairs.remove(0);
    println!("h = {}, {} steps, V1 > V2 at {} node-steps", pair.h, pair.time.steps, pair.v_order_violations);
    if let Some(w) = pair.first_crossing {
        println!("first U1 > U2: t = {:.5}, x = {}, {:.3e} > {:.3e}", w.time, w.x, w.u1, w.u2);
    }
    if let Some(w) = pair.largest_crossing {
        println!("largest gap:   t = {:.5}, x = {}, {:.4} > {:.4}", w.time, w.x, w.u1, w.u2);
    }
    Ok(pair)
}

fn main() -> fpme::Result<()> {
    run_example().map(|_| ())
}
