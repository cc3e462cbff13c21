//! Driving the scheme by hand: sample a datum, step it, recover the density
//! and query the space-time interpolants.

use fpme::analytic::{ExplicitSolution, InitialDatum};
use fpme::density::{differentiate, mass, Interpolant, InterpolantKind};
use fpme::oplib::{check_am, WeightTable};
use fpme::scheme::{evolve, CflMode, GridSpec, ProblemSpec, TimeSpec, VField};

pub fn run_example() -> fpme::Result<(f64, f64)> {
    let sol = ExplicitSolution::new(0.5, 1.0, 0.5)?;
    let datum = InitialDatum::Explicit(sol);
    let h = 1.0 / 32.0;
    let grid = GridSpec::covering(h, -2.0, 2.0, 0.0, sol.mass())?;
    let v0 = VField::sample(grid, |x| datum.v0(x).expect("valid time"));

    let table = WeightTable::with_len(0.5, h, grid.len())?;
    let am = check_am(&table)?;
    let p = ProblemSpec::new(0.5, 2.0, sol.mass(), CflMode::Cfl1)?;
    let time = TimeSpec::from_cfl(&p, h, am.cs, 0.5)?;
    println!("{} nodes, Cs = {:.4}, tau = {:.3e}, {} steps", grid.len(), am.cs, time.tau, time.steps);

    // snapshot halfway, at a time that lies on the step grid
    let mid = time.time(time.steps / 2);
    let traj = evolve(&table, &p, v0, &time, &[mid])?;
    for snap in &traj.snapshots {
        let u = differentiate(&snap.field);
        println!(
            "t = {:<6} mass {:.12} sup U {:.6} max slope {:.6}",
            snap.meta.time,
            mass(&u),
            fpme::density::sup_norm(&u),
            snap.meta.max_slope
        );
    }

    let v = Interpolant::new(InterpolantKind::PiecewiseLinearV, &traj);
    let u = Interpolant::new(InterpolantKind::PiecewiseConstantU, &traj);
    let (vx, ux) = (v.eval(0.1, 0.5)?, u.eval(0.1, 0.5)?);
    println!("at (0.1, 0.5): V = {vx:.6} (exact {:.6}), U = {ux:.6} (exact {:.6})", sol.v(0.1, 0.5)?, sol.u(0.1, 0.5)?);
    Ok((vx, ux))
}

fn main() -> fpme::Result<()> {
    run_example().map(|_| ())
}
