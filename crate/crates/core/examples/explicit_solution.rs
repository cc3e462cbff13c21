//! The self-similar solution for `m = 2` and its integrated form.

use fpme::analytic::{smoothing_exponents, ExplicitSolution};

pub fn run_example() -> fpme::Result<ExplicitSolution> {
    let sol = ExplicitSolution::new(0.5, 1.0, 0.5)?;
    println!("k_s = {}, mass = {}", sol.k(), sol.mass());
    for t in [0.0, 0.5, 1.0] {
        let rho = sol.support_radius(t);
        println!("t = {t}: support radius {rho:.6}, sup u = {:.6}", sol.sup(t)?);
        for x in [-rho, -0.5 * rho, 0.0, 0.5 * rho, rho] {
            println!("  x = {x:+.4}  u = {:.8}  v = {:.10}", sol.u(x, t)?, sol.v(x, t)?);
        }
    }

    // starting from a Dirac mass the integrated datum is a step
    let dirac = ExplicitSolution::new(0.5, 0.0, 1.0)?;
    println!("dirac start: v(-0.1, 0) = {}, v(0, 0) = {}", dirac.v(-0.1, 0.0)?, dirac.v(0.0, 0.0)?);

    let e = smoothing_exponents(0.5, 2.0)?;
    println!("smoothing: sup u(t) <= C t^-{} M^{}", e.gamma, e.delta);
    Ok(sol)
}

fn main() -> fpme::Result<()> {
    run_example().map(|_| ())
}
