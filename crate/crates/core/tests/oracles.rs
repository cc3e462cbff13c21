//! Checks against independent evaluations of the closed forms.

#![allow(clippy::excessive_precision)]

use std::f64::consts::PI;

use fpme::analytic::ExplicitSolution;
use fpme::oplib::{closed_form_weight, weight_ratio, WeightTable};
use statrs::function::beta::{beta_reg, ln_beta};

/// Lanczos approximation, g = 7, n = 9.
fn lanczos_gamma(x: f64) -> f64 {
    const G: f64 = 7.0;
    const C: [f64; 9] = [
        0.999_999_999_999_809_93,
        676.520_368_121_885_1,
        -1_259.139_216_722_402_8,
        771.323_428_777_653_13,
        -176.615_029_162_140_59,
        12.507_343_278_686_905,
        -0.138_571_095_265_720_12,
        9.984_369_578_019_571_6e-6,
        1.505_632_735_149_311_6e-7,
    ];
    if x < 0.5 {
        return PI / ((PI * x).sin() * lanczos_gamma(1.0 - x));
    }
    let x = x - 1.0;
    let mut a = C[0];
    let t = x + G + 0.5;
    for (i, c) in C.iter().enumerate().skip(1) {
        a += c / (x + i as f64);
    }
    (2.0 * PI).sqrt() * t.powf(x + 0.5) * (-t).exp() * a
}

fn omega1(s: f64) -> f64 {
    4f64.powf(s) * lanczos_gamma(0.5 + s) * s / (PI.sqrt() * lanczos_gamma(2.0 + s))
}

#[test]
fn first_weight_matches_lanczos() {
    for s in [0.1, 0.25, 0.5, 0.75, 0.9] {
        let w = closed_form_weight(s, 1);
        let t = WeightTable::with_len(s, 1.0, 4).unwrap();
        assert!((w - omega1(s)).abs() <= 1e-13 * w, "s = {s}");
        assert!((t.weight(1) - omega1(s)).abs() <= 1e-13 * w, "s = {s}");
    }
    assert!((omega1(0.5) - 4.0 / (3.0 * PI)).abs() < 1e-14);
}

#[test]
fn later_weights_match_lanczos() {
    for s in [0.25, 0.5, 0.75] {
        let t = WeightTable::with_len(s, 1.0, 40).unwrap();
        for k in [2u32, 7, 40] {
            let k = f64::from(k);
            let exact = 4f64.powf(s) * lanczos_gamma(0.5 + s) * lanczos_gamma(k - s)
                / (PI.sqrt() * (lanczos_gamma(1.0 - s) / s) * lanczos_gamma(k + 1.0 + s));
            let got = t.weight(k as i64);
            assert!((got - exact).abs() <= 1e-12 * exact, "s = {s}, k = {k}: {got} vs {exact}");
        }
    }
}

#[test]
fn total_weight_matches_brute_force_sum() {
    const N: usize = 10_000_000;
    for s in [0.25, 0.5, 0.75] {
        let mut w = omega1(s);
        let mut partial = 0.0;
        for k in 1..=N {
            partial += w;
            if k < N {
                w *= weight_ratio(s, k as f64);
            }
        }
        // ω_k ≈ C k^{-1-2s} beyond N, summed by the midpoint rule
        let c = w * (N as f64).powf(1.0 + 2.0 * s);
        let tail = c * (N as f64 + 0.5).powf(-2.0 * s) / (2.0 * s);
        let brute = 2.0 * (partial + tail);
        let table = WeightTable::with_len(s, 1.0, 8).unwrap();
        assert!(
            (table.sum_all() - brute).abs() <= 1e-9 * brute,
            "s = {s}: {} vs {brute}",
            table.sum_all()
        );
    }
}

#[test]
fn tail_sums_match_partial_sums() {
    let s = 0.3;
    let t = WeightTable::with_len(s, 1.0, 2000).unwrap();
    let total = t.tail_beyond(0);
    let mut acc = 0.0;
    for d in 1..=2000usize {
        acc += t.weight(d as i64);
        let r = t.tail_beyond(d);
        assert!((acc + r - total).abs() <= 1e-13 * total, "d = {d}");
    }
}

/// `v` through the regularized incomplete beta function.
fn v_by_beta(sol: &ExplicitSolution, x: f64, t: f64) -> f64 {
    let s = sol.s;
    let tt = t + sol.t0;
    let a = tt.powf(-1.0 / (1.0 + 2.0 * s));
    let z = (x * a / sol.r).clamp(-1.0, 1.0);
    let w = 0.5 * (1.0 + z);
    let full = 2f64.powf(2.0 * s + 1.0) * ln_beta(s + 1.0, s + 1.0).exp();
    sol.k() * sol.r.powf(1.0 + 2.0 * s) * full * beta_reg(s + 1.0, s + 1.0, w)
}

#[test]
fn integrated_solution_matches_incomplete_beta() {
    for s in [0.25, 0.5, 0.75] {
        for (t0, r) in [(1.0, 0.5), (0.3, 1.0), (2.0, 2.0)] {
            let sol = ExplicitSolution::new(s, t0, r).unwrap();
            for t in [0.0, 0.5, 1.0] {
                let rho = sol.support_radius(t);
                for j in -12..=12 {
                    let x = rho * f64::from(j) / 10.0;
                    let got = sol.v(x, t).unwrap();
                    let want = v_by_beta(&sol, x, t);
                    assert!((got - want).abs() <= 1e-9, "s = {s} t0 = {t0} R = {r} t = {t} x = {x}: {got} vs {want}");
                }
            }
            let m = v_by_beta(&sol, 1e9, 0.0);
            assert!((sol.mass() - m).abs() <= 1e-12 * m);
        }
    }
}

#[test]
fn barenblatt_profile_agrees_with_its_integral_derivative() {
    let sol = ExplicitSolution::new(0.5, 1.0, 0.5).unwrap();
    let d = 1e-5;
    for x in [-0.4, -0.1, 0.0, 0.2, 0.45] {
        let fd = (v_by_beta(&sol, x + d, 0.25) - v_by_beta(&sol, x - d, 0.25)) / (2.0 * d);
        let u = sol.u(x, 0.25).unwrap();
        assert!((fd - u).abs() < 1e-6, "x = {x}: {fd} vs {u}");
    }
}
