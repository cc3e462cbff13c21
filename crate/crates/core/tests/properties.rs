use proptest::prelude::*;

use fpme::density::{cumulative, differentiate};
use fpme::metrics::d0_upper_bound;
use fpme::oplib::{check_am, closed_form_weight, WeightTable};
use fpme::scheme::{cfl_bound, step_unchecked, CflMode, GridSpec, ProblemSpec, VField};

fn monotone(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.0f64..1.0, n).prop_map(|mut v| {
        v.sort_by(f64::total_cmp);
        v
    })
}

fn field(h: f64, values: Vec<f64>, left: f64, right: f64) -> VField {
    let n = values.len() as i64;
    VField::new(GridSpec::new(h, 0, n - 1, 0.0, left, right).unwrap(), values).unwrap()
}

proptest! {
    #[test]
    fn recurrence_tracks_gamma_formula(s in 0.05f64..0.95, k in 1usize..400) {
        let t = WeightTable::with_len(s, 1.0, k).unwrap();
        let exact = closed_form_weight(s, k as u64);
        prop_assert!((t.weight(k as i64) - exact).abs() <= 1e-11 * exact);
    }

    #[test]
    fn weights_are_positive_and_decreasing(s in 0.01f64..0.99) {
        let t = WeightTable::with_len(s, 1.0, 200).unwrap();
        let w = t.weights();
        prop_assert!(w.iter().all(|&x| x > 0.0));
        prop_assert!(w.windows(2).all(|p| p[1] < p[0]));
    }

    #[test]
    fn cs_dominates_its_parts(s in 0.05f64..0.95, e in 2i32..9) {
        let h = 2f64.powi(-e);
        let am = check_am(&WeightTable::with_len(s, h, 16).unwrap()).unwrap();
        prop_assert!(am.cs >= am.c1 && am.cs >= am.c2 && am.cs >= am.c3);
        prop_assert!(am.c1 > 0.0 && am.c2 > 0.0 && am.c3 > 0.0);
    }

    #[test]
    fn cumulative_inverts_differentiate(v in monotone(64), e in 1i32..10, lo in -1.0f64..0.0) {
        let h = 2f64.powi(-e);
        let left = lo;
        let right = 1.5;
        let vf = field(h, v.iter().map(|x| x + lo.max(0.0)).collect(), left, right);
        let back = cumulative(&differentiate(&vf), left);
        let m = right.abs().max(left.abs());
        for (a, b) in vf.values().iter().zip(back.values()) {
            prop_assert!((a - b).abs() <= 4.0 * f64::EPSILON * m, "{a} vs {b}");
        }
        prop_assert!((back.grid().v_right - right).abs() <= 4.0 * f64::EPSILON * m);
    }

    #[test]
    fn d0_bound_is_a_semimetric(
        a in prop::collection::vec(0.0f64..1.0, 32),
        b in prop::collection::vec(0.0f64..1.0, 32),
        c in prop::collection::vec(0.0f64..1.0, 32),
    ) {
        let h = 0.125;
        let norm = |x: Vec<f64>| {
            let s: f64 = x.iter().sum::<f64>() * h + 1e-3;
            x.iter().map(|v| (v + 1e-3 / (32.0 * h)) / s).collect::<Vec<_>>()
        };
        let (a, b, c) = (norm(a), norm(b), norm(c));
        let ab = d0_upper_bound(&a, &b, h).unwrap();
        let ba = d0_upper_bound(&b, &a, h).unwrap();
        prop_assert!((ab.cdf - ba.cdf).abs() < 1e-14 && (ab.density - ba.density).abs() < 1e-14);
        prop_assert_eq!(d0_upper_bound(&a, &a, h).unwrap().bound(), 0.0);
        let ac = d0_upper_bound(&a, &c, h).unwrap();
        let cb = d0_upper_bound(&c, &b, h).unwrap();
        prop_assert!(ab.cdf <= ac.cdf + cb.cdf + 1e-12);
        prop_assert!(ab.density <= ac.density + cb.density + 1e-12);
    }

    #[test]
    fn one_step_preserves_order(
        phi in monotone(40),
        bump in prop::collection::vec(0.0f64..0.2, 40),
        s in 0.1f64..0.9,
    ) {
        let h = 1.0 / 16.0;
        let psi: Vec<f64> = {
            let mut acc = 0.0f64;
            phi.iter().zip(&bump).map(|(p, b)| { acc = acc.max(p + b).min(1.0); acc }).collect()
        };
        let table = WeightTable::with_len(s, h, 64).unwrap();
        let am = check_am(&table).unwrap();
        let p = ProblemSpec::new(s, 2.0, 1.0, CflMode::Cfl1).unwrap();
        let tau = cfl_bound(&p, h, am.cs).unwrap() * p.safety;
        let a = step_unchecked(&table, 2.0, &field(h, phi, 0.0, 1.0), tau);
        let b = step_unchecked(&table, 2.0, &field(h, psi, 0.0, 1.0), tau);
        prop_assert!(a.is_nondecreasing() && b.is_nondecreasing());
        for (x, y) in a.values().iter().zip(b.values()) {
            prop_assert!(x <= y, "{x} > {y}");
        }
    }

    #[test]
    fn translation_commutes_with_a_step(v in monotone(40), s in 0.1f64..0.9) {
        // values and shift stay inside one binade, so the shift is exact
        let h = 1.0 / 16.0;
        let base: Vec<f64> = v.iter().map(|x| 1.0 + 0.25 * x).collect();
        let table = WeightTable::with_len(s, h, 64).unwrap();
        let tau = 1e-3;
        let f = field(h, base, 1.0, 1.25);
        let a = step_unchecked(&table, 2.0, &f, tau).translate(0.25);
        let b = step_unchecked(&table, 2.0, &f.translate(0.25), tau);
        prop_assert_eq!(a.values(), b.values());
    }
}
