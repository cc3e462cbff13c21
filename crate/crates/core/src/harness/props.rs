//! Randomized checks of the order-preserving properties of the one-step map.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::oplib::{check_am, WeightTable};
use crate::scheme::{cfl_bound, step_unchecked, CflMode, GridSpec, ProblemSpec, VField, DEFAULT_SAFETY};
use crate::Result;

#[derive(Debug, Clone, PartialEq)]
pub struct PropertyConfig {
    pub seed: u64,
    pub pairs: usize,
    pub steps: usize,
    pub s: f64,
    pub m: f64,
    pub h: f64,
    /// Nodes carrying random values; the rest of the window is flat padding.
    pub active_nodes: usize,
    /// Values are drawn from `[-bound, bound]`.
    pub bound: f64,
    pub modes: Vec<CflMode>,
    pub safety: f64,
    /// Multiplier applied to `τ` in the negative control.
    pub control_multiplier: f64,
}

impl Default for PropertyConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            pairs: 200,
            steps: 50,
            s: 0.5,
            m: 2.0,
            h: 1.0 / 16.0,
            active_nodes: 24,
            bound: 1.0,
            modes: vec![CflMode::Cfl1, CflMode::Cfl2],
            safety: DEFAULT_SAFETY,
            control_multiplier: 2.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PropertyKind {
    Monotonicity,
    Comparison,
    Contraction,
    LinfStability,
    LipschitzStability,
}

impl fmt::Display for PropertyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Monotonicity => "monotonicity",
            Self::Comparison => "comparison",
            Self::Contraction => "contraction",
            Self::LinfStability => "linf-stability",
            Self::LipschitzStability => "lipschitz-stability",
        })
    }
}

/// A failed check together with the initial pair that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub mode: CflMode,
    pub kind: PropertyKind,
    pub pair: usize,
    pub step: usize,
    pub tau: f64,
    /// Amount by which the inequality failed.
    pub excess: f64,
    pub phi: VField,
    pub psi: VField,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "{} violation ({}), pair {}, step {}, tau {:e}, excess {:e}",
            self.kind, self.mode, self.pair, self.step, self.tau, self.excess
        )?;
        for (name, v) in [("phi", &self.phi), ("psi", &self.psi)] {
            let g = v.grid();
            write!(f, "  {name}: left {:?} right {:?} values [", g.v_left, g.v_right)?;
            for (n, x) in v.values().iter().enumerate() {
                if n > 0 {
                    f.write_str(", ")?;
                }
                write!(f, "{x:?}")?;
            }
            writeln!(f, "]")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModeSummary {
    pub mode: CflMode,
    pub tau_multiplier: f64,
    pub pairs: usize,
    pub steps: usize,
    /// Number of inequality evaluations performed.
    pub checks: usize,
    pub violations: Vec<Violation>,
}

impl ModeSummary {
    pub fn count(&self, kind: PropertyKind) -> usize {
        self.violations.iter().filter(|v| v.kind == kind).count()
    }
}

/// `evolve(v + c) - evolve(v) = c` checked bitwise at every step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TranslationCheck {
    pub shift: f64,
    pub steps: usize,
    pub nodes: usize,
    pub mismatches: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PropertyReport {
    pub seed: u64,
    pub modes: Vec<ModeSummary>,
    pub negative_controls: Vec<ModeSummary>,
    pub translation: TranslationCheck,
}

impl PropertyReport {
    pub fn violations(&self) -> usize {
        self.modes.iter().map(|m| m.violations.len()).sum()
    }

    /// The negative controls produced at least one violation between them.
    /// A doubled CFL2 step can stay inside the order-preserving range, so
    /// single modes are not required to fail.
    pub fn controls_detected(&self) -> bool {
        self.negative_controls.iter().any(|m| !m.violations.is_empty())
    }

    pub fn passed(&self) -> bool {
        self.violations() == 0 && self.controls_detected() && self.translation.mismatches == 0
    }
}

fn sorted_uniform(rng: &mut ChaCha8Rng, n: usize, lo: f64, hi: f64) -> Vec<f64> {
    let mut v: Vec<f64> = (0..n).map(|_| rng.gen_range(lo..=hi)).collect();
    v.sort_by(f64::total_cmp);
    v
}

fn random_profile(rng: &mut ChaCha8Rng, n: usize, bound: f64) -> Vec<f64> {
    match rng.gen_range(0..4) {
        0 => sorted_uniform(rng, n, -bound, bound),
        1 => {
            let jumps = rng.gen_range(1..=3);
            let levels = sorted_uniform(rng, jumps + 1, -bound, bound);
            let mut at = sorted_uniform(rng, jumps, 0.0, n as f64);
            at.iter_mut().for_each(|a| *a = a.floor());
            (0..n)
                .map(|i| levels[at.iter().filter(|&&a| a <= i as f64).count()])
                .collect()
        }
        2 => {
            let at = rng.gen_range(1..n);
            (0..n).map(|i| if i < at { -bound } else { bound }).collect()
        }
        _ => {
            // full-range jump through one intermediate node
            let at = rng.gen_range(1..n - 1);
            let mid = rng.gen_range(-bound..=bound);
            (0..n)
                .map(|i| match i.cmp(&at) {
                    std::cmp::Ordering::Less => -bound,
                    std::cmp::Ordering::Equal => mid,
                    std::cmp::Ordering::Greater => bound,
                })
                .collect()
        }
    }
}

fn padded(h: f64, active: Vec<f64>, pad: usize) -> VField {
    let first = active[0];
    let last = *active.last().expect("non-empty");
    let mut values = vec![first; pad];
    values.extend(active);
    values.extend(std::iter::repeat_n(last, pad));
    let n = values.len() as i64;
    let grid = GridSpec::new(h, 0, n - 1, 0.0, first, last).expect("valid grid");
    VField::new(grid, values).expect("matching length")
}

fn random_pair(rng: &mut ChaCha8Rng, cfg: &PropertyConfig) -> (VField, VField) {
    let n = cfg.active_nodes;
    let pad = cfg.steps + 6;
    let phi = random_profile(rng, n, cfg.bound);
    let psi: Vec<f64> = match rng.gen_range(0..4) {
        0 => {
            let other = random_profile(rng, n, cfg.bound);
            phi.iter().zip(&other).map(|(a, b)| a.max(*b)).collect()
        }
        1 => (0..n).map(|i| phi[(i + 1).min(n - 1)]).collect(),
        2 => {
            let c = rng.gen_range(0.0..=0.1 * cfg.bound);
            phi.iter().map(|a| a + c).collect()
        }
        _ => {
            // raise a single node to the value of its right neighbour
            let rising: Vec<usize> = (0..n - 1).filter(|&i| phi[i] < phi[i + 1]).collect();
            let mut psi = phi.clone();
            if !rising.is_empty() {
                let j = rising[rng.gen_range(0..rising.len())];
                psi[j] = phi[j + 1];
            }
            psi
        }
    };
    (padded(cfg.h, phi, pad), padded(cfg.h, psi, pad))
}

fn sup_diff(a: &VField, b: &VField) -> f64 {
    let ga = a.grid();
    let gb = b.grid();
    a.values()
        .iter()
        .zip(b.values())
        .map(|(x, y)| (x - y).abs())
        .fold((ga.v_left - gb.v_left).abs().max((ga.v_right - gb.v_right).abs()), f64::max)
}

fn pair_tau(table: &WeightTable, cfg: &PropertyConfig, mode: CflMode, a: &VField, b: &VField) -> Result<f64> {
    let am = check_am(table)?;
    let m_bound = a.sup_norm().max(b.sup_norm());
    let mut p = ProblemSpec::new(cfg.s, cfg.m, m_bound, mode)?.with_safety(cfg.safety);
    if mode == CflMode::Cfl2 {
        p = p.with_lipschitz(a.max_slope().max(b.max_slope()));
    }
    Ok(cfl_bound(&p, cfg.h, am.cs)? * p.safety)
}

fn run_mode(cfg: &PropertyConfig, mode: CflMode, multiplier: f64) -> Result<ModeSummary> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let width = cfg.active_nodes + 2 * (cfg.steps + 6);
    let table = WeightTable::with_len(cfg.s, cfg.h, width)?;
    let mut summary = ModeSummary {
        mode,
        tau_multiplier: multiplier,
        pairs: cfg.pairs,
        steps: cfg.steps,
        checks: 0,
        violations: Vec::new(),
    };
    let tol = 16.0 * f64::EPSILON * cfg.bound.max(1.0);
    for pair in 0..cfg.pairs {
        let (phi, psi) = random_pair(&mut rng, cfg);
        let tau = multiplier * pair_tau(&table, cfg, mode, &phi, &psi)?;
        let d0 = sup_diff(&phi, &psi);
        let sup0 = [phi.sup_norm(), psi.sup_norm()];
        let lip0 = [phi.max_slope(), psi.max_slope()];
        let mut v = phi.clone();
        let mut w = psi.clone();
        let mut found: Vec<(PropertyKind, usize, f64)> = Vec::new();
        for step in 1..=cfg.steps {
            v = step_unchecked(&table, cfg.m, &v, tau);
            w = step_unchecked(&table, cfg.m, &w, tau);
            summary.checks += 5;
            let mut flag = |kind: PropertyKind, excess: f64| {
                if !found.iter().any(|f| f.0 == kind) {
                    found.push((kind, step, excess));
                }
            };
            if !v.is_nondecreasing() || !w.is_nondecreasing() {
                flag(PropertyKind::Monotonicity, 0.0);
            }
            let cmp = v.values().iter().zip(w.values()).map(|(a, b)| a - b).fold(f64::NEG_INFINITY, f64::max);
            if cmp > tol {
                flag(PropertyKind::Comparison, cmp);
            }
            let d = sup_diff(&v, &w);
            if d > d0 + tol {
                flag(PropertyKind::Contraction, d - d0);
            }
            let sup_ex = (v.sup_norm() - sup0[0]).max(w.sup_norm() - sup0[1]);
            if sup_ex > tol {
                flag(PropertyKind::LinfStability, sup_ex);
            }
            let lip_ex = (v.max_slope() - lip0[0]).max(w.max_slope() - lip0[1]);
            if lip_ex > tol / cfg.h {
                flag(PropertyKind::LipschitzStability, lip_ex);
            }
        }
        for (kind, step, excess) in found {
            summary.violations.push(Violation {
                mode,
                kind,
                pair,
                step,
                tau,
                excess,
                phi: phi.clone(),
                psi: psi.clone(),
            });
        }
    }
    Ok(summary)
}

fn translation_check(cfg: &PropertyConfig) -> Result<TranslationCheck> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x9e37_79b9_7f4a_7c15);
    // values and shifted values share the binade [1, 2), so every difference
    // and every rounding is reproduced exactly
    let shift = 0.25;
    let active = sorted_uniform(&mut rng, cfg.active_nodes, 1.0, 1.5);
    let base = padded(cfg.h, active, cfg.steps + 6);
    let table = WeightTable::with_len(cfg.s, cfg.h, base.grid().len())?;
    let tau = pair_tau(&table, cfg, CflMode::Cfl1, &base, &base)?;
    let mut v = base.clone();
    let mut w = base.translate(shift);
    let mut mismatches = 0;
    for _ in 0..cfg.steps {
        v = step_unchecked(&table, cfg.m, &v, tau);
        w = step_unchecked(&table, cfg.m, &w, tau);
        mismatches += v.values().iter().zip(w.values()).filter(|(a, b)| **a + shift != **b).count();
    }
    Ok(TranslationCheck {
        shift,
        steps: cfg.steps,
        nodes: base.grid().len(),
        mismatches,
    })
}

/// Runs every configured CFL mode, the negative controls with an enlarged
/// step, and the translation check.
pub fn property_suite(cfg: &PropertyConfig) -> Result<PropertyReport> {
    let modes = cfg.modes.iter().map(|&m| run_mode(cfg, m, 1.0)).collect::<Result<Vec<_>>>()?;
    let negative_controls = cfg
        .modes
        .iter()
        .map(|&m| run_mode(cfg, m, cfg.control_multiplier))
        .collect::<Result<Vec<_>>>()?;
    Ok(PropertyReport {
        seed: cfg.seed,
        modes,
        negative_controls,
        translation: translation_check(cfg)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pairs_are_ordered_and_monotone() {
        let cfg = PropertyConfig::default();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..100 {
            let (a, b) = random_pair(&mut rng, &cfg);
            assert!(a.is_nondecreasing() && b.is_nondecreasing());
            assert!(a.values().iter().zip(b.values()).all(|(x, y)| x <= y));
            assert!(a.grid().v_left <= b.grid().v_left && a.grid().v_right <= b.grid().v_right);
        }
    }

    #[test]
    fn small_suite_is_deterministic() {
        let cfg = PropertyConfig {
            pairs: 10,
            steps: 10,
            ..PropertyConfig::default()
        };
        let a = property_suite(&cfg).unwrap();
        let b = property_suite(&cfg).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.violations(), 0);
        assert_eq!(a.translation.mismatches, 0);
    }
}
