//! Explicit solutions for `m = 2`, their masses, and the initial data used by
//! the experiments.
//!
//! For `t_0 ≥ 0`, `R > 0` the self-similar profile
//!
//! ```text
//! u(x,t) = k_s (t+t_0)^{-α} (R² - |x (t+t_0)^{-α}|²)_+^s,   α = 1/(1+2s)
//! ```
//!
//! solves the density equation with mass `M_{R,s} = k_s R^{1+2s} √π Γ(1+s)/Γ(3/2+s)`.

use std::f64::consts::PI;

use statrs::function::gamma::ln_gamma;

use crate::quad;
use crate::{Error, Result};

/// Absolute tolerance for quadrature of the integrated variable.
pub const QUAD_TOL: f64 = 1e-10;

fn check_order(s: f64) -> Result<()> {
    if s > 0.0 && s < 1.0 {
        Ok(())
    } else {
        Err(Error::Parameter(format!("s = {s} not in (0,1)")))
    }
}

/// `k_s = Γ(1/2) / (2^{2s} (1+2s) Γ(1+s) Γ(1/2+s))`.
pub fn k_constant(s: f64) -> Result<f64> {
    check_order(s)?;
    let log_k = 0.5 * PI.ln()
        - 2.0 * s * std::f64::consts::LN_2
        - (1.0 + 2.0 * s).ln()
        - ln_gamma(1.0 + s)
        - ln_gamma(0.5 + s);
    Ok(log_k.exp())
}

/// `M_{R,s} = k_s R^{1+2s} Γ(1/2) Γ(1+s) / Γ(3/2+s)`.
pub fn mass_explicit(r: f64, s: f64) -> Result<f64> {
    if !(r > 0.0) {
        return Err(Error::Parameter(format!("radius R = {r} must be positive")));
    }
    let k = k_constant(s)?;
    let ratio = (0.5 * PI.ln() + ln_gamma(1.0 + s) - ln_gamma(1.5 + s)).exp();
    Ok(k * r.powf(1.0 + 2.0 * s) * ratio)
}

/// Self-similar solution for `m = 2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExplicitSolution {
    pub s: f64,
    pub t0: f64,
    pub r: f64,
    k: f64,
    mass: f64,
}

impl ExplicitSolution {
    pub fn new(s: f64, t0: f64, r: f64) -> Result<Self> {
        if !(t0 >= 0.0) {
            return Err(Error::Parameter(format!("time offset t0 = {t0} must be nonnegative")));
        }
        Ok(Self {
            s,
            t0,
            r,
            k: k_constant(s)?,
            mass: mass_explicit(r, s)?,
        })
    }

    pub fn k(&self) -> f64 {
        self.k
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    fn alpha(&self) -> f64 {
        1.0 / (1.0 + 2.0 * self.s)
    }

    /// Free boundary `R (t+t_0)^{1/(1+2s)}`.
    pub fn support_radius(&self, t: f64) -> f64 {
        self.r * (t + self.t0).powf(self.alpha())
    }

    /// `sup_x u(x,t)`.
    pub fn sup(&self, t: f64) -> Result<f64> {
        self.u(0.0, t)
    }

    /// Self-similar profile `k_s (R² - y²)_+^s`.
    pub fn profile(&self, y: f64) -> f64 {
        let q = self.r * self.r - y * y;
        if q > 0.0 {
            self.k * q.powf(self.s)
        } else {
            0.0
        }
    }

    pub fn u(&self, x: f64, t: f64) -> Result<f64> {
        let tt = t + self.t0;
        if !(tt > 0.0) {
            return Err(Error::Parameter(
                "density at t + t0 = 0 is a Dirac mass; use the integrated step instead".into(),
            ));
        }
        let a = tt.powf(-self.alpha());
        Ok(a * self.profile(x * a))
    }

    /// `v(x,t) = ∫_{-∞}^x u(y,t) dy`. At `t + t_0 = 0` this is the step of
    /// height `M_{R,s}` at the origin.
    pub fn v(&self, x: f64, t: f64) -> Result<f64> {
        let tt = t + self.t0;
        if tt < 0.0 {
            return Err(Error::Parameter(format!("t + t0 = {tt} is negative")));
        }
        if tt == 0.0 {
            return Ok(if x >= 0.0 { self.mass } else { 0.0 });
        }
        let rho = self.support_radius(t);
        if x <= -rho {
            return Ok(0.0);
        }
        if x >= rho {
            return Ok(self.mass);
        }
        // y = -ρ cos θ maps the support to [0, π] and removes the
        // free-boundary singularity: u dy = k R^{1+2s} sin^{1+2s} θ dθ
        let theta = (-x / rho).clamp(-1.0, 1.0).acos();
        let p = 1.0 + 2.0 * self.s;
        let scale = self.k * self.r.powf(p);
        let (upper, flip) = if theta <= 0.5 * PI { (theta, false) } else { (PI - theta, true) };
        let part = quad::integrate(|th: f64| th.sin().powf(p), 0.0, upper, QUAD_TOL / scale.max(1.0))?;
        Ok(if flip { self.mass - scale * part } else { scale * part })
    }
}

/// Experiment 3 datum `e^{-1/(1-(x-3/2)²)_+} + 2 e^{-1/(1-(x+3/2)²)_+}`.
pub fn experiment3_u0(x: f64) -> f64 {
    fn bump(y: f64) -> f64 {
        let q = 1.0 - y * y;
        if q > 0.0 {
            (-1.0 / q).exp()
        } else {
            0.0
        }
    }
    bump(x - 1.5) + 2.0 * bump(x + 1.5)
}

/// Exponents of the smoothing estimate in one space dimension.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SmoothingExponents {
    pub gamma: f64,
    pub delta: f64,
}

pub fn smoothing_exponents(s: f64, m: f64) -> Result<SmoothingExponents> {
    check_order(s)?;
    if !(m >= 2.0) {
        return Err(Error::Parameter(format!("m = {m} must be at least 2")));
    }
    let denom = (m - 1.0) + 2.0 * (1.0 - s);
    Ok(SmoothingExponents {
        gamma: 1.0 / denom,
        delta: 2.0 * (1.0 - s) / denom,
    })
}

/// Initial data library. Every datum is nonnegative with finite mass and is
/// handed to the scheme through its integrated form `v_0`.
#[derive(Debug, Clone, PartialEq)]
pub enum InitialDatum {
    /// Explicit solution at `t = 0`. With `t0 = 0` this is `M_{R,s} δ_0`.
    Explicit(ExplicitSolution),
    /// `M δ_a`, integrated to a step.
    Dirac { mass: f64, at: f64 },
    /// `v_0 = 0` for `x < a`, `M` for `x ≥ a`.
    Step { mass: f64, at: f64 },
    /// Two smooth bumps of Experiment 3.
    BumpSum,
    /// `Σ w_j u(x - c_j, 0)` for an explicit profile `u`.
    Shifted {
        base: ExplicitSolution,
        terms: Vec<(f64, f64)>,
    },
    /// Nondecreasing samples of `v_0`, interpolated linearly and extended flat.
    Tabulated { x: Vec<f64>, v: Vec<f64> },
}

impl InitialDatum {
    pub fn validate(&self) -> Result<()> {
        match self {
            Self::Dirac { mass, .. } | Self::Step { mass, .. } if !(*mass >= 0.0) => {
                Err(Error::Parameter("mass must be nonnegative".into()))
            }
            Self::Shifted { terms, .. } if terms.iter().any(|&(_, w)| !(w >= 0.0)) => {
                Err(Error::Parameter("shifted profile weights must be nonnegative".into()))
            }
            Self::Tabulated { x, v } => {
                if x.len() != v.len() || x.len() < 2 {
                    return Err(Error::Parameter("tabulated datum needs matching x and v of length ≥ 2".into()));
                }
                if x.windows(2).any(|w| w[1] <= w[0]) || v.windows(2).any(|w| w[1] < w[0]) {
                    return Err(Error::Parameter("tabulated datum must be increasing in x and nondecreasing in v".into()));
                }
                if v[0] < 0.0 {
                    return Err(Error::Parameter("tabulated datum must start at a nonnegative value".into()));
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    /// Integrated datum `v_0(x)`.
    pub fn v0(&self, x: f64) -> Result<f64> {
        match self {
            Self::Explicit(sol) => sol.v(x, 0.0),
            Self::Dirac { mass, at } | Self::Step { mass, at } => Ok(if x >= *at { *mass } else { 0.0 }),
            Self::BumpSum => {
                let lo = -2.5;
                if x <= lo {
                    return Ok(0.0);
                }
                quad::integrate_split(experiment3_u0, lo, x.min(2.5), &[-0.5, 0.5], QUAD_TOL)
            }
            Self::Shifted { base, terms } => terms
                .iter()
                .map(|&(c, w)| base.v(x - c, 0.0).map(|v| w * v))
                .sum(),
            Self::Tabulated { x: xs, v } => Ok(interp(xs, v, x)),
        }
    }

    /// `v_0` at increasing nodes. Data without a closed-form primitive are
    /// accumulated cell by cell, so the samples are nondecreasing regardless
    /// of quadrature error.
    pub fn sample(&self, xs: &[f64]) -> Result<Vec<f64>> {
        if xs.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::Parameter("sample nodes must be increasing".into()));
        }
        match self {
            Self::BumpSum => {
                let breaks = [-2.5, -0.5, 0.5, 2.5];
                let mut out = Vec::with_capacity(xs.len());
                let mut acc = match xs.first() {
                    Some(&x0) => self.v0(x0)?,
                    None => return Ok(out),
                };
                out.push(acc);
                for w in xs.windows(2) {
                    let (a, b) = (w[0].max(-2.5), w[1].min(2.5));
                    if a < b {
                        acc += quad::integrate_split(experiment3_u0, a, b, &breaks, QUAD_TOL * (b - a))?;
                    }
                    out.push(acc);
                }
                Ok(out)
            }
            _ => xs.iter().map(|&x| self.v0(x)).collect(),
        }
    }

    /// Density `u_0(x)` when it is a function.
    pub fn u0(&self, x: f64) -> Option<f64> {
        match self {
            Self::Explicit(sol) => sol.u(x, 0.0).ok(),
            Self::Dirac { .. } | Self::Step { .. } => None,
            Self::BumpSum => Some(experiment3_u0(x)),
            Self::Shifted { base, terms } => terms
                .iter()
                .map(|&(c, w)| base.u(x - c, 0.0).ok().map(|u| w * u))
                .sum(),
            Self::Tabulated { x: xs, v } => {
                let p = xs.partition_point(|&a| a <= x);
                if p == 0 || p == xs.len() {
                    Some(0.0)
                } else {
                    Some((v[p] - v[p - 1]) / (xs[p] - xs[p - 1]))
                }
            }
        }
    }

    /// Total mass `‖u_0‖_1`.
    pub fn mass(&self) -> Result<f64> {
        match self {
            Self::Explicit(sol) => Ok(sol.mass()),
            Self::Dirac { mass, .. } | Self::Step { mass, .. } => Ok(*mass),
            Self::BumpSum => self.v0(2.5),
            Self::Shifted { base, terms } => Ok(base.mass() * terms.iter().map(|t| t.1).sum::<f64>()),
            Self::Tabulated { v, .. } => Ok(v[v.len() - 1] - v[0]),
        }
    }

    /// Left limit of `v_0`.
    pub fn left_value(&self) -> f64 {
        match self {
            Self::Tabulated { v, .. } => v[0],
            _ => 0.0,
        }
    }

    /// Interval outside of which `u_0` vanishes.
    pub fn support(&self) -> (f64, f64) {
        match self {
            Self::Explicit(sol) => {
                let r = sol.support_radius(0.0);
                (-r, r)
            }
            Self::Dirac { at, .. } | Self::Step { at, .. } => (*at, *at),
            Self::BumpSum => (-2.5, 2.5),
            Self::Shifted { base, terms } => {
                let r = base.support_radius(0.0);
                terms.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &(c, _)| {
                    (lo.min(c - r), hi.max(c + r))
                })
            }
            Self::Tabulated { x, .. } => (x[0], x[x.len() - 1]),
        }
    }

    /// Upper bound on `sup u_0`, when finite.
    pub fn lipschitz(&self) -> Option<f64> {
        match self {
            Self::Explicit(sol) => sol.sup(0.0).ok(),
            Self::Dirac { .. } | Self::Step { .. } => None,
            Self::BumpSum => Some(2.0 * (-1f64).exp()),
            Self::Shifted { base, terms } => base
                .sup(0.0)
                .ok()
                .map(|u| u * terms.iter().map(|t| t.1).sum::<f64>()),
            Self::Tabulated { x, v } => Some(
                x.windows(2)
                    .zip(v.windows(2))
                    .map(|(a, b)| (b[1] - b[0]) / (a[1] - a[0]))
                    .fold(0.0, f64::max),
            ),
        }
    }

    /// Length scale used by the window padding rule.
    pub fn length_scale(&self) -> f64 {
        match self {
            Self::Explicit(sol) => sol.r,
            Self::Shifted { base, .. } => base.r,
            _ => 1.0,
        }
    }
}

fn interp(xs: &[f64], vs: &[f64], x: f64) -> f64 {
    let p = xs.partition_point(|&a| a <= x);
    if p == 0 {
        vs[0]
    } else if p == xs.len() {
        vs[vs.len() - 1]
    } else {
        let t = (x - xs[p - 1]) / (xs[p] - xs[p - 1]);
        vs[p - 1] + t * (vs[p] - vs[p - 1])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn k_at_half() {
        assert!((k_constant(0.5).unwrap() - 0.5).abs() < 1e-15);
        assert!(k_constant(1.0).is_err());
    }

    #[test]
    fn k_positive_over_sweep() {
        for j in 1..100 {
            assert!(k_constant(j as f64 / 100.0).unwrap() > 0.0);
        }
    }

    #[test]
    fn mass_at_half() {
        assert!((mass_explicit(1.0, 0.5).unwrap() - PI / 4.0).abs() < 1e-14);
        let ratio = mass_explicit(2.0, 0.3).unwrap() / mass_explicit(1.0, 0.3).unwrap();
        assert!((ratio - 2f64.powf(1.6)).abs() < 1e-13);
    }

    #[test]
    fn explicit_u_values() {
        let sol = ExplicitSolution::new(0.5, 1.0, 0.5).unwrap();
        assert!((sol.u(0.0, 0.0).unwrap() - 0.25).abs() < 1e-15);
        let rb = sol.support_radius(0.7);
        assert_eq!(sol.u(rb, 0.7).unwrap(), 0.0);
        assert_eq!(sol.u(-rb * 1.01, 0.7).unwrap(), 0.0);
        let dirac = ExplicitSolution::new(0.5, 0.0, 1.0).unwrap();
        assert!(dirac.u(0.0, 0.0).is_err());
    }

    #[test]
    fn self_similar_form() {
        let sol = ExplicitSolution::new(0.3, 0.5, 0.8).unwrap();
        for &(x, t) in &[(0.1, 0.0), (-0.4, 1.0), (0.7, 2.5)] {
            let a = (t + sol.t0).powf(-1.0 / 1.6);
            assert_eq!(sol.u(x, t).unwrap(), a * sol.profile(x * a));
        }
    }

    #[test]
    fn explicit_v_limits() {
        let sol = ExplicitSolution::new(0.25, 1.0, 0.5).unwrap();
        let rho = sol.support_radius(1.0);
        assert_eq!(sol.v(-rho, 1.0).unwrap(), 0.0);
        assert_eq!(sol.v(100.0, 1.0).unwrap(), sol.mass());
        assert!((sol.v(0.0, 1.0).unwrap() - 0.5 * sol.mass()).abs() < 1e-12);
        let mut prev = 0.0;
        for j in -50..=50 {
            let v = sol.v(j as f64 * rho / 40.0, 1.0).unwrap();
            assert!(v >= prev && v <= sol.mass());
            prev = v;
        }
    }

    #[test]
    fn experiment3_values() {
        assert!((experiment3_u0(1.5) - (-1f64).exp()).abs() < 1e-15);
        assert!((experiment3_u0(-1.5) - 2.0 * (-1f64).exp()).abs() < 1e-15);
        for &x in &[2.5, -2.5, 3.0, -7.0] {
            assert_eq!(experiment3_u0(x), 0.0);
        }
    }

    #[test]
    fn smoothing_exponent_examples() {
        let e = smoothing_exponents(0.5, 2.0).unwrap();
        assert!((e.gamma - 0.5).abs() < 1e-15 && (e.delta - 0.5).abs() < 1e-15);
        let e = smoothing_exponents(0.5, 4.0).unwrap();
        assert!((e.gamma - 0.25).abs() < 1e-15);
        assert!(smoothing_exponents(1.0, 2.0).is_err());
        for &(s, m) in &[(0.1, 2.0), (0.9, 3.0), (0.4, 7.0)] {
            let e = smoothing_exponents(s, m).unwrap();
            assert!((e.gamma * ((m - 1.0) + 2.0 * (1.0 - s)) - 1.0).abs() < 1e-14);
            assert!(e.gamma > 0.0 && e.gamma < 1.0 && e.delta > 0.0 && e.delta < 1.0);
        }
    }

    #[test]
    fn dirac_datum_is_a_step() {
        let sol = ExplicitSolution::new(0.5, 0.0, 1.0).unwrap();
        let d = InitialDatum::Explicit(sol);
        assert_eq!(d.v0(-1e-9).unwrap(), 0.0);
        assert_eq!(d.v0(0.0).unwrap(), sol.mass());
        assert!(d.u0(0.0).is_none());
        assert_eq!(d.support(), (0.0, 0.0));
    }

    #[test]
    fn bump_sum_mass() {
        let d = InitialDatum::BumpSum;
        let one = quad::integrate(|y: f64| experiment3_u0(y + 1.5), -1.0, 1.0, 1e-13).unwrap();
        assert!((d.mass().unwrap() - 3.0 * one).abs() < 1e-9);
    }

    #[test]
    fn bump_samples_are_monotone_and_match_pointwise() {
        let d = InitialDatum::BumpSum;
        let xs: Vec<f64> = (-600..=600).map(|i| i as f64 / 200.0).collect();
        let v = d.sample(&xs).unwrap();
        assert!(v.windows(2).all(|w| w[1] >= w[0]));
        for (x, s) in xs.iter().zip(&v).step_by(37) {
            assert!((d.v0(*x).unwrap() - s).abs() < 1e-9);
        }
        assert!((v[v.len() - 1] - d.mass().unwrap()).abs() < 1e-9);
    }

    #[test]
    fn tabulated_validation() {
        let bad = InitialDatum::Tabulated { x: vec![0.0, 1.0], v: vec![1.0, 0.5] };
        assert!(bad.validate().is_err());
        let ok = InitialDatum::Tabulated { x: vec![0.0, 1.0], v: vec![0.0, 0.5] };
        ok.validate().unwrap();
        assert_eq!(ok.v0(0.5).unwrap(), 0.25);
        assert_eq!(ok.u0(0.5), Some(0.5));
    }
}
