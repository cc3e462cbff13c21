//! Error functionals, a Rubinstein-Kantorovich upper bound and observed orders.

use std::io::Write;

use crate::density::UField;
use crate::scheme::VField;
use crate::{Error, Result};

/// Errors of one refinement rung at the evaluation time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorReport {
    pub h: f64,
    pub tau: f64,
    /// Relative sup error of `V̄` at the nodes.
    pub e_v: f64,
    /// Relative `ℓ¹` error of `Ū` at the nodes.
    pub e_u: f64,
    /// `h |Σ (Ū - u)|`, weak error against the test function 1.
    pub e_u_weak: f64,
    /// Upper bound on `d_0(Ū, u)`; not `d_0` itself.
    pub d0_bound: f64,
    pub runtime_seconds: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Metric {
    Ev,
    Eu,
    EuWeak,
    D0Bound,
}

impl Metric {
    pub fn of(self, r: &ErrorReport) -> f64 {
        match self {
            Self::Ev => r.e_v,
            Self::Eu => r.e_u,
            Self::EuWeak => r.e_u_weak,
            Self::D0Bound => r.d0_bound,
        }
    }
}

/// Rows over a ladder `h_0 > h_1 > …`.
#[derive(Debug, Clone, Default)]
pub struct ConvergenceTable {
    rows: Vec<ErrorReport>,
}

impl ConvergenceTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, row: ErrorReport) -> Result<()> {
        if let Some(last) = self.rows.last() {
            if !(row.h < last.h) {
                return Err(Error::Parameter(format!(
                    "ladder must be strictly decreasing, got {} after {}",
                    row.h, last.h
                )));
            }
        }
        self.rows.push(row);
        Ok(())
    }

    pub fn rows(&self) -> &[ErrorReport] {
        &self.rows
    }

    pub fn series(&self, metric: Metric) -> Vec<f64> {
        self.rows.iter().map(|r| metric.of(r)).collect()
    }

    pub fn is_strictly_decreasing(&self, metric: Metric) -> bool {
        self.series(metric).windows(2).all(|w| w[1] < w[0])
    }

    /// Writes `h,tau,E_v,E_u,E_u_weak,d0_bound,order_Ev,order_Eu,runtime_s`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "h,tau,E_v,E_u,E_u_weak,d0_bound,order_Ev,order_Eu,runtime_s")?;
        let ov = if self.rows.len() >= 2 { observed_order(self, Metric::Ev)? } else { Vec::new() };
        let ou = if self.rows.len() >= 2 { observed_order(self, Metric::Eu)? } else { Vec::new() };
        for (k, r) in self.rows.iter().enumerate() {
            let fmt_order = |o: &[f64]| {
                if k == 0 {
                    String::new()
                } else {
                    format!("{}", o[k - 1])
                }
            };
            writeln!(
                out,
                "{},{},{},{},{},{},{},{},{:.3}",
                r.h,
                r.tau,
                r.e_v,
                r.e_u,
                r.e_u_weak,
                r.d0_bound,
                fmt_order(&ov),
                fmt_order(&ou),
                r.runtime_seconds
            )?;
        }
        Ok(())
    }
}

/// `sup_i |v(x_i) - V_i| / sup_i |v(x_i)|`.
pub fn error_ev(v: &VField, reference: &[f64]) -> Result<f64> {
    if reference.len() != v.values().len() {
        return Err(Error::Parameter("reference and field lengths differ".into()));
    }
    let norm = reference.iter().fold(0.0, |a: f64, x| a.max(x.abs()));
    if norm == 0.0 {
        return Err(Error::Undefined("relative error against a zero reference".into()));
    }
    let sup = v
        .values()
        .iter()
        .zip(reference)
        .fold(0.0, |a: f64, (x, y)| a.max((x - y).abs()));
    Ok(sup / norm)
}

/// `Ū_h(x_i)` for every window node; `x_i` lies in cell `i + 1`.
fn ubar_at_nodes(u: &UField) -> impl Iterator<Item = f64> + '_ {
    u.grid().indices().map(move |i| u.cell(i + 1))
}

fn check_len(u: &UField, reference: &[f64]) -> Result<()> {
    if reference.len() != u.grid().len() {
        return Err(Error::Parameter("reference must hold one value per window node".into()));
    }
    Ok(())
}

/// `h Σ |Ū(x_i) - u(x_i)| / h Σ u(x_i)` with `reference[i] = u(x_i)`.
pub fn error_eu(u: &UField, reference: &[f64]) -> Result<f64> {
    check_len(u, reference)?;
    let denom: f64 = reference.iter().sum();
    if denom == 0.0 {
        return Err(Error::Undefined("relative error against zero mass".into()));
    }
    let num: f64 = ubar_at_nodes(u).zip(reference).map(|(a, b)| (a - b).abs()).sum();
    Ok(num / denom)
}

/// `h |Σ (Ū(x_i) - u(x_i))|`.
pub fn error_eu_weak(u: &UField, reference: &[f64]) -> Result<f64> {
    check_len(u, reference)?;
    let diff: f64 = ubar_at_nodes(u).zip(reference).map(|(a, b)| a - b).sum();
    Ok(u.grid().h * diff.abs())
}

/// Both upper bounds on `d_0` for two cell densities on the same grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct D0Bound {
    /// `‖F_1 - F_2‖_{L¹}` of the piecewise linear distribution functions.
    pub cdf: f64,
    /// `‖f_1 - f_2‖_{L¹}`.
    pub density: f64,
}

impl D0Bound {
    pub fn bound(&self) -> f64 {
        self.cdf.min(self.density)
    }
}

/// Mass tolerance (relative) for the distribution function bound.
pub const MASS_RTOL: f64 = 1e-8;

/// Upper bound on the Rubinstein-Kantorovich distance between two piecewise
/// constant densities with cell width `h`.
pub fn d0_upper_bound(f1: &[f64], f2: &[f64], h: f64) -> Result<D0Bound> {
    if f1.len() != f2.len() {
        return Err(Error::Parameter("densities must share a grid".into()));
    }
    let m1 = h * f1.iter().sum::<f64>();
    let m2 = h * f2.iter().sum::<f64>();
    if (m1 - m2).abs() > MASS_RTOL * m1.abs().max(m2.abs()) {
        return Err(Error::MassMismatch { left: m1, right: m2 });
    }
    let mut cdf = 0.0;
    let mut density = 0.0;
    let mut d = 0.0f64;
    for (a, b) in f1.iter().zip(f2) {
        let diff = a - b;
        density += h * diff.abs();
        let next = d + h * diff;
        cdf += if d * next >= 0.0 {
            0.5 * h * (d.abs() + next.abs())
        } else {
            0.5 * h * (d * d + next * next) / (d.abs() + next.abs())
        };
        d = next;
    }
    Ok(D0Bound { cdf, density })
}

/// Observed orders `log(E_k / E_{k+1}) / log(h_k / h_{k+1})` between adjacent
/// rows; `+∞` when the finer error is zero.
pub fn observed_order(table: &ConvergenceTable, metric: Metric) -> Result<Vec<f64>> {
    if table.rows.len() < 2 {
        return Err(Error::Parameter("observed order needs at least two rows".into()));
    }
    Ok(table
        .rows
        .windows(2)
        .map(|w| {
            let (e0, e1) = (metric.of(&w[0]), metric.of(&w[1]));
            if e1 == 0.0 {
                f64::INFINITY
            } else {
                (e0 / e1).ln() / (w[0].h / w[1].h).ln()
            }
        })
        .collect())
}
