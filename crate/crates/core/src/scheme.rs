//! Explicit monotone scheme for the integrated equation
//! `∂t v = -|∂x v|^{m-1} (-Δ)^s v`.
//!
//! The grid is a finite window of `hℤ` with constant extension on both sides.
//! For nondecreasing data that sit exactly at their limits near the window
//! edges the windowed scheme coincides with the scheme on all of `hℤ`: the
//! upwind gradient vanishes inside flat regions, so frozen nodes would not
//! have moved anyway. [`VField::boundary_defect`] monitors that condition.

use std::fmt;
use std::str::FromStr;

use crate::oplib::{active_range, WeightTable};
use crate::{Error, Result};

/// Uniform window `[i_min, i_max]` of `hℤ`, node `i` at `origin + i h`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub h: f64,
    pub i_min: i64,
    pub i_max: i64,
    pub origin: f64,
    /// Value of the field left of the window.
    pub v_left: f64,
    /// Value of the field right of the window.
    pub v_right: f64,
}

impl GridSpec {
    pub fn new(h: f64, i_min: i64, i_max: i64, origin: f64, v_left: f64, v_right: f64) -> Result<Self> {
        if !(h > 0.0 && h.is_finite()) {
            return Err(Error::Parameter(format!("grid spacing h = {h} must be positive")));
        }
        if i_min >= i_max {
            return Err(Error::Parameter(format!("empty window [{i_min}, {i_max}]")));
        }
        if v_left > v_right {
            return Err(Error::Parameter(format!(
                "extensions must be nondecreasing, got {v_left} > {v_right}"
            )));
        }
        Ok(Self {
            h,
            i_min,
            i_max,
            origin,
            v_left,
            v_right,
        })
    }

    /// Smallest window of `hℤ` (origin 0) containing `[lo, hi]`.
    pub fn covering(h: f64, lo: f64, hi: f64, v_left: f64, v_right: f64) -> Result<Self> {
        let i_min = (lo / h).floor() as i64;
        let i_max = (hi / h).ceil() as i64;
        Self::new(h, i_min, i_max, 0.0, v_left, v_right)
    }

    pub fn len(&self) -> usize {
        (self.i_max - self.i_min + 1) as usize
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn x(&self, i: i64) -> f64 {
        self.origin + i as f64 * self.h
    }

    pub fn offset(&self, i: i64) -> Result<usize> {
        if i < self.i_min || i > self.i_max {
            return Err(Error::Index {
                index: i,
                min: self.i_min,
                max: self.i_max,
            });
        }
        Ok((i - self.i_min) as usize)
    }

    pub fn indices(&self) -> std::ops::RangeInclusive<i64> {
        self.i_min..=self.i_max
    }

    pub fn nodes(&self) -> impl Iterator<Item = f64> + '_ {
        self.indices().map(|i| self.x(i))
    }

    pub fn with_extensions(mut self, v_left: f64, v_right: f64) -> Result<Self> {
        if v_left > v_right {
            return Err(Error::Parameter("extensions must be nondecreasing".into()));
        }
        self.v_left = v_left;
        self.v_right = v_right;
        Ok(self)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CflMode {
    /// Bounded data: `τ ≤ h^{2s+m-1} / (C_s m (2M)^{m-1})`.
    Cfl1,
    /// Lipschitz data: `τ ≤ h^{max(1,2s)} f_s(h) / (C_s m L^{m-2} max(L, 2M))`.
    Cfl2,
}

impl FromStr for CflMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "cfl1" | "1" => Ok(Self::Cfl1),
            "cfl2" | "2" => Ok(Self::Cfl2),
            other => Err(Error::Parameter(format!("unknown CFL mode '{other}'"))),
        }
    }
}

impl fmt::Display for CflMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Cfl1 => "cfl1",
            Self::Cfl2 => "cfl2",
        })
    }
}

/// Default multiplier applied to the theoretical CFL step.
pub const DEFAULT_SAFETY: f64 = 0.9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProblemSpec {
    pub s: f64,
    pub m: f64,
    /// Bound on `|v|`, i.e. the total mass of `u`.
    pub mass_bound: f64,
    /// Bound on `|∂x v|`, i.e. `sup u_0`.
    pub lipschitz: Option<f64>,
    pub cfl_mode: CflMode,
    pub safety: f64,
}

impl ProblemSpec {
    pub fn new(s: f64, m: f64, mass_bound: f64, cfl_mode: CflMode) -> Result<Self> {
        let p = Self {
            s,
            m,
            mass_bound,
            lipschitz: None,
            cfl_mode,
            safety: DEFAULT_SAFETY,
        };
        p.validate_basic()?;
        Ok(p)
    }

    pub fn with_lipschitz(mut self, l: f64) -> Self {
        self.lipschitz = Some(l);
        self
    }

    pub fn with_safety(mut self, safety: f64) -> Self {
        self.safety = safety;
        self
    }

    /// Full check, including the Lipschitz bound required by CFL2.
    pub fn validate(&self) -> Result<()> {
        self.validate_basic()?;
        match (self.cfl_mode, self.lipschitz) {
            (CflMode::Cfl2, None) => Err(Error::Parameter("CFL2 needs a Lipschitz bound".into())),
            (_, Some(l)) if !(l >= 0.0) => Err(Error::Parameter("Lipschitz bound must be nonnegative".into())),
            _ => Ok(()),
        }
    }

    fn validate_basic(&self) -> Result<()> {
        if !(self.s > 0.0 && self.s < 1.0) {
            return Err(Error::Parameter(format!("s = {} not in (0,1)", self.s)));
        }
        // comparison for the scheme needs m ≥ 2
        if !(self.m >= 2.0) {
            return Err(Error::Parameter(format!("m = {} must be at least 2", self.m)));
        }
        if !(self.mass_bound >= 0.0) {
            return Err(Error::Parameter("mass bound must be nonnegative".into()));
        }
        if !(self.safety > 0.0) {
            return Err(Error::Parameter("safety factor must be positive".into()));
        }
        Ok(())
    }
}

/// Largest step allowed by the selected CFL condition, before the safety
/// factor. Infinite when the data are trivially constant.
pub fn cfl_bound(p: &ProblemSpec, h: f64, cs: f64) -> Result<f64> {
    p.validate()?;
    if !(h > 0.0 && h < 1.0) {
        return Err(Error::Parameter(format!("CFL needs 0 < h < 1, got {h}")));
    }
    if !(cs > 0.0 && cs.is_finite()) {
        return Err(Error::Parameter(format!("C_s = {cs} must be positive")));
    }
    let m = p.m;
    let two_m = 2.0 * p.mass_bound;
    let tau = match p.cfl_mode {
        CflMode::Cfl1 => h.powf(2.0 * p.s + m - 1.0) / (cs * m * two_m.powf(m - 1.0)),
        CflMode::Cfl2 => {
            let l = p.lipschitz.expect("validated");
            let f_s = if (p.s - 0.5).abs() < 1e-12 {
                1.0 / h.ln().abs()
            } else {
                1.0
            };
            h.powf(1f64.max(2.0 * p.s)) * f_s / (cs * m * l.powf(m - 2.0) * l.max(two_m))
        }
    };
    Ok(if tau.is_nan() { f64::INFINITY } else { tau })
}

/// Uniform time grid `t_j = j τ`, `j = 0..=steps`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeSpec {
    pub tau: f64,
    pub steps: usize,
    pub horizon: f64,
}

impl TimeSpec {
    /// Step from the CFL condition times the safety factor, shrunk so that
    /// `horizon / τ` is an integer.
    pub fn from_cfl(p: &ProblemSpec, h: f64, cs: f64, horizon: f64) -> Result<Self> {
        if !(horizon >= 0.0 && horizon.is_finite()) {
            return Err(Error::Parameter(format!("horizon T = {horizon} must be finite and nonnegative")));
        }
        let bound = cfl_bound(p, h, cs)? * p.safety;
        Ok(Self::fit(bound, horizon))
    }

    /// Largest `τ ≤ tau_max` with `horizon / τ` integer.
    pub fn fit(tau_max: f64, horizon: f64) -> Self {
        if horizon == 0.0 {
            return Self {
                tau: if tau_max.is_finite() { tau_max } else { 1.0 },
                steps: 0,
                horizon,
            };
        }
        if !tau_max.is_finite() || tau_max >= horizon {
            return Self {
                tau: horizon,
                steps: 1,
                horizon,
            };
        }
        let ratio = horizon / tau_max;
        let mut steps = ratio.ceil();
        if steps - ratio > 1.0 - 1e-12 {
            steps -= 1.0;
        }
        let steps = steps.max(1.0) as usize;
        Self {
            tau: horizon / steps as f64,
            steps,
            horizon,
        }
    }

    /// `t_j`, computed as `j T / J` so that grid times which are simple
    /// fractions of `T` come out exact.
    pub fn time(&self, j: usize) -> f64 {
        if self.steps == 0 {
            j as f64 * self.tau
        } else {
            j as f64 * self.horizon / self.steps as f64
        }
    }

    /// Step index of a time on the grid.
    pub fn index_of(&self, t: f64) -> Result<usize> {
        let j = (t / self.tau).round();
        let tol = 1e-9 * self.horizon.max(1.0);
        if j < 0.0 || j as usize > self.steps || (j * self.tau - t).abs() > tol {
            return Err(Error::Parameter(format!(
                "time {t} is not on the time grid (τ = {}, T = {})",
                self.tau, self.horizon
            )));
        }
        Ok(j as usize)
    }
}

/// Grid function for the integrated variable, `V_i ≈ v(x_i, t_j)`.
#[derive(Debug, Clone, PartialEq)]
pub struct VField {
    grid: GridSpec,
    values: Vec<f64>,
    time_index: usize,
}

impl VField {
    pub fn new(grid: GridSpec, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::Parameter(format!(
                "field has {} values for a window of {} nodes",
                values.len(),
                grid.len()
            )));
        }
        Ok(Self {
            grid,
            values,
            time_index: 0,
        })
    }

    /// Pointwise samples `V_i = v_0(x_i)`.
    pub fn sample<F: Fn(f64) -> f64>(grid: GridSpec, v0: F) -> Self {
        let values = grid.nodes().map(v0).collect();
        Self {
            grid,
            values,
            time_index: 0,
        }
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn time_index(&self) -> usize {
        self.time_index
    }

    pub fn with_time_index(mut self, j: usize) -> Self {
        self.time_index = j;
        self
    }

    /// Value at any index, using the constant extensions outside the window.
    pub fn value(&self, i: i64) -> f64 {
        if i < self.grid.i_min {
            self.grid.v_left
        } else if i > self.grid.i_max {
            self.grid.v_right
        } else {
            self.values[(i - self.grid.i_min) as usize]
        }
    }

    pub fn is_nondecreasing(&self) -> bool {
        first_descent(&self.values, self.grid.v_left, self.grid.v_right).is_none()
    }

    /// `sup |V_i|` over the window and the extensions.
    pub fn sup_norm(&self) -> f64 {
        self.values
            .iter()
            .fold(self.grid.v_left.abs().max(self.grid.v_right.abs()), |a, v| a.max(v.abs()))
    }

    /// `max_i (V_{i+1} - V_i) / h`, including the two boundary cells.
    pub fn max_slope(&self) -> f64 {
        let g = &self.grid;
        let mut prev = g.v_left;
        let mut best = f64::NEG_INFINITY;
        for &v in self.values.iter().chain(std::iter::once(&g.v_right)) {
            best = best.max(v - prev);
            prev = v;
        }
        best / g.h
    }

    /// Distance of the edge nodes from the extension values.
    pub fn boundary_defect(&self) -> f64 {
        let first = self.values[0];
        let last = *self.values.last().expect("non-empty window");
        (first - self.grid.v_left).abs().max((self.grid.v_right - last).abs())
    }

    /// `V + c`, extensions included.
    pub fn translate(&self, c: f64) -> Self {
        let mut g = self.grid;
        g.v_left += c;
        g.v_right += c;
        Self {
            grid: g,
            values: self.values.iter().map(|v| v + c).collect(),
            time_index: self.time_index,
        }
    }
}

/// Offset `p` such that the extended sequence descends between `p-1` and `p`.
fn first_descent(values: &[f64], left: f64, right: f64) -> Option<usize> {
    let mut prev = left;
    for (p, &v) in values.iter().chain(std::iter::once(&right)).enumerate() {
        if v < prev {
            return Some(p);
        }
        prev = v;
    }
    None
}

/// Upwind difference: forward when `lap ≤ 0`, backward otherwise.
pub fn upwind_gradient(v: &VField, i: i64, lap: f64) -> Result<f64> {
    v.grid.offset(i)?;
    let h = v.grid.h;
    Ok(if lap <= 0.0 {
        (v.value(i + 1) - v.value(i)) / h
    } else {
        (v.value(i) - v.value(i - 1)) / h
    })
}

#[inline]
fn grad_power(d: f64, m: f64) -> f64 {
    let d = d.abs();
    if m == 2.0 {
        d
    } else {
        d.powf(m - 1.0)
    }
}

/// `L_h[v]_i = -|D_h v_i|^{m-1} (-Δ)_h^s v_i` with a single evaluation of the
/// fractional Laplacian reused for the upwind branch.
pub fn quasilinear_op(table: &WeightTable, m: f64, v: &VField, i: i64) -> Result<f64> {
    let lap = crate::oplib::apply_lap(table, v, i)?;
    let d = upwind_gradient(v, i, lap)?;
    Ok(-grad_power(d, m) * lap)
}

/// One application of the propagator into `out`, without any checks.
fn propagate(table: &WeightTable, m: f64, tau: f64, v: &VField, out: &mut Vec<f64>) {
    let g = &v.grid;
    let vals = &v.values;
    let n = vals.len();
    let (left, right) = (g.v_left, g.v_right);
    let active = active_range(vals, left, right);
    let inv_h = 1.0 / g.h;
    out.clear();
    out.extend_from_slice(vals);
    for p in 0..n {
        let vp = vals[p];
        let prev = if p == 0 { left } else { vals[p - 1] };
        let next = if p + 1 == n { right } else { vals[p + 1] };
        if prev == vp && next == vp {
            // both one-sided differences vanish
            continue;
        }
        let lap = table.lap_raw(vals, left, right, active, p);
        let d = if lap <= 0.0 { (next - vp) * inv_h } else { (vp - prev) * inv_h };
        out[p] = vp + tau * (-grad_power(d, m) * lap);
    }
}

/// `S_τ[v]` without monotonicity checks. Used by the negative controls of
/// the structure suite.
pub fn step_unchecked(table: &WeightTable, m: f64, v: &VField, tau: f64) -> VField {
    let mut out = Vec::with_capacity(v.values.len());
    propagate(table, m, tau, v, &mut out);
    VField {
        grid: v.grid,
        values: out,
        time_index: v.time_index + 1,
    }
}

fn check_output(v: &VField, step: usize) -> Result<()> {
    if let Some(p) = v.values.iter().position(|x| !x.is_finite()) {
        return Err(Error::NonFinite {
            step,
            index: v.grid.i_min + p as i64,
        });
    }
    if let Some(p) = first_descent(&v.values, v.grid.v_left, v.grid.v_right) {
        return Err(Error::CflViolation {
            step,
            detail: format!(
                "field decreases into node {} (τ too large or input not monotone)",
                v.grid.i_min + p as i64
            ),
        });
    }
    Ok(())
}

/// One checked step of the scheme.
pub fn step(table: &WeightTable, p: &ProblemSpec, v: &VField, tau: f64) -> Result<VField> {
    let out = step_unchecked(table, p.m, v, tau);
    check_output(&out, out.time_index)?;
    Ok(out)
}

/// Double-buffered time stepper.
pub struct Stepper<'a> {
    table: &'a WeightTable,
    m: f64,
    tau: f64,
    current: VField,
    buffer: Vec<f64>,
}

impl<'a> Stepper<'a> {
    pub fn new(table: &'a WeightTable, m: f64, tau: f64, v0: VField) -> Self {
        let buffer = Vec::with_capacity(v0.values.len());
        Self {
            table,
            m,
            tau,
            current: v0,
            buffer,
        }
    }

    pub fn current(&self) -> &VField {
        &self.current
    }

    pub fn into_current(self) -> VField {
        self.current
    }

    /// Advances one step and checks finiteness and monotonicity.
    pub fn advance(&mut self) -> Result<&VField> {
        propagate(self.table, self.m, self.tau, &self.current, &mut self.buffer);
        std::mem::swap(&mut self.current.values, &mut self.buffer);
        self.current.time_index += 1;
        check_output(&self.current, self.current.time_index)?;
        Ok(&self.current)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SnapshotMeta {
    pub time: f64,
    pub step: usize,
    /// `v_R - v_L`
    pub mass: f64,
    pub sup_norm: f64,
    pub max_slope: f64,
    pub boundary_defect: f64,
}

#[derive(Debug, Clone)]
pub struct Snapshot {
    pub field: VField,
    pub meta: SnapshotMeta,
}

impl Snapshot {
    /// Copies `field` and records its metadata at time `time`.
    pub fn capture(field: &VField, time: f64) -> Self {
        let g = field.grid();
        Self {
            meta: SnapshotMeta {
                time,
                step: field.time_index(),
                mass: g.v_right - g.v_left,
                sup_norm: field.sup_norm(),
                max_slope: field.max_slope(),
                boundary_defect: field.boundary_defect(),
            },
            field: field.clone(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub time: TimeSpec,
    pub snapshots: Vec<Snapshot>,
}

impl Trajectory {
    pub fn last(&self) -> &Snapshot {
        self.snapshots.last().expect("trajectory holds the initial field")
    }

    /// Snapshot taken at exactly time `t`, if any.
    pub fn at(&self, t: f64) -> Option<&Snapshot> {
        let j = self.time.index_of(t).ok()?;
        self.snapshots.iter().find(|s| s.meta.step == j)
    }

    pub fn max_boundary_defect(&self) -> f64 {
        self.snapshots.iter().map(|s| s.meta.boundary_defect).fold(0.0, f64::max)
    }
}

/// Runs the scheme over `time.steps` steps. The initial field is always
/// recorded, together with every time in `snapshot_times` and the horizon.
pub fn evolve(
    table: &WeightTable,
    p: &ProblemSpec,
    v0: VField,
    time: &TimeSpec,
    snapshot_times: &[f64],
) -> Result<Trajectory> {
    evolve_with(table, p, v0, time, snapshot_times, |_| {})
}

/// [`evolve`] with a callback invoked on the field after every step.
pub fn evolve_with<F: FnMut(&VField)>(
    table: &WeightTable,
    p: &ProblemSpec,
    v0: VField,
    time: &TimeSpec,
    snapshot_times: &[f64],
    mut observer: F,
) -> Result<Trajectory> {
    p.validate()?;
    let wanted = snapshot_steps(time, snapshot_times)?;
    let v0 = v0.with_time_index(0);
    let mut snapshots = vec![Snapshot::capture(&v0, 0.0)];
    let mut stepper = Stepper::new(table, p.m, time.tau, v0);
    let mut next = wanted.iter().copied().filter(|&j| j > 0).peekable();
    for j in 1..=time.steps {
        let v = stepper.advance()?;
        observer(v);
        if next.peek() == Some(&j) {
            snapshots.push(Snapshot::capture(v, time.time(j)));
            next.next();
        }
    }
    Ok(Trajectory {
        time: *time,
        snapshots,
    })
}

/// Sorted step indices of `times` plus the final step.
pub fn snapshot_steps(time: &TimeSpec, times: &[f64]) -> Result<Vec<usize>> {
    let mut wanted: Vec<usize> = times.iter().map(|&t| time.index_of(t)).collect::<Result<_>>()?;
    wanted.push(time.steps);
    wanted.sort_unstable();
    wanted.dedup();
    Ok(wanted)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(n: i64, h: f64, l: f64, r: f64) -> GridSpec {
        GridSpec::new(h, -n, n, 0.0, l, r).unwrap()
    }

    #[test]
    fn upwind_branches() {
        let g = grid(3, 0.5, 0.0, 0.0);
        let c = VField::new(g.with_extensions(2.0, 2.0).unwrap(), vec![2.0; 7]).unwrap();
        assert_eq!(upwind_gradient(&c, 0, 0.0).unwrap(), 0.0);

        let h = 0.5;
        let g = grid(3, h, -4.0 * h, 4.0 * h);
        let lin = VField::sample(g, |x| x);
        assert_eq!(upwind_gradient(&lin, 1, 0.0).unwrap(), 1.0);
    }

    #[test]
    fn upwind_at_jump() {
        // nodes -1, 0 at 0; nodes 1, 2 at 1
        let h = 0.25;
        let g = GridSpec::new(h, -1, 2, 0.0, 0.0, 1.0).unwrap();
        let v = VField::new(g, vec![0.0, 0.0, 1.0, 1.0]).unwrap();
        let t = WeightTable::with_len(0.5, h, 8).unwrap();
        let lap = crate::oplib::apply_lap(&t, &v, 0).unwrap();
        assert!(lap < 0.0);
        assert_eq!(upwind_gradient(&v, 0, lap).unwrap(), 1.0 / h);
    }

    #[test]
    fn quasilinear_vanishes_on_constants_and_lines() {
        let h = 0.5;
        let t = WeightTable::with_len(0.5, h, 20).unwrap();
        let g = grid(4, h, 3.0, 3.0);
        let c = VField::new(g, vec![3.0; 9]).unwrap();
        for i in -4..=4 {
            assert_eq!(quasilinear_op(&t, 2.0, &c, i).unwrap(), 0.0);
        }
    }

    #[test]
    fn quasilinear_on_spike() {
        let h = 0.5;
        let t = WeightTable::with_len(0.5, h, 8).unwrap();
        let g = grid(3, h, 0.0, 0.0);
        let mut vals = vec![0.0; 7];
        vals[3] = 1.0;
        let v = VField::new(g, vals).unwrap();
        // i = 1: lap = -ω_1 ≤ 0, forward gradient (v_2 - v_1)/h = 0
        assert_eq!(quasilinear_op(&t, 2.0, &v, 1).unwrap(), 0.0);
        // i = 0: lap = sum_all > 0, backward gradient 1/h
        let q = quasilinear_op(&t, 2.0, &v, 0).unwrap();
        assert!((q + t.sum_all() / h).abs() < 1e-12 * t.sum_all() / h);
    }

    #[test]
    fn cfl1_example() {
        let p = ProblemSpec::new(0.5, 2.0, 1.0, CflMode::Cfl1).unwrap();
        let tau = cfl_bound(&p, 1.0 / 16.0, 2.0).unwrap();
        assert!((tau - 1.0 / 2048.0).abs() < 1e-18);
    }

    #[test]
    fn cfl2_scaling() {
        let h: f64 = 1.0 / 16.0;
        // s < 1/2: hyperbolic exponent 1
        let p = ProblemSpec::new(0.25, 2.0, 1.0, CflMode::Cfl2).unwrap().with_lipschitz(1.0);
        let tau = cfl_bound(&p, h, 1.0).unwrap();
        assert!((tau - h / (2.0 * 2.0)).abs() < 1e-15);
        let tau2 = cfl_bound(&p, h / 2.0, 1.0).unwrap();
        assert!((tau / tau2 - 2.0).abs() < 1e-12);
        // s = 1/2 carries 1/|log h|
        let p = ProblemSpec::new(0.5, 2.0, 1.0, CflMode::Cfl2).unwrap().with_lipschitz(1.0);
        let tau = cfl_bound(&p, h, 1.0).unwrap();
        let without = h / (2.0 * 2.0);
        assert!((without / tau - 16f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn cfl2_needs_lipschitz() {
        let p = ProblemSpec::new(0.5, 2.0, 1.0, CflMode::Cfl2).unwrap();
        assert!(p.validate().is_err());
        assert!(cfl_bound(&p, 0.0625, 1.0).is_err());
        assert!(p.with_lipschitz(1.0).validate().is_ok());
        assert!(ProblemSpec::new(0.5, 1.5, 1.0, CflMode::Cfl1).is_err());
    }

    #[test]
    fn zero_mass_takes_one_step() {
        let p = ProblemSpec::new(0.5, 2.0, 0.0, CflMode::Cfl1).unwrap();
        let t = TimeSpec::from_cfl(&p, 0.1, 1.0, 2.0).unwrap();
        assert_eq!(t.steps, 1);
        assert_eq!(t.tau, 2.0);
    }

    #[test]
    fn fit_rounds_down_tau() {
        let t = TimeSpec::fit(0.3, 1.0);
        assert_eq!(t.steps, 4);
        assert_eq!(t.tau, 0.25);
        let t = TimeSpec::fit(0.25, 1.0);
        assert_eq!(t.steps, 4);
        assert!(t.index_of(0.5).is_ok());
        assert!(t.index_of(0.3).is_err());
    }

    #[test]
    fn grid_times_hit_simple_fractions() {
        let t = TimeSpec::fit(1.0 / 71.5, 1.0);
        assert_eq!(t.steps, 72);
        assert_eq!(t.time(36), 0.5);
        assert_eq!(t.time(54), 0.75);
        assert_eq!(t.time(72), 1.0);
    }

    #[test]
    fn constant_field_is_fixed() {
        let h = 0.25;
        let table = WeightTable::with_len(0.5, h, 16).unwrap();
        let p = ProblemSpec::new(0.5, 2.0, 1.0, CflMode::Cfl1).unwrap();
        let g = grid(4, h, 0.4, 0.4);
        let v = VField::new(g, vec![0.4; 9]).unwrap();
        let out = step(&table, &p, &v, 1e-3).unwrap();
        assert_eq!(out.values(), v.values());
    }

    #[test]
    fn step_function_single_step_by_hand() {
        // 9 nodes, jump from 0 to M between nodes 0 and 1, m = 2, s = 1/2
        let h = 0.25;
        let m_big = 1.0;
        let table = WeightTable::with_len(0.5, h, 8).unwrap();
        let g = GridSpec::new(h, -4, 4, 0.0, 0.0, m_big).unwrap();
        let v = VField::sample(g, |x| if x > 0.0 { m_big } else { 0.0 });
        let p = ProblemSpec::new(0.5, 2.0, m_big, CflMode::Cfl1).unwrap();
        let cs = crate::oplib::check_am(&WeightTable::with_len(0.5, h, 8).unwrap()).unwrap().cs;
        let tau = cfl_bound(&p, h, cs).unwrap() * 0.9;
        let out = step(&table, &p, &v, tau).unwrap();

        // Only the two nodes touching the jump move.
        let w = table.weights();
        let scale = table.scale();
        // node 0: value 0, lap = -Σ_{k≥1} ω_k (right side all M) < 0, forward slope M/h
        let right_sum: f64 = w.iter().sum::<f64>() + table.tail_beyond(8);
        let lap0 = -m_big * right_sum * scale;
        let expect0 = 0.0 + tau * (m_big / h) * (-lap0);
        // node 1: value M, lap = M Σ_{k≥1} ω_k > 0, backward slope M/h
        let expect1 = m_big - tau * (m_big / h) * (m_big * right_sum * scale);
        let vals = out.values();
        assert!((vals[4] - expect0).abs() < 1e-14);
        assert!((vals[5] - expect1).abs() < 1e-14);
        for (p, &x) in vals.iter().enumerate() {
            if p != 4 && p != 5 {
                assert_eq!(x, v.values()[p]);
            }
            assert!((0.0..=m_big).contains(&x));
        }
    }

    #[test]
    fn step_flags_oversized_tau() {
        let h = 0.25;
        let table = WeightTable::with_len(0.5, h, 8).unwrap();
        let g = GridSpec::new(h, -4, 4, 0.0, 0.0, 1.0).unwrap();
        let v = VField::sample(g, |x| if x > 0.0 { 1.0 } else { 0.0 });
        let p = ProblemSpec::new(0.5, 2.0, 1.0, CflMode::Cfl1).unwrap();
        assert!(matches!(step(&table, &p, &v, 10.0), Err(Error::CflViolation { .. })));
    }

    #[test]
    fn zero_horizon_returns_initial_field() {
        let h = 0.25;
        let table = WeightTable::with_len(0.5, h, 8).unwrap();
        let g = GridSpec::new(h, -4, 4, 0.0, 0.0, 1.0).unwrap();
        let v0 = VField::sample(g, |x| if x > 0.0 { 1.0 } else { 0.0 });
        let p = ProblemSpec::new(0.5, 2.0, 1.0, CflMode::Cfl1).unwrap();
        let t = TimeSpec::from_cfl(&p, h, 1.3, 0.0).unwrap();
        let traj = evolve(&table, &p, v0.clone(), &t, &[]).unwrap();
        assert_eq!(traj.snapshots.len(), 1);
        assert_eq!(traj.last().field.values(), v0.values());
    }

    #[test]
    fn translate_shifts_extensions() {
        let g = GridSpec::new(0.5, 0, 2, 0.0, 0.0, 1.0).unwrap();
        let v = VField::new(g, vec![0.0, 0.5, 1.0]).unwrap();
        let w = v.translate(2.0);
        assert_eq!(w.grid().v_left, 2.0);
        assert_eq!(w.values(), &[2.0, 2.5, 3.0]);
    }
}
