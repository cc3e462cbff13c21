//! Density recovery `U_i = (V_i - V_{i-1}) / h` and space-time interpolants.

use std::io::Write;

use crate::scheme::{GridSpec, Trajectory, VField};
use crate::{Error, Result};

/// Cell densities on the window. Cell `i` is `[x_{i-1}, x_i)`; the field
/// stores cells `i_min ..= i_max + 1`, the last one closing the gap to the
/// right extension so that `h Σ U_i = v_R - v_L`.
#[derive(Debug, Clone, PartialEq)]
pub struct UField {
    grid: GridSpec,
    values: Vec<f64>,
    time_index: usize,
}

impl UField {
    pub fn new(grid: GridSpec, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() + 1 {
            return Err(Error::Parameter(format!(
                "density needs {} cells, got {}",
                grid.len() + 1,
                values.len()
            )));
        }
        Ok(Self {
            grid,
            values,
            time_index: 0,
        })
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn time_index(&self) -> usize {
        self.time_index
    }

    /// First cell index (`i_min`).
    pub fn first_cell(&self) -> i64 {
        self.grid.i_min
    }

    /// Density of cell `i`, zero outside the stored cells.
    pub fn cell(&self, i: i64) -> f64 {
        let p = i - self.grid.i_min;
        if p < 0 || p as usize >= self.values.len() {
            0.0
        } else {
            self.values[p as usize]
        }
    }

    /// `(x_i, U_i)` pairs, `x_i` the right end of cell `i`.
    pub fn cells(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.values
            .iter()
            .enumerate()
            .map(move |(p, &u)| (self.grid.x(self.grid.i_min + p as i64), u))
    }
}

/// Backward differences of `v`, with `V_{i_min-1} = v_L` and `V_{i_max+1} = v_R`.
pub fn differentiate(v: &VField) -> UField {
    let g = *v.grid();
    let inv_h = 1.0 / g.h;
    let mut prev = g.v_left;
    let values = v
        .values()
        .iter()
        .chain(std::iter::once(&g.v_right))
        .map(|&x| {
            let u = (x - prev) * inv_h;
            prev = x;
            u
        })
        .collect();
    UField {
        grid: g,
        values,
        time_index: v.time_index(),
    }
}

/// Prefix sums `V_i = v_L + h Σ_{k≤i} U_k` over the window. The right
/// extension of the result is `v_L + h Σ U`.
pub fn cumulative(u: &UField, v_left: f64) -> VField {
    let g = u.grid;
    let n = g.len();
    let mut acc = v_left;
    let mut values = Vec::with_capacity(n);
    for &x in &u.values[..n] {
        acc += g.h * x;
        values.push(acc);
    }
    acc += g.h * u.values[n];
    let grid = GridSpec { v_left, v_right: acc.max(v_left), ..g };
    VField::new(grid, values)
        .expect("window length preserved")
        .with_time_index(u.time_index)
}

/// `h Σ U_i`.
pub fn mass(u: &UField) -> f64 {
    u.grid.h * u.values.iter().sum::<f64>()
}

pub fn sup_norm(u: &UField) -> f64 {
    u.values.iter().fold(0.0, |a, &x| a.max(x.abs()))
}

/// `h Σ_{|x_i| > r} U_i`.
pub fn tail_mass(u: &UField, r: f64) -> f64 {
    u.grid.h * u.cells().filter(|(x, _)| x.abs() > r).map(|(_, v)| v).sum::<f64>()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InterpolantKind {
    PiecewiseLinearV,
    PiecewiseConstantU,
}

/// Space-time interpolant of a trajectory, left-constant in time between
/// stored snapshots.
#[derive(Debug, Clone)]
pub struct Interpolant {
    kind: InterpolantKind,
    times: Vec<f64>,
    fields: Vec<VField>,
    densities: Vec<UField>,
}

impl Interpolant {
    pub fn new(kind: InterpolantKind, trajectory: &Trajectory) -> Self {
        let times = trajectory.snapshots.iter().map(|s| s.meta.time).collect();
        let fields: Vec<VField> = trajectory.snapshots.iter().map(|s| s.field.clone()).collect();
        let densities = match kind {
            InterpolantKind::PiecewiseConstantU => fields.iter().map(differentiate).collect(),
            InterpolantKind::PiecewiseLinearV => Vec::new(),
        };
        Self {
            kind,
            times,
            fields,
            densities,
        }
    }

    pub fn kind(&self) -> InterpolantKind {
        self.kind
    }

    fn slot(&self, t: f64) -> Result<usize> {
        let t0 = self.times[0];
        let t1 = *self.times.last().expect("non-empty");
        if !(t >= t0 && t <= t1) {
            return Err(Error::Parameter(format!("time {t} outside [{t0}, {t1}]")));
        }
        Ok(self.times.partition_point(|&s| s <= t) - 1)
    }

    pub fn eval(&self, x: f64, t: f64) -> Result<f64> {
        let j = self.slot(t)?;
        let g = self.fields[j].grid();
        let mut r = (x - g.origin) / g.h;
        let nearest = r.round();
        if (r - nearest).abs() < 1e-12 {
            r = nearest;
        }
        // x in [x_{i-1}, x_i) with i = floor(r) + 1
        let below = r.floor();
        let i = below as i64 + 1;
        Ok(match self.kind {
            InterpolantKind::PiecewiseLinearV => {
                let theta = r - below;
                let v = &self.fields[j];
                if theta == 0.0 {
                    v.value(i - 1)
                } else {
                    (1.0 - theta) * v.value(i - 1) + theta * v.value(i)
                }
            }
            InterpolantKind::PiecewiseConstantU => self.densities[j].cell(i),
        })
    }
}

/// Shortest round-trip decimal, switching to exponent form for very small or
/// very large magnitudes.
struct Num(f64);

impl std::fmt::Display for Num {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let a = self.0.abs();
        if a == 0.0 || (1e-4..1e7).contains(&a) || !a.is_finite() {
            write!(f, "{}", self.0)
        } else {
            write!(f, "{:e}", self.0)
        }
    }
}

/// Writes `x,V` rows.
pub fn write_v_csv<W: Write>(mut out: W, v: &VField) -> Result<()> {
    writeln!(out, "x,V")?;
    for (x, val) in v.grid().nodes().zip(v.values()) {
        writeln!(out, "{},{}", Num(x), Num(*val))?;
    }
    Ok(())
}

/// Writes `x,U` rows, `x` the right end of each cell.
pub fn write_u_csv<W: Write>(mut out: W, u: &UField) -> Result<()> {
    writeln!(out, "x,U")?;
    for (x, val) in u.cells() {
        writeln!(out, "{},{}", Num(x), Num(val))?;
    }
    Ok(())
}

/// Writes `x,V,U` rows over the window nodes.
pub fn write_snapshot_csv<W: Write>(mut out: W, v: &VField) -> Result<()> {
    let u = differentiate(v);
    writeln!(out, "x,V,U")?;
    for ((x, val), du) in v.grid().nodes().zip(v.values()).zip(u.values()) {
        writeln!(out, "{},{},{}", Num(x), Num(*val), Num(*du))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn g(h: f64, l: f64, r: f64) -> GridSpec {
        GridSpec::new(h, -4, 4, 0.0, l, r).unwrap()
    }

    #[test]
    fn number_format_round_trips() {
        for x in [0.0, -2.5, 3.681809558413113e-16, 1e-4, 0.125, 2e9, -7.5e-30] {
            let text = Num(x).to_string();
            assert_eq!(text.parse::<f64>().unwrap(), x, "{text}");
        }
        assert_eq!(Num(3.5e-16).to_string(), "3.5e-16");
        assert_eq!(Num(-2.5).to_string(), "-2.5");
    }

    #[test]
    fn constant_and_affine() {
        let v = VField::new(g(0.5, 1.0, 1.0), vec![1.0; 9]).unwrap();
        assert!(differentiate(&v).values().iter().all(|&u| u == 0.0));

        let h = 0.5;
        let v = VField::sample(g(h, -5.0 * h, 5.0 * h), |x| x);
        assert!(differentiate(&v).values().iter().all(|&u| (u - 1.0).abs() < 1e-15));
    }

    #[test]
    fn step_gives_single_cell() {
        let h = 0.25;
        let big_m = 2.0;
        let v = VField::sample(g(h, 0.0, big_m), |x| if x >= 0.0 { big_m } else { 0.0 });
        let u = differentiate(&v);
        for (p, &x) in u.values().iter().enumerate() {
            if p == 4 {
                assert_eq!(x, big_m / h);
            } else {
                assert_eq!(x, 0.0);
            }
        }
        assert_eq!(mass(&u), big_m);
        assert_eq!(sup_norm(&u), big_m / h);
        assert_eq!(tail_mass(&u, 0.1), 0.0);
        let back = cumulative(&u, 0.0);
        assert_eq!(back.values(), v.values());
    }

    #[test]
    fn zero_density_integrates_to_left_value() {
        let u = UField::new(g(0.5, 0.0, 0.0), vec![0.0; 10]).unwrap();
        let v = cumulative(&u, 0.3);
        assert!(v.values().iter().all(|&x| x == 0.3));
    }

    #[test]
    fn linear_interpolant_at_nodes_and_midpoints() {
        use crate::scheme::{Snapshot, SnapshotMeta, TimeSpec, Trajectory};
        let h = 0.25;
        let v = VField::new(g(h, 0.0, 1.0), vec![0.0, 0.0, 0.1, 0.3, 0.5, 0.7, 0.9, 1.0, 1.0]).unwrap();
        let meta = SnapshotMeta {
            time: 0.0,
            step: 0,
            mass: 1.0,
            sup_norm: 1.0,
            max_slope: 0.0,
            boundary_defect: 0.0,
        };
        let traj = Trajectory {
            time: TimeSpec::fit(1.0, 0.0),
            snapshots: vec![Snapshot { field: v.clone(), meta }],
        };
        let lin = Interpolant::new(InterpolantKind::PiecewiseLinearV, &traj);
        for i in -4..=4 {
            assert_eq!(lin.eval(i as f64 * h, 0.0).unwrap(), v.value(i));
        }
        let mid = lin.eval(-0.5 * h, 0.0).unwrap();
        assert!((mid - 0.5 * (v.value(-1) + v.value(0))).abs() < 1e-15);
        assert_eq!(lin.eval(-10.0, 0.0).unwrap(), 0.0);
        assert_eq!(lin.eval(10.0, 0.0).unwrap(), 1.0);
        assert!(lin.eval(0.0, 1.0).is_err());

        let pc = Interpolant::new(InterpolantKind::PiecewiseConstantU, &traj);
        let u = differentiate(&v);
        // x in [x_{-1}, x_0) is cell 0
        assert_eq!(pc.eval(-0.5 * h, 0.0).unwrap(), u.cell(0));
        // difference quotient of V̄ across the cell reproduces Ū
        let dq = (lin.eval(0.0, 0.0).unwrap() - lin.eval(-h, 0.0).unwrap()) / h;
        assert!((dq - u.cell(0)).abs() < 1e-14);
    }
}
