//! Experiment configuration, presets, refinement ladders and output files.

mod config;
mod props;

use std::fmt::{self, Write as _};
use std::fs;
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

pub use config::parse_real;
pub use props::{property_suite, ModeSummary, PropertyConfig, PropertyKind, PropertyReport, TranslationCheck, Violation};

use crate::analytic::{ExplicitSolution, InitialDatum};
use crate::density::{self, differentiate};
use crate::metrics::{d0_upper_bound, error_eu, error_eu_weak, error_ev, ConvergenceTable, ErrorReport};
use crate::oplib::{build_weights, check_am, AmReport, WeightTable, DEFAULT_EPS_TAIL};
use crate::scheme::{
    cfl_bound, evolve_with, snapshot_steps, CflMode, GridSpec, ProblemSpec, Snapshot, Stepper, TimeSpec, Trajectory,
    VField, DEFAULT_SAFETY,
};
use crate::{Error, Result};

/// What the numerical solution is compared against.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Reference {
    None,
    /// Explicit self-similar solution (`m = 2`).
    Analytic(ExplicitSolution),
    /// Same configuration run on a finer grid.
    FineGrid { h: f64 },
}

/// Fully resolved run configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub name: String,
    pub s: f64,
    pub m: f64,
    pub cfl_mode: CflMode,
    pub safety: f64,
    pub datum: InitialDatum,
    /// Second datum evolved alongside the first on the same grid and time
    /// step; turns the run into an ordering experiment.
    pub second_datum: Option<InitialDatum>,
    pub reference: Reference,
    pub horizon: f64,
    /// Time at which errors are measured.
    pub error_time: f64,
    pub ladder: Vec<f64>,
    pub snapshots: Vec<f64>,
    pub out_dir: Option<PathBuf>,
    /// Tail tolerance capping the weight table; the table never needs to be
    /// longer than the window.
    pub eps_tail: f64,
    pub seed: u64,
    /// Distance added on each side of the datum support. Defaults to
    /// `max(4, 2 T^{1/(1+2s)})` times the datum length scale.
    pub padding: Option<f64>,
    /// Explicit window, overriding support and padding.
    pub domain: Option<(f64, f64)>,
    /// Largest allowed distance of the edge nodes from the extension values.
    pub boundary_tol: f64,
    /// Use the slope of the sampled datum as the Lipschitz bound for CFL2.
    pub discrete_lipschitz: bool,
}

impl RunConfig {
    /// Configuration with defaults for everything but the problem and datum.
    pub fn new(name: &str, s: f64, m: f64, datum: InitialDatum) -> Self {
        Self {
            name: name.to_string(),
            s,
            m,
            cfl_mode: CflMode::Cfl1,
            safety: DEFAULT_SAFETY,
            datum,
            second_datum: None,
            reference: Reference::None,
            horizon: 1.0,
            error_time: 1.0,
            ladder: vec![0.125, 0.0625],
            snapshots: Vec::new(),
            out_dir: None,
            eps_tail: DEFAULT_EPS_TAIL,
            seed: 0,
            padding: None,
            domain: None,
            boundary_tol: 1e-10,
            discrete_lipschitz: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Parameter(msg));
        if !(self.s > 0.0 && self.s < 1.0) {
            return bad(format!("s = {} not in (0,1)", self.s));
        }
        if !(self.m >= 2.0 && self.m.is_finite()) {
            return bad(format!("m = {} must be at least 2", self.m));
        }
        if !(self.safety > 0.0 && self.safety <= 1.0) {
            return bad(format!("safety = {} not in (0,1]", self.safety));
        }
        if !(self.horizon >= 0.0 && self.horizon.is_finite()) {
            return bad(format!("T = {} must be finite and nonnegative", self.horizon));
        }
        if !(self.error_time >= 0.0 && self.error_time <= self.horizon) {
            return bad(format!("error_time = {} not in [0, T]", self.error_time));
        }
        if self.ladder.is_empty() {
            return bad("ladder is empty".into());
        }
        if self.ladder.iter().any(|&h| !(h > 0.0 && h < 1.0)) {
            return bad("ladder values must lie in (0,1)".into());
        }
        if self.ladder.windows(2).any(|w| !(w[1] < w[0])) {
            return bad("ladder must be strictly decreasing".into());
        }
        if let Some(&t) = self.snapshots.iter().find(|&&t| !(t >= 0.0 && t <= self.horizon)) {
            return bad(format!("snapshot time {t} not in [0, T]"));
        }
        if !(self.eps_tail > 0.0 && self.eps_tail < 1.0) {
            return bad(format!("eps_tail = {} not in (0,1)", self.eps_tail));
        }
        if let Some(p) = self.padding {
            if !(p >= 0.0 && p.is_finite()) {
                return bad(format!("padding = {p} must be finite and nonnegative"));
            }
        }
        if let Some((lo, hi)) = self.domain {
            if !(lo < hi) {
                return bad(format!("domain [{lo}, {hi}] is empty"));
            }
        }
        if !(self.boundary_tol >= 0.0) {
            return bad("boundary_tol must be nonnegative".into());
        }
        self.datum.validate()?;
        if let Some(d) = &self.second_datum {
            d.validate()?;
            if self.reference != Reference::None {
                return bad("paired runs take no reference".into());
            }
        }
        match self.reference {
            Reference::Analytic(sol) => {
                if self.m != 2.0 {
                    return bad("the explicit solution exists for m = 2 only".into());
                }
                if sol.s != self.s {
                    return bad(format!("explicit solution has s = {}, run has s = {}", sol.s, self.s));
                }
            }
            Reference::FineGrid { h } => {
                let finest = *self.ladder.last().expect("non-empty");
                if !(h > 0.0 && h < finest) {
                    return bad(format!("reference h = {h} must be finer than the ladder"));
                }
            }
            Reference::None => {}
        }
        Ok(())
    }

    /// Physical window `[lo, hi]` shared by every rung.
    pub fn window(&self) -> (f64, f64) {
        if let Some(d) = self.domain {
            return d;
        }
        let (mut lo, mut hi) = self.datum.support();
        let mut scale = self.datum.length_scale();
        if let Some(d) = &self.second_datum {
            let (l2, h2) = d.support();
            lo = lo.min(l2);
            hi = hi.max(h2);
            scale = scale.max(d.length_scale());
        }
        let pad = self
            .padding
            .unwrap_or_else(|| 4f64.max(2.0 * self.horizon.powf(1.0 / (1.0 + 2.0 * self.s))) * scale);
        (lo - pad, hi + pad)
    }

    fn recorded_times(&self) -> Vec<f64> {
        let mut t = self.snapshots.clone();
        t.push(self.error_time);
        t
    }
}

/// The four built-in experiments.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    /// Explicit solution from `t0 = 1`, `R = 1/2`.
    Exp1,
    /// Explicit solution from a Dirac mass, `R = 1`.
    Exp2,
    /// Two smooth bumps, `m = 4`, fine-grid reference.
    Exp3,
    /// Two ordered data whose densities cross.
    Exp4,
}

impl FromStr for Preset {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exp1" => Ok(Self::Exp1),
            "exp2" => Ok(Self::Exp2),
            "exp3" => Ok(Self::Exp3),
            "exp4" => Ok(Self::Exp4),
            other => Err(Error::Parameter(format!("unknown preset '{other}'"))),
        }
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Exp1 => "exp1",
            Self::Exp2 => "exp2",
            Self::Exp3 => "exp3",
            Self::Exp4 => "exp4",
        })
    }
}

fn pow2_ladder(from: i32, to: i32) -> Vec<f64> {
    (from..=to).map(|k| 2f64.powi(-k)).collect()
}

/// Built-in configuration of an experiment at fractional order `s`.
pub fn preset(which: Preset, s: f64) -> Result<RunConfig> {
    let cfg = match which {
        Preset::Exp1 => {
            let sol = ExplicitSolution::new(s, 1.0, 0.5)?;
            RunConfig {
                reference: Reference::Analytic(sol),
                ladder: pow2_ladder(3, 6),
                snapshots: vec![0.5],
                ..RunConfig::new("exp1", s, 2.0, InitialDatum::Explicit(sol))
            }
        }
        Preset::Exp2 => {
            let sol = ExplicitSolution::new(s, 0.0, 1.0)?;
            RunConfig {
                reference: Reference::Analytic(sol),
                ladder: pow2_ladder(3, 6),
                snapshots: vec![0.5],
                ..RunConfig::new("exp2", s, 2.0, InitialDatum::Explicit(sol))
            }
        }
        Preset::Exp3 => RunConfig {
            cfl_mode: CflMode::Cfl2,
            reference: Reference::FineGrid { h: 2f64.powi(-9) },
            ladder: pow2_ladder(3, 6),
            snapshots: vec![0.5],
            padding: Some(1.0),
            ..RunConfig::new("exp3", s, 4.0, InitialDatum::BumpSum)
        },
        Preset::Exp4 => {
            let base = ExplicitSolution::new(s, 1.0, 0.5)?;
            RunConfig {
                second_datum: Some(InitialDatum::Shifted {
                    base,
                    terms: vec![(1.0, 1.0), (-1.0, 2.0)],
                }),
                ladder: vec![2f64.powi(-5)],
                snapshots: vec![0.25, 0.5, 0.75],
                ..RunConfig::new(
                    "exp4",
                    s,
                    2.0,
                    InitialDatum::Shifted {
                        base,
                        terms: vec![(1.0, 1.0)],
                    },
                )
            }
        }
    };
    cfg.validate()?;
    Ok(cfg)
}

/// Switches an Experiment 2 configuration to CFL2 with the discrete
/// Lipschitz constant `M / h` of the step datum.
pub fn with_discrete_cfl2(mut cfg: RunConfig) -> RunConfig {
    cfg.cfl_mode = CflMode::Cfl2;
    cfg.discrete_lipschitz = true;
    cfg
}

/// Per-step diagnostics of a rung.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepStats {
    /// `max_j |h Σ U^j - h Σ U^0| / h Σ U^0`.
    pub mass_drift: f64,
    /// Steps at which `sup U` increased.
    pub sup_u_increases: usize,
    /// Largest increase of `sup U` between consecutive steps.
    pub max_sup_u_increase: f64,
    pub sup_u_initial: f64,
    pub sup_u_final: f64,
    pub max_boundary_defect: f64,
}

impl StepStats {
    fn start(v0: &VField) -> Self {
        let sup = v0.max_slope().max(0.0);
        Self {
            mass_drift: 0.0,
            sup_u_increases: 0,
            max_sup_u_increase: 0.0,
            sup_u_initial: sup,
            sup_u_final: sup,
            max_boundary_defect: v0.boundary_defect(),
        }
    }

    fn observe(&mut self, v: &VField, mass0: f64) {
        let mass = density::mass(&differentiate(v));
        if mass0 != 0.0 {
            self.mass_drift = self.mass_drift.max((mass - mass0).abs() / mass0.abs());
        }
        let sup = v.max_slope().max(0.0);
        if sup > self.sup_u_final {
            self.sup_u_increases += 1;
            self.max_sup_u_increase = self.max_sup_u_increase.max(sup - self.sup_u_final);
        }
        self.sup_u_final = sup;
        self.max_boundary_defect = self.max_boundary_defect.max(v.boundary_defect());
    }
}

/// Everything computed on one rung of the ladder.
#[derive(Debug, Clone)]
pub struct RungRecord {
    pub h: f64,
    pub grid: GridSpec,
    /// Number of stored weights `K`.
    pub table_len: usize,
    pub am: AmReport,
    pub problem: ProblemSpec,
    pub time: TimeSpec,
    pub trajectory: Trajectory,
    pub stats: StepStats,
    pub errors: Option<ErrorReport>,
}

/// A rung that was aborted or whose window proved too narrow.
#[derive(Debug, Clone, PartialEq)]
pub struct RungFailure {
    pub h: f64,
    pub message: String,
}

/// `U_1 > U_2` at some cell and time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CrossingWitness {
    pub time: f64,
    pub step: usize,
    /// Right end of the cell.
    pub x: f64,
    pub u1: f64,
    pub u2: f64,
}

impl CrossingWitness {
    pub fn margin(&self) -> f64 {
        self.u1 - self.u2
    }
}

/// Relative margin (against the initial `sup U`) below which `U_1 > U_2`
/// is attributed to round-off.
pub const CROSSING_RTOL: f64 = 1e-9;

/// Outcome of evolving two data in lockstep.
#[derive(Debug, Clone)]
pub struct PairRecord {
    pub h: f64,
    pub grid: GridSpec,
    pub am: AmReport,
    pub time: TimeSpec,
    /// Node-step pairs with `V_1 > V_2`, initial data included.
    pub v_order_violations: usize,
    /// `U_1 - U_2` must exceed this to count as a crossing.
    pub crossing_tol: f64,
    /// Cells where `U_1 > U_2` at `t = 0`.
    pub initial_u_crossings: usize,
    pub first_crossing: Option<CrossingWitness>,
    pub largest_crossing: Option<CrossingWitness>,
    pub trajectories: [Trajectory; 2],
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub config: RunConfig,
    pub window: (f64, f64),
    pub rungs: Vec<RungRecord>,
    pub failures: Vec<RungFailure>,
    pub table: ConvergenceTable,
    pub reference_rung: Option<RungRecord>,
    pub pairs: Vec<PairRecord>,
}

impl RunOutcome {
    /// No aborted rung and no ordering violation.
    pub fn is_success(&self) -> bool {
        self.failures.is_empty() && self.pairs.iter().all(|p| p.v_order_violations == 0)
    }

    pub fn rung(&self, h: f64) -> Option<&RungRecord> {
        self.rungs.iter().find(|r| r.h == h)
    }
}

/// Smallest `q` such that every time is a multiple of `T / q`.
fn time_divisor(times: &[f64], horizon: f64) -> Result<usize> {
    let mut d = 1usize;
    for &t in times {
        if t == 0.0 || t == horizon {
            continue;
        }
        let r = t / horizon;
        let q = (1..=4096usize)
            .find(|&q| {
                let x = r * q as f64;
                (x - x.round()).abs() < 1e-9
            })
            .ok_or_else(|| Error::Parameter(format!("snapshot time {t} is not a simple fraction of T = {horizon}")))?;
        d = lcm(d, q);
    }
    Ok(d)
}

fn lcm(a: usize, b: usize) -> usize {
    fn gcd(a: usize, b: usize) -> usize {
        if b == 0 {
            a
        } else {
            gcd(b, a % b)
        }
    }
    a / gcd(a, b) * b
}

/// CFL step fitted to the horizon, with a step count divisible by `divisor`.
fn fit_time(p: &ProblemSpec, h: f64, cs: f64, horizon: f64, divisor: usize) -> Result<TimeSpec> {
    let mut time = TimeSpec::from_cfl(p, h, cs, horizon)?;
    if horizon > 0.0 && time.steps % divisor != 0 {
        time.steps = (time.steps / divisor + 1) * divisor;
        time.tau = horizon / time.steps as f64;
    }
    Ok(time)
}

struct Setup {
    grid: GridSpec,
    table: WeightTable,
    am: AmReport,
    problem: ProblemSpec,
    time: TimeSpec,
}

/// Samples a datum on the window. The extensions take the edge values,
/// which must agree with the datum limits to within `tol`.
fn sample_datum(window: GridSpec, d: &InitialDatum, tol: f64) -> Result<VField> {
    let nodes: Vec<f64> = window.nodes().collect();
    let values = d.sample(&nodes)?;
    let left = d.left_value();
    let right = left + d.mass()?;
    let (first, last) = (values[0], values[values.len() - 1]);
    if (first - left).abs() > tol || (last - right).abs() > tol {
        return Err(Error::Parameter(format!(
            "window [{}, {}] does not contain the datum support",
            nodes[0],
            nodes[nodes.len() - 1]
        )));
    }
    VField::new(window.with_extensions(first, last)?, values)
}

fn setup(cfg: &RunConfig, h: f64, fields: &[VField]) -> Result<Setup> {
    let grid = *fields[0].grid();
    let width = grid.len();
    let k = match build_weights(cfg.s, h, cfg.eps_tail) {
        Ok(t) => t.len().min(width),
        Err(_) => width,
    };
    let table = WeightTable::with_len(cfg.s, h, k.max(1))?;
    let am = check_am(&table)?;
    let mass_bound = fields.iter().map(VField::sup_norm).fold(0.0, f64::max);
    let mut problem = ProblemSpec::new(cfg.s, cfg.m, mass_bound, cfg.cfl_mode)?.with_safety(cfg.safety);
    if cfg.cfl_mode == CflMode::Cfl2 {
        let l = if cfg.discrete_lipschitz {
            fields.iter().map(VField::max_slope).fold(0.0, f64::max)
        } else {
            let mut l = 0.0f64;
            for d in std::iter::once(&cfg.datum).chain(cfg.second_datum.as_ref()) {
                l = l.max(d.lipschitz().ok_or_else(|| {
                    Error::Parameter("CFL2 needs a Lipschitz datum; set discrete_lipschitz".into())
                })?);
            }
            l
        };
        problem = problem.with_lipschitz(l);
    }
    let divisor = time_divisor(&cfg.recorded_times(), cfg.horizon)?;
    let time = fit_time(&problem, h, am.cs, cfg.horizon, divisor)?;
    Ok(Setup {
        grid,
        table,
        am,
        problem,
        time,
    })
}

/// Linear interpolation of a field, extended by its constant values.
fn linear_sample(v: &VField, x: f64) -> f64 {
    let g = v.grid();
    let mut r = (x - g.origin) / g.h;
    if (r - r.round()).abs() < 1e-9 {
        r = r.round();
    }
    let below = r.floor();
    let i = below as i64;
    let theta = r - below;
    if theta == 0.0 {
        v.value(i)
    } else {
        (1.0 - theta) * v.value(i) + theta * v.value(i + 1)
    }
}

enum RefData<'a> {
    Analytic(ExplicitSolution, f64),
    Fine(&'a VField),
}

impl RefData<'_> {
    fn v(&self, x: f64) -> Result<f64> {
        match self {
            Self::Analytic(sol, t) => sol.v(x, *t),
            Self::Fine(f) => Ok(linear_sample(f, x)),
        }
    }

    fn u(&self, x: f64) -> Result<f64> {
        match self {
            Self::Analytic(sol, t) => sol.u(x, *t),
            Self::Fine(f) => {
                let g = f.grid();
                let i = ((x - g.origin) / g.h + 1e-9).floor() as i64 + 1;
                Ok((f.value(i) - f.value(i - 1)) / g.h)
            }
        }
    }
}

fn measure(v: &VField, reference: &RefData, tau: f64) -> Result<ErrorReport> {
    let g = *v.grid();
    let h = g.h;
    let v_ref: Vec<f64> = (g.i_min - 1..=g.i_max + 1).map(|i| reference.v(g.x(i))).collect::<Result<_>>()?;
    let u_ref: Vec<f64> = g.nodes().map(|x| reference.u(x)).collect::<Result<_>>()?;
    let u = differentiate(v);
    let cells: Vec<f64> = v_ref.windows(2).map(|w| (w[1] - w[0]) / h).collect();
    let n = g.len();
    Ok(ErrorReport {
        h,
        tau,
        e_v: error_ev(v, &v_ref[1..=n])?,
        e_u: error_eu(&u, &u_ref)?,
        e_u_weak: error_eu_weak(&u, &u_ref)?,
        d0_bound: d0_upper_bound(u.values(), &cells, h)?.bound(),
        runtime_seconds: 0.0,
    })
}

fn run_rung(cfg: &RunConfig, h: f64, reference: Option<&RefData>) -> Result<RungRecord> {
    let started = Instant::now();
    let (lo, hi) = cfg.window();
    let v0 = sample_datum(GridSpec::covering(h, lo, hi, 0.0, 0.0)?, &cfg.datum, cfg.boundary_tol)?;
    let su = setup(cfg, h, std::slice::from_ref(&v0))?;
    let mass0 = density::mass(&differentiate(&v0));
    let mut stats = StepStats::start(&v0);
    let trajectory = evolve_with(&su.table, &su.problem, v0, &su.time, &cfg.recorded_times(), |v| {
        stats.observe(v, mass0)
    })?;
    let errors = match reference {
        None => None,
        Some(r) => {
            let snap = trajectory
                .at(cfg.error_time)
                .ok_or_else(|| Error::Parameter(format!("no snapshot at error time {}", cfg.error_time)))?;
            let mut e = measure(&snap.field, r, su.time.tau)?;
            e.runtime_seconds = started.elapsed().as_secs_f64();
            Some(e)
        }
    };
    Ok(RungRecord {
        h,
        grid: su.grid,
        table_len: su.table.len(),
        am: su.am,
        problem: su.problem,
        time: su.time,
        trajectory,
        stats,
        errors,
    })
}

fn run_pair(cfg: &RunConfig, second: &InitialDatum, h: f64) -> Result<PairRecord> {
    let (lo, hi) = cfg.window();
    let base = GridSpec::covering(h, lo, hi, 0.0, 0.0)?;
    let v1 = sample_datum(base, &cfg.datum, cfg.boundary_tol)?;
    let v2 = sample_datum(base, second, cfg.boundary_tol)?;
    let su = setup(cfg, h, &[v1.clone(), v2.clone()])?;
    su.problem.validate()?;
    let wanted = snapshot_steps(&su.time, &cfg.recorded_times())?;

    let mut rec = PairRecord {
        h,
        grid: su.grid,
        am: su.am,
        time: su.time,
        v_order_violations: 0,
        crossing_tol: CROSSING_RTOL * v1.max_slope().max(v2.max_slope()),
        initial_u_crossings: 0,
        first_crossing: None,
        largest_crossing: None,
        trajectories: [
            Trajectory {
                time: su.time,
                snapshots: vec![Snapshot::capture(&v1, 0.0)],
            },
            Trajectory {
                time: su.time,
                snapshots: vec![Snapshot::capture(&v2, 0.0)],
            },
        ],
    };
    let compare = |a: &VField, b: &VField, j: usize, rec: &mut PairRecord| {
        let g = a.grid();
        rec.v_order_violations += (g.i_min - 1..=g.i_max + 1).filter(|&i| a.value(i) > b.value(i)).count();
        let (ua, ub) = (differentiate(a), differentiate(b));
        let t = su.time.time(j);
        for ((x, p), q) in ua.cells().zip(ub.values()) {
            if p - q > rec.crossing_tol {
                if j == 0 {
                    rec.initial_u_crossings += 1;
                    continue;
                }
                let w = CrossingWitness {
                    time: t,
                    step: j,
                    x,
                    u1: p,
                    u2: *q,
                };
                if rec.first_crossing.is_none() {
                    rec.first_crossing = Some(w);
                }
                if rec.largest_crossing.is_none_or(|b| w.margin() > b.margin()) {
                    rec.largest_crossing = Some(w);
                }
            }
        }
    };
    compare(&v1, &v2, 0, &mut rec);

    let mut s1 = Stepper::new(&su.table, cfg.m, su.time.tau, v1);
    let mut s2 = Stepper::new(&su.table, cfg.m, su.time.tau, v2);
    let mut next = wanted.iter().copied().filter(|&j| j > 0).peekable();
    for j in 1..=su.time.steps {
        s1.advance()?;
        s2.advance()?;
        compare(s1.current(), s2.current(), j, &mut rec);
        if next.peek() == Some(&j) {
            let t = su.time.time(j);
            rec.trajectories[0].snapshots.push(Snapshot::capture(s1.current(), t));
            rec.trajectories[1].snapshots.push(Snapshot::capture(s2.current(), t));
            next.next();
        }
    }
    Ok(rec)
}

/// Runs every rung of the ladder and writes the output files when an output
/// directory is configured. Aborted rungs are recorded, not propagated.
pub fn run(cfg: &RunConfig) -> Result<RunOutcome> {
    cfg.validate()?;
    let mut outcome = RunOutcome {
        config: cfg.clone(),
        window: cfg.window(),
        rungs: Vec::new(),
        failures: Vec::new(),
        table: ConvergenceTable::new(),
        reference_rung: None,
        pairs: Vec::new(),
    };

    if let Some(second) = &cfg.second_datum {
        for &h in &cfg.ladder {
            match run_pair(cfg, second, h) {
                Ok(p) => outcome.pairs.push(p),
                Err(e) => outcome.failures.push(RungFailure { h, message: e.to_string() }),
            }
        }
    } else {
        if let Reference::FineGrid { h } = cfg.reference {
            outcome.reference_rung = Some(run_rung(cfg, h, None)?);
        }
        let fine_field = outcome
            .reference_rung
            .as_ref()
            .map(|r| {
                r.trajectory
                    .at(cfg.error_time)
                    .map(|s| s.field.clone())
                    .ok_or_else(|| Error::Parameter("reference run lacks the error time".into()))
            })
            .transpose()?;
        let reference = match cfg.reference {
            Reference::None => None,
            Reference::Analytic(sol) => Some(RefData::Analytic(sol, cfg.error_time)),
            Reference::FineGrid { .. } => fine_field.as_ref().map(RefData::Fine),
        };
        for &h in &cfg.ladder {
            match run_rung(cfg, h, reference.as_ref()) {
                Ok(r) => {
                    if r.stats.max_boundary_defect > cfg.boundary_tol {
                        outcome.failures.push(RungFailure {
                            h,
                            message: format!(
                                "window too narrow: edge nodes moved by {:e} (tolerance {:e})",
                                r.stats.max_boundary_defect, cfg.boundary_tol
                            ),
                        });
                    }
                    if let Some(e) = r.errors {
                        outcome.table.push(e)?;
                    }
                    outcome.rungs.push(r);
                }
                Err(e) => outcome.failures.push(RungFailure { h, message: e.to_string() }),
            }
        }
    }

    if let Some(dir) = &cfg.out_dir {
        write_outputs(&outcome, dir)?;
    }
    Ok(outcome)
}

fn write_snapshots(dir: &Path, trajectory: &Trajectory) -> Result<()> {
    fs::create_dir_all(dir)?;
    for snap in &trajectory.snapshots {
        let f = fs::File::create(dir.join(format!("snapshot_t{}.csv", snap.meta.time)))?;
        density::write_snapshot_csv(BufWriter::new(f), &snap.field)?;
    }
    Ok(())
}

fn manifest_rung(out: &mut String, key: &str, h: f64, grid: &GridSpec, am: &AmReport, time: &TimeSpec) {
    let _ = writeln!(out, "{key}.h = {h}");
    let _ = writeln!(out, "{key}.nodes = {}", grid.len());
    let _ = writeln!(out, "{key}.window = {}, {}", grid.x(grid.i_min), grid.x(grid.i_max));
    let _ = writeln!(out, "{key}.c1 = {}", am.c1);
    let _ = writeln!(out, "{key}.c2 = {}", am.c2);
    let _ = writeln!(out, "{key}.c3 = {}", am.c3);
    let _ = writeln!(out, "{key}.cs = {}", am.cs);
    let _ = writeln!(out, "{key}.tau = {}", time.tau);
    let _ = writeln!(out, "{key}.steps = {}", time.steps);
}

/// Manifest text: the resolved configuration followed by per-rung constants.
pub fn manifest(outcome: &RunOutcome) -> String {
    let mut out = outcome.config.to_config_string();
    let _ = writeln!(out, "# resolved");
    let _ = writeln!(out, "window = {}, {}", outcome.window.0, outcome.window.1);
    if let Some(r) = &outcome.reference_rung {
        manifest_rung(&mut out, "reference", r.h, &r.grid, &r.am, &r.time);
        let _ = writeln!(out, "reference.weights = {}", r.table_len);
    }
    for (n, r) in outcome.rungs.iter().enumerate() {
        let key = format!("rung{n}");
        manifest_rung(&mut out, &key, r.h, &r.grid, &r.am, &r.time);
        let _ = writeln!(out, "{key}.weights = {}", r.table_len);
        if let Some(l) = r.problem.lipschitz {
            let _ = writeln!(out, "{key}.lipschitz = {l}");
        }
        let _ = writeln!(out, "{key}.mass_drift = {:e}", r.stats.mass_drift);
        let _ = writeln!(out, "{key}.sup_u_increases = {}", r.stats.sup_u_increases);
        let _ = writeln!(out, "{key}.boundary_defect = {:e}", r.stats.max_boundary_defect);
    }
    for (n, p) in outcome.pairs.iter().enumerate() {
        let key = format!("pair{n}");
        manifest_rung(&mut out, &key, p.h, &p.grid, &p.am, &p.time);
        let _ = writeln!(out, "{key}.v_order_violations = {}", p.v_order_violations);
        let _ = writeln!(out, "{key}.initial_u_crossings = {}", p.initial_u_crossings);
        for (label, w) in [("first_crossing", p.first_crossing), ("largest_crossing", p.largest_crossing)] {
            match w {
                Some(w) => {
                    let _ = writeln!(
                        out,
                        "{key}.{label} = t {} x {} U1 {} U2 {}",
                        w.time, w.x, w.u1, w.u2
                    );
                }
                None => {
                    let _ = writeln!(out, "{key}.{label} = none");
                }
            }
        }
    }
    for f in &outcome.failures {
        let _ = writeln!(out, "failure.h{} = {}", f.h, f.message);
    }
    out
}

/// Writes `manifest.txt`, `errors.csv` and per-rung snapshot files.
pub fn write_outputs(outcome: &RunOutcome, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)?;
    fs::write(dir.join("manifest.txt"), manifest(outcome))?;
    if !outcome.table.rows().is_empty() {
        let f = fs::File::create(dir.join("errors.csv"))?;
        outcome.table.write_csv(BufWriter::new(f))?;
    }
    if let Some(r) = &outcome.reference_rung {
        write_snapshots(&dir.join("reference"), &r.trajectory)?;
    }
    for (n, r) in outcome.rungs.iter().enumerate() {
        write_snapshots(&dir.join(format!("rung{n}")), &r.trajectory)?;
    }
    for (n, p) in outcome.pairs.iter().enumerate() {
        write_snapshots(&dir.join(format!("pair{n}")).join("u1"), &p.trajectories[0])?;
        write_snapshots(&dir.join(format!("pair{n}")).join("u2"), &p.trajectories[1])?;
    }
    Ok(())
}

/// Scale-free weights `ω_k h^{2s}` with the running sum scaled by `h^{-2s}`,
/// as `(k, w, scaled_cumsum)` rows.
pub fn weight_rows(s: f64, h: f64, k: usize) -> Result<Vec<(usize, f64, f64)>> {
    let table = WeightTable::with_len(s, h, k)?;
    let mut acc = 0.0;
    Ok(table
        .weights()
        .iter()
        .enumerate()
        .map(|(j, &w)| {
            acc += w;
            (j + 1, w, acc * table.scale())
        })
        .collect())
}

/// CFL step for a bare problem, without horizon fitting.
pub fn cfl_step(p: &ProblemSpec, h: f64) -> Result<f64> {
    let table = WeightTable::with_len(p.s, h, 1)?;
    let am = check_am(&table)?;
    Ok(cfl_bound(p, h, am.cs)? * p.safety)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn divisors() {
        assert_eq!(time_divisor(&[0.5, 1.0], 1.0).unwrap(), 2);
        assert_eq!(time_divisor(&[0.25, 0.5, 0.75], 1.0).unwrap(), 4);
        assert_eq!(time_divisor(&[1.0 / 3.0, 0.5], 1.0).unwrap(), 6);
        assert_eq!(time_divisor(&[0.0], 1.0).unwrap(), 1);
        assert!(time_divisor(&[std::f64::consts::FRAC_1_PI], 1.0).is_err());
    }

    #[test]
    fn presets_validate_and_round_trip() {
        for p in [Preset::Exp1, Preset::Exp2, Preset::Exp3, Preset::Exp4] {
            let cfg = preset(p, 0.5).unwrap();
            assert_eq!(p.to_string().parse::<Preset>().unwrap(), p);
            let again = RunConfig::parse(&cfg.to_config_string()).unwrap();
            assert_eq!(again, cfg, "{p}");
        }
    }

    #[test]
    fn default_window_padding() {
        let cfg = preset(Preset::Exp1, 0.5).unwrap();
        let (lo, hi) = cfg.window();
        assert!((lo + 2.5).abs() < 1e-12 && (hi - 2.5).abs() < 1e-12);
    }

    #[test]
    fn small_exp1_run_measures_errors() {
        let mut cfg = preset(Preset::Exp1, 0.5).unwrap();
        cfg.ladder = vec![0.25, 0.125];
        cfg.horizon = 0.25;
        cfg.error_time = 0.25;
        cfg.snapshots = vec![0.125];
        let out = run(&cfg).unwrap();
        assert!(out.is_success(), "{:?}", out.failures);
        assert_eq!(out.table.rows().len(), 2);
        let rows = out.table.rows();
        assert!(rows[1].e_v < rows[0].e_v);
        for r in &out.rungs {
            assert!(r.trajectory.at(0.125).is_some());
            assert!(r.stats.mass_drift < 1e-12);
            assert_eq!(r.stats.sup_u_increases, 0);
        }
    }

    #[test]
    fn linear_sampling() {
        let g = GridSpec::new(0.5, -2, 2, 0.0, 0.0, 4.0).unwrap();
        let v = VField::new(g, vec![0.0, 1.0, 2.0, 3.0, 4.0]).unwrap();
        assert_eq!(linear_sample(&v, 0.25), 2.5);
        assert_eq!(linear_sample(&v, 0.5), 3.0);
        assert_eq!(linear_sample(&v, -9.0), 0.0);
        assert_eq!(linear_sample(&v, 9.0), 4.0);
    }

    #[test]
    fn weight_rows_sum() {
        let rows = weight_rows(0.5, 1.0, 3).unwrap();
        assert_eq!(rows.len(), 3);
        assert!((rows[0].1 - 4.0 / (3.0 * std::f64::consts::PI)).abs() < 1e-14);
        assert!((rows[2].2 - rows.iter().map(|r| r.1).sum::<f64>()).abs() < 1e-15);
    }
}
