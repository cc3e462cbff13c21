//! Discrete fractional Laplacian built from powers of the discrete Laplacian.
//!
//! The operator is the symmetric quadrature sum
//!
//! ```text
//! (-Δ)_h^s φ(x) = Σ_{k≠0} (φ(x) - φ(x + kh)) ω_k,
//! ω_k = h^{-2s} 2^{2s} Γ(1/2+s) Γ(|k|-s) / (√π |Γ(-s)| Γ(|k|+1+s)).
//! ```
//!
//! Weights are stored scale-free (`ω_k h^{2s}`) for `k = 1..=K`. The tail
//! beyond `K` is known in closed form because the weights telescope:
//! `Γ(k-s)/Γ(k+1+s) = (Γ(k-s)/Γ(k+s) - Γ(k+1-s)/Γ(k+1+s)) / (2s)`, so
//! `Σ_{k>K} ω_k = ω_K (K-s) / (2s)`. Combined with constant extension of the
//! grid function outside its window, the truncated sum is exact.

use statrs::function::gamma::ln_gamma;

use crate::scheme::VField;
use crate::{Error, Result};

/// Default relative tail tolerance for [`build_weights`].
pub const DEFAULT_EPS_TAIL: f64 = 1e-8;

/// Hard cap on the number of stored weights chosen by [`build_weights`].
pub const K_MAX: usize = 1 << 22;

fn check_order(s: f64) -> Result<()> {
    if s > 0.0 && s < 1.0 {
        Ok(())
    } else {
        Err(Error::Parameter(format!("fractional order s = {s} not in (0,1)")))
    }
}

/// `ω_k h^{2s}` evaluated straight from the Gamma formula in log space.
pub fn closed_form_weight(s: f64, k: u64) -> f64 {
    let k = k as f64;
    let ln_abs_gamma_neg_s = ln_gamma(1.0 - s) - s.ln();
    let log_w = 2.0 * s * std::f64::consts::LN_2 + ln_gamma(0.5 + s) + ln_gamma(k - s)
        - 0.5 * std::f64::consts::PI.ln()
        - ln_abs_gamma_neg_s
        - ln_gamma(k + 1.0 + s);
    log_w.exp()
}

/// Ratio `ω_{k+1} / ω_k`.
#[inline]
pub fn weight_ratio(s: f64, k: f64) -> f64 {
    (k - s) / (k + 1.0 + s)
}

/// Truncated weight table with exact tail sums.
#[derive(Debug, Clone)]
pub struct WeightTable {
    s: f64,
    h: f64,
    scale: f64,
    w: Vec<f64>,
    // suffix[d] = Σ_{k>d} w_k, d = 0..=K
    suffix: Vec<f64>,
    sum_all: f64,
    sum_far: f64,
    sum_near_weighted: f64,
}

impl WeightTable {
    /// Builds a table storing exactly `k` weights.
    pub fn with_len(s: f64, h: f64, k: usize) -> Result<Self> {
        check_order(s)?;
        if !(h > 0.0 && h.is_finite()) {
            return Err(Error::Parameter(format!("grid spacing h = {h} must be positive")));
        }
        if k == 0 {
            return Err(Error::Parameter("weight table needs at least one term".into()));
        }
        let mut w = Vec::with_capacity(k);
        w.push(closed_form_weight(s, 1));
        for j in 1..k {
            let prev = w[j - 1];
            w.push(prev * weight_ratio(s, j as f64));
        }
        let two_s = 2.0 * s;
        let mut suffix: Vec<f64> = w
            .iter()
            .enumerate()
            .map(|(j, &wk)| wk * ((j + 1) as f64 + s) / two_s)
            .collect();
        suffix.push(w[k - 1] * (k as f64 - s) / two_s);

        let scale = h.powf(-two_s);

        // |kh| ≤ 1 range; may extend beyond the stored window.
        let mut near = 0.0;
        let mut wk = w[0];
        let mut kk = 1usize;
        while (kk as f64) * h <= 1.0 {
            near += (kk as f64) * h * wk;
            wk *= weight_ratio(s, kk as f64);
            kk += 1;
        }
        // wk is now ω_{kk} with kk the first index with kk·h > 1
        let far_one_sided = wk * (kk as f64 + s) / two_s;

        Ok(Self {
            s,
            h,
            scale,
            sum_all: 2.0 * suffix[0] * scale,
            sum_far: 2.0 * far_one_sided * scale,
            sum_near_weighted: 2.0 * near * scale,
            w,
            suffix,
        })
    }

    pub fn s(&self) -> f64 {
        self.s
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    /// Truncation index `K`.
    pub fn len(&self) -> usize {
        self.w.len()
    }

    pub fn is_empty(&self) -> bool {
        self.w.is_empty()
    }

    /// `h^{-2s}`, the factor turning stored weights into `ω_k`.
    pub fn scale(&self) -> f64 {
        self.scale
    }

    /// Scale-free weights `ω_k h^{2s}` for `k = 1..=K` (index `k - 1`).
    pub fn weights(&self) -> &[f64] {
        &self.w
    }

    /// Scale-free weight for `k ≠ 0`, `|k| ≤ K`.
    pub fn weight(&self, k: i64) -> f64 {
        self.w[k.unsigned_abs() as usize - 1]
    }

    /// `Σ_{k≠0} ω_k` including the tail.
    pub fn sum_all(&self) -> f64 {
        self.sum_all
    }

    /// `Σ_{|kh|>1} ω_k`.
    pub fn sum_far(&self) -> f64 {
        self.sum_far
    }

    /// `Σ_{0<|kh|≤1} |kh| ω_k`.
    pub fn sum_near_weighted(&self) -> f64 {
        self.sum_near_weighted
    }

    /// Two-sided scale-free tail `Σ_{|k|>K} ω_k h^{2s}`.
    pub fn tail(&self) -> f64 {
        2.0 * self.suffix[self.w.len()]
    }

    /// One-sided scale-free sum `Σ_{k>d} ω_k h^{2s}` for `d ≤ K`.
    pub fn tail_beyond(&self, d: usize) -> f64 {
        self.suffix[d]
    }

    /// Discrete fractional Laplacian at offset `p` of `values`, with constant
    /// extension `left`/`right` outside the slice. `active` is a pair `(a, b)`
    /// such that `values[..a]` equal `left` and `values[b+1..]` equal `right`
    /// exactly; `(0, n-1)` is always valid.
    #[inline]
    pub(crate) fn lap_raw(
        &self,
        values: &[f64],
        left: f64,
        right: f64,
        active: (usize, usize),
        p: usize,
    ) -> f64 {
        let k_max = self.w.len();
        let vp = values[p];
        let (a, b) = active;
        let kl = p.saturating_sub(a).min(k_max);
        let kr = b.saturating_sub(p).min(k_max);
        let mut acc = 0.0;
        for (k, wk) in self.w[..kl].iter().enumerate() {
            acc += (vp - values[p - k - 1]) * wk;
        }
        for (k, wk) in self.w[..kr].iter().enumerate() {
            acc += (vp - values[p + k + 1]) * wk;
        }
        acc += (vp - left) * self.suffix[kl] + (vp - right) * self.suffix[kr];
        acc * self.scale
    }

    /// Quadrature sum for a function defined on the whole line. Neighbours
    /// beyond `K` are replaced by `far_field`.
    pub fn apply_to_fn<F: Fn(f64) -> f64>(&self, f: F, far_field: f64, x: f64) -> f64 {
        let fx = f(x);
        let mut acc = 0.0;
        for (k, wk) in self.w.iter().enumerate() {
            let dx = (k + 1) as f64 * self.h;
            acc += (2.0 * fx - f(x - dx) - f(x + dx)) * wk;
        }
        acc += (fx - far_field) * self.tail();
        acc * self.scale
    }
}

/// Range `(a, b)` with `values[..a] == left` and `values[b+1..] == right`.
pub(crate) fn active_range(values: &[f64], left: f64, right: f64) -> (usize, usize) {
    let n = values.len();
    let a = values.iter().position(|&v| v != left).unwrap_or(n);
    let b = values.iter().rposition(|&v| v != right).unwrap_or(0);
    (a.min(n - 1), b)
}

/// Builds a table whose two-sided tail is below `eps_tail · Σ ω_k`.
pub fn build_weights(s: f64, h: f64, eps_tail: f64) -> Result<WeightTable> {
    check_order(s)?;
    if !(eps_tail > 0.0 && eps_tail < 1.0) {
        return Err(Error::Parameter(format!("eps_tail = {eps_tail} not in (0,1)")));
    }
    let total = closed_form_weight(s, 1) * (1.0 + s) / s;
    let target = eps_tail * total;
    let mut wk = closed_form_weight(s, 1);
    let mut k = 1usize;
    loop {
        let tail = wk * (k as f64 - s) / s;
        if tail <= target {
            break;
        }
        if k >= K_MAX {
            return Err(Error::Truncation {
                k_max: K_MAX,
                achieved: tail / total,
                target: eps_tail,
            });
        }
        wk *= weight_ratio(s, k as f64);
        k += 1;
    }
    WeightTable::with_len(s, h, k)
}

/// `(-Δ)_h^s v` at grid index `i`, using the field's constant extensions.
pub fn apply_lap(table: &WeightTable, v: &VField, i: i64) -> Result<f64> {
    let p = v.grid().offset(i)?;
    let g = v.grid();
    let vals = v.values();
    let active = active_range(vals, g.v_left, g.v_right);
    Ok(table.lap_raw(vals, g.v_left, g.v_right, active, p))
}

/// Empirical constants of the stability assumption on the weights.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AmReport {
    /// `Σ ω_k · h^{2s}`
    pub c1: f64,
    /// `Σ_{|kh|>1} ω_k`
    pub c2: f64,
    /// `Σ_{0<|kh|≤1} |kh| ω_k` divided by `h^{1-2s}`, `|log h|` or `1`.
    pub c3: f64,
    pub cs: f64,
}

fn near_branch(s: f64, h: f64) -> f64 {
    if (s - 0.5).abs() < 1e-12 {
        h.ln().abs()
    } else if s > 0.5 {
        h.powf(1.0 - 2.0 * s)
    } else {
        1.0
    }
}

pub fn check_am(table: &WeightTable) -> Result<AmReport> {
    let h = table.h();
    if h >= 1.0 {
        return Err(Error::Parameter(format!("h = {h} must be below 1")));
    }
    let c1 = table.sum_all() * h.powf(2.0 * table.s());
    let c2 = table.sum_far();
    let c3 = table.sum_near_weighted() / near_branch(table.s(), h);
    Ok(AmReport {
        c1,
        c2,
        c3,
        cs: c1.max(c2).max(c3),
    })
}

/// Test profile with a known fractional Laplacian.
pub trait Probe {
    fn value(&self, x: f64) -> f64;
    fn reference(&self, x: f64, s: f64) -> f64;
    /// Mean value of the profile at infinity, used for the truncated tail.
    fn far_field(&self) -> f64;
}

/// `cos(ξ x)`, with `(-Δ)^s cos(ξ·) = |ξ|^{2s} cos(ξ·)`.
#[derive(Debug, Clone, Copy)]
pub struct Cosine {
    pub freq: f64,
}

impl Probe for Cosine {
    fn value(&self, x: f64) -> f64 {
        (self.freq * x).cos()
    }
    fn reference(&self, x: f64, s: f64) -> f64 {
        self.freq.abs().powf(2.0 * s) * (self.freq * x).cos()
    }
    fn far_field(&self) -> f64 {
        0.0
    }
}

#[derive(Debug, Clone, Copy)]
pub struct Constant(pub f64);

impl Probe for Constant {
    fn value(&self, _x: f64) -> f64 {
        self.0
    }
    fn reference(&self, _x: f64, _s: f64) -> f64 {
        0.0
    }
    fn far_field(&self) -> f64 {
        self.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AcRow {
    pub h: f64,
    pub max_error: f64,
}

#[derive(Debug, Clone, Default)]
pub struct AcReport {
    pub rows: Vec<AcRow>,
}

impl AcReport {
    pub fn is_decreasing(&self) -> bool {
        self.rows.windows(2).all(|r| r[1].max_error < r[0].max_error)
    }

    /// Empirical orders between consecutive rows.
    pub fn orders(&self) -> Vec<f64> {
        self.rows
            .windows(2)
            .map(|r| (r[0].max_error / r[1].max_error).ln() / (r[0].h / r[1].h).ln())
            .collect()
    }
}

/// Consistency of the discrete operator on a probe over a family of tables.
pub fn check_ac<P: Probe>(tables: &[WeightTable], probe: &P, points: &[f64]) -> AcReport {
    let rows = tables
        .iter()
        .map(|t| {
            let max_error = points
                .iter()
                .map(|&x| {
                    let approx = t.apply_to_fn(|y| probe.value(y), probe.far_field(), x);
                    (approx - probe.reference(x, t.s())).abs()
                })
                .fold(0.0, f64::max);
            AcRow { h: t.h(), max_error }
        })
        .collect();
    AcReport { rows }
}
