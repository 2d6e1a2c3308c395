//! Regularly varying functions, moduli of continuity and the `Γ_ω` map.

use std::collections::VecDeque;

use crate::error::{Error, Result};
use crate::hamiltonian::{AngleFn, AngleProfile};

/// A positive nondecreasing function on a ray, evaluable anywhere on `(0, ∞)`.
#[derive(Debug, Clone, PartialEq)]
pub enum RegVarFn {
    /// `c · r^ρ`.
    Power { rho: f64, c: f64 },
    /// `c · r^ρ · log(r)^k1 · loglog(r)^k2` for `r ≥ e^e`, continued below as
    /// `f(e^e) · (r / e^e)^ρ`.
    PowerLog { rho: f64, k1: f64, k2: f64, c: f64 },
    /// Samples interpolated linearly in log-log coordinates and extended by the
    /// end slopes.
    Table { x: Vec<f64>, y: Vec<f64> },
    /// Pointwise inverse of a strictly increasing function.
    Inverse(Box<RegVarFn>),
    /// `outer ∘ inner`.
    Compose { outer: Box<RegVarFn>, inner: Box<RegVarFn> },
}

/// `e^e`, below which `log log r` is replaced by a pure power.
fn r0() -> f64 {
    std::f64::consts::E.exp()
}

/// Log-log interpolation with linear extrapolation of the end slopes.
fn loglog_interp(x: &[f64], y: &[f64], t: f64, lo_slope: f64, hi_slope: f64) -> f64 {
    let n = x.len();
    let lt = t.ln();
    if t <= x[0] {
        return y[0].ln() + lo_slope * (lt - x[0].ln());
    }
    if t >= x[n - 1] {
        return y[n - 1].ln() + hi_slope * (lt - x[n - 1].ln());
    }
    let k = x.partition_point(|s| *s <= t) - 1;
    let (x0, x1) = (x[k].ln(), x[k + 1].ln());
    let (y0, y1) = (y[k].ln(), y[k + 1].ln());
    y0 + (y1 - y0) * (lt - x0) / (x1 - x0)
}

fn end_slopes(x: &[f64], y: &[f64]) -> (f64, f64) {
    let n = x.len();
    let s = |i: usize| (y[i + 1].ln() - y[i].ln()) / (x[i + 1].ln() - x[i].ln());
    (s(0), s(n - 2))
}

fn check_table(x: &[f64], y: &[f64], what: &str) -> Result<()> {
    if x.len() != y.len() || x.len() < 2 {
        return Err(Error::input(format!("{what}: need matching x/y lists of length >= 2")));
    }
    if x.iter().chain(y).any(|v| !(*v > 0.0) || !v.is_finite()) {
        return Err(Error::input(format!("{what}: samples must be positive and finite")));
    }
    if x.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::input(format!("{what}: abscissae must be strictly increasing")));
    }
    if y.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::input(format!("{what}: values must be nondecreasing")));
    }
    Ok(())
}

impl RegVarFn {
    pub fn power(rho: f64, c: f64) -> Result<Self> {
        let f = RegVarFn::Power { rho, c };
        f.validate()?;
        Ok(f)
    }

    pub fn power_log(rho: f64, k1: f64, k2: f64, c: f64) -> Result<Self> {
        let f = RegVarFn::PowerLog { rho, k1, k2, c };
        f.validate()?;
        Ok(f)
    }

    pub fn table(x: Vec<f64>, y: Vec<f64>) -> Result<Self> {
        check_table(&x, &y, "regvar table")?;
        Ok(RegVarFn::Table { x, y })
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            RegVarFn::Power { rho, c } => {
                if !(*c > 0.0) || !rho.is_finite() || *rho < 0.0 {
                    return Err(Error::input(format!("power function needs c > 0, rho >= 0 (c={c}, rho={rho})")));
                }
            }
            RegVarFn::PowerLog { rho, k1, k2, c } => {
                if !(*c > 0.0) || !rho.is_finite() || !k1.is_finite() || !k2.is_finite() {
                    return Err(Error::input("power-log function needs c > 0 and finite exponents"));
                }
                // d log f / d log r = ρ + k1/log r + k2/(log r loglog r) is smallest at e^e
                let e = std::f64::consts::E;
                if *rho + k1.min(0.0) / e + k2.min(0.0) / e < 0.0 {
                    return Err(Error::input("power-log function is not nondecreasing beyond e^e"));
                }
            }
            RegVarFn::Table { x, y } => check_table(x, y, "regvar table")?,
            RegVarFn::Inverse(f) => {
                f.validate()?;
                if !(f.index() > 0.0) {
                    return Err(Error::input("only functions of positive index can be inverted"));
                }
            }
            RegVarFn::Compose { outer, inner } => {
                outer.validate()?;
                inner.validate()?;
            }
        }
        Ok(())
    }

    /// The index `ρ` of regular variation.
    pub fn index(&self) -> f64 {
        match self {
            RegVarFn::Power { rho, .. } | RegVarFn::PowerLog { rho, .. } => *rho,
            RegVarFn::Table { x, y } => {
                // least-squares slope over the upper half of the samples
                let k0 = x.len() / 2;
                let k0 = k0.min(x.len() - 2);
                let pts: Vec<(f64, f64)> = (k0..x.len()).map(|k| (x[k].ln(), y[k].ln())).collect();
                ls_slope(&pts)
            }
            RegVarFn::Inverse(f) => 1.0 / f.index(),
            RegVarFn::Compose { outer, inner } => outer.index() * inner.index(),
        }
    }

    pub fn ln_eval(&self, r: f64) -> f64 {
        match self {
            RegVarFn::Power { rho, c } => c.ln() + rho * r.ln(),
            RegVarFn::PowerLog { rho, k1, k2, c } => {
                let r0 = r0();
                let lr = r.max(r0).ln();
                let base = c.ln() + rho * lr + k1 * lr.ln() + k2 * lr.ln().ln();
                if r >= r0 {
                    base
                } else {
                    base + rho * (r.ln() - r0.ln())
                }
            }
            RegVarFn::Table { x, y } => {
                let (lo, hi) = end_slopes(x, y);
                loglog_interp(x, y, r, lo, hi)
            }
            RegVarFn::Inverse(f) => f.ln_inverse_value(r),
            RegVarFn::Compose { outer, inner } => outer.ln_eval(inner.eval(r)),
        }
    }

    pub fn eval(&self, r: f64) -> f64 {
        self.ln_eval(r).exp()
    }

    /// `log f⁻¹(y)` by bisection on `log r` (f strictly increasing).
    pub fn ln_inverse_value(&self, y: f64) -> f64 {
        if let RegVarFn::Power { rho, c } = self {
            return (y.ln() - c.ln()) / rho;
        }
        if let RegVarFn::Inverse(f) = self {
            return f.ln_eval(y);
        }
        if let RegVarFn::Compose { outer, inner } = self {
            return inner.ln_inverse_value(outer.inverse_value(y));
        }
        let target = y.ln();
        let (mut lo, mut hi) = (-1.0f64, 1.0f64);
        while self.ln_eval(lo.exp()) > target && lo > -745.0 {
            lo *= 2.0;
        }
        while self.ln_eval(hi.exp()) < target && hi < 745.0 {
            hi *= 2.0;
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if self.ln_eval(mid.exp()) < target {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo < 1e-14 * (1.0 + mid.abs()) {
                break;
            }
        }
        0.5 * (lo + hi)
    }

    pub fn inverse_value(&self, y: f64) -> f64 {
        self.ln_inverse_value(y).exp()
    }

    /// Parse `c*r^rho*log(r)^k1*loglog(r)^k2`; every factor is optional.
    pub fn parse(s: &str) -> Result<Self> {
        let (mut c, mut rho, mut k1, mut k2) = (1.0, 0.0, 0.0, 0.0);
        let bad = |f: &str| Error::input(format!("cannot parse factor '{f}' in '{s}'"));
        let expo = |rest: &str, f: &str| -> Result<f64> {
            if rest.is_empty() {
                return Ok(1.0);
            }
            let e = rest.strip_prefix('^').ok_or_else(|| bad(f))?;
            let e = e.trim().trim_start_matches('(').trim_end_matches(')');
            e.trim().parse::<f64>().map_err(|_| bad(f))
        };
        for raw in s.split('*') {
            let f = raw.trim();
            if f.is_empty() {
                return Err(bad(f));
            }
            if let Some(rest) = f.strip_prefix("loglog(r)") {
                k2 += expo(rest.trim(), f)?;
            } else if let Some(rest) = f.strip_prefix("log(r)") {
                k1 += expo(rest.trim(), f)?;
            } else if let Some(rest) = f.strip_prefix('r') {
                rho += expo(rest.trim(), f)?;
            } else {
                c *= f.parse::<f64>().map_err(|_| bad(f))?;
            }
        }
        if k1 == 0.0 && k2 == 0.0 {
            RegVarFn::power(rho, c)
        } else {
            RegVarFn::power_log(rho, k1, k2, c)
        }
    }
}

fn ls_slope(pts: &[(f64, f64)]) -> f64 {
    crate::fit::line_fit(pts).map_or(f64::NAN, |f| f.slope)
}

/// An asymptotic inverse and the point beyond which `f(g(x))/x ∈ [0.9, 1.1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct AsymptoticInverse {
    pub g: RegVarFn,
    pub threshold: f64,
}

/// Symbolic first-order inverse for power forms, exact inverse for tables.
pub fn asymptotic_inverse(f: &RegVarFn) -> Result<AsymptoticInverse> {
    f.validate()?;
    let rho = f.index();
    if !(rho > 0.0) {
        return Err(Error::input(format!("asymptotic inverse needs positive index, got {rho}")));
    }
    let g = match f {
        RegVarFn::Power { rho, c } => RegVarFn::Power { rho: 1.0 / rho, c: c.powf(-1.0 / rho) },
        // r = (x/c)^{1/ρ} (log r)^{−k1/ρ} (loglog r)^{−k2/ρ} with log r ≈ log(x)/ρ
        RegVarFn::PowerLog { rho, k1, k2, c } => RegVarFn::PowerLog {
            rho: 1.0 / rho,
            k1: -k1 / rho,
            k2: -k2 / rho,
            c: c.powf(-1.0 / rho) * rho.powf(k1 / rho),
        },
        RegVarFn::Table { x, y } => RegVarFn::Table { x: y.clone(), y: x.clone() },
        RegVarFn::Inverse(inner) => (**inner).clone(),
        RegVarFn::Compose { outer, inner } => RegVarFn::Compose {
            outer: Box::new(asymptotic_inverse(inner)?.g),
            inner: Box::new(asymptotic_inverse(outer)?.g),
        },
    };
    // scan log10 x on a quarter-decade grid up to 1e300 (points where g overflows are skipped)
    let grid: Vec<f64> = (0..=1200).map(|k| 10f64.powf(k as f64 * 0.25)).collect();
    let ok: Vec<bool> = grid
        .iter()
        .map(|x| {
            let gx = g.eval(*x);
            if !(gx > 0.0 && gx.is_finite()) {
                // out of double range; nothing to check here
                return true;
            }
            let q = (f.ln_eval(gx) - x.ln()).exp();
            (0.9..=1.1).contains(&q)
        })
        .collect();
    let first_bad_from_top = ok.iter().rposition(|b| !b);
    let threshold = match first_bad_from_top {
        None => grid[0],
        Some(k) if k + 1 < grid.len() => grid[k + 1],
        Some(_) => return Err(Error::numerical("asymptotic inverse does not settle below 1e300")),
    };
    Ok(AsymptoticInverse { g, threshold })
}

/// `outer ∘ inner`.
pub fn compose(outer: RegVarFn, inner: RegVarFn) -> RegVarFn {
    RegVarFn::Compose { outer: Box::new(outer), inner: Box::new(inner) }
}

/// The exact pointwise inverse (also an asymptotic inverse).
pub fn exact_inverse(f: &RegVarFn) -> Result<RegVarFn> {
    let g = RegVarFn::Inverse(Box::new(f.clone()));
    g.validate()?;
    Ok(g)
}

/// `e^ρ (Π_{j≤n} f(j))^{1/n} / f(n)`, summed in log space.
pub fn geometric_mean_ratio(f: &RegVarFn, n: usize) -> f64 {
    let n = n.max(1);
    let mut sum = 0.0;
    let mut comp = 0.0;
    for j in 1..=n {
        // Neumaier summation
        let v = f.ln_eval(j as f64);
        let t = sum + v;
        comp += if sum.abs() >= v.abs() { (sum - t) + v } else { (v - t) + sum };
        sum = t;
    }
    let mean = (sum + comp) / n as f64;
    (f.index() + mean - f.ln_eval(n as f64)).exp()
}

/// A modulus of continuity: nondecreasing, `ω(0) = 0`, positive on `(0, ∞)`.
#[derive(Debug, Clone, PartialEq)]
pub enum Modulus {
    /// `c δ^α`.
    Power { c: f64, alpha: f64 },
    /// Log-log interpolated samples; below the first sample extended by the
    /// first slope clamped to `(0, 1]` (slope 1 if the first segment is flat),
    /// above the last by the last slope clamped to `[0, 1]`.
    Table { delta: Vec<f64>, omega: Vec<f64> },
    /// The modulus `π = p₋₁·(p₋₁∘g⁻¹∘p₋₁)` whose `Γ` is exactly `g`.
    Growth(RegVarFn),
    /// Analytic upper envelope for the modulus of `t^γ sin(t^{-β})` on `[0, 1]`.
    Chirp { gamma: f64, beta: f64 },
}

impl Modulus {
    pub fn power(c: f64, alpha: f64) -> Result<Self> {
        if !(c > 0.0) || !(alpha > 0.0) || !c.is_finite() || !alpha.is_finite() {
            return Err(Error::DegenerateModulus(format!("power modulus needs c, alpha > 0 (c={c}, alpha={alpha})")));
        }
        Ok(Modulus::Power { c, alpha })
    }

    pub fn table(delta: Vec<f64>, omega: Vec<f64>) -> Result<Self> {
        if omega.iter().any(|w| !(*w > 0.0)) {
            return Err(Error::DegenerateModulus("modulus table must be positive".into()));
        }
        check_table(&delta, &omega, "modulus table")?;
        Ok(Modulus::Table { delta, omega })
    }

    pub fn growth(g: RegVarFn) -> Result<Self> {
        g.validate()?;
        if !(g.index() > 0.0) {
            return Err(Error::DegenerateModulus("growth function must have positive index".into()));
        }
        Ok(Modulus::Growth(g))
    }

    pub fn ln_eval(&self, d: f64) -> f64 {
        if !(d > 0.0) {
            return f64::NEG_INFINITY;
        }
        match self {
            Modulus::Power { c, alpha } => c.ln() + alpha * d.ln(),
            Modulus::Table { delta, omega } => {
                let (lo, hi) = end_slopes(delta, omega);
                let lo = if lo > 0.0 { lo.min(1.0) } else { 1.0 };
                loglog_interp(delta, omega, d, lo, hi.clamp(0.0, 1.0))
            }
            Modulus::Growth(g) => -d.ln() - g.ln_inverse_value(1.0 / d),
            Modulus::Chirp { gamma, beta } => chirp_envelope(*gamma, *beta, d).ln(),
        }
    }

    pub fn eval(&self, d: f64) -> f64 {
        if !(d > 0.0) {
            return 0.0;
        }
        self.ln_eval(d).exp()
    }
}

/// `min_τ max(τ^γ + (τ+δ)^γ, δ(γ max(1, τ^{γ−1}) + β τ^{γ−β−1}))`, capped at 2.
///
/// Pairs with `min(s, t) ≤ τ` are bounded by the amplitude, pairs above `τ`
/// by the derivative bound on `[τ, 1]`.
fn chirp_envelope(gamma: f64, beta: f64, d: f64) -> f64 {
    let amp = |tau: f64| tau.powf(gamma) + (tau + d).powf(gamma);
    let lip = |tau: f64| d * (gamma * tau.powf(gamma - 1.0).max(1.0) + beta * tau.powf(gamma - beta - 1.0));
    let (mut lo, mut hi) = (-745.0f64, 0.0f64);
    if amp(1.0) <= lip(1.0) {
        return amp(1.0).min(lip(1.0)).min(2.0);
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if amp(mid.exp()) < lip(mid.exp()) {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-13 {
            break;
        }
    }
    let t = hi.exp();
    amp(t).max(lip(t)).min(2.0)
}

/// `Γ_ω(r) = 1/x` where `x ω(x) = 1/r`.
pub fn gamma_of(omega: &Modulus, r: f64) -> f64 {
    match omega {
        Modulus::Power { c, alpha } => (c * r).powf(1.0 / (1.0 + alpha)),
        Modulus::Growth(g) => g.eval(r),
        _ => {
            let target = -r.ln();
            let f = |u: f64| u + omega.ln_eval(u.exp()) - target;
            let (mut lo, mut hi) = (-700.0f64, 0.0f64);
            while f(hi) < 0.0 && hi < 700.0 {
                hi += 10.0;
            }
            if f(lo) > 0.0 {
                return lo.exp().recip();
            }
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if f(mid) < 0.0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
                if hi - lo < 1e-13 {
                    break;
                }
            }
            (-0.5 * (lo + hi)).exp()
        }
    }
}

/// `Γ_ω⁻¹(y)`: the `r` with `Γ_ω(r) = y`, i.e. `r = y / ω(1/y)`.
pub fn gamma_inverse(omega: &Modulus, y: f64) -> f64 {
    y / omega.eval(1.0 / y)
}

/// Sliding-window extrema: `out[i] = max(v[i−w..=i+w])` (or min).
fn window_extreme(v: &[f64], w: usize, max: bool) -> Vec<f64> {
    let n = v.len();
    let better = |a: f64, b: f64| if max { a >= b } else { a <= b };
    let mut dq: VecDeque<usize> = VecDeque::new();
    let mut out = vec![0.0; n];
    let mut next = 0;
    for (i, slot) in out.iter_mut().enumerate() {
        let hi = (i + w).min(n - 1);
        while next <= hi {
            while let Some(&b) = dq.back() {
                if better(v[next], v[b]) {
                    dq.pop_back();
                } else {
                    break;
                }
            }
            dq.push_back(next);
            next += 1;
        }
        while let Some(&f) = dq.front() {
            if f + w < i {
                dq.pop_front();
            } else {
                break;
            }
        }
        *slot = v[*dq.front().unwrap()];
    }
    out
}

/// Exact modulus of a piecewise-linear function: some extremal pair has one
/// point at a node, the other at a node or at distance exactly `δ`.
fn pl_modulus(t: &[f64], v: &[f64], d: f64) -> f64 {
    let n = t.len();
    let interp = |x: f64| {
        if x <= t[0] {
            return v[0];
        }
        if x >= t[n - 1] {
            return v[n - 1];
        }
        let k = t.partition_point(|s| *s <= x) - 1;
        v[k] + (v[k + 1] - v[k]) * (x - t[k]) / (t[k + 1] - t[k])
    };
    let mut best: f64 = 0.0;
    let mut maxq: VecDeque<usize> = VecDeque::new();
    let mut minq: VecDeque<usize> = VecDeque::new();
    let (mut lo, mut hi) = (0usize, 0usize);
    for k in 0..n {
        let a = t[k] - d;
        let b = t[k] + d;
        while hi < n && t[hi] <= b {
            while maxq.back().is_some_and(|&j| v[j] <= v[hi]) {
                maxq.pop_back();
            }
            maxq.push_back(hi);
            while minq.back().is_some_and(|&j| v[j] >= v[hi]) {
                minq.pop_back();
            }
            minq.push_back(hi);
            hi += 1;
        }
        while lo < n && t[lo] < a {
            lo += 1;
        }
        while maxq.front().is_some_and(|&j| j < lo) {
            maxq.pop_front();
        }
        while minq.front().is_some_and(|&j| j < lo) {
            minq.pop_front();
        }
        let ends = [interp(a.max(t[0])), interp(b.min(t[n - 1]))];
        let mx = ends.iter().copied().fold(v[*maxq.front().unwrap()], f64::max);
        let mn = ends.iter().copied().fold(v[*minq.front().unwrap()], f64::min);
        best = best.max(mx - v[k]).max(v[k] - mn);
    }
    best
}

/// Lower end of the evaluation grid for chirp-type angles near 0.
pub const CHIRP_GRID_FLOOR: f64 = 1e-4;

fn has_chirp(f: &AngleFn) -> bool {
    match f {
        AngleFn::Chirp { .. } => true,
        AngleFn::Reparam { inner, .. } => has_chirp(inner),
        _ => false,
    }
}

/// Sampled modulus of uniform continuity of the profile's angle on `delta_grid`.
pub fn estimate_modulus(profile: &AngleProfile, delta_grid: &[f64]) -> Result<Modulus> {
    if delta_grid.is_empty() || delta_grid.windows(2).any(|w| !(w[1] > w[0])) || !(delta_grid[0] > 0.0) {
        return Err(Error::input("delta grid must be positive and strictly increasing"));
    }
    let phi = &profile.phi;
    if phi.is_constant() {
        return Err(Error::DegenerateModulus("constant angle has zero modulus".into()));
    }
    if phi.is_discontinuous() {
        return Err(Error::DegenerateModulus("discontinuous angle has no vanishing modulus".into()));
    }
    let (a, b) = profile.domain;
    let table = match phi {
        AngleFn::Table(t) => Some((t.t.clone(), t.value.clone())),
        AngleFn::Polygon(p) => Some((p.table().t.clone(), p.table().value.clone())),
        _ => None,
    };
    let mut omega: Vec<f64> = if let Some((mut t, mut v)) = table {
        // restrict to the domain
        let keep: Vec<usize> = (0..t.len()).filter(|&k| t[k] > a && t[k] < b).collect();
        let mut tt = vec![a];
        let mut vv = vec![phi.eval(a)];
        for k in keep {
            tt.push(t[k]);
            vv.push(v[k]);
        }
        tt.push(b);
        vv.push(phi.eval(b));
        t = tt;
        v = vv;
        delta_grid.iter().map(|d| pl_modulus(&t, &v, *d)).collect()
    } else {
        let lo = if has_chirp(phi) { a.max(CHIRP_GRID_FLOOR.min(0.5 * (a + b))) } else { a };
        let span = b - lo;
        let n = ((1000.0 * span / delta_grid[0]).ceil() as usize).clamp(1 << 16, 1 << 24);
        let h = span / n as f64;
        let v: Vec<f64> = (0..=n).map(|i| phi.eval(lo + i as f64 * h)).collect();
        delta_grid
            .iter()
            .map(|d| {
                let w = ((d / h).floor() as usize).max(1);
                let mx = window_extreme(&v, w, true);
                let mn = window_extreme(&v, w, false);
                v.iter().zip(mx.iter().zip(&mn)).map(|(x, (hi, lo))| (hi - x).max(x - lo)).fold(0.0, f64::max)
            })
            .collect()
    };
    for k in 1..omega.len() {
        omega[k] = omega[k].max(omega[k - 1]);
    }
    if !(omega[0] > 0.0) {
        return Err(Error::DegenerateModulus("estimated modulus vanishes on the grid".into()));
    }
    if omega.len() == 1 {
        // a single sample: extend linearly (Lipschitz-type) on both sides
        let d = delta_grid[0];
        return Modulus::table(vec![d, 2.0 * d], vec![omega[0], omega[0] * 2.0]);
    }
    Modulus::table(delta_grid.to_vec(), omega)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hamiltonian::{DensityFn, Table};

    fn geo(a: f64, b: f64, n: usize) -> Vec<f64> {
        (0..n).map(|k| a * (b / a).powf(k as f64 / (n - 1) as f64)).collect()
    }

    #[test]
    fn gamma_power_closed_form() {
        let w = Modulus::power(2.0, 0.5).unwrap();
        let r = 1e6;
        assert!((gamma_of(&w, r) - (2.0f64).powf(1.0 / 1.5) * r.powf(1.0 / 1.5)).abs() < 1e-6);
        let w = Modulus::power(1.0, 1.0).unwrap();
        assert!((gamma_of(&w, 49.0) - 7.0).abs() < 1e-12);
    }

    #[test]
    fn gamma_table_matches_closed_form() {
        let d = geo(1e-10, 1.0, 40);
        let w = Modulus::table(d.clone(), d.iter().map(|x| x.sqrt()).collect()).unwrap();
        let exact = Modulus::power(1.0, 0.5).unwrap();
        for r in [10.0, 1e3, 1e7] {
            let (a, b) = (gamma_of(&w, r), gamma_of(&exact, r));
            assert!((a - b).abs() < 1e-9 * b, "{a} {b}");
        }
    }

    #[test]
    fn gamma_roundtrip_recovers_omega() {
        let w = Modulus::power(0.7, 0.6).unwrap();
        for d in geo(1e-8, 0.5, 20) {
            let y = 1.0 / d;
            // ω(δ) = (1/δ) / Γ⁻¹(1/δ)
            let rec = y / gamma_inverse_bisect(&w, y);
            assert!((rec - w.eval(d)).abs() < 1e-8 * w.eval(d));
        }
    }

    fn gamma_inverse_bisect(w: &Modulus, y: f64) -> f64 {
        let (mut lo, mut hi) = (-700f64, 700f64);
        for _ in 0..300 {
            let mid = 0.5 * (lo + hi);
            if gamma_of(w, mid.exp()) < y {
                lo = mid
            } else {
                hi = mid
            }
        }
        (0.5 * (lo + hi)).exp()
    }

    #[test]
    fn growth_modulus_gamma_is_g() {
        let g = RegVarFn::power(2.0 / 3.0, 1.0).unwrap();
        let w = Modulus::growth(g.clone()).unwrap();
        // π(x) = x^{1/ρ − 1}
        assert!((w.eval(0.01) - 0.01f64.powf(0.5)).abs() < 1e-12);
        let w2 = Modulus::Table { delta: geo(1e-12, 1.0, 200), omega: geo(1e-12, 1.0, 200).iter().map(|x| x.sqrt()).collect() };
        assert!((gamma_of(&w, 1e5) - g.eval(1e5)).abs() < 1e-9 * g.eval(1e5));
        assert!((gamma_of(&w2, 1e5) - g.eval(1e5)).abs() < 1e-8 * g.eval(1e5));
    }

    #[test]
    fn asymptotic_inverse_examples() {
        let f = RegVarFn::power(2.0, 1.0).unwrap();
        let g = asymptotic_inverse(&f).unwrap().g;
        assert_eq!(g, RegVarFn::Power { rho: 0.5, c: 1.0 });
        let f = RegVarFn::parse("r*log(r)*loglog(r)^2").unwrap();
        let inv = asymptotic_inverse(&f).unwrap();
        assert_eq!(inv.g, RegVarFn::PowerLog { rho: 1.0, k1: -1.0, k2: -2.0, c: 1.0 });
        assert!(inv.threshold > 1e6 && inv.threshold < 1e300);
        let x = geo(1.0, 1e6, 50);
        let f = RegVarFn::table(x.clone(), x.iter().map(|r| r.powf(1.5)).collect()).unwrap();
        let g = asymptotic_inverse(&f).unwrap().g;
        for r in &x {
            assert!((g.eval(f.eval(*r)) / r - 1.0).abs() < 1e-6);
        }
        assert!(asymptotic_inverse(&RegVarFn::power(0.0, 1.0).unwrap()).is_err());
    }

    #[test]
    fn exact_inverse_roundtrip() {
        let f = RegVarFn::parse("2*r^1.5*log(r)^0.5").unwrap();
        let g = exact_inverse(&f).unwrap();
        for x in [1e-3, 1.0, 50.0, 1e9] {
            assert!((f.eval(g.eval(x)) / x - 1.0).abs() < 1e-10);
        }
        assert!((g.index() - 1.0 / 1.5).abs() < 1e-15);
    }

    #[test]
    fn parser() {
        assert_eq!(RegVarFn::parse("r^1.5").unwrap(), RegVarFn::Power { rho: 1.5, c: 1.0 });
        assert_eq!(RegVarFn::parse("3 * r").unwrap(), RegVarFn::Power { rho: 1.0, c: 3.0 });
        assert_eq!(
            RegVarFn::parse("r*log(r)^2*loglog(r)^-1").unwrap(),
            RegVarFn::PowerLog { rho: 1.0, k1: 2.0, k2: -1.0, c: 1.0 }
        );
        assert!(RegVarFn::parse("r+1").is_err());
        assert!(RegVarFn::parse("sin(r)").is_err());
    }

    #[test]
    fn powerlog_continuous_and_monotone() {
        let f = RegVarFn::parse("r*log(r)*loglog(r)^2").unwrap();
        let r0 = r0();
        assert!((f.eval(r0 * (1.0 - 1e-12)) - f.eval(r0)).abs() < 1e-9 * f.eval(r0));
        let g = geo(1e-3, 1e12, 400);
        assert!(g.windows(2).all(|w| f.eval(w[1]) >= f.eval(w[0])));
        assert!(RegVarFn::power_log(0.1, -2.0, 0.0, 1.0).is_err());
    }

    #[test]
    fn geometric_mean_examples() {
        assert_eq!(geometric_mean_ratio(&RegVarFn::power(0.0, 1.0).unwrap(), 100), 1.0);
        let r = geometric_mean_ratio(&RegVarFn::power(1.0, 1.0).unwrap(), 1000);
        // Stirling: e (n!)^{1/n} / n ≈ (2πn)^{1/(2n)}
        let stirling = (2.0 * std::f64::consts::PI * 1000.0).powf(1.0 / 2000.0);
        assert!((r - stirling).abs() < 1e-6, "{r} {stirling}");
    }

    #[test]
    fn estimate_linear_and_pl() {
        let p = AngleProfile::new((0.0, 1.0), AngleFn::Table(Table::new(vec![0.0, 1.0], vec![0.0, 3.0]).unwrap()), DensityFn::Const(1.0)).unwrap();
        let d = vec![0.01, 0.1, 0.5];
        let w = estimate_modulus(&p, &d).unwrap();
        for x in &d {
            assert!((w.eval(*x) - 3.0 * x).abs() < 1e-12);
        }
        let p = AngleProfile::new((0.0, 1.0), AngleFn::HolderPower { c: 3.0, alpha: 1.0 }, DensityFn::Const(1.0)).unwrap();
        let w = estimate_modulus(&p, &d).unwrap();
        for x in &d {
            assert!((w.eval(*x) - 3.0 * x).abs() < 1e-4, "{}", w.eval(*x));
        }
    }

    #[test]
    fn pl_modulus_matches_dense() {
        let t = vec![0.0, 0.3, 0.35, 0.7, 1.0];
        let v = vec![0.0, 0.5, 0.1, 0.9, 0.2];
        let n = 100_000;
        let dense: Vec<f64> = (0..=n)
            .map(|i| {
                let x = i as f64 / n as f64;
                let k = t.partition_point(|s| *s <= x).clamp(1, t.len() - 1) - 1;
                v[k] + (v[k + 1] - v[k]) * (x - t[k]) / (t[k + 1] - t[k])
            })
            .collect();
        for d in [0.01, 0.05, 0.2, 0.6] {
            let w = (d * n as f64).round() as usize;
            let mx = window_extreme(&dense, w, true);
            let mn = window_extreme(&dense, w, false);
            let brute = dense.iter().zip(mx.iter().zip(&mn)).map(|(x, (a, b))| (a - x).max(x - b)).fold(0.0, f64::max);
            assert!((pl_modulus(&t, &v, d) - brute).abs() < 1e-4, "{d}");
        }
    }

    #[test]
    fn chirp_estimate_slope() {
        let p = AngleProfile::new((0.0, 1.0), AngleFn::Chirp { gamma: 1.0, beta: 1.0 }, DensityFn::Const(1.0)).unwrap();
        let d = geo(1e-3, 1e-1, 9);
        let w = estimate_modulus(&p, &d).unwrap();
        let pts: Vec<(f64, f64)> = d.iter().map(|x| (x.ln(), w.eval(*x).ln())).collect();
        let s = ls_slope(&pts);
        assert!((s - 0.5).abs() < 0.05, "{s}");
        // the analytic envelope dominates the estimate
        let env = Modulus::Chirp { gamma: 1.0, beta: 1.0 };
        for x in &d {
            assert!(env.eval(*x) >= w.eval(*x));
        }
    }

    #[test]
    fn chirp_envelope_exponent() {
        let env = Modulus::Chirp { gamma: 1.0, beta: 2.0 };
        let pts: Vec<(f64, f64)> = geo(1e-12, 1e-8, 9).iter().map(|x| (x.ln(), env.ln_eval(*x))).collect();
        assert!((ls_slope(&pts) - 1.0 / 3.0).abs() < 0.01);
    }

    #[test]
    fn degenerate_moduli() {
        let p = AngleProfile::new((0.0, 1.0), AngleFn::Constant(0.3), DensityFn::Const(1.0)).unwrap();
        assert!(matches!(estimate_modulus(&p, &[0.1]), Err(Error::DegenerateModulus(_))));
        assert!(Modulus::power(0.0, 1.0).is_err());
    }

    #[test]
    fn composition() {
        let f = compose(RegVarFn::power(2.0, 3.0).unwrap(), RegVarFn::power(1.0 / 3.0, 1.0).unwrap());
        assert!((f.index() - 2.0 / 3.0).abs() < 1e-15);
        assert!((f.eval(8.0) - 12.0).abs() < 1e-12);
        assert!((f.inverse_value(12.0) - 8.0).abs() < 1e-10);
        let g = asymptotic_inverse(&f).unwrap().g;
        for x in [1e2, 1e5, 1e9] {
            assert!((f.eval(g.eval(x)) / x - 1.0).abs() < 1e-10);
        }
    }
}
