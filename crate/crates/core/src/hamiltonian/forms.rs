//! Evaluable angle and trace-density functions for angle profiles.

use crate::error::{Error, Result};

/// Piecewise-linear interpolant over strictly increasing nodes, extended
/// constantly outside `[t[0], t[n-1]]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub t: Vec<f64>,
    pub value: Vec<f64>,
}

impl Table {
    pub fn new(t: Vec<f64>, value: Vec<f64>) -> Result<Self> {
        if t.len() != value.len() || t.len() < 2 {
            return Err(Error::input("table needs matching t/value lists of length >= 2"));
        }
        if t.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::input("table nodes must be strictly increasing"));
        }
        if t.iter().chain(value.iter()).any(|x| !x.is_finite()) {
            return Err(Error::input("table entries must be finite"));
        }
        Ok(Table { t, value })
    }

    /// Index `k` with `t[k] <= x < t[k+1]`, clamped to a valid segment.
    fn segment(&self, x: f64) -> usize {
        let n = self.t.len();
        match self.t.partition_point(|s| *s <= x) {
            0 => 0,
            k if k >= n => n - 2,
            k => k - 1,
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        let n = self.t.len();
        if x <= self.t[0] {
            return self.value[0];
        }
        if x >= self.t[n - 1] {
            return self.value[n - 1];
        }
        let k = self.segment(x);
        let (t0, t1) = (self.t[k], self.t[k + 1]);
        let (v0, v1) = (self.value[k], self.value[k + 1]);
        v0 + (v1 - v0) * (x - t0) / (t1 - t0)
    }

    pub fn slope(&self, x: f64) -> f64 {
        let n = self.t.len();
        if x < self.t[0] || x > self.t[n - 1] {
            return 0.0;
        }
        let k = self.segment(x);
        (self.value[k + 1] - self.value[k]) / (self.t[k + 1] - self.t[k])
    }

    /// `(value at u, slope)` when `[u, v]` lies inside one linear segment.
    pub fn linear_on(&self, u: f64, v: f64) -> Option<(f64, f64)> {
        let n = self.t.len();
        if v <= self.t[0] || u >= self.t[n - 1] {
            return Some((self.eval(u), 0.0));
        }
        let k = self.segment(0.5 * (u + v));
        let lo = if k == 0 && u < self.t[0] { f64::NEG_INFINITY } else { self.t[k] };
        let hi = self.t[k + 1];
        let inside = u >= lo - 1e-15 * u.abs().max(1.0) && v <= hi + 1e-15 * v.abs().max(1.0);
        if inside && u >= self.t[0] {
            Some((self.eval(u), self.slope(0.5 * (u + v))))
        } else {
            None
        }
    }

    pub fn integral(&self, a: f64, b: f64) -> f64 {
        let mut pts = vec![a];
        pts.extend(self.t.iter().copied().filter(|x| *x > a && *x < b));
        pts.push(b);
        pts.windows(2).map(|w| 0.5 * (w[1] - w[0]) * (self.eval(w[0]) + self.eval(w[1]))).sum()
    }

    pub fn min_value(&self) -> f64 {
        self.value.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

/// Piecewise constant: `values[i]` on `[breaks[i-1], breaks[i])`, with
/// `breaks` strictly increasing interior points and `values.len() = breaks.len() + 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct Steps {
    pub breaks: Vec<f64>,
    pub values: Vec<f64>,
}

impl Steps {
    pub fn new(breaks: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if values.len() != breaks.len() + 1 {
            return Err(Error::input("steps need exactly one more value than breaks"));
        }
        if breaks.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::input("step breaks must be strictly increasing"));
        }
        if breaks.iter().chain(values.iter()).any(|x| !x.is_finite()) {
            return Err(Error::input("step entries must be finite"));
        }
        Ok(Steps { breaks, values })
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.values[self.breaks.partition_point(|b| *b <= x)]
    }

    /// Value on `[u, v]` when no break lies strictly inside.
    pub fn const_on(&self, u: f64, v: f64) -> Option<f64> {
        if self.breaks.iter().any(|b| *b > u && *b < v) {
            None
        } else {
            Some(self.eval(0.5 * (u + v)))
        }
    }

    pub fn integral(&self, a: f64, b: f64) -> f64 {
        let mut pts = vec![a];
        pts.extend(self.breaks.iter().copied().filter(|x| *x > a && *x < b));
        pts.push(b);
        pts.windows(2).map(|w| (w[1] - w[0]) * self.eval(0.5 * (w[0] + w[1]))).sum()
    }

    pub fn min_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

/// Polygonal angle: plateaus of length `plateaus[n]` at height `heights[n]`,
/// joined by linear ramps of length `ramps[n]` (one fewer ramp than plateaus).
#[derive(Debug, Clone, PartialEq)]
pub struct Polygon {
    pub plateaus: Vec<f64>,
    pub ramps: Vec<f64>,
    pub heights: Vec<f64>,
    table: Table,
}

impl Polygon {
    pub fn new(plateaus: Vec<f64>, ramps: Vec<f64>, heights: Vec<f64>) -> Result<Self> {
        let n = plateaus.len();
        if n == 0 || heights.len() != n || ramps.len() + 1 != n {
            return Err(Error::input(
                "polygon needs N plateaus, N heights and N-1 ramps (N >= 1)",
            ));
        }
        if plateaus.iter().chain(ramps.iter()).any(|x| !(*x > 0.0) || !x.is_finite()) {
            return Err(Error::input("polygon plateau and ramp lengths must be positive"));
        }
        let mut t = Vec::with_capacity(2 * n);
        let mut v = Vec::with_capacity(2 * n);
        let mut x = 0.0;
        for k in 0..n {
            t.push(x);
            v.push(heights[k]);
            x += plateaus[k];
            t.push(x);
            v.push(heights[k]);
            if k + 1 < n {
                x += ramps[k];
            }
        }
        let table = Table::new(t, v)?;
        Ok(Polygon { plateaus, ramps, heights, table })
    }

    pub fn table(&self) -> &Table {
        &self.table
    }

    /// Total length `Σ plateaus + Σ ramps`.
    pub fn length(&self) -> f64 {
        *self.table.t.last().unwrap()
    }

    /// Start and end of plateau `n`.
    pub fn plateau_interval(&self, n: usize) -> (f64, f64) {
        (self.table.t[2 * n], self.table.t[2 * n + 1])
    }
}

/// Angle function `t ↦ φ(t)`.
#[derive(Debug, Clone, PartialEq)]
pub enum AngleFn {
    Constant(f64),
    /// `t^γ sin(t^{-β})`, with value 0 at `t = 0`.
    Chirp { gamma: f64, beta: f64 },
    /// `c t^α`.
    HolderPower { c: f64, alpha: f64 },
    Polygon(Polygon),
    Table(Table),
    Steps(Steps),
    /// `inner(t^κ)`.
    Reparam { inner: Box<AngleFn>, kappa: f64 },
}

/// Geometric breakpoints accumulating at 0 for forms singular there.
fn geometric_breaks(lo: f64, hi: f64) -> Vec<f64> {
    let mut out = Vec::new();
    let mut x = hi;
    while x > lo.max(1e-14) {
        out.push(x);
        x *= 0.5;
    }
    out.reverse();
    out
}

impl AngleFn {
    pub fn eval(&self, t: f64) -> f64 {
        match self {
            AngleFn::Constant(c) => *c,
            AngleFn::Chirp { gamma, beta } => {
                if t <= 0.0 {
                    0.0
                } else {
                    t.powf(*gamma) * t.powf(-*beta).sin()
                }
            }
            AngleFn::HolderPower { c, alpha } => c * t.max(0.0).powf(*alpha),
            AngleFn::Polygon(p) => p.table.eval(t),
            AngleFn::Table(tab) => tab.eval(t),
            AngleFn::Steps(s) => s.eval(t),
            AngleFn::Reparam { inner, kappa } => inner.eval(t.max(0.0).powf(*kappa)),
        }
    }

    /// Derivative where it exists (one-sided at nodes).
    pub fn derivative(&self, t: f64) -> f64 {
        match self {
            AngleFn::Constant(_) | AngleFn::Steps(_) => 0.0,
            AngleFn::Chirp { gamma, beta } => {
                if t <= 0.0 {
                    return 0.0;
                }
                let s = t.powf(-*beta);
                gamma * t.powf(gamma - 1.0) * s.sin() - beta * t.powf(gamma - beta - 1.0) * s.cos()
            }
            AngleFn::HolderPower { c, alpha } => {
                if t <= 0.0 {
                    if *alpha >= 1.0 { c * alpha * if *alpha == 1.0 { 1.0 } else { 0.0 } } else { f64::INFINITY }
                } else {
                    c * alpha * t.powf(alpha - 1.0)
                }
            }
            AngleFn::Polygon(p) => p.table.slope(t),
            AngleFn::Table(tab) => tab.slope(t),
            AngleFn::Reparam { inner, kappa } => {
                let t = t.max(0.0);
                inner.derivative(t.powf(*kappa)) * kappa * t.powf(kappa - 1.0)
            }
        }
    }

    /// Points inside `(a, b)` where the formula changes or which grade a
    /// singularity at 0.
    pub fn breakpoints(&self, a: f64, b: f64) -> Vec<f64> {
        let inside = |v: Vec<f64>| v.into_iter().filter(|x| *x > a && *x < b).collect();
        match self {
            AngleFn::Constant(_) => vec![],
            AngleFn::Chirp { .. } => inside(geometric_breaks(a, b)),
            AngleFn::HolderPower { alpha, .. } => {
                if *alpha == 1.0 { vec![] } else { inside(geometric_breaks(a, b)) }
            }
            AngleFn::Polygon(p) => inside(p.table.t.clone()),
            AngleFn::Table(tab) => inside(tab.t.clone()),
            AngleFn::Steps(s) => inside(s.breaks.clone()),
            AngleFn::Reparam { inner, kappa } => {
                let lo = a.max(0.0).powf(*kappa);
                let hi = b.powf(*kappa);
                let mut v: Vec<f64> =
                    inner.breakpoints(lo, hi).into_iter().map(|x| x.powf(1.0 / kappa)).collect();
                if a <= 0.0 {
                    v.extend(geometric_breaks(a, b));
                    v.sort_by(|x, y| x.partial_cmp(y).unwrap());
                    v.dedup();
                }
                inside(v)
            }
        }
    }

    /// `(φ(u), slope)` when φ is exactly affine on `[u, v]`.
    pub fn linear_on(&self, u: f64, v: f64) -> Option<(f64, f64)> {
        match self {
            AngleFn::Constant(c) => Some((*c, 0.0)),
            AngleFn::HolderPower { c, alpha } if *alpha == 1.0 && u >= 0.0 => Some((c * u, *c)),
            AngleFn::Polygon(p) => p.table.linear_on(u, v),
            AngleFn::Table(tab) => tab.linear_on(u, v),
            AngleFn::Steps(s) => s.const_on(u, v).map(|c| (c, 0.0)),
            AngleFn::Reparam { inner, kappa } => inner
                .linear_on(u.max(0.0).powf(*kappa), v.powf(*kappa))
                .filter(|(_, s)| *s == 0.0),
            _ => None,
        }
    }

    /// True when φ has jumps (a modulus of continuity cannot vanish at 0).
    pub fn is_discontinuous(&self) -> bool {
        match self {
            AngleFn::Steps(s) => s.values.windows(2).any(|w| w[0] != w[1]),
            AngleFn::Reparam { inner, .. } => inner.is_discontinuous(),
            _ => false,
        }
    }

    /// True when φ is constant.
    pub fn is_constant(&self) -> bool {
        match self {
            AngleFn::Constant(_) => true,
            AngleFn::Steps(s) => s.values.windows(2).all(|w| w[0] == w[1]),
            AngleFn::Table(t) => t.value.windows(2).all(|w| w[0] == w[1]),
            AngleFn::Polygon(p) => p.heights.windows(2).all(|w| w[0] == w[1]),
            AngleFn::HolderPower { c, .. } => *c == 0.0,
            AngleFn::Reparam { inner, .. } => inner.is_constant(),
            AngleFn::Chirp { .. } => false,
        }
    }

    /// Whether the form needs `t >= 0`.
    pub fn needs_nonnegative_domain(&self) -> bool {
        matches!(self, AngleFn::Chirp { .. } | AngleFn::HolderPower { .. } | AngleFn::Reparam { .. })
    }

    pub(crate) fn validate(&self) -> Result<()> {
        let finite = |x: f64, what: &str| {
            if x.is_finite() { Ok(()) } else { Err(Error::input(format!("{what} must be finite"))) }
        };
        match self {
            AngleFn::Constant(c) => finite(*c, "constant angle"),
            AngleFn::Chirp { gamma, beta } => {
                if !(*gamma > 0.0 && *beta > 0.0) || !gamma.is_finite() || !beta.is_finite() {
                    Err(Error::input("chirp exponents must be positive"))
                } else {
                    Ok(())
                }
            }
            AngleFn::HolderPower { c, alpha } => {
                finite(*c, "holder coefficient")?;
                if !(*alpha > 0.0 && *alpha <= 1.0) {
                    Err(Error::input("holder exponent must lie in (0, 1]"))
                } else {
                    Ok(())
                }
            }
            AngleFn::Polygon(_) | AngleFn::Table(_) | AngleFn::Steps(_) => Ok(()),
            AngleFn::Reparam { inner, kappa } => {
                if !(*kappa > 0.0) || !kappa.is_finite() {
                    return Err(Error::input("reparameterization exponent must be positive"));
                }
                inner.validate()
            }
        }
    }
}

/// Trace density `t ↦ Tr H(t)`.
#[derive(Debug, Clone, PartialEq)]
pub enum DensityFn {
    Const(f64),
    /// `c t^e`.
    Power { c: f64, exponent: f64 },
    Table(Table),
    Steps(Steps),
    /// `κ t^{κ-1} · inner(t^κ)`.
    Reparam { inner: Box<DensityFn>, kappa: f64 },
}

impl Default for DensityFn {
    fn default() -> Self {
        DensityFn::Const(1.0)
    }
}

impl DensityFn {
    pub fn eval(&self, t: f64) -> f64 {
        match self {
            DensityFn::Const(c) => *c,
            DensityFn::Power { c, exponent } => c * t.powf(*exponent),
            DensityFn::Table(tab) => tab.eval(t),
            DensityFn::Steps(s) => s.eval(t),
            DensityFn::Reparam { inner, kappa } => {
                let t = t.max(0.0);
                kappa * t.powf(kappa - 1.0) * inner.eval(t.powf(*kappa))
            }
        }
    }

    /// Exact `∫_a^b`.
    pub fn integral(&self, a: f64, b: f64) -> f64 {
        match self {
            DensityFn::Const(c) => c * (b - a),
            DensityFn::Power { c, exponent } => {
                let e1 = exponent + 1.0;
                if e1 == 0.0 {
                    c * (b / a).ln()
                } else {
                    c * (b.powf(e1) - a.powf(e1)) / e1
                }
            }
            DensityFn::Table(tab) => tab.integral(a, b),
            DensityFn::Steps(s) => s.integral(a, b),
            DensityFn::Reparam { inner, kappa } => {
                inner.integral(a.max(0.0).powf(*kappa), b.powf(*kappa))
            }
        }
    }

    pub fn breakpoints(&self, a: f64, b: f64) -> Vec<f64> {
        let inside = |v: Vec<f64>| v.into_iter().filter(|x| *x > a && *x < b).collect();
        match self {
            DensityFn::Const(_) | DensityFn::Power { .. } => vec![],
            DensityFn::Table(tab) => inside(tab.t.clone()),
            DensityFn::Steps(s) => inside(s.breaks.clone()),
            DensityFn::Reparam { inner, kappa } => inside(
                inner
                    .breakpoints(a.max(0.0).powf(*kappa), b.powf(*kappa))
                    .into_iter()
                    .map(|x| x.powf(1.0 / kappa))
                    .collect(),
            ),
        }
    }

    /// The constant value when the density is constant on `[u, v]`.
    pub fn const_on(&self, u: f64, v: f64) -> Option<f64> {
        match self {
            DensityFn::Const(c) => Some(*c),
            DensityFn::Power { c, exponent } if *exponent == 0.0 => Some(*c),
            DensityFn::Table(tab) => match tab.linear_on(u, v) {
                Some((val, 0.0)) => Some(val),
                _ => None,
            },
            DensityFn::Steps(s) => s.const_on(u, v),
            DensityFn::Reparam { inner, kappa } if *kappa == 1.0 => inner.const_on(u, v),
            _ => None,
        }
    }

    pub(crate) fn validate(&self, a: f64, b: f64) -> Result<()> {
        match self {
            DensityFn::Const(c) => {
                if *c > 0.0 && c.is_finite() { Ok(()) } else { Err(Error::input("density must be positive")) }
            }
            DensityFn::Power { c, exponent } => {
                if !(*c > 0.0) || !c.is_finite() || !exponent.is_finite() {
                    return Err(Error::input("power density needs positive coefficient"));
                }
                if a < 0.0 || (a == 0.0 && *exponent <= -1.0) {
                    return Err(Error::input("power density not integrable on the domain"));
                }
                Ok(())
            }
            DensityFn::Table(tab) => {
                if tab.min_value() > 0.0 { Ok(()) } else { Err(Error::input("density table values must be positive")) }
            }
            DensityFn::Steps(s) => {
                if s.min_value() > 0.0 { Ok(()) } else { Err(Error::input("density step values must be positive")) }
            }
            DensityFn::Reparam { inner, kappa } => {
                if !(*kappa > 0.0) || a < 0.0 {
                    return Err(Error::input("reparameterized density needs kappa > 0 and t >= 0"));
                }
                inner.validate(a.max(0.0).powf(*kappa), b.powf(*kappa))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table_eval_slope_linear_on() {
        let t = Table::new(vec![0.0, 1.0, 3.0], vec![0.0, 2.0, 0.0]).unwrap();
        assert_eq!(t.eval(0.5), 1.0);
        assert_eq!(t.eval(2.0), 1.0);
        assert_eq!(t.eval(-1.0), 0.0);
        assert_eq!(t.slope(0.2), 2.0);
        assert_eq!(t.linear_on(0.0, 1.0), Some((0.0, 2.0)));
        assert_eq!(t.linear_on(0.5, 2.0), None);
        assert!((t.integral(0.0, 3.0) - 3.0).abs() < 1e-15);
        assert!(Table::new(vec![0.0, 0.0], vec![1.0, 1.0]).is_err());
    }

    #[test]
    fn steps_eval() {
        let s = Steps::new(vec![1.0, 2.0], vec![5.0, 6.0, 7.0]).unwrap();
        assert_eq!(s.eval(0.5), 5.0);
        assert_eq!(s.eval(1.5), 6.0);
        assert_eq!(s.eval(2.5), 7.0);
        assert_eq!(s.const_on(1.0, 2.0), Some(6.0));
        assert_eq!(s.const_on(0.5, 1.5), None);
        assert_eq!(s.integral(0.0, 3.0), 18.0);
    }

    #[test]
    fn polygon_layout() {
        let p = Polygon::new(vec![1.0, 2.0], vec![0.5], vec![0.0, 0.3]).unwrap();
        assert_eq!(p.length(), 3.5);
        assert_eq!(p.plateau_interval(1), (1.5, 3.5));
        let f = AngleFn::Polygon(p);
        assert_eq!(f.eval(0.5), 0.0);
        assert!((f.eval(1.25) - 0.15).abs() < 1e-15);
        assert_eq!(f.eval(2.0), 0.3);
        assert_eq!(f.linear_on(1.0, 1.5), Some((0.0, 0.6)));
    }

    #[test]
    fn chirp_derivative_matches_difference_quotient() {
        let f = AngleFn::Chirp { gamma: 1.5, beta: 0.7 };
        for t in [0.05, 0.3, 0.9] {
            let h = 1e-6 * t;
            let fd = (f.eval(t + h) - f.eval(t - h)) / (2.0 * h);
            assert!((fd - f.derivative(t)).abs() < 1e-5 * fd.abs().max(1.0));
        }
        assert_eq!(f.eval(0.0), 0.0);
    }

    #[test]
    fn reparam_density_integral_by_substitution() {
        let d = DensityFn::Reparam { inner: Box::new(DensityFn::Const(1.0)), kappa: 3.0 };
        assert!((d.eval(0.5) - 3.0 * 0.25).abs() < 1e-15);
        assert!((d.integral(0.0, 1.0) - 1.0).abs() < 1e-15);
        let q = crate::quad::integrate(|t| d.eval(t), 0.0, 1.0, 1e-12);
        assert!((q - 1.0).abs() < 1e-10);
    }

    #[test]
    fn power_density_integral() {
        let d = DensityFn::Power { c: 2.0, exponent: 1.0 };
        assert!((d.integral(0.0, 1.0) - 1.0).abs() < 1e-15);
        assert!(d.validate(0.0, 1.0).is_ok());
        assert!(DensityFn::Power { c: 1.0, exponent: -1.0 }.validate(0.0, 1.0).is_err());
    }
}
