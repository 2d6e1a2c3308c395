//! Power-series lower bounds for Hamburger Hamiltonians.

use std::ops::RangeInclusive;

use crate::error::{Error, Result};
use crate::fit::line_fit;
use crate::hamiltonian::HamburgerSpec;
use crate::regvar::{asymptotic_inverse, RegVarFn};

/// Log-coefficients of `F(z) = Σ c_n zⁿ`; `-inf` marks a zero coefficient.
#[derive(Debug, Clone, PartialEq)]
pub struct LogSeries {
    pub log_coeffs: Vec<f64>,
}

impl LogSeries {
    pub fn len(&self) -> usize {
        self.log_coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.log_coeffs.is_empty()
    }

    /// Highest index with a nonzero coefficient.
    pub fn degree(&self) -> usize {
        self.log_coeffs.iter().rposition(|c| *c > f64::NEG_INFINITY).unwrap_or(0)
    }
}

/// Log of one jump factor `l_{j+1} l_j sin²(φ_{j+1} − φ_j)` (0-based `j ≥ 1`).
fn log_jump(spec: &HamburgerSpec, j: usize) -> f64 {
    let s = (spec.angles[j] - spec.angles[j - 1]).sin().abs();
    if s == 0.0 {
        return f64::NEG_INFINITY;
    }
    spec.lengths[j].ln() + spec.lengths[j - 1].ln() + 2.0 * s.ln()
}

/// Coefficients of `F` up to `zⁿ` with `n = min(n_max, N − 1)`.
pub fn f_series(spec: &HamburgerSpec, n_max: usize) -> LogSeries {
    let n = n_max.min(spec.len().saturating_sub(1));
    let mut out = Vec::with_capacity(n + 1);
    let mut acc = 0.0;
    out.push(acc);
    for j in 1..=n {
        acc += log_jump(spec, j);
        out.push(acc);
    }
    LogSeries { log_coeffs: out }
}

/// `½ log F(r²)` and the index at which the series was cut.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LowerBound {
    pub value: f64,
    pub truncation: usize,
}

/// Consecutive negligible terms required before the sum is cut.
const TAIL_RUN: usize = 50;

/// `½ log F(r²)` by a running log-sum-exp; stops once the next 50 terms
/// each fall below `1e-16` of the running sum.
pub fn lower_bound_at(series: &LogSeries, r: f64) -> Result<LowerBound> {
    if !(r > 0.0) || !r.is_finite() {
        return Err(Error::input(format!("radius must be positive, got {r}")));
    }
    let lr2 = 2.0 * r.ln();
    let cut = 1e-16f64.ln();
    let mut total = f64::NEG_INFINITY;
    let mut quiet = 0;
    let mut last = 0;
    for (n, c) in series.log_coeffs.iter().enumerate() {
        let t = c + n as f64 * lr2;
        if t == f64::NEG_INFINITY || t - total < cut {
            quiet += 1;
        } else {
            quiet = 0;
            last = n;
        }
        if t > f64::NEG_INFINITY {
            let (hi, lo) = if t > total { (t, total) } else { (total, t) };
            total = hi + (lo - hi).exp().ln_1p();
        }
        if quiet >= TAIL_RUN {
            break;
        }
    }
    Ok(LowerBound { value: 0.5 * total, truncation: last })
}

/// `min_{n ∈ range} [log g⁻¹(n) + log c_n / n]`, a finite-range stand-in for
/// the liminf of `log(g⁻¹(n)|c_n|^{1/n})`.
pub fn liminf_coefficient_bound(
    series: &LogSeries,
    g_inverse: &dyn Fn(f64) -> f64,
    range: RangeInclusive<usize>,
) -> Result<f64> {
    let (lo, hi) = (*range.start(), *range.end());
    if lo > hi || lo == 0 {
        return Err(Error::input(format!("coefficient range {lo}..={hi} is empty or contains 0")));
    }
    if hi >= series.len() {
        return Err(Error::input(format!("coefficient range ends at {hi}, series has {} terms", series.len())));
    }
    Ok(range
        .map(|n| g_inverse(n as f64).ln() + series.log_coeffs[n] / n as f64)
        .fold(f64::INFINITY, f64::min))
}

/// Hypothesis check for the regular-variation lower rate.
#[derive(Debug, Clone, PartialEq)]
pub struct RateReport {
    /// `f(j)·l_{j+1}l_j sin²(Δφ_j)` for `j = 1..=n_check`.
    pub ratios: Vec<f64>,
    pub min_ratio: f64,
    /// 1-based index of the smallest ratio.
    pub argmin: usize,
    /// Asymptotic inverse `g` of `f`; the predicted rate is `g(r²)`.
    pub g: RegVarFn,
}

impl RateReport {
    pub fn predicted_at(&self, r: f64) -> f64 {
        self.g.eval(r * r)
    }
}

pub fn cor48_rate(spec: &HamburgerSpec, f: &RegVarFn, n_check: usize) -> Result<RateReport> {
    let n = n_check.min(spec.len().saturating_sub(1));
    if n == 0 {
        return Err(Error::input("need at least two segments to form a jump"));
    }
    let mut ratios = Vec::with_capacity(n);
    for j in 1..=n {
        let fj = f.eval(j as f64);
        if !(fj > 0.0) || !fj.is_finite() {
            return Err(Error::input(format!("f must be positive, f({j}) = {fj}")));
        }
        ratios.push((f.ln_eval(j as f64) + log_jump(spec, j)).exp());
    }
    let (k, min_ratio) =
        ratios.iter().copied().enumerate().fold((0, f64::INFINITY), |b, (k, v)| if v < b.1 { (k, v) } else { b });
    Ok(RateReport { ratios, min_ratio, argmin: k + 1, g: asymptotic_inverse(f)?.g })
}

/// Slack `C + s log r` that makes `lower ≤ upper + slack` on the grid:
/// `s` is the least-squares slope of `lower − upper` against `log r` and `C`
/// the smallest constant that closes every gap.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogSlack {
    pub c: f64,
    pub s: f64,
}

pub fn fit_log_slack(r: &[f64], lower: &[f64], upper: &[f64]) -> Result<LogSlack> {
    if r.len() != lower.len() || r.len() != upper.len() {
        return Err(Error::input("slack fit needs equally long radius, lower and upper lists"));
    }
    let pts: Vec<(f64, f64)> = r.iter().zip(lower.iter().zip(upper)).map(|(r, (l, u))| (r.ln(), l - u)).collect();
    let s = line_fit(&pts).ok_or_else(|| Error::input("slack fit needs two distinct radii"))?.slope;
    let c = pts.iter().map(|(x, d)| d - s * x).fold(f64::NEG_INFINITY, f64::max);
    Ok(LogSlack { c, s })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn spec(l: Vec<f64>, a: Vec<f64>) -> HamburgerSpec {
        HamburgerSpec::new(l, a).unwrap()
    }

    #[test]
    fn equal_angles_give_one() {
        let s = f_series(&spec(vec![1.0, 2.0, 0.5], vec![0.3; 3]), 5);
        assert_eq!(s.log_coeffs, vec![0.0, f64::NEG_INFINITY, f64::NEG_INFINITY]);
        for r in [0.1, 10.0, 1e6] {
            assert_eq!(lower_bound_at(&s, r).unwrap().value, 0.0);
        }
        assert_eq!(s.degree(), 0);
        let g = |x: f64| x;
        assert_eq!(liminf_coefficient_bound(&s, &g, 1..=2).unwrap(), f64::NEG_INFINITY);
    }

    #[test]
    fn one_plus_z() {
        let s = f_series(&spec(vec![1.0, 1.0], vec![0.0, PI / 2.0]), 1);
        assert_eq!(s.log_coeffs.len(), 2);
        assert!(s.log_coeffs[1].abs() < 1e-15);
        for r in [0.01, 1.0, 37.0, 1e8] {
            let v = lower_bound_at(&s, r).unwrap().value;
            let want = 0.5 * (r * r).ln_1p();
            assert!((v - want).abs() <= 1e-14 * (1.0 + want));
        }
    }

    #[test]
    fn dyadic_closed_form() {
        let n = 12;
        let l = (1..=n).map(|j| 0.5f64.powi(j)).collect();
        let a = (1..=n).map(|j| j as f64 * PI / 2.0).collect();
        let s = f_series(&spec(l, a), 10);
        for k in 1..=10usize {
            let want = -((k * (k + 2)) as f64) * std::f64::consts::LN_2;
            assert!((s.log_coeffs[k] - want).abs() < 1e-12 * want.abs());
        }
    }

    #[test]
    fn factorial_liminf() {
        let mut c = vec![0.0];
        let mut acc = 0.0;
        for n in 1..=10_000usize {
            acc -= (n as f64).ln();
            c.push(acc);
        }
        let s = LogSeries { log_coeffs: c };
        let v = liminf_coefficient_bound(&s, &|x| x, 1000..=10_000).unwrap();
        assert!((v - 1.0).abs() < 0.01, "{v}");
        let (lo, hi) = (5, 4);
        assert!(liminf_coefficient_bound(&s, &|x| x, lo..=hi).is_err());
        assert!(liminf_coefficient_bound(&s, &|x| x, 5..=20_000).is_err());
    }

    #[test]
    fn truncation_reported() {
        // c_n = 1/n!: the terms at r = 3 are negligible well before n = 200
        let mut c = vec![0.0];
        let mut acc = 0.0;
        for n in 1..=400usize {
            acc -= (n as f64).ln();
            c.push(acc);
        }
        let lb = lower_bound_at(&LogSeries { log_coeffs: c }, 3.0).unwrap();
        assert!((lb.value - 4.5).abs() < 1e-12);
        assert!(lb.truncation > 9 && lb.truncation < 100, "{}", lb.truncation);
    }

    #[test]
    fn exact_hypothesis_ratio() {
        // l_j = 1, sin²(Δφ_j) = 1/f(j) with f(j) = j
        let n = 40;
        let mut a = vec![0.0];
        for j in 1..n {
            let p: f64 = a[j - 1];
            a.push(p + (1.0 / j as f64).sqrt().asin());
        }
        let f = RegVarFn::power(1.0, 1.0).unwrap();
        let rep = cor48_rate(&spec(vec![1.0; n], a.clone()), &f, n).unwrap();
        assert_eq!(rep.ratios.len(), n - 1);
        assert!(rep.ratios.iter().all(|v| (v - 1.0).abs() < 1e-12));
        // a tiny jump at position 7 collapses the ratio there
        a[7] = a[6] + 1e-6;
        for k in 8..n {
            a[k] = a[k - 1] + (1.0 / k as f64).sqrt().asin();
        }
        let rep = cor48_rate(&spec(vec![1.0; n], a), &f, n).unwrap();
        assert_eq!(rep.argmin, 7);
        assert!(rep.min_ratio < 1e-10);
    }

    #[test]
    fn slack_fit() {
        let r: Vec<f64> = (1..=5).map(|k| 10f64.powi(k)).collect();
        let lower: Vec<f64> = r.iter().map(|x| 2.0 * x.ln() + 1.0).collect();
        let upper = vec![0.0; 5];
        let s = fit_log_slack(&r, &lower, &upper).unwrap();
        assert!((s.s - 2.0).abs() < 1e-12 && (s.c - 1.0).abs() < 1e-12);
    }
}
