//! Real zeros of `w₂₂`, counting functions and order fits.
//!
//! The scan mode follows the Prüfer angle `θ(x)` of the second row of
//! `W(·, x)` for real `x`. With `θ(0) = π/2` it is nondecreasing in `x` and
//! `w₂₂(x) = 0` exactly when `θ(x) ∈ πℤ`, so counts on brackets are exact.

use std::collections::BTreeSet;
use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fit::line_fit;
use crate::hamiltonian::{cut, HamburgerSpec, HamiltonianSpec};
use crate::mat2::Mat2;
use crate::monodromy::{monodromy_poly, MonodromyOptions, Propagator, Step, POLY_CAP};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ZeroMethod {
    Polynomial,
    Prufer,
}

/// Real zeros of `w₂₂` in `[−R, R]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ZeroSet {
    pub zeros: Vec<f64>,
    pub radius: f64,
    pub method: ZeroMethod,
    pub warnings: Vec<String>,
}

/// Prüfer-angle evaluator for one spec.
pub struct PruferScan<'a> {
    prop: Propagator<'a>,
    level: usize,
}

fn angle_of(r: [f64; 2]) -> f64 {
    r[1].atan2(r[0])
}

/// Principal value of `b − a` in `(−π, π]`.
fn wrap(d: f64) -> f64 {
    let mut d = d % (2.0 * PI);
    if d > PI {
        d -= 2.0 * PI;
    } else if d <= -PI {
        d += 2.0 * PI;
    }
    d
}

impl<'a> PruferScan<'a> {
    /// `radius` fixes the refinement level of curved pieces: the level at
    /// which the monodromy at `z = radius` settles.
    pub fn new(spec: &'a HamiltonianSpec, radius: f64) -> Result<Self> {
        let prop = Propagator::new(spec, MonodromyOptions::default())?;
        let level = if prop.is_refined() { prop.at(Complex64::new(radius.abs().max(1.0), 0.0))?.level } else { 0 };
        Ok(PruferScan { prop, level })
    }

    /// `θ(x)` at the right endpoint.
    pub fn angle(&self, x: f64) -> Result<f64> {
        let mut row = [0.0, 1.0];
        let mut theta = PI / 2.0;
        let z = Complex64::new(x, 0.0);
        let advance = |m: Mat2<f64>, row: &mut [f64; 2], theta: &mut f64| {
            let next = m.row_mul(*row);
            let n = next[0].hypot(next[1]);
            if !(n > 0.0) || !n.is_finite() {
                return Err(Error::numerical(format!("Prüfer row degenerated at x = {x}")));
            }
            *theta += wrap(angle_of(next) - angle_of(*row));
            *row = [next[0] / n, next[1] / n];
            Ok(())
        };
        self.prop.for_each_step(self.level, |s| {
            let pieces = match s {
                // the row moves along a straight line: one principal step suffices
                Step::Const { .. } => 1,
                Step::Linear { h, d, .. } => (x.abs() * d * h).ceil().max(1.0) as usize,
                Step::Matrix { m, h } => (x.abs() * h * m.spectral_norm()).ceil().max(1.0) as usize,
            };
            for k in 0..pieces {
                let sub = match s {
                    Step::Linear { phi_u, phi_v, h, d } => {
                        let f0 = k as f64 / pieces as f64;
                        let f1 = (k + 1) as f64 / pieces as f64;
                        Step::Linear {
                            phi_u: phi_u + (phi_v - phi_u) * f0,
                            phi_v: phi_u + (phi_v - phi_u) * f1,
                            h: h / pieces as f64,
                            d,
                        }
                    }
                    Step::Matrix { m, h } => Step::Matrix { m, h: h / pieces as f64 },
                    other => other,
                };
                let w = sub.matrix(z)?;
                advance(w.unit.re(), &mut row, &mut theta)?;
            }
            Ok(())
        })?;
        Ok(theta)
    }

    /// Number of zeros in `(a, b]`.
    pub fn count_between(&self, a: f64, b: f64) -> Result<usize> {
        if !(b >= a) {
            return Err(Error::input("count_between needs a <= b"));
        }
        let (ta, tb) = (self.angle(a)?, self.angle(b)?);
        Ok(((tb / PI).floor() - (ta / PI).floor()).max(0.0) as usize)
    }

    /// Number of zeros in `[−r, r]`.
    pub fn count(&self, r: f64) -> Result<usize> {
        let lo = -r.abs();
        let t_lo = self.angle(lo)?;
        let t_hi = self.angle(r.abs())?;
        // a zero sitting exactly at −r belongs to the closed interval
        let at_lo = if (t_lo / PI).fract() == 0.0 { 1.0 } else { 0.0 };
        Ok(((t_hi / PI).floor() - (t_lo / PI).floor() + at_lo).max(0.0) as usize)
    }

    #[allow(clippy::too_many_arguments)]
    fn isolate(&self, a: f64, b: f64, ta: f64, tb: f64, scale: f64, out: &mut Vec<f64>, warn: &mut Vec<String>) -> Result<()> {
        let ka = (ta / PI).floor();
        let k = ((tb / PI).floor() - ka).max(0.0) as usize;
        if k == 0 {
            return Ok(());
        }
        if k == 1 {
            let target = (ka + 1.0) * PI;
            let (mut lo, mut hi) = (a, b);
            while hi - lo > 1e-10 * scale.max(lo.abs()).max(hi.abs()) * 1e-2 {
                let mid = 0.5 * (lo + hi);
                if mid <= lo || mid >= hi {
                    break;
                }
                if self.angle(mid)? >= target {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            out.push(0.5 * (lo + hi));
            return Ok(());
        }
        if b - a < 1e-13 * scale {
            warn.push(format!("{k} zeros closer than {:e} near {a}", b - a));
            out.extend(std::iter::repeat_n(0.5 * (a + b), k));
            return Ok(());
        }
        let m = 0.5 * (a + b);
        let tm = self.angle(m)?;
        self.isolate(a, m, ta, tm, scale, out, warn)?;
        self.isolate(m, b, tm, tb, scale, out, warn)
    }

    /// All zeros in `[−r, r]` by bisection on counts.
    pub fn zeros(&self, r: f64) -> Result<ZeroSet> {
        let r = r.abs();
        // start just below −r so a zero at −r is kept
        let lo = -r * (1.0 + 1e-14) - f64::MIN_POSITIVE;
        let (tl, th) = (self.angle(lo)?, self.angle(r)?);
        let mut zeros = Vec::new();
        let mut warnings = Vec::new();
        self.isolate(lo, r, tl, th, r.max(1.0), &mut zeros, &mut warnings)?;
        zeros.sort_by(|x, y| x.partial_cmp(y).unwrap());
        let mut zs = ZeroSet { zeros, radius: r, method: ZeroMethod::Prufer, warnings };
        zs.check_separation();
        Ok(zs)
    }
}

impl ZeroSet {
    fn check_separation(&mut self) {
        let sep = 1e-10 * self.radius.max(1.0);
        for w in self.zeros.windows(2) {
            if w[1] - w[0] <= sep {
                self.warnings.push(format!("zeros {} and {} closer than {sep:e}", w[0], w[1]));
            }
        }
    }
}

/// Real zeros of `w₂₂` in `[−R, R]`: polynomial isolation for Hamburger
/// specs (checked against the Prüfer count), Prüfer scan otherwise or when
/// isolation misses roots.
pub fn zeros_w22(spec: &HamiltonianSpec, r: f64) -> Result<ZeroSet> {
    if !(r > 0.0) || !r.is_finite() {
        return Err(Error::input(format!("radius must be positive, got {r}")));
    }
    let scan = PruferScan::new(spec, r)?;
    match spec {
        HamiltonianSpec::Hamburger(h) if h.len() <= POLY_CAP => {
            let mp = monodromy_poly(h)?;
            let fallback = |why: String| -> Result<ZeroSet> {
                let mut zs = scan.zeros(r)?;
                zs.warnings.push(format!("{why}; Prüfer zeros used"));
                Ok(zs)
            };
            let roots = match mp.w22().real_roots(Some(&mp.magnitude[1][1])) {
                Ok(x) => x,
                Err(Error::Numerical(msg)) => return fallback(format!("polynomial isolation failed ({msg})")),
                Err(e) => return Err(e),
            };
            let zeros: Vec<f64> = roots.roots.into_iter().filter(|x| x.abs() <= r).collect();
            let count = scan.count(r)?;
            if count != zeros.len() {
                return fallback(format!(
                    "polynomial isolation found {} zeros in [-{r}, {r}], the Prüfer count is {count}",
                    zeros.len()
                ));
            }
            let mut zs = ZeroSet { zeros, radius: r, method: ZeroMethod::Polynomial, warnings: vec![] };
            zs.check_separation();
            Ok(zs)
        }
        _ => scan.zeros(r),
    }
}

/// `#{zeros with |x| ≤ r}`.
pub fn counting_function(zs: &ZeroSet, r: f64) -> Result<usize> {
    if r > zs.radius * (1.0 + 1e-12) {
        return Err(Error::input(format!("radius {r} beyond the zero set's cap {}", zs.radius)));
    }
    Ok(zs.zeros.iter().filter(|x| x.abs() <= r).count())
}

/// Empirical zero density `n(R)/(2R)` next to `(1/π)∫√det H`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KdbDensity {
    pub count: usize,
    pub empirical: f64,
    pub predicted: f64,
}

pub fn kdb_density(spec: &HamiltonianSpec, r: f64) -> Result<KdbDensity> {
    if !(r > 0.0) || !r.is_finite() {
        return Err(Error::input(format!("radius must be positive, got {r}")));
    }
    let count = PruferScan::new(spec, r)?.count(r)?;
    let predicted = match spec {
        HamiltonianSpec::ConstantMatrix(c) => c.det().max(0.0).sqrt() * c.length / PI,
        _ => 0.0,
    };
    Ok(KdbDensity { count, empirical: count as f64 / (2.0 * r), predicted })
}

/// Comparison of zero counts before and after a cut.
#[derive(Debug, Clone, PartialEq)]
pub struct CutReport {
    /// `(r, n(r), ñ(r))` at every checked radius.
    pub rows: Vec<(f64, usize, usize)>,
    /// `max_r (ñ(r) − n(r) − 2)`; the inequality holds when this is ≤ 0.
    pub max_violation: i64,
}

impl CutReport {
    pub fn holds(&self) -> bool {
        self.max_violation <= 0
    }
}

/// Check `ñ(r) ≤ n(r) + 2` for the spec cut to `keep` (0-based segment
/// indices) on a geometric grid of `points` radii up to `r_max` and at every
/// zero of either function.
pub fn cut_zero_inequality(
    spec: &HamburgerSpec,
    keep: &BTreeSet<usize>,
    r_max: f64,
    points: usize,
) -> Result<CutReport> {
    let orig = HamiltonianSpec::Hamburger(spec.clone());
    let cutted = HamiltonianSpec::Hamburger(cut(spec, keep)?);
    let z0 = zeros_w22(&orig, r_max)?;
    let z1 = zeros_w22(&cutted, r_max)?;
    let points = points.max(2);
    let lo = r_max * 1e-3;
    let mut grid: Vec<f64> =
        (0..points).map(|k| lo * (r_max / lo).powf(k as f64 / (points - 1) as f64)).collect();
    grid.extend(z0.zeros.iter().chain(&z1.zeros).map(|x| x.abs()));
    grid.sort_by(|a, b| a.partial_cmp(b).unwrap());
    grid.dedup();
    let mut rows = Vec::with_capacity(grid.len());
    let mut worst = i64::MIN;
    for r in grid {
        let n = counting_function(&z0, r)?;
        let m = counting_function(&z1, r)?;
        worst = worst.max(m as i64 - n as i64 - 2);
        rows.push((r, n, m));
    }
    Ok(CutReport { rows, max_violation: worst })
}

/// Least-squares order of a growth curve: slope of `log value` against `log r`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrderFit {
    pub slope: f64,
    pub intercept: f64,
    /// Root-mean-square residual of the fit.
    pub residual: f64,
    pub r_min: f64,
    pub r_max: f64,
}

/// Fit the order over the points with `value > 1`; needs at least 8 of them.
pub fn fit_order(r: &[f64], value: &[f64]) -> Result<OrderFit> {
    if r.len() != value.len() {
        return Err(Error::input("radius and value lists differ in length"));
    }
    let pts: Vec<(f64, f64)> = r
        .iter()
        .zip(value)
        .filter(|(r, v)| **r > 0.0 && **v > 1.0 && v.is_finite())
        .map(|(r, v)| (r.ln(), v.ln()))
        .collect();
    if pts.len() < 8 {
        return Err(Error::input(format!("order fit needs at least 8 points with value > 1, got {}", pts.len())));
    }
    let f = line_fit(&pts).ok_or_else(|| Error::input("order fit needs distinct radii"))?;
    let residual = (pts.iter().map(|(x, y)| (y - f.at(*x)).powi(2)).sum::<f64>() / pts.len() as f64).sqrt();
    let (r_min, r_max) = pts.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), p| (a.min(p.0), b.max(p.0)));
    Ok(OrderFit { slope: f.slope, intercept: f.intercept, residual, r_min: r_min.exp(), r_max: r_max.exp() })
}

/// Interlacing of two sorted zero lists.
#[derive(Debug, Clone, PartialEq)]
pub struct Interlacing {
    pub holds: bool,
    /// Pairs closer than the tie tolerance; reported, not counted as failures.
    pub ties: Vec<(f64, f64)>,
}

/// Whether `a` and `b` interlace: along the merged list the source
/// alternates. Cross-source pairs within `tie_tol` count as common zeros and
/// are removed before the alternation check.
pub fn interlacing(a: &[f64], b: &[f64], tie_tol: f64) -> Interlacing {
    let mut merged: Vec<(f64, u8)> = a.iter().map(|x| (*x, 0)).chain(b.iter().map(|x| (*x, 1))).collect();
    merged.sort_by(|x, y| x.0.total_cmp(&y.0));
    let mut ties = Vec::new();
    let mut rest: Vec<u8> = Vec::with_capacity(merged.len());
    let mut k = 0;
    while k < merged.len() {
        if k + 1 < merged.len() && merged[k + 1].0 - merged[k].0 <= tie_tol && merged[k].1 != merged[k + 1].1 {
            ties.push((merged[k].0, merged[k + 1].0));
            k += 2;
        } else {
            rest.push(merged[k].1);
            k += 1;
        }
    }
    let holds = a.len().abs_diff(b.len()) <= 1 && rest.windows(2).all(|w| w[0] != w[1]);
    Interlacing { holds, ties }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hamiltonian::ConstantSpec;

    fn burger(l: &[f64], a: &[f64]) -> HamiltonianSpec {
        HamiltonianSpec::Hamburger(HamburgerSpec::new(l.to_vec(), a.to_vec()).unwrap())
    }

    fn identity_spec() -> HamiltonianSpec {
        HamiltonianSpec::ConstantMatrix(ConstantSpec::new(Mat2::identity(), 1.0).unwrap())
    }

    #[test]
    fn cosine_zeros() {
        let zs = zeros_w22(&identity_spec(), 20.0).unwrap();
        assert_eq!(zs.method, ZeroMethod::Prufer);
        let want: Vec<f64> = (-6..6).map(|k| PI / 2.0 + k as f64 * PI).collect();
        assert_eq!(zs.zeros.len(), want.len());
        for (z, w) in zs.zeros.iter().zip(&want) {
            assert!((z - w).abs() < 1e-9, "{z} vs {w}");
        }
        assert_eq!(counting_function(&zs, 10.0).unwrap(), 6);
        assert_eq!(counting_function(&zs, 0.0).unwrap(), 0);
        assert!(counting_function(&zs, 30.0).is_err());
    }

    #[test]
    fn empty_zero_set() {
        let zs = zeros_w22(&burger(&[1.0, 1.0], &[0.0, PI / 2.0]), 50.0).unwrap();
        assert!(zs.zeros.is_empty());
        assert_eq!(counting_function(&zs, 50.0).unwrap(), 0);
    }

    #[test]
    fn quadratic_oracle() {
        // W = (I − z ξξᵀJ(π/4))(I − z ξξᵀJ(3π/4)); w22 = 1 + z − z²/4... checked
        // against the quadratic formula applied to the expanded product
        let (a, b) = (PI / 4.0, 3.0 * PI / 4.0);
        let f = |phi: f64| {
            let (s, c) = phi.sin_cos();
            [[c * s, -c * c], [s * s, -c * s]]
        };
        let (p, q) = (f(a), f(b));
        // w22(z) = 1 − z(p22 + q22) + z²(p21 q12 + p22 q22)
        let c1 = -(p[1][1] + q[1][1]);
        let c2 = p[1][0] * q[0][1] + p[1][1] * q[1][1];
        let disc = (c1 * c1 - 4.0 * c2).sqrt();
        let mut want = [(-c1 - disc) / (2.0 * c2), (-c1 + disc) / (2.0 * c2)];
        want.sort_by(|x, y| x.partial_cmp(y).unwrap());
        let zs = zeros_w22(&burger(&[1.0, 1.0], &[a, b]), 10.0).unwrap();
        assert_eq!(zs.method, ZeroMethod::Polynomial);
        assert_eq!(zs.zeros.len(), 2);
        for (z, w) in zs.zeros.iter().zip(want) {
            assert!((z - w).abs() < 1e-12 * w.abs().max(1.0));
        }
        // the scan agrees with the polynomial roots
        let s = PruferScan::new(&burger(&[1.0, 1.0], &[a, b]), 10.0).unwrap().zeros(10.0).unwrap();
        for (x, y) in s.zeros.iter().zip(&zs.zeros) {
            assert!((x - y).abs() < 1e-8);
        }
    }

    #[test]
    fn kdb_constant_matrices() {
        let k = kdb_density(&identity_spec(), 100.0).unwrap();
        assert!((k.predicted - 1.0 / PI).abs() < 1e-15);
        assert!((k.empirical - 1.0 / PI).abs() <= 0.02 / PI);
        let d = HamiltonianSpec::ConstantMatrix(ConstantSpec::new(Mat2::diag(4.0, 1.0), 1.0).unwrap());
        let k = kdb_density(&d, 100.0).unwrap();
        assert!((k.predicted - 2.0 / PI).abs() < 1e-15);
        assert!((k.empirical - 2.0 / PI).abs() <= 0.02 * 2.0 / PI);
        let h = kdb_density(&burger(&[1.0, 0.5, 2.0], &[0.0, 1.0, 2.0]), 100.0).unwrap();
        assert_eq!(h.predicted, 0.0);
        assert!(h.count <= 3);
    }

    #[test]
    fn profile_scan_matches_count() {
        use crate::hamiltonian::{AngleFn, AngleProfile, DensityFn};
        let p = AngleProfile::new((0.0, 1.0), AngleFn::HolderPower { c: 3.0, alpha: 1.0 }, DensityFn::Const(1.0))
            .unwrap();
        let spec = HamiltonianSpec::Profile(p);
        let scan = PruferScan::new(&spec, 200.0).unwrap();
        let zs = scan.zeros(200.0).unwrap();
        assert_eq!(zs.zeros.len(), scan.count(200.0).unwrap());
        for z in &zs.zeros {
            let w = crate::monodromy::monodromy_at(&spec, Complex64::new(*z, 0.0)).unwrap();
            let m = w.w.to_mat();
            assert!(m.m22.norm() < 1e-6 * m.max_abs().max(1.0), "{z}: {}", m.m22);
        }
    }

    #[test]
    fn cut_trivial_cases() {
        let h = HamburgerSpec::new(vec![1.0, 0.4, 2.0, 0.7], vec![0.2, 1.3, 2.9, 0.1]).unwrap();
        let all: BTreeSet<usize> = (0..4).collect();
        let rep = cut_zero_inequality(&h, &all, 100.0, 30).unwrap();
        assert!(rep.holds() && rep.rows.iter().all(|(_, n, m)| n == m));
        // one kept segment: w̃22 = 1 + z l cos φ sin φ has at most one zero
        let one: BTreeSet<usize> = [2].into_iter().collect();
        let rep = cut_zero_inequality(&h, &one, 100.0, 30).unwrap();
        assert!(rep.holds() && rep.rows.iter().all(|(_, _, m)| *m <= 1));
        let h = HamburgerSpec::new(vec![1.0, 0.4, 2.0], vec![0.2, PI / 2.0, 2.9]).unwrap();
        let one: BTreeSet<usize> = [1].into_iter().collect();
        let rep = cut_zero_inequality(&h, &one, 100.0, 30).unwrap();
        assert!(rep.holds() && rep.rows.iter().all(|(_, _, m)| *m == 0));
    }

    #[test]
    fn order_fits() {
        let r: Vec<f64> = (0..10).map(|k| 10f64.powf(1.0 + 0.5 * k as f64)).collect();
        let v: Vec<f64> = r.iter().map(|x| x.powf(2.0 / 3.0)).collect();
        let f = fit_order(&r, &v).unwrap();
        assert!((f.slope - 2.0 / 3.0).abs() < 1e-12 && f.residual < 1e-12);
        let v: Vec<f64> = r.iter().map(|x| 3.0 * x).collect();
        assert!((fit_order(&r, &v).unwrap().slope - 1.0).abs() < 1e-6);
        assert!(fit_order(&r[..5], &v[..5]).is_err());
    }

    #[test]
    fn interlacing_detects_order() {
        assert!(interlacing(&[1.0, 3.0], &[0.0, 2.0, 4.0], 1e-12).holds);
        assert!(!interlacing(&[1.0, 1.5], &[0.0, 2.0, 4.0], 1e-12).holds);
        let t = interlacing(&[1.0], &[1.0], 1e-12);
        assert!(t.holds && t.ties.len() == 1);
    }
}
