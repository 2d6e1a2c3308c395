//! Generators for the example Hamiltonians: chirps, polygon angles with a
//! prescribed modulus, the sharpness family and Cantor-type diagonals.

use std::f64::consts::FRAC_PI_2;

use crate::error::{Error, Result};
use crate::hamiltonian::{AngleFn, AngleProfile, DensityFn, DiagonalSpec, HamburgerSpec, Polygon};
use crate::regvar::{asymptotic_inverse, compose, Modulus, RegVarFn};

/// Largest chirp frequency exponent accepted.
pub const CHIRP_BETA_CAP: f64 = 4.0;

/// Default number of plateaus for sequence families.
pub const DEFAULT_TRUNCATION: usize = 5000;

/// Most doublings of `m` tried to push `π(m_1)` below `π/2`.
pub const MAX_DOUBLINGS: u32 = 60;

/// `φ(t) = t^γ sin(t^{−β})` on `[0, 1]` with unit density.
pub fn chirp_profile(gamma: f64, beta: f64) -> Result<AngleProfile> {
    if !(gamma > 0.0) || !(beta > 0.0) {
        return Err(Error::input(format!("chirp needs gamma, beta > 0 (got {gamma}, {beta})")));
    }
    if gamma > beta {
        return Err(Error::input(format!("chirp needs gamma <= beta (got {gamma} > {beta})")));
    }
    if beta > CHIRP_BETA_CAP {
        return Err(Error::input(format!("chirp beta {beta} exceeds the cap {CHIRP_BETA_CAP}")));
    }
    AngleProfile::new((0.0, 1.0), AngleFn::Chirp { gamma, beta }, DensityFn::Const(1.0))
}

/// Hölder exponent `γ/(β+1)` of the chirp.
pub fn chirp_holder_exponent(gamma: f64, beta: f64) -> f64 {
    gamma / (beta + 1.0)
}

/// Order bound of the recipe for the chirp reparameterized by `t ↦ t^κ`:
/// `1/(1+α)` with `α = γκ/(βκ+1)`.
pub fn chirp_recipe_order(gamma: f64, beta: f64, kappa: f64) -> f64 {
    1.0 / (1.0 + chirp_holder_exponent(gamma * kappa, beta * kappa))
}

/// Limit of [`chirp_recipe_order`] as `κ → ∞`: `β/(β+γ)`.
pub fn chirp_order_limit(gamma: f64, beta: f64) -> f64 {
    beta / (beta + gamma)
}

/// Plateau lengths `l_j`, ramp lengths `m_j` (one fewer) and the amplitude `π`.
#[derive(Debug, Clone, PartialEq)]
pub struct PolygonParams {
    pub l: Vec<f64>,
    pub m: Vec<f64>,
    pub pi_fn: Modulus,
}

/// A polygon angle and the Hamburger spec left after cutting out its ramps.
#[derive(Debug, Clone, PartialEq)]
pub struct PolygonFamily {
    pub profile: AngleProfile,
    pub hamburger: HamburgerSpec,
    /// `max_j π(m_j)/π(m_{j+1})` over the truncation.
    pub max_pi_ratio: f64,
}

impl PolygonParams {
    pub fn validate(&self) -> Result<f64> {
        let (l, m) = (&self.l, &self.m);
        if l.len() < 2 || m.len() + 1 != l.len() {
            return Err(Error::input("polygon needs N >= 2 plateaus and N-1 ramps"));
        }
        if l.iter().chain(m).any(|x| !(*x > 0.0) || !x.is_finite()) {
            return Err(Error::input("plateau and ramp lengths must be positive"));
        }
        if m.windows(2).any(|w| w[1] > w[0]) {
            return Err(Error::input("ramp lengths m_j must be nonincreasing"));
        }
        if let Some(j) = (0..m.len()).find(|j| m[*j] > l[*j]) {
            return Err(Error::input(format!("ramp {} longer than its plateau", j + 1)));
        }
        let p: Vec<f64> = m.iter().map(|x| self.pi_fn.eval(*x)).collect();
        if !(p[0] < FRAC_PI_2) {
            return Err(Error::input(format!("pi(m_1) = {} must be below pi/2", p[0])));
        }
        if p.windows(2).any(|w| w[1] > w[0] * (1.0 + 1e-12)) {
            return Err(Error::input("pi must be nondecreasing"));
        }
        // π(x)/x nonincreasing: π(m_j)/m_j must not drop as m_j shrinks
        if (1..m.len()).any(|j| p[j] / m[j] < p[j - 1] / m[j - 1] * (1.0 - 1e-12)) {
            return Err(Error::input("pi(x)/x must be nonincreasing"));
        }
        let ratio = p.windows(2).map(|w| w[0] / w[1]).fold(1.0, f64::max);
        if !ratio.is_finite() {
            return Err(Error::input("pi(m_j)/pi(m_j+1) is unbounded on the truncation"));
        }
        Ok(ratio)
    }

    /// Plateau heights `φ_n = Σ_{j<n} (−1)^{j+1} π(m_j)`.
    pub fn heights(&self) -> Vec<f64> {
        let mut h = Vec::with_capacity(self.l.len());
        let mut acc = 0.0;
        h.push(acc);
        for (j, mj) in self.m.iter().enumerate() {
            let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
            acc += sign * self.pi_fn.eval(*mj);
            h.push(acc);
        }
        h
    }
}

pub fn polygon_profile(params: &PolygonParams) -> Result<PolygonFamily> {
    let max_pi_ratio = params.validate()?;
    let heights = params.heights();
    let poly = Polygon::new(params.l.clone(), params.m.clone(), heights.clone())?;
    let len = poly.length();
    let profile = AngleProfile::new((0.0, len), AngleFn::Polygon(poly), DensityFn::Const(1.0))?;
    let hamburger = HamburgerSpec::new(params.l.clone(), heights)?;
    Ok(PolygonFamily { profile, hamburger, max_pi_ratio })
}

/// Growth function `g`, spacing function `m` and truncation for the sharpness family.
#[derive(Debug, Clone, PartialEq)]
pub struct SharpnessParams {
    pub g: RegVarFn,
    pub m: RegVarFn,
    pub n: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SharpnessFamily {
    pub profile: AngleProfile,
    pub hamburger: HamburgerSpec,
    pub params: PolygonParams,
    /// The modulus `π` whose `Γ` is `g`.
    pub modulus: Modulus,
    /// Predicted upper envelope `g`.
    pub upper: RegVarFn,
    /// Predicted lower envelope `n∘g` with `n` an asymptotic inverse of the rescaled `m`.
    pub lower: RegVarFn,
    /// `(g⁻¹∘m)²`, the rate function of the jump hypothesis.
    pub rate_f: RegVarFn,
    /// Factor applied to `m` so that `π(1/m(1)) < π/2`.
    pub m_scale: f64,
    pub doublings: u32,
}

fn integrable_reciprocal(m: &RegVarFn) -> bool {
    let rho = m.index();
    if rho > 1.0 {
        return true;
    }
    match m {
        RegVarFn::PowerLog { rho, k1, k2, .. } if *rho == 1.0 => *k1 > 1.0 || (*k1 == 1.0 && *k2 > 1.0),
        _ => false,
    }
}

pub fn sharpness_family(params: &SharpnessParams) -> Result<SharpnessFamily> {
    let SharpnessParams { g, m, n } = params;
    g.validate()?;
    m.validate()?;
    let rho = g.index();
    if !(rho > 0.5 && rho < 1.0) {
        return Err(Error::input(format!("index of g must lie in (1/2, 1), got {rho}")));
    }
    if !integrable_reciprocal(m) {
        return Err(Error::input("1/m must be integrable at infinity"));
    }
    if *n < 2 {
        return Err(Error::input("sharpness family needs at least 2 segments"));
    }
    let modulus = Modulus::growth(g.clone())?;
    let mut doublings = 0;
    let mut scale = 1.0f64;
    while modulus.eval(1.0 / (scale * m.eval(1.0))) >= FRAC_PI_2 {
        doublings += 1;
        scale *= 2.0;
        if doublings > MAX_DOUBLINGS {
            return Err(Error::input("pi(m_1) stays above pi/2 after the maximal rescaling"));
        }
    }
    let m_s = if doublings == 0 { m.clone() } else { compose(RegVarFn::power(1.0, scale)?, m.clone()) };
    let lens: Vec<f64> = (1..=*n).map(|j| 1.0 / m_s.eval(j as f64)).collect();
    let poly = PolygonParams { l: lens.clone(), m: lens[..n - 1].to_vec(), pi_fn: modulus.clone() };
    let fam = polygon_profile(&poly)?;
    let lower = compose(asymptotic_inverse(&m_s)?.g, g.clone());
    let rate_f = compose(RegVarFn::power(2.0, 1.0)?, compose(RegVarFn::Inverse(Box::new(g.clone())), m_s));
    Ok(SharpnessFamily {
        profile: fam.profile,
        hamburger: fam.hamburger,
        params: poly,
        modulus,
        upper: g.clone(),
        lower,
        rate_f,
        m_scale: scale,
        doublings,
    })
}

/// A finite-depth Cantor construction turned into a diagonal Hamiltonian on `[0, 2]`.
#[derive(Debug, Clone, PartialEq)]
pub struct CantorDiagonal {
    pub spec: DiagonalSpec,
    /// Each surviving interval keeps two children of relative length `ratio`.
    pub ratio: f64,
    pub depth: u32,
    /// The removed intervals `(α_j, β_j)` of `[0, 1]`, in order.
    pub gaps: Vec<(f64, f64)>,
}

/// Deepest construction accepted.
pub const CANTOR_MAX_DEPTH: u32 = 20;

/// Ratio `λ = 3^{−1/p}`: the level-`k` gaps contribute `∝ (2λ^p)^k = (2/3)^k`
/// to `Σ|I_j|^p`.
pub fn cantor_ratio(p_target: f64) -> f64 {
    3f64.powf(-1.0 / p_target)
}

pub fn cantor_diagonal(p_target: f64, depth: u32) -> Result<CantorDiagonal> {
    if !(p_target > 0.0 && p_target < 1.0) {
        return Err(Error::input(format!("p must lie in (0, 1), got {p_target}")));
    }
    cantor_diagonal_with_ratio(cantor_ratio(p_target), depth)
}

/// Middle-interval construction with children of relative length `ratio < 1/2`;
/// the stage-`depth` intervals carry mass `2^{−depth}` each.
pub fn cantor_diagonal_with_ratio(ratio: f64, depth: u32) -> Result<CantorDiagonal> {
    if !(ratio > 0.0 && ratio < 0.5) {
        return Err(Error::input(format!("Cantor ratio must lie in (0, 1/2), got {ratio}")));
    }
    if depth == 0 || depth > CANTOR_MAX_DEPTH {
        return Err(Error::input(format!("Cantor depth must lie in 1..={CANTOR_MAX_DEPTH}, got {depth}")));
    }
    if ratio.powi(depth as i32) < 1e-12 {
        return Err(Error::input(format!(
            "ratio {ratio} at depth {depth} gives intervals below double resolution; lower the depth or raise p"
        )));
    }
    let mut alive = vec![(0.0f64, 1.0f64)];
    for _ in 0..depth {
        alive = alive
            .iter()
            .flat_map(|&(a, b)| {
                let w = ratio * (b - a);
                [(a, a + w), (b - w, b)]
            })
            .collect();
    }
    let mass = 0.5f64.powi(depth as i32);
    let gaps: Vec<(f64, f64)> = alive.windows(2).map(|w| (w[0].1, w[1].0)).collect();
    // t ↦ t + μ([0, t]) moves the gap after the i-th stage interval by (i+1)·2^{−depth}
    let h1 = gaps.iter().enumerate().map(|(i, (a, b))| {
        let shift = (i + 1) as f64 * mass;
        (a + shift, b + shift)
    });
    let spec = DiagonalSpec::new((0.0, 2.0), h1.collect())?;
    Ok(CantorDiagonal { spec, ratio, depth, gaps })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hamiltonian::{cut, diagonal_to_profile, HamiltonianSpec};
    use std::collections::BTreeSet;

    #[test]
    fn chirp_checks() {
        assert!(chirp_profile(2.0, 1.0).is_err());
        assert!(chirp_profile(1.0, 5.0).is_err());
        let p = chirp_profile(1.0, 1.0).unwrap();
        assert_eq!(p.phi.eval(0.0), 0.0);
        for t in [1e-3, 0.1, 0.7] {
            assert!(p.phi.eval(t).abs() <= t);
        }
        assert_eq!(chirp_holder_exponent(1.0, 1.0), 0.5);
        assert_eq!(chirp_order_limit(1.0, 1.0), 0.5);
        assert!((chirp_order_limit(1.0, 2.0) - 2.0 / 3.0).abs() < 1e-15);
        let want = [2.0 / 3.0, 0.6, 5.0 / 9.0, 9.0 / 17.0];
        for (k, w) in [1.0, 2.0, 4.0, 8.0].iter().zip(want) {
            assert!((chirp_recipe_order(1.0, 1.0, *k) - w).abs() < 1e-15);
        }
    }

    fn sqrt_params(n: usize) -> PolygonParams {
        let l: Vec<f64> = (1..=n).map(|j| (j as f64).powf(-1.5)).collect();
        PolygonParams { m: l[..n - 1].to_vec(), l, pi_fn: Modulus::power(1.0, 0.5).unwrap() }
    }

    #[test]
    fn polygon_heights_and_cut() {
        let params = sqrt_params(40);
        let fam = polygon_profile(&params).unwrap();
        let h = &fam.hamburger.angles;
        assert!(((h[1] - h[0]).abs() - params.pi_fn.eval(params.m[0])).abs() < 1e-15);
        // a full Hamburger discretization of the polygon, ramps split into
        // three pieces, cut back to the plateaus gives the same spec
        let AngleFn::Polygon(poly) = &fam.profile.phi else { panic!() };
        let (mut lens, mut angs, mut keep) = (vec![], vec![], BTreeSet::new());
        for k in 0..poly.plateaus.len() {
            keep.insert(lens.len());
            lens.push(poly.plateaus[k]);
            angs.push(poly.heights[k]);
            if k + 1 < poly.plateaus.len() {
                for q in 0..3 {
                    lens.push(poly.ramps[k] / 3.0);
                    let f = (q as f64 + 0.5) / 3.0;
                    angs.push(poly.heights[k] + f * (poly.heights[k + 1] - poly.heights[k]));
                }
            }
        }
        let full = HamburgerSpec::new(lens, angs).unwrap();
        assert_eq!(cut(&full, &keep).unwrap(), fam.hamburger);
    }

    #[test]
    fn polygon_modulus_at_plateau_scale() {
        use crate::regvar::estimate_modulus;
        let params = sqrt_params(30);
        let fam = polygon_profile(&params).unwrap();
        let grid: Vec<f64> = params.m[..20].iter().rev().copied().collect();
        let w = estimate_modulus(&fam.profile, &grid).unwrap();
        for mj in &params.m[..20] {
            let ratio = w.eval(*mj) / params.pi_fn.eval(*mj);
            assert!((ratio - 1.0).abs() < 1e-9, "{mj}: {ratio}");
        }
    }

    #[test]
    fn polygon_invariants_enforced() {
        let mut p = sqrt_params(5);
        p.m[2] = 0.9;
        assert!(polygon_profile(&p).is_err());
        let mut p = sqrt_params(5);
        p.pi_fn = Modulus::power(2.0, 0.5).unwrap();
        assert!(polygon_profile(&p).is_err());
        let mut p = sqrt_params(5);
        p.m.pop();
        assert!(polygon_profile(&p).is_err());
    }

    #[test]
    fn sharpness_power_case() {
        let g = RegVarFn::power(2.0 / 3.0, 1.0).unwrap();
        let m = RegVarFn::power(1.5, 1.0).unwrap();
        let f = sharpness_family(&SharpnessParams { g: g.clone(), m, n: 200 }).unwrap();
        assert_eq!(f.doublings, 0);
        // π = p₋₁·(p₋₁∘g⁻¹∘p₋₁) has index 1/ρ − 1
        let pi = |x: f64| f.modulus.eval(x);
        assert!(((pi(1e-8) / pi(1e-4)).ln() / (1e-4f64).ln() - 0.5).abs() < 1e-9);
        assert!((f.lower.index() - 4.0 / 9.0).abs() < 1e-12);
        assert!((f.upper.index() - 2.0 / 3.0).abs() < 1e-12);
        assert!((f.rate_f.index() - 4.5).abs() < 1e-12);
        // lower envelope n∘g with n the inverse of m: (r^{2/3})^{2/3}
        assert!((f.lower.eval(1e6) / 1e6f64.powf(4.0 / 9.0) - 1.0).abs() < 1e-9);
        assert_eq!(f.hamburger.len(), 200);
        assert!((f.hamburger.lengths[9] - 10f64.powf(-1.5)).abs() < 1e-15);
    }

    #[test]
    fn sharpness_log_case_and_rescale() {
        let g = RegVarFn::power(0.667, 1.0).unwrap();
        let m = RegVarFn::parse("r*log(r)*loglog(r)^2").unwrap();
        let f = sharpness_family(&SharpnessParams { g: g.clone(), m: m.clone(), n: 100 }).unwrap();
        // gap factor n(g(r))/g(r) ≍ 1/(log r (loglog r)²)
        let gap = |r: f64| f.lower.eval(r) / f.upper.eval(r) * r.ln() * r.ln().ln().powi(2);
        let (a, b) = (gap(1e50), gap(1e200));
        assert!(a / b > 0.5 && a / b < 2.0, "{a} {b}");
        // a small m forces a rescale
        let tiny = RegVarFn::power(1.5, 1e-3).unwrap();
        let f = sharpness_family(&SharpnessParams { g, m: tiny, n: 10 }).unwrap();
        assert!(f.doublings > 0);
        assert!(f.modulus.eval(f.params.m[0]) < FRAC_PI_2);
        let bad = RegVarFn::power(0.4, 1.0).unwrap();
        assert!(sharpness_family(&SharpnessParams { g: bad, m, n: 10 }).is_err());
    }

    #[test]
    fn cantor_depth_one() {
        let c = cantor_diagonal_with_ratio(1.0 / 3.0, 1).unwrap();
        assert_eq!(c.gaps.len(), 1);
        let (a, b) = c.spec.h1_intervals[0];
        assert!((a - 5.0 / 6.0).abs() < 1e-15 && (b - 7.0 / 6.0).abs() < 1e-15);
    }

    #[test]
    fn cantor_measure_and_bookkeeping() {
        for depth in [2u32, 5, 8] {
            let c = cantor_diagonal(0.5, depth).unwrap();
            let want = 1.0 - (2.0 * c.ratio).powi(depth as i32);
            assert!((c.spec.h1_measure() - want).abs() < 1e-12);
            let runs = c.spec.runs();
            assert_eq!(runs.first().unwrap().0, 0.0);
            assert_eq!(runs.last().unwrap().1, 2.0);
            assert!(runs.windows(2).all(|w| w[0].1 == w[1].0 && w[0].2 != w[1].2));
            let p = diagonal_to_profile(&c.spec).unwrap();
            let spec = HamiltonianSpec::Profile(p.clone());
            assert!(spec.domain().1 > 0.0);
            let vals: Vec<f64> = (0..200).map(|k| (-p.phi.eval(k as f64 / 200.0 * p.domain.1)).tan()).collect();
            assert!(vals.windows(2).all(|w| w[1] >= w[0] - 1e-15));
        }
        assert!(cantor_diagonal(0.05, 20).is_err());
    }
}
