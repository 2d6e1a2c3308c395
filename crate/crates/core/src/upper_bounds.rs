//! The sine-square growth bound, its parameter recipe, Romanov's criterion
//! and a numerical optimizer over bound data.

use std::f64::consts::LN_2;

use crate::error::{Error, Result};
use crate::hamiltonian::{total_trace_mass, AngleFn, AngleProfile, HamiltonianSpec, Piece, PieceKind};
use crate::mat2::lemma5_norms;
use crate::quad::integrate_vec;
use crate::regvar::{estimate_modulus, gamma_of, Modulus};

/// Smallest `a_j` the optimizer will consider.
pub const A_FLOOR: f64 = 1e-8;

/// Largest partition the recipe or the optimizer will build.
pub const MAX_CELLS: usize = 20_000_000;

const QUAD_REL_TOL: f64 = 1e-10;

/// Partition `y_0 < … < y_N` with one angle `ψ_j` and one weight `a_j ∈ (0, 1]` per cell.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundData {
    pub partition: Vec<f64>,
    pub psi: Vec<f64>,
    pub a: Vec<f64>,
}

impl BoundData {
    pub fn new(partition: Vec<f64>, psi: Vec<f64>, a: Vec<f64>) -> Result<Self> {
        let d = BoundData { partition, psi, a };
        d.validate()?;
        Ok(d)
    }

    /// Equidistant partition of `domain` with `n` cells and constant `a`.
    pub fn uniform(domain: (f64, f64), n: usize, psi: Vec<f64>, a: f64) -> Result<Self> {
        Self::new(equidistant(domain, n), psi, vec![a; n])
    }

    pub fn cells(&self) -> usize {
        self.psi.len()
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.psi.len();
        if n == 0 || self.partition.len() != n + 1 || self.a.len() != n {
            return Err(Error::input(format!(
                "bound data needs N+1 partition points and N angles and weights (got {}, {}, {})",
                self.partition.len(),
                n,
                self.a.len()
            )));
        }
        if self.partition.iter().any(|y| !y.is_finite()) || self.partition.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::input("partition must be finite and strictly increasing"));
        }
        if self.psi.iter().any(|p| !p.is_finite()) {
            return Err(Error::input("angles psi must be finite"));
        }
        if let Some(a) = self.a.iter().find(|a| !(**a > 0.0 && **a <= 1.0)) {
            return Err(Error::input(format!("weights must lie in (0, 1], got {a}")));
        }
        Ok(())
    }

    fn check_domain(&self, domain: (f64, f64)) -> Result<()> {
        self.validate()?;
        let tol = 1e-12 * (domain.1 - domain.0).abs().max(domain.0.abs()).max(domain.1.abs()).max(1.0);
        let (y0, yn) = (self.partition[0], self.partition[self.cells()]);
        if (y0 - domain.0).abs() > tol || (yn - domain.1).abs() > tol {
            return Err(Error::input(format!(
                "partition [{y0}, {yn}] does not span the domain [{}, {}]",
                domain.0, domain.1
            )));
        }
        Ok(())
    }
}

/// The four constants of the bound `log‖W(z)‖ ≤ |z|(A1+A2) + A3 + A4`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundValue {
    pub a1: f64,
    pub a2: f64,
    pub a3: f64,
    pub a4: f64,
}

impl BoundValue {
    pub fn total_at(&self, z_abs: f64) -> f64 {
        z_abs * (self.a1 + self.a2) + self.a3 + self.a4
    }
}

fn equidistant(domain: (f64, f64), n: usize) -> Vec<f64> {
    let (a, b) = domain;
    let h = (b - a) / n as f64;
    let mut y: Vec<f64> = (0..n).map(|j| a + h * j as f64).collect();
    y.push(b);
    y
}

fn one_minus_sinc(w: f64) -> f64 {
    if w.abs() < 1e-3 {
        let w2 = w * w;
        w2 / 6.0 - w2 * w2 / 120.0
    } else {
        1.0 - w.sin() / w
    }
}

fn sinc(w: f64) -> f64 {
    1.0 - one_minus_sinc(w)
}

/// Spectral norm of `d ξ_φξ_φᵀ − ξ_ψξ_ψᵀ`.
fn rank_one_gap(d: f64, phi: f64, psi: f64) -> f64 {
    let s = (phi - psi).sin();
    let half = 0.5 * (d - 1.0);
    half.abs() + (half * half + d * s * s).sqrt()
}

/// Part of one piece lying inside one cell.
struct Slice<'a> {
    u: f64,
    v: f64,
    piece: &'a Piece,
    profile: Option<&'a AngleProfile>,
}

impl Slice<'_> {
    fn mass(&self) -> f64 {
        match self.piece.kind {
            PieceKind::Const { density, .. } | PieceKind::Linear { density, .. } => density * (self.v - self.u),
            PieceKind::Smooth => self.profile.map_or(0.0, |p| p.density.integral(self.u, self.v)),
        }
    }

    fn quad<const K: usize>(&self, f: impl Fn(f64, f64) -> [f64; K]) -> [f64; K] {
        let p = self.profile.expect("smooth pieces only come from profiles");
        let tol = QUAD_REL_TOL * self.mass().max(f64::MIN_POSITIVE);
        integrate_vec(|t| f(p.phi.eval(t), p.density.eval(t)), self.u, self.v, tol, 2)
    }

    /// `[∫cos²(φ−ψ)TrH, ∫sin²(φ−ψ)TrH]`.
    fn trig(&self, psi: f64) -> [f64; 2] {
        let h = self.v - self.u;
        match self.piece.kind {
            PieceKind::Const { angle, density } => {
                let (s, c) = (angle - psi).sin_cos();
                [density * h * c * c, density * h * s * s]
            }
            PieceKind::Linear { angle0, slope, density } => {
                let phi_u = angle0 + slope * (self.u - self.piece.start);
                let w = slope * h;
                let x = 2.0 * (phi_u - psi) + w;
                let (sx, cx) = (0.5 * x).sin_cos();
                let tail = x.cos() * one_minus_sinc(w);
                [density * h * (cx * cx - 0.5 * tail), density * h * (sx * sx + 0.5 * tail)]
            }
            PieceKind::Smooth => self.quad(|phi, d| {
                let (s, c) = (phi - psi).sin_cos();
                [d * c * c, d * s * s]
            }),
        }
    }

    /// `[∫TrH, Re ∫e^{2iφ}TrH, Im ∫e^{2iφ}TrH]`.
    fn moments(&self) -> [f64; 3] {
        let h = self.v - self.u;
        match self.piece.kind {
            PieceKind::Const { angle, density } => {
                let m = density * h;
                [m, m * (2.0 * angle).cos(), m * (2.0 * angle).sin()]
            }
            PieceKind::Linear { angle0, slope, density } => {
                let phi_u = angle0 + slope * (self.u - self.piece.start);
                let w = slope * h;
                let m = density * h;
                let arg = 2.0 * phi_u + w;
                [m, m * sinc(w) * arg.cos(), m * sinc(w) * arg.sin()]
            }
            PieceKind::Smooth => self.quad(|phi, d| [d, d * (2.0 * phi).cos(), d * (2.0 * phi).sin()]),
        }
    }

    /// `∫‖H − ξ_ψξ_ψᵀ‖`.
    fn gap(&self, psi: f64) -> f64 {
        let h = self.v - self.u;
        match self.piece.kind {
            PieceKind::Const { angle, density } => h * rank_one_gap(density, angle, psi),
            PieceKind::Linear { angle0, slope, density } => {
                let start = self.piece.start;
                let tol = QUAD_REL_TOL * h.max(f64::MIN_POSITIVE);
                integrate_vec(|t| [rank_one_gap(density, angle0 + slope * (t - start), psi)], self.u, self.v, tol, 2)
                    [0]
            }
            PieceKind::Smooth => self.quad(|phi, d| [rank_one_gap(d, phi, psi)])[0],
        }
    }
}

fn det_zero_pieces(spec: &HamiltonianSpec) -> Result<Vec<Piece>> {
    if !spec.is_det_zero() {
        return Err(Error::Inapplicable("the bound needs det H = 0 almost everywhere".into()));
    }
    spec.pieces()
}

/// Apply `f(cell, slice)` to every piece/cell overlap and sum per cell.
fn per_cell<const K: usize>(
    spec: &HamiltonianSpec,
    pieces: &[Piece],
    y: &[f64],
    f: impl Fn(usize, &Slice) -> [f64; K],
) -> Vec<[f64; K]> {
    let profile = spec.as_profile();
    let n = y.len() - 1;
    let mut out = vec![[0.0; K]; n];
    let mut k = 0;
    for j in 0..n {
        let (u, v) = (y[j], y[j + 1]);
        while k < pieces.len() && pieces[k].end <= u {
            k += 1;
        }
        let mut kk = k;
        while kk < pieces.len() && pieces[kk].start < v {
            let p = &pieces[kk];
            let (su, sv) = (u.max(p.start), v.min(p.end));
            if sv > su {
                let r = f(j, &Slice { u: su, v: sv, piece: p, profile });
                for i in 0..K {
                    out[j][i] += r[i];
                }
            }
            kk += 1;
        }
    }
    out
}

/// `∫_{cell} cos²(φ−ψ_j)TrH` and `∫_{cell} sin²(φ−ψ_j)TrH` for every cell.
pub fn cell_integrals(spec: &HamiltonianSpec, partition: &[f64], psi: &[f64]) -> Result<Vec<[f64; 2]>> {
    let pieces = det_zero_pieces(spec)?;
    if partition.len() != psi.len() + 1 {
        return Err(Error::input("partition and angle counts do not match"));
    }
    Ok(per_cell(spec, &pieces, partition, |j, s| s.trig(psi[j])))
}

/// Trace-weighted circular mean of φ on every cell: `arg(∫e^{2iφ}TrH)/2`.
pub fn circular_means(spec: &HamiltonianSpec, partition: &[f64]) -> Result<Vec<f64>> {
    let pieces = det_zero_pieces(spec)?;
    Ok(per_cell(spec, &pieces, partition, |_, s| s.moments())
        .into_iter()
        .map(|m| 0.5 * m[2].atan2(m[1]))
        .collect())
}

fn a3_term(a: f64, b: f64, dpsi: f64) -> f64 {
    let (s, c) = dpsi.sin_cos();
    let ratio = (a / b).max(b / a);
    (ratio * c.abs() + s.abs() / (a * b)).ln().max(0.0)
}

fn a3_exact_term(a: f64, psi: f64, b: f64, phi: f64) -> Result<f64> {
    Ok(lemma5_norms(a, psi, phi, b)?.transition.ln().max(0.0))
}

fn assemble(cells: &[[f64; 2]], psi: &[f64], a: &[f64], exact_a3: bool) -> Result<BoundValue> {
    let n = a.len();
    let mut v = BoundValue { a1: 0.0, a2: 0.0, a3: 0.0, a4: -a[0].ln() - a[n - 1].ln() };
    for j in 0..n {
        let a2 = a[j] * a[j];
        v.a1 += a2 * cells[j][0];
        v.a2 += cells[j][1] / a2;
    }
    for j in 0..n.saturating_sub(1) {
        v.a3 += if exact_a3 {
            a3_exact_term(a[j], psi[j], a[j + 1], psi[j + 1])?
        } else {
            a3_term(a[j], a[j + 1], psi[j] - psi[j + 1])
        };
    }
    Ok(v)
}

/// Evaluate the bound constants for `data`.
pub fn evaluate_bound(spec: &HamiltonianSpec, data: &BoundData) -> Result<BoundValue> {
    evaluate_bound_with(spec, data, false)
}

/// As [`evaluate_bound`]; with `exact_a3` the third constant uses the exact
/// transition norms `‖Ω(a_j,ψ_j)Ω(a_{j+1},ψ_{j+1})⁻¹‖`.
pub fn evaluate_bound_with(spec: &HamiltonianSpec, data: &BoundData, exact_a3: bool) -> Result<BoundValue> {
    data.check_domain(spec.domain())?;
    let cells = cell_integrals(spec, &data.partition, &data.psi)?;
    assemble(&cells, &data.psi, &data.a, exact_a3)
}

/// Default modulus of continuity for a profile's angle.
pub fn modulus_for(profile: &AngleProfile) -> Result<Modulus> {
    let (lo, hi) = profile.domain;
    let on_unit = lo >= 0.0 && hi <= 1.0;
    match &profile.phi {
        AngleFn::Constant(_) | AngleFn::Steps(_) => {
            Err(Error::DegenerateModulus("angle is constant or has jumps".into()))
        }
        AngleFn::Chirp { gamma, beta } if on_unit => Ok(Modulus::Chirp { gamma: *gamma, beta: *beta }),
        AngleFn::Reparam { inner, kappa } if on_unit && matches!(**inner, AngleFn::Chirp { .. }) => {
            let AngleFn::Chirp { gamma, beta } = **inner else { unreachable!() };
            Ok(Modulus::Chirp { gamma: gamma * kappa, beta: beta * kappa })
        }
        AngleFn::HolderPower { c, alpha } if *c != 0.0 => {
            if *alpha <= 1.0 {
                Modulus::power(c.abs(), *alpha)
            } else {
                Modulus::power(c.abs() * alpha * hi.abs().powf(alpha - 1.0), 1.0)
            }
        }
        _ => {
            let l = profile.length();
            let grid: Vec<f64> = (0..=240).map(|k| l * 10f64.powf(-12.0 + 12.0 * k as f64 / 240.0)).collect();
            estimate_modulus(profile, &grid)
        }
    }
}

/// Data of the continuous-angle recipe at radius `z_abs`:
/// `δ = 1/Γ_ω(L z_abs / l)`, `a = ω(δ)^{1/2}`, equidistant cells of width `δ`
/// (the last one shorter) and `ψ_j = φ(y_j)`.
pub fn thm14_recipe(spec: &HamiltonianSpec, z_abs: f64, modulus: &Modulus) -> Result<(BoundData, BoundValue)> {
    let p = spec
        .as_profile()
        .ok_or_else(|| Error::Inapplicable(format!("the recipe needs a profile, got {}", spec.kind_name())))?;
    if p.phi.is_constant() {
        return Err(Error::DegenerateModulus("constant angle: the modulus must be positive".into()));
    }
    if !(z_abs > 0.0) || !z_abs.is_finite() {
        return Err(Error::input(format!("radius must be positive, got {z_abs}")));
    }
    let (l, mass) = total_trace_mass(spec);
    let delta = 1.0 / gamma_of(modulus, mass * z_abs / l);
    let a = modulus.eval(delta).sqrt();
    if !(delta < l) {
        return Err(Error::input(format!("radius {z_abs} too small: cell width {delta} >= length {l}")));
    }
    if !(a > 0.0 && a <= 1.0) {
        return Err(Error::input(format!("radius {z_abs} too small: weight {a} not in (0, 1]")));
    }
    let ratio = l / delta;
    if ratio > MAX_CELLS as f64 {
        return Err(Error::CapExceeded { what: "recipe cells", got: ratio.min(usize::MAX as f64) as usize, cap: MAX_CELLS });
    }
    let (alpha, beta) = p.domain;
    let mut n = ratio.ceil() as usize;
    if n > 1 && alpha + (n - 1) as f64 * delta >= beta - 1e-14 * l {
        n -= 1;
    }
    let mut y: Vec<f64> = (0..n).map(|j| alpha + j as f64 * delta).collect();
    y.push(beta);
    let psi = y[1..].iter().map(|t| p.phi.eval(*t)).collect();
    let data = BoundData::new(y, psi, vec![a; n])?;
    let value = evaluate_bound(spec, &data)?;
    Ok((data, value))
}

/// The value the recipe guarantees: `3l·Γ_ω(L z_abs/l) + log(1/ω(δ))`.
pub fn thm14_guarantee(spec: &HamiltonianSpec, z_abs: f64, modulus: &Modulus) -> f64 {
    let (l, mass) = total_trace_mass(spec);
    let g = gamma_of(modulus, mass * z_abs / l);
    3.0 * l * g - modulus.ln_eval(1.0 / g)
}

/// Left-hand sides of Romanov's four conditions for one radius.
#[derive(Debug, Clone, PartialEq)]
pub struct RomanovRow {
    pub r: f64,
    pub lhs: [f64; 4],
    pub rhs: [f64; 4],
    pub ok: [bool; 4],
}

#[derive(Debug, Clone, PartialEq)]
pub struct RomanovReport {
    pub d: f64,
    pub c: f64,
    pub rows: Vec<RomanovRow>,
    /// `K` in `log‖W(z)‖ ≤ K|z|^d` when all conditions hold.
    pub implied_k: f64,
}

impl RomanovReport {
    pub fn all_ok(&self) -> bool {
        self.rows.iter().all(|r| r.ok.iter().all(|b| *b))
    }

    /// Indices (0-based) of the conditions violated at some radius.
    pub fn violated(&self) -> Vec<usize> {
        (0..4).filter(|i| self.rows.iter().any(|r| !r.ok[*i])).collect()
    }
}

/// The four sums of Romanov's criterion for `data`.
pub fn romanov_sums(spec: &HamiltonianSpec, data: &BoundData) -> Result<[f64; 4]> {
    data.check_domain(spec.domain())?;
    let pieces = det_zero_pieces(spec)?;
    let gaps = per_cell(spec, &pieces, &data.partition, |j, s| [s.gap(data.psi[j])]);
    let (a, psi, y) = (&data.a, &data.psi, &data.partition);
    let n = a.len();
    let c1 = (0..n).map(|j| gaps[j][0] / (a[j] * a[j])).sum();
    let c2 = (0..n).map(|j| a[j] * a[j] * (y[j + 1] - y[j])).sum();
    let c3 = (0..n - 1).map(|j| ((psi[j] - psi[j + 1]).sin().abs() / (a[j] * a[j + 1])).ln_1p()).sum();
    let c4 = -a[0].ln() - a[n - 1].ln() + (0..n - 1).map(|j| (a[j + 1] / a[j]).ln().abs()).sum::<f64>();
    Ok([c1, c2, c3, c4])
}

/// Check Romanov's conditions for the data family `family(r)` on `r_grid`.
/// Conditions (1), (2) are compared with `C r^{d−1}`, (3), (4) with `C r^d`.
pub fn romanov_check(
    spec: &HamiltonianSpec,
    d: f64,
    family: &dyn Fn(f64) -> Result<BoundData>,
    c: f64,
    r_grid: &[f64],
) -> Result<RomanovReport> {
    if !(d > 0.0 && d < 1.0) || !(c > 0.0) {
        return Err(Error::input("romanov check needs d in (0, 1) and C > 0"));
    }
    let mut rows = Vec::with_capacity(r_grid.len());
    for &r in r_grid {
        let lhs = romanov_sums(spec, &family(r)?)?;
        let small = c * r.powf(d - 1.0);
        let big = c * r.powf(d);
        let rhs = [small, small, big, big];
        let ok = std::array::from_fn(|i| lhs[i] <= rhs[i]);
        rows.push(RomanovRow { r, lhs, rhs, ok });
    }
    Ok(RomanovReport { d, c, rows, implied_k: 4.0 * c })
}

/// The bound in Romanov's form: as [`evaluate_bound`] but with
/// `Σ a_j⁻² ∫‖H − ξ_ψξ_ψᵀ‖` in place of the sine-square sum.
pub fn romanov_bound(spec: &HamiltonianSpec, data: &BoundData) -> Result<BoundValue> {
    let mut v = evaluate_bound(spec, data)?;
    let pieces = det_zero_pieces(spec)?;
    let gaps = per_cell(spec, &pieces, &data.partition, |j, s| [s.gap(data.psi[j])]);
    v.a2 = gaps.iter().zip(&data.a).map(|(g, a)| g[0] / (a * a)).sum();
    Ok(v)
}

/// Romanov-tuned data for a profile whose angle has modulus `c δ^α`:
/// cells of width `1/r`, `ψ_j = φ(y_j)`, `a² = r^{−α/2}`.
pub fn romanov_family(spec: &HamiltonianSpec, r: f64, alpha: f64) -> Result<BoundData> {
    let p = spec.as_profile().ok_or_else(|| Error::Inapplicable("romanov family needs a profile".into()))?;
    let l = p.length();
    let n = (l * r).ceil().max(1.0);
    if n > MAX_CELLS as f64 {
        return Err(Error::CapExceeded { what: "romanov cells", got: n as usize, cap: MAX_CELLS });
    }
    let y = equidistant(p.domain, n as usize);
    let psi = y[1..].iter().map(|t| p.phi.eval(*t)).collect();
    let a = r.powf(-alpha / 4.0).min(1.0);
    BoundData::new(y, psi, vec![a; n as usize])
}

/// How [`optimize_bound`] chooses its data.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Strategy {
    Recipe,
    CoordinateDescent,
    DyadicScan,
}

impl std::str::FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "recipe" => Ok(Strategy::Recipe),
            "coordinate_descent" | "cd" => Ok(Strategy::CoordinateDescent),
            "dyadic_scan" | "dyadic" => Ok(Strategy::DyadicScan),
            _ => Err(Error::input(format!("unknown strategy '{s}'"))),
        }
    }
}

/// Local part of the objective that depends on `a_j` (log-weight `x`).
fn local_cost(r: f64, cells: &[[f64; 2]], psi: &[f64], a: &[f64], j: usize, x: f64) -> f64 {
    let n = a.len();
    let aj = x.exp();
    let mut f = r * (aj * aj * cells[j][0] + cells[j][1] / (aj * aj));
    if j > 0 {
        f += a3_term(a[j - 1], aj, psi[j - 1] - psi[j]);
    }
    if j + 1 < n {
        f += a3_term(aj, a[j + 1], psi[j] - psi[j + 1]);
    }
    if j == 0 {
        f -= x;
    }
    if j + 1 == n {
        f -= x;
    }
    f
}

fn golden_min(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, tol: f64) -> f64 {
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut x1 = hi - g * (hi - lo);
    let mut x2 = lo + g * (hi - lo);
    let (mut f1, mut f2) = (f(x1), f(x2));
    while hi - lo > tol {
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - g * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + g * (hi - lo);
            f2 = f(x2);
        }
    }
    let mid = 0.5 * (lo + hi);
    // the bracket ends are candidates too (the optimum often sits at a = 1)
    [(lo, f(lo)), (mid, f(mid)), (hi, f(hi))]
        .into_iter()
        .fold((mid, f64::INFINITY), |b, c| if c.1 < b.1 { c } else { b })
        .0
}

/// Minimize `total_at(r)` over the weights with partition and angles fixed.
pub fn coordinate_descent(
    spec: &HamiltonianSpec,
    r: f64,
    partition: Vec<f64>,
    psi: Vec<f64>,
    start: Vec<f64>,
) -> Result<(BoundData, BoundValue)> {
    let data = BoundData::new(partition, psi, start)?;
    data.check_domain(spec.domain())?;
    let cells = cell_integrals(spec, &data.partition, &data.psi)?;
    let BoundData { partition, psi, mut a } = data;
    for x in a.iter_mut() {
        *x = x.max(A_FLOOR);
    }
    let (lo, hi) = (A_FLOOR.ln(), 0.0);
    let mut best = assemble(&cells, &psi, &a, false)?.total_at(r);
    for _ in 0..500 {
        for j in 0..a.len() {
            let x = golden_min(|x| local_cost(r, &cells, &psi, &a, j, x), lo, hi, 1e-9);
            if local_cost(r, &cells, &psi, &a, j, x) < local_cost(r, &cells, &psi, &a, j, a[j].ln()) {
                a[j] = x.exp().min(1.0);
            }
        }
        let now = assemble(&cells, &psi, &a, false)?.total_at(r);
        let gain = best - now;
        best = best.min(now);
        if gain <= 1e-6 * now.abs().max(1e-300) {
            break;
        }
    }
    let value = assemble(&cells, &psi, &a, false)?;
    Ok((BoundData { partition, psi, a }, value))
}

/// Circular-mean angles on `partition`, then coordinate descent from `start`.
fn descend_on(spec: &HamiltonianSpec, r: f64, partition: Vec<f64>, start: Vec<f64>) -> Result<(BoundData, BoundValue)> {
    let psi = circular_means(spec, &partition)?;
    coordinate_descent(spec, r, partition, psi, start)
}

fn natural_partition(spec: &HamiltonianSpec) -> Result<Vec<f64>> {
    let pieces = det_zero_pieces(spec)?;
    let mut y = vec![pieces[0].start];
    y.extend(pieces.iter().map(|p| p.end));
    Ok(y)
}

fn better(a: (BoundData, BoundValue), b: (BoundData, BoundValue), r: f64) -> (BoundData, BoundValue) {
    if b.1.total_at(r) < a.1.total_at(r) { b } else { a }
}

/// Choose bound data for radius `z_abs` with the given strategy.
///
/// Profiles whose angle has a usable modulus start from the recipe and keep
/// it as a candidate; other specs start from their natural pieces with `a = 1`.
pub fn optimize_bound(spec: &HamiltonianSpec, z_abs: f64, strategy: Strategy) -> Result<(BoundData, BoundValue)> {
    if !(z_abs > 0.0) || !z_abs.is_finite() {
        return Err(Error::input(format!("radius must be positive, got {z_abs}")));
    }
    det_zero_pieces(spec)?;
    let recipe = match spec.as_profile() {
        Some(p) => match modulus_for(p).and_then(|m| thm14_recipe(spec, z_abs, &m)) {
            Ok(x) => Some(x),
            Err(e) if strategy == Strategy::Recipe => return Err(e),
            Err(_) => None,
        },
        None if strategy == Strategy::Recipe => {
            return Err(Error::Inapplicable(format!("the recipe needs a profile, got {}", spec.kind_name())))
        }
        None => None,
    };
    if strategy == Strategy::Recipe {
        return Ok(recipe.expect("handled above"));
    }
    let cd = match &recipe {
        Some((d, v)) => {
            let mean = descend_on(spec, z_abs, d.partition.clone(), d.a.clone())?;
            let kept = coordinate_descent(spec, z_abs, d.partition.clone(), d.psi.clone(), d.a.clone())?;
            better(better((d.clone(), *v), mean, z_abs), kept, z_abs)
        }
        None => {
            let y = natural_partition(spec)?;
            let n = y.len() - 1;
            descend_on(spec, z_abs, y, vec![1.0; n])?
        }
    };
    if strategy == Strategy::CoordinateDescent {
        return Ok(cd);
    }
    let top = cd.0.cells().next_power_of_two().saturating_mul(2).clamp(1, 1 << 20);
    let mut best: Option<(BoundData, BoundValue)> = None;
    let mut n = 1usize;
    while n <= top {
        let cand = descend_on(spec, z_abs, equidistant(spec.domain(), n), vec![1.0; n])?;
        best = Some(match best {
            None => cand,
            Some(b) => better(b, cand, z_abs),
        });
        n *= 2;
    }
    Ok(better(cd, best.expect("at least one dyadic candidate"), z_abs))
}

/// `(N − 1)·½log 2`: the most the exact third constant can save.
pub fn a3_sandwich_gap(cells: usize) -> f64 {
    cells.saturating_sub(1) as f64 * 0.5 * LN_2
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;
    use crate::hamiltonian::{DensityFn, HamburgerSpec};
    use crate::monodromy::max_modulus;

    fn burger(l: &[f64], a: &[f64]) -> HamiltonianSpec {
        HamiltonianSpec::Hamburger(HamburgerSpec::new(l.to_vec(), a.to_vec()).unwrap())
    }

    fn holder(alpha: f64) -> HamiltonianSpec {
        HamiltonianSpec::Profile(
            AngleProfile::new((0.0, 1.0), AngleFn::HolderPower { c: 1.0, alpha }, DensityFn::Const(1.0)).unwrap(),
        )
    }

    fn orthogonal(phi: f64) -> f64 {
        phi + 0.5 * PI
    }

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * (1.0 + b.abs())
    }

    #[test]
    fn aligned_and_orthogonal_single_cell() {
        let spec = burger(&[2.5], &[0.4]);
        let v = evaluate_bound(&spec, &BoundData::new(vec![0.0, 2.5], vec![0.4], vec![1.0]).unwrap()).unwrap();
        assert!(close(v.a1, 2.5, 1e-15) && v.a2.abs() < 1e-15 && v.a3 == 0.0 && v.a4 == 0.0);
        let v = evaluate_bound(&spec, &BoundData::new(vec![0.0, 2.5], vec![orthogonal(0.4)], vec![1.0]).unwrap())
            .unwrap();
        assert!(v.a1.abs() < 1e-15 && close(v.a2, 2.5, 1e-15));
    }

    #[test]
    fn two_segment_example() {
        let spec = burger(&[1.0, 1.0], &[0.0, PI / 2.0]);
        let data = BoundData::new(vec![0.0, 1.0, 2.0], vec![0.0, PI / 2.0], vec![1.0, 1.0]).unwrap();
        let v = evaluate_bound(&spec, &data).unwrap();
        assert!(close(v.a1, 2.0, 1e-15) && v.a2 < 1e-30 && v.a3.abs() < 1e-15 && v.a4 == 0.0);
        for r in [1.0, 10.0, 100.0] {
            let m = max_modulus(&spec, r, 65).unwrap();
            assert!(m <= v.total_at(r) + 1e-9);
        }
    }

    #[test]
    fn linear_slices_match_quadrature() {
        let spec = holder(1.0);
        let y = vec![0.0, 0.13, 0.5, 1.0];
        let psi = vec![0.3, -1.2, 2.0];
        let exact = cell_integrals(&spec, &y, &psi).unwrap();
        for j in 0..3 {
            let f = |t: f64| {
                let (s, c) = (t - psi[j]).sin_cos();
                [c * c, s * s]
            };
            let q = integrate_vec(f, y[j], y[j + 1], 1e-14, 16);
            assert!(close(exact[j][0], q[0], 1e-11) && close(exact[j][1], q[1], 1e-11));
        }
    }

    #[test]
    fn data_validation() {
        assert!(BoundData::new(vec![0.0, 1.0], vec![0.0], vec![1.5]).is_err());
        assert!(BoundData::new(vec![0.0, 0.0], vec![0.0], vec![1.0]).is_err());
        assert!(BoundData::new(vec![0.0, 1.0], vec![0.0, 1.0], vec![1.0]).is_err());
        let spec = burger(&[1.0], &[0.0]);
        let d = BoundData::new(vec![0.0, 2.0], vec![0.0], vec![1.0]).unwrap();
        assert!(evaluate_bound(&spec, &d).unwrap_err().is_input_error());
    }

    #[test]
    fn positive_determinant_rejected() {
        use crate::hamiltonian::ConstantSpec;
        use crate::mat2::Mat2;
        let spec = HamiltonianSpec::ConstantMatrix(ConstantSpec::new(Mat2::identity(), 1.0).unwrap());
        let d = BoundData::new(vec![0.0, 1.0], vec![0.0], vec![1.0]).unwrap();
        assert!(matches!(evaluate_bound(&spec, &d), Err(Error::Inapplicable(_))));
    }

    #[test]
    fn exact_a3_sandwich() {
        let spec = burger(&[0.3, 1.0, 0.2, 0.7], &[0.1, 1.4, -0.6, 2.9]);
        let data =
            BoundData::new(vec![0.0, 0.3, 1.3, 1.5, 2.2], vec![0.1, 1.4, -0.6, 2.9], vec![0.3, 0.9, 0.05, 0.6]).unwrap();
        let plain = evaluate_bound(&spec, &data).unwrap();
        let exact = evaluate_bound_with(&spec, &data, true).unwrap();
        assert!(exact.a3 <= plain.a3 + 1e-12);
        assert!(plain.a3 <= exact.a3 + a3_sandwich_gap(4) + 1e-12);
    }

    #[test]
    fn recipe_for_square_root_profile() {
        let spec = holder(0.5);
        let w = Modulus::power(1.0, 0.5).unwrap();
        let r = 1e4;
        let (data, v) = thm14_recipe(&spec, r, &w).unwrap();
        let delta = r.powf(-2.0 / 3.0);
        assert!(close(data.a[0], r.powf(-1.0 / 6.0), 1e-12));
        assert_eq!(data.cells(), (1.0 / delta).ceil() as usize);
        assert!(close(data.partition[1], delta, 1e-12));
        // the recipe's budget: 3 r^{2/3} + (1/3) log r
        let g = thm14_guarantee(&spec, r, &w);
        assert!(close(g, 3.0 * r.powf(2.0 / 3.0) + r.ln() / 3.0, 1e-12));
        assert!(v.total_at(r) <= g);
        // A1 = a²∫cos² sits just below a² L
        let a2l = r.powf(-1.0 / 3.0);
        assert!(v.a1 <= a2l && v.a1 >= 0.99 * a2l);
    }

    #[test]
    fn recipe_lipschitz_growth() {
        let spec = holder(1.0);
        let w = Modulus::power(1.0, 1.0).unwrap();
        for r in [1e4, 1e6] {
            let (_, v) = thm14_recipe(&spec, r, &w).unwrap();
            assert!(v.total_at(r) <= 3.0 * r.sqrt() + 0.5 * r.ln() + 1e-9);
            assert!(v.total_at(r) >= r.sqrt());
        }
    }

    #[test]
    fn recipe_input_errors() {
        let flat = HamiltonianSpec::Profile(
            AngleProfile::new((0.0, 1.0), AngleFn::Constant(0.2), DensityFn::Const(1.0)).unwrap(),
        );
        let w = Modulus::power(1.0, 0.5).unwrap();
        assert!(matches!(thm14_recipe(&flat, 10.0, &w), Err(Error::DegenerateModulus(_))));
        assert!(matches!(modulus_for(flat.as_profile().unwrap()), Err(Error::DegenerateModulus(_))));
        assert!(thm14_recipe(&holder(0.5), 0.5, &w).unwrap_err().is_input_error());
        assert!(matches!(thm14_recipe(&burger(&[1.0], &[0.0]), 10.0, &w), Err(Error::Inapplicable(_))));
    }

    #[test]
    fn romanov_constant_angle() {
        let spec = burger(&[2.0], &[0.7]);
        let fam = |_r: f64| BoundData::new(vec![0.0, 2.0], vec![0.7], vec![1.0]);
        let rep = romanov_check(&spec, 0.5, &fam, 1.0, &[1e2, 1e4]).unwrap();
        assert!(rep.all_ok() || rep.violated() == vec![1]);
        assert!(rep.rows.iter().all(|r| r.lhs[0].abs() < 1e-15 && r.lhs[2] == 0.0 && r.lhs[3] == 0.0));
        assert_eq!(rep.implied_k, 4.0);
    }

    #[test]
    fn romanov_hoelder_families() {
        let alpha = 0.5;
        let spec = holder(alpha);
        let grid = [1e2, 1e3, 1e4, 1e5];
        let tuned = |r: f64| romanov_family(&spec, r, alpha);
        let rep = romanov_check(&spec, 1.0 - alpha / 2.0, &tuned, 4.0, &grid).unwrap();
        assert!(rep.all_ok(), "{rep:?}");
        let w = Modulus::power(1.0, alpha).unwrap();
        let recipe = |r: f64| thm14_recipe(&spec, r, &w).map(|x| x.0);
        let rep = romanov_check(&spec, 1.0 / (1.0 + alpha), &recipe, 4.0, &grid).unwrap();
        assert!(rep.all_ok());
        let bad = |r: f64| {
            let n = 16;
            let a = (0..n).map(|j| if j % 2 == 0 { 1.0 } else { 1.0 / r }).collect();
            BoundData::new(equidistant((0.0, 1.0), n), vec![0.0; n], a)
        };
        let rep = romanov_check(&spec, 0.5, &bad, 1.0, &grid).unwrap();
        assert!(rep.violated().contains(&3));
    }

    #[test]
    fn optimizer_orders() {
        let spec = burger(&[1.0, 1.0], &[0.0, PI / 2.0]);
        let r = 100.0;
        let (_, cd) = optimize_bound(&spec, r, Strategy::CoordinateDescent).unwrap();
        let (_, dy) = optimize_bound(&spec, r, Strategy::DyadicScan).unwrap();
        assert!(dy.total_at(r) <= cd.total_at(r) + 1e-12);
        assert!(cd.total_at(r) <= 2.0 * r);
        let m = max_modulus(&spec, r, 129).unwrap();
        assert!(m <= dy.total_at(r) + 1e-9);
    }

    #[test]
    fn optimizer_constant_angle() {
        let spec = burger(&[1.0], &[0.3]);
        let r = 50.0;
        let (d, v) = optimize_bound(&spec, r, Strategy::CoordinateDescent).unwrap();
        assert!(v.a2 < 1e-25 && v.a3 == 0.0);
        // r a² + 2 log(1/a) is minimal at a² = 1/r
        assert!(close(d.a[0] * d.a[0], 1.0 / r, 1e-6));
        assert!(close(v.total_at(r), 1.0 + r.ln(), 1e-9));
    }

    #[test]
    fn optimizer_never_worse_than_recipe() {
        let spec = holder(0.5);
        let w = modulus_for(spec.as_profile().unwrap()).unwrap();
        for r in [1e3, 1e4] {
            let (_, rec) = thm14_recipe(&spec, r, &w).unwrap();
            let (_, cd) = optimize_bound(&spec, r, Strategy::CoordinateDescent).unwrap();
            assert!(cd.total_at(r) <= rec.total_at(r));
        }
    }

    #[test]
    fn circular_mean_of_linear_cell() {
        let spec = holder(1.0);
        let m = circular_means(&spec, &[0.0, 0.4, 1.0]).unwrap();
        assert!(close(m[0], 0.2, 1e-13) && close(m[1], 0.7, 1e-13));
    }
}
