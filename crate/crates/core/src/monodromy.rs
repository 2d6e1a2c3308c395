//! Fundamental solutions and monodromy matrices of `W' = -z W H J`.
//!
//! Hamburger specs have an exact polynomial representation; every spec kind
//! can be evaluated numerically as a log-scaled product of exactly
//! symplectic factors.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::hamiltonian::{AngleProfile, HamburgerSpec, HamiltonianSpec, Piece, PieceKind};
use crate::mat2::{Mat2, ScaledMat2, ScaledProduct};
use crate::poly::Poly;

pub type LogNorm = f64;

/// Default segment cap for polynomial products.
pub const POLY_CAP: usize = 2000;

/// `W(z) = Σ_k W_k z^k` with real coefficient matrices, stored per entry.
#[derive(Debug, Clone, PartialEq)]
pub struct MatrixPolynomial {
    pub entries: [[Poly<f64>; 2]; 2],
    /// Coefficient-wise magnitude envelope (the same product with absolute values).
    pub magnitude: [[Vec<f64>; 2]; 2],
}

impl MatrixPolynomial {
    pub fn degree_bound(&self) -> usize {
        self.entries[0][0].nominal_degree()
    }

    pub fn w22(&self) -> &Poly<f64> {
        &self.entries[1][1]
    }

    pub fn eval(&self, z: Complex64) -> Mat2<Complex64> {
        let e = &self.entries;
        Mat2::new(
            e[0][0].eval_complex(z),
            e[0][1].eval_complex(z),
            e[1][0].eval_complex(z),
            e[1][1].eval_complex(z),
        )
    }

    /// Largest deviation of the determinant polynomial from the constant 1,
    /// relative to its magnitude envelope, over all degrees.
    pub fn det_defect(&self) -> f64 {
        let e = &self.entries;
        let det = e[0][0].mul(&e[1][1]).add(&e[0][1].mul(&e[1][0]).scale(-1.0));
        let m = &self.magnitude;
        let env = Poly::new(m[0][0].clone())
            .mul(&Poly::new(m[1][1].clone()))
            .add(&Poly::new(m[0][1].clone()).mul(&Poly::new(m[1][0].clone())));
        det.coeffs
            .iter()
            .enumerate()
            .map(|(k, c)| {
                let target = if k == 0 { 1.0 } else { 0.0 };
                let scale = env.coeff(k).max(f64::MIN_POSITIVE);
                (c - target).abs() / scale.max(if k == 0 { 1.0 } else { 0.0 })
            })
            .fold(0.0, f64::max)
    }
}

/// Linear factor `I − z l ξξᵀJ` as `(constant, slope)` coefficient matrices.
fn factor_coeffs(l: f64, phi: f64) -> Mat2<(f64, f64)> {
    let (s, c) = phi.sin_cos();
    Mat2 {
        m11: (1.0, -l * c * s),
        m12: (0.0, l * c * c),
        m21: (0.0, -l * s * s),
        m22: (1.0, l * c * s),
    }
}

fn abs_linear_mul(v: &[f64], c0: f64, c1: f64) -> Vec<f64> {
    let mut out = vec![0.0; v.len() + 1];
    for (k, x) in v.iter().enumerate() {
        out[k] += x * c0.abs();
        out[k + 1] += x * c1.abs();
    }
    out
}

fn add_vec(a: &[f64], b: &[f64]) -> Vec<f64> {
    (0..a.len().max(b.len()))
        .map(|k| a.get(k).copied().unwrap_or(0.0) + b.get(k).copied().unwrap_or(0.0))
        .collect()
}

/// Exact coefficient product of the segment factors, left to right.
pub fn monodromy_poly(spec: &HamburgerSpec) -> Result<MatrixPolynomial> {
    monodromy_poly_capped(spec, POLY_CAP)
}

pub fn monodromy_poly_capped(spec: &HamburgerSpec, cap: usize) -> Result<MatrixPolynomial> {
    if spec.len() > cap {
        return Err(Error::CapExceeded { what: "segments", got: spec.len(), cap });
    }
    let one = Poly::constant(1.0);
    let zero = Poly::zero();
    let mut e = [[one.clone(), zero.clone()], [zero, one]];
    let mut m = [[vec![1.0], vec![0.0]], [vec![0.0], vec![1.0]]];
    for (l, phi) in spec.lengths.iter().zip(&spec.angles) {
        let f = factor_coeffs(*l, *phi);
        let f = [[f.m11, f.m12], [f.m21, f.m22]];
        let mut ne = e.clone();
        let mut nm = m.clone();
        for i in 0..2 {
            for k in 0..2 {
                ne[i][k] = e[i][0]
                    .mul_linear(f[0][k].0, f[0][k].1)
                    .add(&e[i][1].mul_linear(f[1][k].0, f[1][k].1));
                nm[i][k] = add_vec(
                    &abs_linear_mul(&m[i][0], f[0][k].0, f[0][k].1),
                    &abs_linear_mul(&m[i][1], f[1][k].0, f[1][k].1),
                );
            }
        }
        e = ne;
        m = nm;
    }
    Ok(MatrixPolynomial { entries: e, magnitude: m })
}

/// How curved angle profiles are discretized between refinement levels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FreezeMode {
    /// Piecewise-linear interpolation of φ on the substeps, mean density;
    /// each substep is propagated exactly.
    #[default]
    Chord,
    /// Angle frozen at the substep midpoint, mean density.
    Angle,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MonodromyOptions {
    /// Relative log-norm change accepted between refinements.
    pub tol: f64,
    /// Maximum number of step halvings.
    pub max_depth: usize,
    /// Substeps per curved piece at level 0.
    pub initial_steps: usize,
    pub freeze: FreezeMode,
}

impl Default for MonodromyOptions {
    fn default() -> Self {
        MonodromyOptions { tol: 1e-8, max_depth: 24, initial_steps: 4, freeze: FreezeMode::Chord }
    }
}

/// One exactly solvable step of the discretized system.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) enum Step {
    /// Constant angle; `mass = ∫ Tr H` over the step.
    Const { angle: f64, mass: f64 },
    /// Angle linear from `phi_u` to `phi_v` over length `h`, density `d`.
    Linear { phi_u: f64, phi_v: f64, h: f64, d: f64 },
    /// Constant (possibly invertible) H over length `h`.
    Matrix { m: Mat2<f64>, h: f64 },
}

/// `cosh(w) I + sinh(w)/w · A` for traceless `A` with `A² = w2 · I`, scaled.
fn exp_traceless(a: Mat2<Complex64>, w2: Complex64) -> Result<ScaledMat2<Complex64>> {
    let w = w2.sqrt();
    let s = w.re.abs();
    let ep = (w - s).exp();
    let em = (-w - s).exp();
    let ch = (ep + em) * 0.5;
    let shc = if w.norm() < 1e-3 {
        let w2 = w * w;
        (Complex64::new(1.0, 0.0) + w2 / 6.0 + w2 * w2 / 120.0 + w2 * w2 * w2 / 5040.0)
            * (-s).exp()
    } else {
        (ep - em) * 0.5 / w
    };
    let m = Mat2::new(ch + shc * a.m11, shc * a.m12, shc * a.m21, ch + shc * a.m22);
    ScaledMat2::from_parts(m, s)
}

fn rot_c(theta: f64) -> Mat2<Complex64> {
    Mat2::<f64>::rotation(theta).to_complex()
}

impl Step {
    /// The step's transfer matrix at `z`.
    pub(crate) fn matrix(&self, z: Complex64) -> Result<ScaledMat2<Complex64>> {
        match *self {
            Step::Const { angle, mass } => {
                let f = Mat2::identity() - crate::mat2::complex_scale(&Mat2::rank_one_j(angle), z * mass);
                Ok(ScaledMat2 { unit: f, log_scale: 0.0 })
            }
            Step::Linear { phi_u, phi_v, h, d } => {
                let c = (phi_v - phi_u) / h;
                // U' = U K with K = [[0, zd − c], [c, 0]], K² = c(zd − c) I
                let k = Mat2::new(
                    Complex64::new(0.0, 0.0),
                    (z * d - c) * h,
                    Complex64::new(c * h, 0.0),
                    Complex64::new(0.0, 0.0),
                );
                let w2 = (z * d - c) * c * h * h;
                let e = exp_traceless(k, w2)?;
                Ok(ScaledMat2 { unit: rot_c(phi_u) * e.unit * rot_c(-phi_v), log_scale: e.log_scale })
            }
            Step::Matrix { m, h } => {
                // exp(−z h M J); (MJ)² = −det(M) I for symmetric M
                let mj = m * Mat2::j();
                let a = crate::mat2::complex_scale(&mj, -z * h);
                let w2 = -(z * z) * (h * h * m.det());
                exp_traceless(a, w2)
            }
        }
    }
}

/// Pieces plus everything needed to discretize them at a refinement level.
#[derive(Debug, Clone)]
pub struct Propagator<'a> {
    spec: &'a HamiltonianSpec,
    pieces: Vec<Piece>,
    pub opts: MonodromyOptions,
}

/// Result of [`monodromy_at`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Monodromy {
    pub w: ScaledMat2<Complex64>,
    pub log_norm: LogNorm,
    /// Refinement level at which the step size settled (0 for exact kinds).
    pub level: usize,
}

impl<'a> Propagator<'a> {
    pub fn new(spec: &'a HamiltonianSpec, opts: MonodromyOptions) -> Result<Self> {
        let pieces = match spec {
            HamiltonianSpec::ConstantMatrix(c) if !c.is_rank_one() => Vec::new(),
            _ => spec.pieces()?,
        };
        Ok(Propagator { spec, pieces, opts })
    }

    pub fn spec(&self) -> &HamiltonianSpec {
        self.spec
    }

    /// True when some piece needs step refinement.
    pub fn is_refined(&self) -> bool {
        self.pieces.iter().any(|p| p.kind == PieceKind::Smooth)
    }

    /// Visit the steps of the discretization at `level`, in order.
    pub(crate) fn for_each_step(&self, level: usize, mut f: impl FnMut(Step) -> Result<()>) -> Result<()> {
        if let HamiltonianSpec::ConstantMatrix(c) = self.spec {
            if !c.is_rank_one() {
                return f(Step::Matrix { m: c.matrix, h: c.length });
            }
        }
        let profile = self.spec.as_profile();
        for p in &self.pieces {
            match p.kind {
                PieceKind::Const { angle, density } => {
                    f(Step::Const { angle, mass: density * p.len() })?
                }
                PieceKind::Linear { angle0, slope, density } => f(Step::Linear {
                    phi_u: angle0,
                    phi_v: angle0 + slope * p.len(),
                    h: p.len(),
                    d: density,
                })?,
                PieceKind::Smooth => {
                    let prof = profile.ok_or_else(|| Error::numerical("curved piece outside a profile"))?;
                    smooth_steps(prof, p, self.opts.initial_steps << level, self.opts.freeze, &mut f)?;
                }
            }
        }
        Ok(())
    }

    fn product_at_level(&self, z: Complex64, level: usize) -> Result<ScaledMat2<Complex64>> {
        let mut acc = ScaledProduct::new();
        self.for_each_step(level, |s| {
            let m = s.matrix(z)?;
            acc.push_scaled(&m);
            Ok(())
        })?;
        let w = acc.finish()?;
        if !w.unit.is_finite() || !w.log_scale.is_finite() {
            return Err(Error::numerical(format!("propagation overflow at z = {z}")));
        }
        Ok(w)
    }

    /// Monodromy matrix at `z`, refining curved pieces until the log-norm settles.
    pub fn at(&self, z: Complex64) -> Result<Monodromy> {
        if z == Complex64::new(0.0, 0.0) {
            return Ok(Monodromy { w: ScaledMat2::identity(), log_norm: 0.0, level: 0 });
        }
        let w = self.product_at_level(z, 0)?;
        if !self.is_refined() {
            return Ok(Monodromy { w, log_norm: w.log_norm(), level: 0 });
        }
        let mut prev = w.log_norm();
        for level in 1..=self.opts.max_depth {
            let w = self.product_at_level(z, level)?;
            let last = w.log_norm();
            if (last - prev).abs() < self.opts.tol * last.abs().max(1.0) {
                return Ok(Monodromy { w, log_norm: last, level });
            }
            prev = last;
        }
        let last = self.product_at_level(z, self.opts.max_depth)?.log_norm();
        Err(Error::NonConvergence { depth: self.opts.max_depth, prev, last })
    }

    /// `max_{θ} log‖W(r e^{iθ})‖` over `samples` equally spaced `θ ∈ [0, π]`,
    /// optionally polished by golden-section search around the best sample.
    pub fn max_modulus(&self, r: f64, samples: usize, refine: bool) -> Result<LogNorm> {
        if !(r > 0.0) || !r.is_finite() {
            return Err(Error::input(format!("max_modulus: radius must be positive, got {r}")));
        }
        if samples < 4 {
            return Err(Error::input("max_modulus: need at least 4 samples"));
        }
        let h = std::f64::consts::PI / (samples - 1) as f64;
        let f = |theta: f64| self.at(Complex64::from_polar(r, theta)).map(|m| m.log_norm);
        let vals: Vec<f64> = (0..samples)
            .into_par_iter()
            .map(|k| f(k as f64 * h))
            .collect::<Result<Vec<_>>>()?;
        let (kbest, mut best) = vals
            .iter()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |(bk, bv), (k, v)| if *v > bv { (k, *v) } else { (bk, bv) });
        if refine {
            let lo = (kbest as f64 - 1.0).max(0.0) * h;
            let hi = ((kbest + 1).min(samples - 1)) as f64 * h;
            let (_, v) = golden_max(&f, lo, hi, 30)?;
            best = best.max(v);
        }
        Ok(best)
    }
}

fn golden_max(f: &impl Fn(f64) -> Result<f64>, mut a: f64, mut b: f64, iters: usize) -> Result<(f64, f64)> {
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = b - g * (b - a);
    let mut x2 = a + g * (b - a);
    let mut f1 = f(x1)?;
    let mut f2 = f(x2)?;
    for _ in 0..iters {
        if f1 < f2 {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + g * (b - a);
            f2 = f(x2)?;
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - g * (b - a);
            f1 = f(x1)?;
        }
    }
    Ok(if f1 > f2 { (x1, f1) } else { (x2, f2) })
}

fn smooth_steps(
    p: &AngleProfile,
    piece: &Piece,
    n: usize,
    mode: FreezeMode,
    f: &mut impl FnMut(Step) -> Result<()>,
) -> Result<()> {
    let h = piece.len() / n as f64;
    let mut u = piece.start;
    let mut phi_u = p.phi.eval(u);
    for i in 0..n {
        let v = if i + 1 == n { piece.end } else { piece.start + (i + 1) as f64 * h };
        let hh = v - u;
        let d = p.density.integral(u, v) / hh;
        let phi_v = p.phi.eval(v);
        match mode {
            FreezeMode::Chord => f(Step::Linear { phi_u, phi_v, h: hh, d })?,
            FreezeMode::Angle => f(Step::Const { angle: p.phi.eval(0.5 * (u + v)), mass: d * hh })?,
        }
        u = v;
        phi_u = phi_v;
    }
    Ok(())
}

/// Monodromy matrix and log-norm with default options.
pub fn monodromy_at(spec: &HamiltonianSpec, z: Complex64) -> Result<Monodromy> {
    Propagator::new(spec, MonodromyOptions::default())?.at(z)
}

/// `max_{|z|=r} log‖W(z)‖` sampled on `samples` angles in `[0, π]` with refinement.
pub fn max_modulus(spec: &HamiltonianSpec, r: f64, samples: usize) -> Result<LogNorm> {
    Propagator::new(spec, MonodromyOptions::default())?.max_modulus(r, samples, true)
}

/// `p_n(z) = (1,0) W(t_{n−1}, z) ξ_{φ_n}` together with the predicted leading coefficient.
#[derive(Debug, Clone, PartialEq)]
pub struct PnPolynomial {
    pub poly: Poly<f64>,
    /// `(Π_{j<n} l_j) cos φ_1 Π_{j<n} sin(φ_{j+1} − φ_j)`.
    pub predicted_leading: f64,
    /// False when the prediction check was skipped (degenerate jump or underflow).
    pub checked: bool,
}

/// The polynomials `p_1..p_N`, verifying each leading coefficient.
pub fn pn_polynomials(spec: &HamburgerSpec) -> Result<Vec<PnPolynomial>> {
    if spec.len() > POLY_CAP {
        return Err(Error::CapExceeded { what: "segments", got: spec.len(), cap: POLY_CAP });
    }
    let mut row = [Poly::constant(1.0), Poly::zero()];
    let mut pred = spec.angles[0].cos();
    let mut degenerate = false;
    let mut out = Vec::with_capacity(spec.len());
    for n in 0..spec.len() {
        let (s, c) = spec.angles[n].sin_cos();
        let poly = row[0].scale(c).add(&row[1].scale(s));
        if n > 0 {
            let jump = (spec.angles[n] - spec.angles[n - 1]).sin();
            degenerate |= jump.abs() < 1e-13;
            pred *= spec.lengths[n - 1] * jump;
        }
        let checked = !degenerate && pred.abs() > 1e-280 && spec.angles[0].cos().abs() >= 1e-13;
        if checked {
            let lead = poly.coeff(n);
            if (lead - pred).abs() > 1e-9 * pred.abs() {
                return Err(Error::numerical(format!(
                    "leading coefficient of p_{} is {lead}, expected {pred}",
                    n + 1
                )));
            }
        }
        out.push(PnPolynomial { poly, predicted_leading: pred, checked });
        let f = factor_coeffs(spec.lengths[n], spec.angles[n]);
        row = [
            row[0].mul_linear(f.m11.0, f.m11.1).add(&row[1].mul_linear(f.m21.0, f.m21.1)),
            row[0].mul_linear(f.m12.0, f.m12.1).add(&row[1].mul_linear(f.m22.0, f.m22.1)),
        ];
    }
    Ok(out)
}

/// Both sides of the finite Herglotz-kernel identity at nonreal `z`:
/// `(w12 conj(w11) − w11 conj(w12)) / (z − conj z)` and `Σ |p_n(z)|² l_n`.
pub fn herglotz_identity(spec: &HamburgerSpec, z: Complex64) -> Result<(f64, f64)> {
    if z.im == 0.0 {
        return Err(Error::input("herglotz_identity needs nonreal z"));
    }
    let mut w = Mat2::<Complex64>::identity();
    let mut sum = 0.0;
    for (l, phi) in spec.lengths.iter().zip(&spec.angles) {
        let (s, c) = phi.sin_cos();
        let p = w.m11 * c + w.m12 * s;
        sum += p.norm_sqr() * l;
        w = w * (Mat2::identity() - crate::mat2::complex_scale(&Mat2::rank_one_j(*phi), z * *l));
    }
    let num = w.m12 * w.m11.conj() - w.m11 * w.m12.conj();
    let lhs = (num / (z - z.conj())).re;
    Ok((lhs, sum))
}
