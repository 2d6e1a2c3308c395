//! 2x2 matrices over real or complex entries, the special matrices of the
//! theory (J, ξ_φ, D(a,b), Ω(a,ψ)) and the closed-form norms of the
//! Ω-conjugation lemma.

use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex;
use num_traits::{Float, One, Zero};

use crate::error::{Error, Result};
use crate::scalar::{Entry, Real};

/// A 2x2 matrix `[[m11, m12], [m21, m22]]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mat2<E> {
    pub m11: E,
    pub m12: E,
    pub m21: E,
    pub m22: E,
}

impl<E: Entry> Mat2<E> {
    /// Unchecked constructor.
    pub const fn new(m11: E, m12: E, m21: E, m22: E) -> Self {
        Mat2 { m11, m12, m21, m22 }
    }

    /// Constructor rejecting NaN and infinite entries.
    pub fn try_new(m11: E, m12: E, m21: E, m22: E) -> Result<Self> {
        let m = Mat2::new(m11, m12, m21, m22);
        if m.is_finite() {
            Ok(m)
        } else {
            Err(Error::input(format!("non-finite matrix entry in {m:?}")))
        }
    }

    pub fn from_rows(rows: [[E; 2]; 2]) -> Self {
        Mat2::new(rows[0][0], rows[0][1], rows[1][0], rows[1][1])
    }

    pub fn identity() -> Self {
        Mat2::new(E::e_one(), E::e_zero(), E::e_zero(), E::e_one())
    }

    pub fn zero() -> Self {
        Mat2::new(E::e_zero(), E::e_zero(), E::e_zero(), E::e_zero())
    }

    /// The symplectic matrix `J = [[0, -1], [1, 0]]`.
    pub fn j() -> Self {
        Mat2::new(E::e_zero(), -E::e_one(), E::e_one(), E::e_zero())
    }

    pub fn diag(a: E, b: E) -> Self {
        Mat2::new(a, E::e_zero(), E::e_zero(), b)
    }

    pub fn rows(&self) -> [[E; 2]; 2] {
        [[self.m11, self.m12], [self.m21, self.m22]]
    }

    pub fn is_finite(&self) -> bool {
        self.m11.all_finite() && self.m12.all_finite() && self.m21.all_finite() && self.m22.all_finite()
    }

    pub fn det(&self) -> E {
        self.m11 * self.m22 - self.m12 * self.m21
    }

    pub fn trace(&self) -> E {
        self.m11 + self.m22
    }

    pub fn transpose(&self) -> Self {
        Mat2::new(self.m11, self.m21, self.m12, self.m22)
    }

    pub fn conj(&self) -> Self {
        Mat2::new(self.m11.conjugate(), self.m12.conjugate(), self.m21.conjugate(), self.m22.conjugate())
    }

    pub fn adjoint(&self) -> Self {
        self.conj().transpose()
    }

    /// Inverse; `None` when the determinant is exactly zero.
    pub fn inverse(&self) -> Option<Self> {
        let d = self.det();
        if d == E::e_zero() {
            return None;
        }
        Some(Mat2::new(self.m22 / d, -self.m12 / d, -self.m21 / d, self.m11 / d))
    }

    pub fn scale(&self, s: E::Real) -> Self {
        Mat2::new(self.m11.scale(s), self.m12.scale(s), self.m21.scale(s), self.m22.scale(s))
    }

    pub fn mul_entry(&self, s: E) -> Self {
        Mat2::new(self.m11 * s, self.m12 * s, self.m21 * s, self.m22 * s)
    }

    pub fn max_abs(&self) -> E::Real {
        self.m11.magnitude().max(self.m12.magnitude()).max(self.m21.magnitude()).max(self.m22.magnitude())
    }

    pub fn frobenius_norm(&self) -> E::Real {
        (self.m11.magnitude_sq() + self.m12.magnitude_sq() + self.m21.magnitude_sq() + self.m22.magnitude_sq()).sqrt()
    }

    /// Largest singular value.
    ///
    /// With `F = ‖m‖_F²` and `u = det/|det|`, the two square roots below are
    /// `sqrt(F ± 2|det|)` = `σ₁ ± σ₂`, each formed without cancellation.
    pub fn spectral_norm(&self) -> E::Real {
        let s = self.max_abs();
        if s == E::Real::zero() {
            return s;
        }
        let m = self.scale(s.recip());
        let det = m.det();
        let dabs = det.magnitude();
        let u = if dabs == E::Real::zero() { E::e_one() } else { det.scale(dabs.recip()) };
        let ud = u * m.m22.conjugate();
        let uc = u * m.m21.conjugate();
        let plus = ((m.m11 + ud).magnitude_sq() + (m.m12 - uc).magnitude_sq()).sqrt();
        let minus = ((m.m11 - ud).magnitude_sq() + (m.m12 + uc).magnitude_sq()).sqrt();
        s * (plus + minus) * E::Real::lit(0.5)
    }

    /// `(row) · self`, row vector times matrix.
    pub fn row_mul(&self, row: [E; 2]) -> [E; 2] {
        [
            row[0] * self.m11 + row[1] * self.m21,
            row[0] * self.m12 + row[1] * self.m22,
        ]
    }

    /// `self · (col)`.
    pub fn mul_vec(&self, col: [E; 2]) -> [E; 2] {
        [
            self.m11 * col[0] + self.m12 * col[1],
            self.m21 * col[0] + self.m22 * col[1],
        ]
    }
}

impl<T: Real> Mat2<T> {
    /// Embed a real matrix into the complex matrices.
    pub fn to_complex(&self) -> Mat2<Complex<T>> {
        Mat2::new(
            Complex::new(self.m11, T::zero()),
            Complex::new(self.m12, T::zero()),
            Complex::new(self.m21, T::zero()),
            Complex::new(self.m22, T::zero()),
        )
    }

    /// Rotation `exp(θJ) = [[cos θ, -sin θ], [sin θ, cos θ]]`.
    pub fn rotation(theta: T) -> Self {
        let (s, c) = theta.sin_cos();
        Mat2::new(c, -s, s, c)
    }

    /// `ξ_φ ξ_φᵀ`.
    pub fn rank_one(phi: T) -> Self {
        let (s, c) = phi.sin_cos();
        Mat2::new(c * c, c * s, c * s, s * s)
    }

    /// `ξ_φ ξ_φᵀ J = [[cs, -c²], [s², -cs]]`.
    pub fn rank_one_j(phi: T) -> Self {
        let (s, c) = phi.sin_cos();
        Mat2::new(c * s, -c * c, s * s, -c * s)
    }
}

impl<E: Entry> Add for Mat2<E> {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Mat2::new(self.m11 + o.m11, self.m12 + o.m12, self.m21 + o.m21, self.m22 + o.m22)
    }
}

impl<E: Entry> Sub for Mat2<E> {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Mat2::new(self.m11 - o.m11, self.m12 - o.m12, self.m21 - o.m21, self.m22 - o.m22)
    }
}

impl<E: Entry> Neg for Mat2<E> {
    type Output = Self;
    fn neg(self) -> Self {
        Mat2::new(-self.m11, -self.m12, -self.m21, -self.m22)
    }
}

impl<E: Entry> Mul for Mat2<E> {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        Mat2::new(
            self.m11 * o.m11 + self.m12 * o.m21,
            self.m11 * o.m12 + self.m12 * o.m22,
            self.m21 * o.m11 + self.m22 * o.m21,
            self.m21 * o.m12 + self.m22 * o.m22,
        )
    }
}

/// Unit vector `ξ_φ = (cos φ, sin φ)`.
pub fn xi<T: Real>(phi: T) -> [T; 2] {
    let (s, c) = phi.sin_cos();
    [c, s]
}

/// `D(a, b) = diag(a, b)`.
pub fn d_matrix<T: Real>(a: T, b: T) -> Mat2<T> {
    Mat2::diag(a, b)
}

/// `Ω(a, ψ) = D(a, 1/a) · exp(-ψJ)`.
pub fn omega_matrix<T: Real>(a: T, psi: T) -> Result<Mat2<T>> {
    if !(a > T::zero()) || !a.is_finite() {
        return Err(Error::input(format!("omega_matrix: a must be positive, got {a}")));
    }
    let (s, c) = psi.sin_cos();
    let ia = a.recip();
    Ok(Mat2::new(a * c, a * s, -s * ia, c * ia))
}

/// The three closed-form norms around `Ω(a,ψ)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Lemma5Norms<T> {
    /// `‖Ω(a,ψ)‖ = max(a, 1/a)`.
    pub omega: T,
    /// `‖Ω(a,ψ) ξ_φξ_φᵀJ Ω(a,ψ)⁻¹‖ = a²cos²(φ−ψ) + sin²(φ−ψ)/a²`.
    pub conjugated_rank_one: T,
    /// `‖Ω(a,ψ) Ω(b,φ)⁻¹‖`.
    pub transition: T,
}

/// The vectors `v₊`, `v₋` entering the transition norm.
pub fn lemma5_v<T: Real>(a: T, psi: T, phi: T, b: T) -> ([T; 2], [T; 2]) {
    let sigma = phi - psi;
    let (s, c) = sigma.sin_cos();
    let (c, s) = (c.abs(), s.abs());
    let r1 = a / b;
    let r2 = a * b;
    let (p, q) = (r1.max(r1.recip()), r1.min(r1.recip()));
    let (pp, qq) = (r2.max(r2.recip()), r2.min(r2.recip()));
    ([p * c, pp * s], [q * c, qq * s])
}

pub fn lemma5_norms<T: Real>(a: T, psi: T, phi: T, b: T) -> Result<Lemma5Norms<T>> {
    for (name, v) in [("a", a), ("b", b)] {
        if !(v > T::zero()) || !v.is_finite() {
            return Err(Error::input(format!("lemma5_norms: {name} must be positive, got {v}")));
        }
    }
    let (s, c) = (phi - psi).sin_cos();
    let a2 = a * a;
    let (vp, vm) = lemma5_v(a, psi, phi, b);
    let diff = (vp[0] - vm[0]).hypot(vp[1] - vm[1]);
    let sum = (vp[0] + vm[0]).hypot(vp[1] + vm[1]);
    let half = T::lit(0.5);
    Ok(Lemma5Norms {
        omega: a.max(a.recip()),
        conjugated_rank_one: a2 * c * c + s * s / a2,
        transition: (T::one() + diff * (diff + sum) * half).sqrt(),
    })
}

/// A matrix stored as `exp(log_scale) · unit` with `‖unit‖ = 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScaledMat2<E: Entry> {
    pub unit: Mat2<E>,
    pub log_scale: E::Real,
}

impl<E: Entry> ScaledMat2<E> {
    pub fn identity() -> Self {
        ScaledMat2 { unit: Mat2::identity(), log_scale: E::Real::zero() }
    }

    /// Normalize a nonzero finite matrix.
    pub fn from_mat(m: Mat2<E>) -> Result<Self> {
        ScaledMat2 { unit: m, log_scale: E::Real::zero() }.renormalized()
    }

    /// `exp(log_scale) · m`, normalized.
    pub fn from_parts(m: Mat2<E>, log_scale: E::Real) -> Result<Self> {
        ScaledMat2 { unit: m, log_scale }.renormalized()
    }

    pub fn renormalized(self) -> Result<Self> {
        let n = self.unit.spectral_norm();
        if !(n > E::Real::zero()) || !n.is_finite() {
            return Err(Error::numerical(format!(
                "cannot normalize matrix with norm {n}"
            )));
        }
        Ok(ScaledMat2 { unit: self.unit.scale(n.recip()), log_scale: self.log_scale + n.ln() })
    }

    pub fn log_norm(&self) -> E::Real {
        self.log_scale + self.unit.spectral_norm().ln()
    }

    /// `log|det|` of the represented matrix.
    pub fn log_abs_det(&self) -> E::Real {
        self.unit.det().magnitude().ln() + self.log_scale + self.log_scale
    }

    /// `|det − 1|` of the represented matrix relative to `|m11 m22| + |m12 m21|`,
    /// the size of the terms whose difference forms the determinant.
    pub fn det_defect(&self) -> E::Real {
        let u = &self.unit;
        let target = E::from_real((-(self.log_scale + self.log_scale)).exp());
        let terms = (u.m11 * u.m22).magnitude() + (u.m12 * u.m21).magnitude();
        (u.det() - target).magnitude() / terms
    }

    /// The represented matrix; entries overflow once `log_scale` exceeds ~709.
    pub fn to_mat(&self) -> Mat2<E> {
        self.unit.scale(self.log_scale.exp())
    }

    pub fn mul(&self, o: &Self) -> Result<Self> {
        ScaledMat2 { unit: self.unit * o.unit, log_scale: self.log_scale + o.log_scale }
            .renormalized()
    }
}

/// Left-to-right product accumulator with lazy renormalization: the running
/// matrix is rescaled whenever its Frobenius norm leaves `[1e-2, 1e2]`.
#[derive(Debug, Clone)]
pub struct ScaledProduct<E: Entry> {
    acc: Mat2<E>,
    log_scale: E::Real,
}

impl<E: Entry> Default for ScaledProduct<E> {
    fn default() -> Self {
        Self::new()
    }
}

impl<E: Entry> ScaledProduct<E> {
    pub fn new() -> Self {
        ScaledProduct { acc: Mat2::identity(), log_scale: E::Real::zero() }
    }

    pub fn from_scaled(m: ScaledMat2<E>) -> Self {
        ScaledProduct { acc: m.unit, log_scale: m.log_scale }
    }

    fn settle(&mut self) {
        let f = self.acc.frobenius_norm();
        let lo = E::Real::lit(1e-2);
        let hi = E::Real::lit(1e2);
        if (f < lo || f > hi) && f > E::Real::zero() && f.is_finite() {
            self.acc = self.acc.scale(f.recip());
            self.log_scale = self.log_scale + f.ln();
        }
    }

    /// Right-multiply by `m`.
    pub fn push(&mut self, m: &Mat2<E>) {
        self.acc = self.acc * *m;
        self.settle();
    }

    /// Right-multiply by a scaled factor.
    pub fn push_scaled(&mut self, m: &ScaledMat2<E>) {
        self.acc = self.acc * m.unit;
        self.log_scale = self.log_scale + m.log_scale;
        self.settle();
    }

    pub fn current(&self) -> (Mat2<E>, E::Real) {
        (self.acc, self.log_scale)
    }

    pub fn finish(&self) -> Result<ScaledMat2<E>> {
        ScaledMat2 { unit: self.acc, log_scale: self.log_scale }.renormalized()
    }
}

/// Multiply a real constant into a complex matrix: `z · m`.
pub fn complex_scale<T: Real>(m: &Mat2<T>, z: Complex<T>) -> Mat2<Complex<T>> {
    Mat2::new(z * m.m11, z * m.m12, z * m.m21, z * m.m22)
}

impl<T: Real> Mat2<Complex<T>> {
    /// Real parts, used when the matrix is known to be real.
    pub fn re(&self) -> Mat2<T> {
        Mat2::new(self.m11.re, self.m12.re, self.m21.re, self.m22.re)
    }

    pub fn is_zero(&self) -> bool {
        self.m11.is_zero() && self.m12.is_zero() && self.m21.is_zero() && self.m22.is_zero()
    }

    pub fn identity_c() -> Self {
        Mat2::new(Complex::one(), Complex::zero(), Complex::zero(), Complex::one())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::{FRAC_PI_2, PI};

    /// Oracle: sqrt of the largest eigenvalue of the Gram matrix mᴴm.
    fn gram_norm(m: &Mat2<Complex64>) -> f64 {
        let g = m.adjoint() * *m;
        let p = g.m11.re;
        let q = g.m22.re;
        let r = g.m12.norm();
        ((p + q) / 2.0 + (((p - q) / 2.0).powi(2) + r * r).sqrt()).sqrt()
    }

    fn close(a: f64, b: f64, rel: f64) -> bool {
        (a - b).abs() <= rel * a.abs().max(b.abs()).max(1e-300)
    }

    #[test]
    fn spectral_norm_examples() {
        assert_eq!(Mat2::<f64>::identity().spectral_norm(), 1.0);
        assert!(close(Mat2::diag(2.0, 0.5).spectral_norm(), 2.0, 1e-15));
        let golden = (1.0 + 5f64.sqrt()) / 2.0;
        assert!(close(Mat2::new(1.0, 1.0, 0.0, 1.0).spectral_norm(), golden, 1e-15));
        assert_eq!(Mat2::<f64>::zero().spectral_norm(), 0.0);
    }

    #[test]
    fn spectral_norm_matches_gram_oracle_complex() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..2000 {
            let mut c = || {
                let e: f64 = rng.gen_range(-6.0..6.0);
                Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)) * 10f64.powf(e)
            };
            let m = Mat2::new(c(), c(), c(), c());
            let oracle = gram_norm(&m);
            assert!(close(m.spectral_norm(), oracle, 1e-9), "{m:?}");
        }
    }

    #[test]
    fn spectral_norm_dense_theta_check() {
        let m = Mat2::new(
            Complex64::new(1.0, 2.0),
            Complex64::new(-0.5, 0.0),
            Complex64::new(0.0, 3.0),
            Complex64::new(2.0, -1.0),
        );
        // sup over unit vectors; complex phases sampled on a grid
        let mut best: f64 = 0.0;
        for i in 0..400 {
            let th = PI * i as f64 / 400.0;
            for k in 0..200 {
                let ph = 2.0 * PI * k as f64 / 200.0;
                let v = [Complex64::new(th.cos(), 0.0), Complex64::from_polar(th.sin(), ph)];
                let w = m.mul_vec(v);
                best = best.max((w[0].norm_sqr() + w[1].norm_sqr()).sqrt());
            }
        }
        let n = m.spectral_norm();
        assert!(n >= best - 1e-12 && n - best < 1e-3 * n);
    }

    #[test]
    fn spectral_norm_ill_conditioned() {
        let m = Mat2::new(1e8, 1e8 - 1e-4, 1e8 + 1e-4, 1e8);
        let oracle = gram_norm(&m.to_complex());
        assert!(close(m.spectral_norm(), oracle, 1e-12));
    }

    #[test]
    fn omega_matrix_examples() {
        assert_eq!(omega_matrix(1.0, 0.0).unwrap(), Mat2::identity());
        assert_eq!(omega_matrix(2.0, 0.0).unwrap(), Mat2::diag(2.0, 0.5));
        let m = omega_matrix(2.0, FRAC_PI_2).unwrap();
        let want = Mat2::new(0.0, 2.0, -0.5, 0.0);
        assert!((m - want).max_abs() < 1e-15);
        // D(a,1/a)·exp(-ψJ), assembled by hand
        let a = 0.3;
        let psi = 1.1;
        let expm = Mat2::new(psi.cos(), psi.sin(), -psi.sin(), psi.cos());
        let direct = d_matrix(a, 1.0 / a) * expm;
        assert!((omega_matrix(a, psi).unwrap() - direct).max_abs() < 1e-15);
        assert!(omega_matrix(0.0, 1.0).is_err());
        assert!(omega_matrix(-1.0, 1.0).is_err());
    }

    #[test]
    fn omega_generic_over_f32() {
        let m: Mat2<f32> = omega_matrix(2.0f32, 0.0).unwrap();
        assert_eq!(m, Mat2::diag(2.0f32, 0.5));
        assert!((m.det() - 1.0).abs() < 1e-6);
    }

    #[test]
    fn lemma5_examples() {
        let n = lemma5_norms(1.0, 0.4, 0.4, 1.0).unwrap();
        assert!(close(n.omega, 1.0, 1e-15));
        assert!(close(n.conjugated_rank_one, 1.0, 1e-15));
        assert!(close(n.transition, 1.0, 1e-15));
        let n = lemma5_norms(2.0, 0.7, 0.7, 1.0).unwrap();
        assert!(close(n.conjugated_rank_one, 4.0, 1e-15));
        assert!(close(n.transition, 2.0, 1e-15));
        assert!(lemma5_norms(1.0, 0.0, 0.0, 0.0).is_err());
    }

    #[test]
    fn rank_one_j_is_product() {
        let phi = 0.83;
        let a = Mat2::rank_one(phi) * Mat2::j();
        assert!((a - Mat2::rank_one_j(phi)).max_abs() < 1e-16);
        let x = xi(phi);
        assert!((Mat2::rank_one(phi).m12 - x[0] * x[1]).abs() < 1e-16);
    }

    #[test]
    fn rotation_is_exp_theta_j() {
        let th = 0.37;
        // series for exp(θJ)
        let mut term = Mat2::<f64>::identity();
        let mut sum = term;
        for k in 1..30 {
            term = (term * Mat2::j()).scale(th / k as f64);
            sum = sum + term;
        }
        assert!((sum - Mat2::rotation(th)).max_abs() < 1e-15);
    }

    #[test]
    fn scaled_mat_roundtrip_and_idempotent() {
        let m = Mat2::new(3.0, 1.0, -2.0, 5.0).to_complex();
        let s = ScaledMat2::from_mat(m).unwrap();
        assert!((s.unit.spectral_norm() - 1.0).abs() < 1e-12);
        assert!((s.to_mat() - m).max_abs() < 1e-12);
        let t = s.renormalized().unwrap();
        assert!((t.log_scale - s.log_scale).abs() < 1e-12);
        assert!(ScaledMat2::from_mat(Mat2::<f64>::zero()).is_err());
    }

    #[test]
    fn scaled_product_handles_huge_products() {
        let f = Mat2::new(10.0, 0.0, 0.0, 0.1);
        let mut p = ScaledProduct::new();
        for _ in 0..100_000 {
            p.push(&f);
        }
        let s = p.finish().unwrap();
        assert!(close(s.log_norm(), 100_000.0 * 10f64.ln(), 1e-12));
        // det is recoverable while the unit's small singular value stays normal
        let mut q = ScaledProduct::new();
        for _ in 0..100 {
            q.push(&f);
        }
        assert!(Float::abs(q.finish().unwrap().log_abs_det()) < 1e-9);
    }
}
