//! Dense real polynomials: products, compensated evaluation and real-root
//! isolation for polynomials known to have only real simple roots.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Coefficients in ascending order: `coeffs[k]` multiplies `x^k`.
#[derive(Debug, Clone, PartialEq)]
pub struct Poly<T> {
    pub coeffs: Vec<T>,
}

fn two_sum<T: Real>(a: T, b: T) -> (T, T) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

fn two_prod<T: Real>(a: T, b: T) -> (T, T) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

impl<T: Real> Poly<T> {
    pub fn new(coeffs: Vec<T>) -> Self {
        Poly { coeffs }
    }

    pub fn constant(c: T) -> Self {
        Poly { coeffs: vec![c] }
    }

    pub fn zero() -> Self {
        Poly { coeffs: vec![T::zero()] }
    }

    /// Nominal degree (length − 1), ignoring whether the top coefficient vanishes.
    pub fn nominal_degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    /// Index of the last nonzero coefficient, `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.iter().rposition(|c| *c != T::zero())
    }

    pub fn leading(&self) -> T {
        self.coeffs.last().copied().unwrap_or_else(T::zero)
    }

    pub fn coeff(&self, k: usize) -> T {
        self.coeffs.get(k).copied().unwrap_or_else(T::zero)
    }

    pub fn add(&self, o: &Self) -> Self {
        let n = self.coeffs.len().max(o.coeffs.len());
        Poly { coeffs: (0..n).map(|k| self.coeff(k) + o.coeff(k)).collect() }
    }

    pub fn scale(&self, s: T) -> Self {
        Poly { coeffs: self.coeffs.iter().map(|c| *c * s).collect() }
    }

    /// `self · (c0 + c1 x)`.
    pub fn mul_linear(&self, c0: T, c1: T) -> Self {
        let mut out = vec![T::zero(); self.coeffs.len() + 1];
        for (k, c) in self.coeffs.iter().enumerate() {
            out[k] = out[k] + *c * c0;
            out[k + 1] = out[k + 1] + *c * c1;
        }
        Poly { coeffs: out }
    }

    pub fn mul(&self, o: &Self) -> Self {
        let mut out = vec![T::zero(); self.coeffs.len() + o.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in o.coeffs.iter().enumerate() {
                out[i + j] = out[i + j] + *a * *b;
            }
        }
        Poly { coeffs: out }
    }

    pub fn eval(&self, x: T) -> T {
        self.coeffs.iter().rev().fold(T::zero(), |acc, c| acc * x + *c)
    }

    pub fn eval_complex(&self, z: Complex<T>) -> Complex<T> {
        self.coeffs
            .iter()
            .rev()
            .fold(Complex::new(T::zero(), T::zero()), |acc, c| acc * z + *c)
    }

    /// Horner with error-free transforms (twice-working-precision result).
    pub fn eval_compensated(&self, x: T) -> T {
        let mut it = self.coeffs.iter().rev();
        let mut s = match it.next() {
            Some(c) => *c,
            None => return T::zero(),
        };
        let mut c = T::zero();
        for a in it {
            let (p, pi) = two_prod(s, x);
            let (s2, sigma) = two_sum(p, *a);
            s = s2;
            c = c * x + (pi + sigma);
        }
        s + c
    }

    /// The reversed polynomial `x^n p(1/x)`.
    pub fn reversed(&self) -> Self {
        Poly { coeffs: self.coeffs.iter().rev().copied().collect() }
    }

    /// Remove trailing coefficients that are negligible relative to the
    /// magnitude envelope `mag` (same length), returning the number dropped.
    pub fn trim_against(&self, mag: &[T], rel: T) -> (Self, usize) {
        let mut n = self.coeffs.len();
        while n > 1 && self.coeffs[n - 1].abs() <= rel * mag[n - 1] {
            n -= 1;
        }
        (Poly { coeffs: self.coeffs[..n].to_vec() }, self.coeffs.len() - n)
    }
}

impl Poly<f64> {
    /// Sign of `p(x)` with overflow-free evaluation (reversed form for |x| > 1).
    /// Returns 0 when the value is inside the rounding envelope.
    fn sign_at(&self, x: f64, env: &Poly<f64>) -> i32 {
        let n = self.nominal_degree();
        let (v, e) = if x.abs() <= 1.0 {
            (self.eval_compensated(x), env.eval(x.abs()))
        } else {
            let y = 1.0 / x;
            let v = self.reversed().eval_compensated(y);
            let e = env.reversed().eval(y.abs());
            // x^n has the sign of x when n is odd
            if n % 2 == 1 && x < 0.0 {
                (-v, e)
            } else {
                (v, e)
            }
        };
        if v.abs() <= e {
            0
        } else if v > 0.0 {
            1
        } else {
            -1
        }
    }

    /// All real roots of a polynomial whose roots are known to be real and
    /// simple. `mag` is an envelope of coefficient magnitudes used to decide
    /// which leading coefficients are zero and how reliable a sign is.
    ///
    /// Errors when fewer real roots than the degree are found.
    pub fn real_roots(&self, mag: Option<&[f64]>) -> Result<RealRoots> {
        let own: Vec<f64>;
        let mag = match mag {
            Some(m) => m,
            None => {
                own = self.coeffs.iter().map(|c| c.abs()).collect();
                &own
            }
        };
        let (p, dropped) = self.trim_against(mag, 1e-12);
        let d = p.nominal_degree();
        if d == 0 {
            return Ok(RealRoots { roots: vec![], degree: 0, degree_drops: dropped });
        }
        let n_f = (d + 2) as f64;
        let env = Poly::new(mag[..=d].iter().map(|m| m * n_f * 4.0 * f64::EPSILON).collect());
        let a = &p.coeffs;
        let lead = a[d];
        // Fujiwara bounds on |root| from above and below
        let upper = 2.0
            * (1..=d)
                .map(|k| {
                    let ratio = (a[d - k] / lead).abs();
                    if k == d { (ratio / 2.0).powf(1.0 / k as f64) } else { ratio.powf(1.0 / k as f64) }
                })
                .fold(0.0, f64::max);
        let zero_roots = a.iter().take_while(|c| **c == 0.0).count();
        let rev = Poly::new(a[zero_roots..].iter().rev().copied().collect());
        let dr = rev.nominal_degree();
        let lower = if dr == 0 {
            upper
        } else {
            let l0 = rev.coeffs[dr];
            let b = 2.0
                * (1..=dr)
                    .map(|k| {
                        let ratio = (rev.coeffs[dr - k] / l0).abs();
                        if k == dr { (ratio / 2.0).powf(1.0 / k as f64) } else { ratio.powf(1.0 / k as f64) }
                    })
                    .fold(0.0, f64::max);
            1.0 / b
        };
        let lo = (lower * 0.5).max(f64::MIN_POSITIVE);
        let hi = (upper * 2.0).max(lo * 4.0);
        let mut roots: Vec<f64> = vec![0.0; zero_roots];
        let target = d - zero_roots;
        // divide out x^zero_roots so no sign change straddles the origin
        let p = Poly::new(p.coeffs[zero_roots..].to_vec());
        let env = Poly::new(env.coeffs[zero_roots..].to_vec());
        let mut refine = 0;
        let mut m = (4 * d).max(16);
        loop {
            let mut grid: Vec<f64> = chebyshev_log_grid(lo, hi, m);
            let neg: Vec<f64> = grid.iter().rev().map(|x| -x).collect();
            let mut pts = neg;
            pts.append(&mut grid);
            let found = isolate(&p, &env, &pts);
            if found.len() >= target || refine >= 10 {
                if found.len() != target {
                    return Err(Error::numerical(format!(
                        "root isolation found {} real roots for degree {} (internal inconsistency)",
                        found.len() + zero_roots,
                        d
                    )));
                }
                roots.extend(found);
                break;
            }
            refine += 1;
            m *= 2;
        }
        roots.sort_by(|x, y| x.partial_cmp(y).unwrap());
        Ok(RealRoots { roots, degree: d, degree_drops: dropped })
    }
}

/// Result of [`Poly::real_roots`].
#[derive(Debug, Clone, PartialEq)]
pub struct RealRoots {
    pub roots: Vec<f64>,
    /// Effective degree after dropping vanishing leading coefficients.
    pub degree: usize,
    /// Number of leading coefficients treated as exact zeros.
    pub degree_drops: usize,
}

/// `m` Chebyshev nodes in `log x` over `[lo, hi]`, ascending, endpoints included.
fn chebyshev_log_grid(lo: f64, hi: f64, m: usize) -> Vec<f64> {
    let (a, b) = (lo.ln(), hi.ln());
    let mut v: Vec<f64> = (0..m)
        .map(|k| {
            let t = (std::f64::consts::PI * (k as f64 + 0.5) / m as f64).cos();
            ((a + b) / 2.0 - (b - a) / 2.0 * t).exp()
        })
        .collect();
    v.insert(0, lo);
    v.push(hi);
    v
}

fn isolate(p: &Poly<f64>, env: &Poly<f64>, pts: &[f64]) -> Vec<f64> {
    let signs: Vec<(f64, i32)> = pts
        .iter()
        .map(|x| (*x, p.sign_at(*x, env)))
        .filter(|(_, s)| *s != 0)
        .collect();
    let mut out = Vec::new();
    for w in signs.windows(2) {
        let ((mut a, sa), (mut b, sb)) = (w[0], w[1]);
        if sa == sb {
            continue;
        }
        for _ in 0..200 {
            let mid = 0.5 * (a + b);
            if mid <= a || mid >= b || (b - a) <= 1e-15 * mid.abs() {
                break;
            }
            let s = p.sign_at(mid, env);
            if s == 0 {
                a = mid;
                b = mid;
                break;
            }
            if s == sa {
                a = mid;
            } else {
                b = mid;
            }
        }
        out.push(0.5 * (a + b));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn product_of_linear_factors() {
        // (1 - x)(1 + 2x) = 1 + x - 2x²
        let p = Poly::constant(1.0).mul_linear(1.0, -1.0).mul_linear(1.0, 2.0);
        assert_eq!(p.coeffs, vec![1.0, 1.0, -2.0]);
        assert_eq!(p.eval(2.0), -5.0);
        assert_eq!(p.degree(), Some(2));
        assert_eq!(p.mul(&Poly::constant(2.0)).coeffs, vec![2.0, 2.0, -4.0]);
    }

    #[test]
    fn compensated_horner_beats_plain_near_multiple_root() {
        // (x - 1)^7 expanded; plain Horner loses most digits near 1
        let mut p = Poly::constant(1.0);
        for _ in 0..7 {
            p = p.mul_linear(-1.0, 1.0);
        }
        let x = 1.0 + 1e-3;
        let exact: f64 = 1e-21;
        let comp = p.eval_compensated(x);
        assert!((comp - exact).abs() < 1e-3 * exact, "{comp}");
    }

    #[test]
    fn real_roots_quadratic_and_spread() {
        // 1 - x²/2: roots ±√2
        let p = Poly::new(vec![1.0, 0.0, -0.5]);
        let r = p.real_roots(None).unwrap();
        assert_eq!(r.roots.len(), 2);
        assert!((r.roots[1] - 2f64.sqrt()).abs() < 1e-14);
        assert!((r.roots[0] + 2f64.sqrt()).abs() < 1e-14);
        // widely spread magnitudes: roots 1e-3, 1, 1e4, -50
        let roots = [1e-3, 1.0, 1e4, -50.0];
        let mut q = Poly::constant(1.0);
        for x in roots {
            q = q.mul_linear(1.0, -1.0 / x);
        }
        let got = q.real_roots(None).unwrap().roots;
        let mut want = roots.to_vec();
        want.sort_by(|a, b| a.partial_cmp(b).unwrap());
        for (g, w) in got.iter().zip(&want) {
            assert!((g - w).abs() < 1e-10 * w.abs(), "{got:?}");
        }
    }

    #[test]
    fn real_roots_detects_degree_drop_and_complex_pair() {
        let p = Poly::new(vec![1.0, -1.0, 1e-30]);
        let r = p.real_roots(Some(&[1.0, 1.0, 1.0])).unwrap();
        assert_eq!(r.degree, 1);
        assert_eq!(r.degree_drops, 1);
        assert!((r.roots[0] - 1.0).abs() < 1e-13);
        // 1 + x² has no real roots: isolation must report inconsistency
        assert!(Poly::new(vec![1.0, 0.0, 1.0]).real_roots(None).is_err());
    }

    #[test]
    fn generic_over_f32() {
        let p: Poly<f32> = Poly::new(vec![1.0, 2.0, 1.0]);
        assert_eq!(p.eval(1.0), 4.0);
        assert_eq!(p.eval_compensated(-1.0), 0.0);
    }
}
