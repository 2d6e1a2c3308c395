//! Hamiltonians on a compact interval and their structural transforms.

pub mod forms;
mod json;

use std::collections::BTreeSet;
use std::f64::consts::PI;

pub use forms::{AngleFn, DensityFn, Polygon, Steps, Table};

use crate::error::{Error, Result};
use crate::mat2::Mat2;

/// Piecewise-constant angle: segment `j` has length `lengths[j]` and angle `angles[j]`.
#[derive(Debug, Clone, PartialEq)]
pub struct HamburgerSpec {
    pub lengths: Vec<f64>,
    pub angles: Vec<f64>,
}

impl HamburgerSpec {
    pub fn new(lengths: Vec<f64>, angles: Vec<f64>) -> Result<Self> {
        if lengths.is_empty() || lengths.len() != angles.len() {
            return Err(Error::input(format!(
                "hamburger spec needs equally many lengths ({}) and angles ({}), at least one",
                lengths.len(),
                angles.len()
            )));
        }
        if let Some(j) = lengths.iter().position(|l| !(*l > 0.0) || !l.is_finite()) {
            return Err(Error::input(format!("length {j} must be positive and finite")));
        }
        if let Some(j) = angles.iter().position(|a| !a.is_finite()) {
            return Err(Error::input(format!("angle {j} must be finite")));
        }
        Ok(HamburgerSpec { lengths, angles })
    }

    pub fn len(&self) -> usize {
        self.lengths.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lengths.is_empty()
    }

    pub fn total_length(&self) -> f64 {
        self.lengths.iter().sum()
    }

    /// Segment endpoints `0 = t_0 < t_1 < … < t_N`.
    pub fn endpoints(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.len() + 1);
        let mut x = 0.0;
        out.push(x);
        for l in &self.lengths {
            x += l;
            out.push(x);
        }
        out
    }

    /// Same spec with a constant offset added to every angle.
    pub fn rotated(&self, offset: f64) -> Self {
        HamburgerSpec {
            lengths: self.lengths.clone(),
            angles: self.angles.iter().map(|a| a + offset).collect(),
        }
    }
}

/// `H(t) = TrH(t) ξ_{φ(t)} ξ_{φ(t)}ᵀ` on `[domain.0, domain.1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct AngleProfile {
    pub domain: (f64, f64),
    pub phi: AngleFn,
    pub density: DensityFn,
}

impl AngleProfile {
    pub fn new(domain: (f64, f64), phi: AngleFn, density: DensityFn) -> Result<Self> {
        let p = AngleProfile { domain, phi, density };
        p.validate()?;
        Ok(p)
    }

    fn validate(&self) -> Result<()> {
        let (a, b) = self.domain;
        if !(a < b) || !a.is_finite() || !b.is_finite() {
            return Err(Error::input(format!("profile domain [{a}, {b}] must satisfy a < b")));
        }
        if self.phi.needs_nonnegative_domain() && a < 0.0 {
            return Err(Error::input("this angle form is defined for t >= 0 only"));
        }
        self.phi.validate()?;
        self.density.validate(a, b)?;
        for k in 0..=64 {
            let t = a + (b - a) * k as f64 / 64.0;
            if !self.phi.eval(t).is_finite() {
                return Err(Error::input(format!("angle not finite at t = {t}")));
            }
        }
        Ok(())
    }

    pub fn length(&self) -> f64 {
        self.domain.1 - self.domain.0
    }
}

/// `H = diag(h1, h2)` with `h1` the indicator of `h1_intervals` and `h2 = 1 - h1`.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagonalSpec {
    pub domain: (f64, f64),
    pub h1_intervals: Vec<(f64, f64)>,
}

impl DiagonalSpec {
    /// Sorts and merges touching intervals; rejects overlaps and intervals outside the domain.
    pub fn new(domain: (f64, f64), mut h1: Vec<(f64, f64)>) -> Result<Self> {
        let (a, b) = domain;
        if !(a < b) || !a.is_finite() || !b.is_finite() {
            return Err(Error::input("diagonal domain must satisfy a < b"));
        }
        h1.sort_by(|x, y| x.0.partial_cmp(&y.0).unwrap_or(std::cmp::Ordering::Equal));
        let mut merged: Vec<(f64, f64)> = Vec::new();
        for (x0, x1) in h1 {
            if !(x0 < x1) || x0 < a || x1 > b || !x0.is_finite() || !x1.is_finite() {
                return Err(Error::input(format!("h1 interval [{x0}, {x1}] invalid for domain [{a}, {b}]")));
            }
            match merged.last_mut() {
                Some(last) if x0 < last.1 => {
                    return Err(Error::input("h1 intervals overlap"));
                }
                Some(last) if x0 == last.1 => last.1 = x1,
                _ => merged.push((x0, x1)),
            }
        }
        Ok(DiagonalSpec { domain, h1_intervals: merged })
    }

    /// Alternating runs `(start, end, is_h1)` covering the domain.
    pub fn runs(&self) -> Vec<(f64, f64, bool)> {
        let mut out = Vec::new();
        let mut x = self.domain.0;
        for &(x0, x1) in &self.h1_intervals {
            if x0 > x {
                out.push((x, x0, false));
            }
            out.push((x0, x1, true));
            x = x1;
        }
        if x < self.domain.1 {
            out.push((x, self.domain.1, false));
        }
        out
    }

    pub fn h1_measure(&self) -> f64 {
        self.h1_intervals.iter().map(|(a, b)| b - a).sum()
    }
}

/// Constant positive semidefinite `M` on `[0, length]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConstantSpec {
    pub matrix: Mat2<f64>,
    pub length: f64,
}

impl ConstantSpec {
    pub fn new(matrix: Mat2<f64>, length: f64) -> Result<Self> {
        let m = Mat2::try_new(matrix.m11, matrix.m12, matrix.m21, matrix.m22)?;
        if !(length > 0.0) || !length.is_finite() {
            return Err(Error::input("constant spec length must be positive"));
        }
        let scale = m.max_abs();
        if scale == 0.0 {
            return Err(Error::input("constant matrix must be nonzero"));
        }
        if (m.m12 - m.m21).abs() > 1e-12 * scale {
            return Err(Error::input("constant matrix must be symmetric"));
        }
        let tr = m.m11 + m.m22;
        let det = m.m11 * m.m22 - m.m12 * m.m21;
        if m.m11 < -1e-12 * scale || m.m22 < -1e-12 * scale || det < -1e-12 * scale * scale || tr <= 0.0 {
            return Err(Error::input("constant matrix must be positive semidefinite"));
        }
        Ok(ConstantSpec { matrix: m, length })
    }

    pub fn det(&self) -> f64 {
        self.matrix.det().max(0.0)
    }

    /// True when `det M` vanishes relative to `(tr M)²`.
    pub fn is_rank_one(&self) -> bool {
        let tr = self.matrix.trace();
        self.det() <= 1e-14 * tr * tr
    }
}

/// A Hamiltonian in one of four representations.
#[derive(Debug, Clone, PartialEq)]
pub enum HamiltonianSpec {
    Hamburger(HamburgerSpec),
    Profile(AngleProfile),
    Diagonal(DiagonalSpec),
    ConstantMatrix(ConstantSpec),
}

/// Local shape of H on one piece of the domain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PieceKind {
    /// Constant angle and density.
    Const { angle: f64, density: f64 },
    /// `φ(t) = angle0 + slope (t - start)`, constant density.
    Linear { angle0: f64, slope: f64, density: f64 },
    /// Anything else; evaluate the profile directly.
    Smooth,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Piece {
    pub start: f64,
    pub end: f64,
    pub kind: PieceKind,
}

impl Piece {
    pub fn len(&self) -> f64 {
        self.end - self.start
    }
}

impl HamiltonianSpec {
    pub fn domain(&self) -> (f64, f64) {
        match self {
            HamiltonianSpec::Hamburger(h) => (0.0, h.total_length()),
            HamiltonianSpec::Profile(p) => p.domain,
            HamiltonianSpec::Diagonal(d) => d.domain,
            HamiltonianSpec::ConstantMatrix(c) => (0.0, c.length),
        }
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            HamiltonianSpec::Hamburger(_) => "hamburger",
            HamiltonianSpec::Profile(_) => "profile",
            HamiltonianSpec::Diagonal(_) => "diagonal",
            HamiltonianSpec::ConstantMatrix(_) => "constant",
        }
    }

    /// True when `det H = 0` almost everywhere.
    pub fn is_det_zero(&self) -> bool {
        match self {
            HamiltonianSpec::ConstantMatrix(c) => c.is_rank_one(),
            _ => true,
        }
    }

    pub fn as_profile(&self) -> Option<&AngleProfile> {
        match self {
            HamiltonianSpec::Profile(p) => Some(p),
            _ => None,
        }
    }

    /// Decomposition of a `det H = 0` spec into pieces on which H has a simple form.
    pub fn pieces(&self) -> Result<Vec<Piece>> {
        match self {
            HamiltonianSpec::Hamburger(h) => {
                let t = h.endpoints();
                Ok(h.angles
                    .iter()
                    .enumerate()
                    .map(|(j, a)| Piece {
                        start: t[j],
                        end: t[j + 1],
                        kind: PieceKind::Const { angle: *a, density: 1.0 },
                    })
                    .collect())
            }
            HamiltonianSpec::Diagonal(d) => Ok(d
                .runs()
                .into_iter()
                .map(|(s, e, h1)| Piece {
                    start: s,
                    end: e,
                    kind: PieceKind::Const { angle: if h1 { 0.0 } else { PI / 2.0 }, density: 1.0 },
                })
                .collect()),
            HamiltonianSpec::ConstantMatrix(c) => {
                if !c.is_rank_one() {
                    return Err(Error::Inapplicable(
                        "constant matrix with det > 0 has no angle representation".into(),
                    ));
                }
                let m = c.matrix;
                let tr = m.trace();
                // eigenvector of the nonzero eigenvalue of a rank-one PSD matrix
                let angle = if m.m11 >= m.m22 { m.m12.atan2(m.m11) } else { m.m22.atan2(m.m12) };
                Ok(vec![Piece { start: 0.0, end: c.length, kind: PieceKind::Const { angle, density: tr } }])
            }
            HamiltonianSpec::Profile(p) => Ok(profile_pieces(p)),
        }
    }
}

fn profile_pieces(p: &AngleProfile) -> Vec<Piece> {
    let (a, b) = p.domain;
    let mut pts = vec![a, b];
    pts.extend(p.phi.breakpoints(a, b));
    pts.extend(p.density.breakpoints(a, b));
    pts.sort_by(|x, y| x.partial_cmp(y).unwrap());
    pts.dedup_by(|x, y| (*x - *y).abs() <= 1e-15 * y.abs().max(1e-300));
    pts.windows(2)
        .filter(|w| w[1] > w[0])
        .map(|w| {
            let (u, v) = (w[0], w[1]);
            let kind = match (p.phi.linear_on(u, v), p.density.const_on(u, v)) {
                (Some((a0, 0.0)), Some(d)) => PieceKind::Const { angle: a0, density: d },
                (Some((a0, s)), Some(d)) => PieceKind::Linear { angle0: a0, slope: s, density: d },
                _ => PieceKind::Smooth,
            };
            Piece { start: u, end: v, kind }
        })
        .collect()
}

/// `(l, L)`: domain length and total trace mass `∫ Tr H`.
pub fn total_trace_mass(spec: &HamiltonianSpec) -> (f64, f64) {
    match spec {
        HamiltonianSpec::Hamburger(h) => {
            let l = h.total_length();
            (l, l)
        }
        HamiltonianSpec::Profile(p) => (p.length(), p.density.integral(p.domain.0, p.domain.1)),
        HamiltonianSpec::Diagonal(d) => {
            let l = d.domain.1 - d.domain.0;
            (l, l)
        }
        HamiltonianSpec::ConstantMatrix(c) => (c.length, c.matrix.trace() * c.length),
    }
}

/// Compose with `t ↦ t^κ`: `φ ↦ φ∘ψ_κ`, `TrH ↦ κt^{κ-1}·TrH∘ψ_κ`.
pub fn reparameterize(p: &AngleProfile, kappa: f64) -> Result<AngleProfile> {
    if !(kappa > 1.0) || !kappa.is_finite() {
        return Err(Error::input(format!("reparameterization exponent must exceed 1, got {kappa}")));
    }
    if p.domain != (0.0, 1.0) {
        return Err(Error::input("reparameterization requires the domain [0, 1]"));
    }
    let phi = match &p.phi {
        AngleFn::Constant(c) => AngleFn::Constant(*c),
        AngleFn::Chirp { gamma, beta } => AngleFn::Chirp { gamma: gamma * kappa, beta: beta * kappa },
        AngleFn::HolderPower { c, alpha } if alpha * kappa <= 1.0 => {
            AngleFn::HolderPower { c: *c, alpha: alpha * kappa }
        }
        AngleFn::Steps(s) => AngleFn::Steps(Steps::new(
            s.breaks.iter().map(|b| b.max(0.0).powf(1.0 / kappa)).collect(),
            s.values.clone(),
        )?),
        AngleFn::Reparam { inner, kappa: k0 } => {
            AngleFn::Reparam { inner: inner.clone(), kappa: k0 * kappa }
        }
        other => AngleFn::Reparam { inner: Box::new(other.clone()), kappa },
    };
    let density = match &p.density {
        DensityFn::Const(c) => DensityFn::Power { c: c * kappa, exponent: kappa - 1.0 },
        DensityFn::Power { c, exponent } => DensityFn::Power {
            c: c * kappa,
            exponent: kappa * exponent + kappa - 1.0,
        },
        DensityFn::Reparam { inner, kappa: k0 } => {
            DensityFn::Reparam { inner: inner.clone(), kappa: k0 * kappa }
        }
        other => DensityFn::Reparam { inner: Box::new(other.clone()), kappa },
    };
    AngleProfile::new((0.0, 1.0), phi, density)
}

/// Keep the segments with the given (0-based) indices, in original order.
pub fn cut(spec: &HamburgerSpec, keep: &BTreeSet<usize>) -> Result<HamburgerSpec> {
    if keep.is_empty() {
        return Err(Error::input("cut: keep set is empty"));
    }
    if let Some(j) = keep.iter().find(|j| **j >= spec.len()) {
        return Err(Error::input(format!("cut: index {j} out of range for {} segments", spec.len())));
    }
    HamburgerSpec::new(
        keep.iter().map(|j| spec.lengths[*j]).collect(),
        keep.iter().map(|j| spec.angles[*j]).collect(),
    )
}

/// The angle form of `H̃ = [[1, -m], [-m, m²]]` with `m = m₂∘m₁⁻¹`, where
/// `m₁, m₂` are the primitives of `h1, h2`.
pub fn diagonal_to_profile(d: &DiagonalSpec) -> Result<AngleProfile> {
    let total = d.h1_measure();
    if !(total > 0.0) {
        return Err(Error::input("diagonal_to_profile: h1 vanishes almost everywhere"));
    }
    // m is constant on each h1 run, equal to the h2 mass seen so far
    let mut breaks = Vec::new();
    let mut m_values = Vec::new();
    let mut x = 0.0;
    let mut h2_mass = 0.0;
    for (s, e, is_h1) in d.runs() {
        if is_h1 {
            if x > 0.0 {
                breaks.push(x);
            }
            m_values.push(h2_mass);
            x += e - s;
        } else {
            h2_mass += e - s;
        }
    }
    // runs separated only by h2 always change m, so breaks are strictly increasing
    let angles: Vec<f64> = m_values.iter().map(|m| -m.atan()).collect();
    let dens: Vec<f64> = m_values.iter().map(|m| 1.0 + m * m).collect();
    let (phi, density) = if m_values.len() == 1 {
        (AngleFn::Constant(angles[0]), DensityFn::Const(dens[0]))
    } else {
        (
            AngleFn::Steps(Steps::new(breaks.clone(), angles)?),
            DensityFn::Steps(Steps::new(breaks, dens)?),
        )
    };
    AngleProfile::new((0.0, x), phi, density)
}
