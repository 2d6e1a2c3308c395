//! Growth curves on geometric radius grids.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::hamiltonian::{HamburgerSpec, HamiltonianSpec};
use crate::lower_bounds::{f_series, lower_bound_at};
use crate::monodromy::{MonodromyOptions, Propagator};
use crate::regvar::Modulus;
use crate::upper_bounds::{modulus_for, optimize_bound, thm14_recipe, Strategy};

/// Angles sampled on `[0, π]` for the max-modulus curve.
pub const DEFAULT_SAMPLES: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadiusGrid {
    pub r_min: f64,
    pub r_max: f64,
    pub count: usize,
}

impl RadiusGrid {
    pub fn new(r_min: f64, r_max: f64, count: usize) -> Result<Self> {
        if !(r_min > 0.0) || !r_max.is_finite() || !(r_min < r_max) {
            return Err(Error::input(format!("radius grid needs 0 < rmin < rmax, got {r_min}, {r_max}")));
        }
        if count < 2 {
            return Err(Error::input(format!("radius grid needs at least 2 points, got {count}")));
        }
        Ok(RadiusGrid { r_min, r_max, count })
    }

    /// `r_k = r_min·(r_max/r_min)^{k/(count−1)}`, endpoints exact.
    pub fn points(&self) -> Vec<f64> {
        let q = self.r_max / self.r_min;
        let last = self.count - 1;
        (0..self.count)
            .map(|k| match k {
                0 => self.r_min,
                k if k == last => self.r_max,
                k => self.r_min * q.powf(k as f64 / last as f64),
            })
            .collect()
    }
}

/// Curve kinds, ordered by their tags.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum CurveKind {
    /// `½ log F(r²)` of the Hamburger spec (or its companion).
    Lower,
    /// `max_{|z|=r} log‖W(z)‖`.
    MaxMod,
    /// Optimized upper bound.
    UpperOpt,
    /// Upper bound from the modulus-of-continuity recipe.
    UpperRecipe,
}

impl CurveKind {
    pub const ALL: [CurveKind; 4] = [CurveKind::Lower, CurveKind::MaxMod, CurveKind::UpperOpt, CurveKind::UpperRecipe];

    pub fn tag(self) -> &'static str {
        match self {
            CurveKind::Lower => "lower",
            CurveKind::MaxMod => "maxmod",
            CurveKind::UpperOpt => "upper:opt",
            CurveKind::UpperRecipe => "upper:recipe",
        }
    }
}

impl fmt::Display for CurveKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for CurveKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        CurveKind::ALL
            .into_iter()
            .find(|k| k.tag() == s.trim())
            .ok_or_else(|| Error::input(format!("unknown curve '{s}' (expected lower, maxmod, upper:opt, upper:recipe)")))
    }
}

/// Parse a comma-separated curve list.
pub fn parse_which(s: &str) -> Result<BTreeSet<CurveKind>> {
    let set: BTreeSet<CurveKind> = s.split(',').filter(|t| !t.trim().is_empty()).map(str::parse).collect::<Result<_>>()?;
    if set.is_empty() {
        return Err(Error::input("empty curve list"));
    }
    Ok(set)
}

/// Samples of one curve; `value` is a log-growth quantity.
#[derive(Debug, Clone, PartialEq)]
pub struct GrowthCurve {
    pub kind: CurveKind,
    pub r: Vec<f64>,
    pub value: Vec<f64>,
}

/// One `(r, tag, value)` line of the tabular output.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurveRow {
    pub r: f64,
    pub kind: CurveKind,
    pub value: f64,
}

/// Inputs for [`compute_curves`].
#[derive(Debug, Clone)]
pub struct CurveSetup<'a> {
    pub spec: &'a HamiltonianSpec,
    /// Hamburger spec used for the lower curve when `spec` is not one itself.
    pub companion: Option<&'a HamburgerSpec>,
    pub samples: usize,
    pub tol: f64,
    pub strategy: Strategy,
    /// Modulus for the recipe curve; estimated from the profile when absent.
    pub modulus: Option<Modulus>,
}

impl<'a> CurveSetup<'a> {
    pub fn new(spec: &'a HamiltonianSpec) -> Self {
        CurveSetup {
            spec,
            companion: None,
            samples: DEFAULT_SAMPLES,
            tol: MonodromyOptions::default().tol,
            strategy: Strategy::CoordinateDescent,
            modulus: None,
        }
    }

    fn lower_source(&self) -> Result<&'a HamburgerSpec> {
        match (self.spec, self.companion) {
            (HamiltonianSpec::Hamburger(h), _) => Ok(h),
            (_, Some(h)) => Ok(h),
            (s, None) => Err(Error::Inapplicable(format!(
                "the lower curve needs a Hamburger spec or a companion, got {}",
                s.kind_name()
            ))),
        }
    }
}

fn one_curve(setup: &CurveSetup<'_>, kind: CurveKind, r: &[f64]) -> Result<Vec<f64>> {
    let spec = setup.spec;
    match kind {
        CurveKind::Lower => {
            let h = setup.lower_source()?;
            let series = f_series(h, h.len());
            r.iter().map(|x| lower_bound_at(&series, *x).map(|b| b.value)).collect()
        }
        CurveKind::MaxMod => {
            let opts = MonodromyOptions { tol: setup.tol, ..MonodromyOptions::default() };
            let prop = Propagator::new(spec, opts)?;
            r.iter().map(|x| prop.max_modulus(*x, setup.samples, true)).collect()
        }
        CurveKind::UpperRecipe => {
            let p = spec.as_profile().ok_or_else(|| {
                Error::Inapplicable(format!("the recipe bound needs a profile, got {}", spec.kind_name()))
            })?;
            let m = match &setup.modulus {
                Some(m) => m.clone(),
                None => modulus_for(p)?,
            };
            r.par_iter().map(|x| thm14_recipe(spec, *x, &m).map(|(_, v)| v.total_at(*x))).collect()
        }
        CurveKind::UpperOpt => {
            r.par_iter().map(|x| optimize_bound(spec, *x, setup.strategy).map(|(_, v)| v.total_at(*x))).collect()
        }
    }
}

/// Evaluate the requested curves on `grid`, in tag order.
pub fn compute_curves(setup: &CurveSetup<'_>, grid: &RadiusGrid, which: &BTreeSet<CurveKind>) -> Result<Vec<GrowthCurve>> {
    if which.is_empty() {
        return Err(Error::input("no curves requested"));
    }
    if which.contains(&CurveKind::Lower) {
        setup.lower_source()?;
    }
    let r = grid.points();
    which
        .iter()
        .map(|k| {
            let value = one_curve(setup, *k, &r)?;
            if let Some((x, v)) = r.iter().zip(&value).find(|(_, v)| v.is_nan() || **v == f64::INFINITY) {
                return Err(Error::numerical(format!("{k} curve is not finite at r = {x}: {v}")));
            }
            Ok(GrowthCurve { kind: *k, r: r.clone(), value })
        })
        .collect()
}

/// Rows ordered by radius, then by tag.
pub fn curve_rows(curves: &[GrowthCurve]) -> Vec<CurveRow> {
    let mut rows: Vec<CurveRow> = curves
        .iter()
        .flat_map(|c| c.r.iter().zip(&c.value).map(move |(r, v)| CurveRow { r: *r, kind: c.kind, value: *v }))
        .collect();
    rows.sort_by(|a, b| a.r.total_cmp(&b.r).then(a.kind.cmp(&b.kind)));
    rows
}
