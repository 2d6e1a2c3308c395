use std::collections::BTreeSet;
use std::path::PathBuf;

use canogrowth::curves::{compute_curves, parse_which, CurveKind, CurveSetup, GrowthCurve};
use canogrowth::families::{
    chirp_profile, chirp_recipe_order, polygon_profile, sharpness_family, cantor_diagonal, PolygonParams,
    SharpnessParams, DEFAULT_TRUNCATION,
};
use canogrowth::hamiltonian::{reparameterize, HamburgerSpec, HamiltonianSpec};
use canogrowth::regvar::{Modulus, RegVarFn};
use canogrowth::spectrum::fit_order;
use clap::Args;
use serde_json::{json, Value};

use crate::commands::{curves_csv, grid_from, write_file};
use crate::{CliError, CliResult, GridArgs};

#[derive(Debug, Args)]
pub struct ExampleArgs {
    /// chirp, polygon, sharpness or cantor.
    family: String,
    /// Chirp amplitude exponent.
    #[arg(long)]
    gamma: Option<f64>,
    /// Chirp frequency exponent.
    #[arg(long)]
    beta: Option<f64>,
    /// Reparameterization exponent for chirps.
    #[arg(long, default_value_t = 1.0)]
    kappa: f64,
    /// Index of g for the sharpness family.
    #[arg(long)]
    rho: Option<f64>,
    /// Spacing function, e.g. `r^1.5` or `r*log(r)*loglog(r)^2`.
    #[arg(long)]
    m: Option<String>,
    /// Polygon amplitude exponent: π(x) = x^alpha.
    #[arg(long)]
    alpha: Option<f64>,
    /// Number of plateaus.
    #[arg(long, default_value_t = DEFAULT_TRUNCATION)]
    n: usize,
    /// Cantor exponent.
    #[arg(long)]
    p: Option<f64>,
    /// Cantor depth.
    #[arg(long, default_value_t = 8)]
    depth: u32,
    /// Comma-separated subset of spec, curves, report.
    #[arg(long, default_value = "spec")]
    emit: String,
    #[arg(long, default_value = ".")]
    out: PathBuf,
    #[command(flatten)]
    grid: GridArgs,
    /// Curves to compute; defaults depend on the family.
    #[arg(long)]
    which: Option<String>,
}

/// A generated family with everything the report needs.
struct Generated {
    spec: HamiltonianSpec,
    companion: Option<HamburgerSpec>,
    modulus: Option<Modulus>,
    params: Value,
    predicted_lower: Option<f64>,
    predicted_upper: Option<f64>,
    which: &'static str,
    grid: (f64, f64, usize),
}

fn need(v: Option<f64>, flag: &str, family: &str) -> CliResult<f64> {
    v.ok_or_else(|| CliError::Input(format!("{family} needs --{flag}")))
}

fn generate(a: &ExampleArgs) -> CliResult<Generated> {
    match a.family.as_str() {
        "chirp" => {
            let (g, b) = (need(a.gamma, "gamma", "chirp")?, need(a.beta, "beta", "chirp")?);
            let mut p = chirp_profile(g, b)?;
            if a.kappa != 1.0 {
                p = reparameterize(&p, a.kappa)?;
            }
            Ok(Generated {
                spec: HamiltonianSpec::Profile(p),
                companion: None,
                modulus: None,
                params: json!({"gamma": g, "beta": b, "kappa": a.kappa}),
                predicted_lower: None,
                predicted_upper: Some(chirp_recipe_order(g, b, a.kappa)),
                which: "upper:recipe",
                grid: (1e3, 1e8, 16),
            })
        }
        "polygon" => {
            let alpha = need(a.alpha, "alpha", "polygon")?;
            let m = RegVarFn::parse(a.m.as_deref().ok_or_else(|| CliError::Input("polygon needs --m".into()))?)?;
            let pi_fn = Modulus::power(1.0, alpha)?;
            let l: Vec<f64> = (1..=a.n).map(|j| 1.0 / m.eval(j as f64)).collect();
            let params = PolygonParams { m: l[..l.len().saturating_sub(1)].to_vec(), l, pi_fn: pi_fn.clone() };
            let fam = polygon_profile(&params)?;
            Ok(Generated {
                spec: HamiltonianSpec::Profile(fam.profile),
                companion: Some(fam.hamburger),
                modulus: Some(pi_fn),
                params: json!({"alpha": alpha, "m": a.m, "n": a.n, "max_pi_ratio": fam.max_pi_ratio}),
                predicted_lower: None,
                predicted_upper: Some(1.0 / (1.0 + alpha)),
                which: "lower,maxmod,upper:recipe",
                grid: (1e2, 1e6, 16),
            })
        }
        "sharpness" => {
            let rho = need(a.rho, "rho", "sharpness")?;
            let m = RegVarFn::parse(a.m.as_deref().unwrap_or("r^1.5"))?;
            let g = RegVarFn::power(rho, 1.0)?;
            let fam = sharpness_family(&SharpnessParams { g, m, n: a.n })?;
            Ok(Generated {
                spec: HamiltonianSpec::Profile(fam.profile),
                companion: Some(fam.hamburger),
                params: json!({
                    "rho": rho,
                    "m": a.m.as_deref().unwrap_or("r^1.5"),
                    "n": a.n,
                    "m_scale": fam.m_scale,
                    "doublings": fam.doublings,
                }),
                modulus: Some(fam.modulus),
                predicted_lower: Some(fam.lower.index()),
                predicted_upper: Some(fam.upper.index()),
                which: "lower,maxmod,upper:recipe",
                grid: (1e2, 1e6, 16),
            })
        }
        "cantor" => {
            let p = need(a.p, "p", "cantor")?;
            let c = cantor_diagonal(p, a.depth)?;
            Ok(Generated {
                spec: HamiltonianSpec::Diagonal(c.spec),
                companion: None,
                modulus: None,
                params: json!({"p": p, "depth": a.depth, "ratio": c.ratio}),
                predicted_lower: None,
                predicted_upper: None,
                which: "maxmod,upper:opt",
                grid: (10.0, 1e4, 12),
            })
        }
        other => Err(CliError::Input(format!("unknown family '{other}' (expected chirp, polygon, sharpness, cantor)"))),
    }
}

fn slope_of(curves: &[GrowthCurve], kind: CurveKind) -> Option<f64> {
    let c = curves.iter().find(|c| c.kind == kind)?;
    fit_order(&c.r, &c.value).ok().map(|f| f.slope)
}

pub fn run(a: &ExampleArgs) -> CliResult<()> {
    let emit: BTreeSet<&str> = a.emit.split(',').map(str::trim).filter(|s| !s.is_empty()).collect();
    if let Some(bad) = emit.iter().find(|e| !matches!(**e, "spec" | "curves" | "report")) {
        return Err(CliError::Input(format!("unknown --emit item '{bad}' (expected spec, curves, report)")));
    }
    let gen = generate(a)?;
    std::fs::create_dir_all(&a.out).map_err(|e| CliError::io(format!("cannot create {}", a.out.display()), e))?;
    if emit.contains("spec") {
        let body = serde_json::to_string_pretty(&gen.spec.to_json()).expect("JSON values serialize");
        write_file(&a.out.join("spec.json"), &body)?;
    }
    if !emit.contains("curves") && !emit.contains("report") {
        return Ok(());
    }
    let grid = grid_from(&a.grid, gen.grid)?;
    let which = parse_which(a.which.as_deref().unwrap_or(gen.which))?;
    let mut setup = CurveSetup::new(&gen.spec);
    setup.companion = gen.companion.as_ref();
    setup.modulus = gen.modulus.clone();
    let curves = compute_curves(&setup, &grid, &which)?;
    if emit.contains("curves") {
        write_file(&a.out.join("curves.csv"), &curves_csv(&curves))?;
    }
    if emit.contains("report") {
        let upper = slope_of(&curves, CurveKind::UpperRecipe).or_else(|| slope_of(&curves, CurveKind::UpperOpt));
        let report = json!({
            "family": a.family,
            "params": gen.params,
            "slopes": {
                "lower": slope_of(&curves, CurveKind::Lower),
                "maxmod": slope_of(&curves, CurveKind::MaxMod),
                "upper": upper,
            },
            "predicted": {"lower": gen.predicted_lower, "upper": gen.predicted_upper},
        });
        let body = serde_json::to_string_pretty(&report).expect("JSON values serialize");
        write_file(&a.out.join("report.json"), &body)?;
    }
    Ok(())
}
