use std::fmt::Write as _;
use std::path::Path;

use canogrowth::curves::{compute_curves, curve_rows, parse_which, CurveSetup, GrowthCurve, RadiusGrid};
use canogrowth::hamiltonian::HamiltonianSpec;
use canogrowth::monodromy::{MonodromyOptions, Propagator};
use canogrowth::spectrum::{cut_zero_inequality, kdb_density};
use canogrowth::upper_bounds::{modulus_for, romanov_check, romanov_family, thm14_recipe, Strategy};
use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::parse;
use crate::{CliError, CliResult, GridArgs};

pub fn read_spec(path: &Path) -> CliResult<HamiltonianSpec> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(format!("cannot read {}", path.display()), e))?;
    Ok(HamiltonianSpec::from_json_str(&text)?)
}

pub fn write_file(path: &Path, body: &str) -> CliResult<()> {
    std::fs::write(path, body).map_err(|e| CliError::io(format!("cannot write {}", path.display()), e))
}

fn print_json(v: &Value) {
    println!("{}", serde_json::to_string_pretty(v).expect("JSON values serialize"));
}

pub fn grid_from(args: &GridArgs, default: (f64, f64, usize)) -> CliResult<RadiusGrid> {
    Ok(RadiusGrid::new(
        args.rmin.unwrap_or(default.0),
        args.rmax.unwrap_or(default.1),
        args.points.unwrap_or(default.2),
    )?)
}

pub const DEFAULT_GRID: (f64, f64, usize) = (10.0, 1e5, 16);

fn options(tol: Option<f64>) -> CliResult<MonodromyOptions> {
    let mut o = MonodromyOptions::default();
    if let Some(t) = tol {
        if !(t > 0.0 && t < 1.0) {
            return Err(CliError::Input(format!("--tol must lie in (0, 1), got {t}")));
        }
        o.tol = t;
    }
    Ok(o)
}

pub fn monodromy(system: &Path, z: &str, tol: Option<f64>) -> CliResult<()> {
    let spec = read_spec(system)?;
    let z = parse::complex(z)?;
    let m = Propagator::new(&spec, options(tol)?)?.at(z)?;
    let u = m.w.unit;
    let entry = |c: num_complex::Complex64| json!([c.re, c.im]);
    print_json(&json!({
        "W_unit": [[entry(u.m11), entry(u.m12)], [entry(u.m21), entry(u.m22)]],
        "logScale": m.w.log_scale,
        "logNorm": m.log_norm,
        "det_check": m.w.det_defect(),
        "level": m.level,
    }));
    Ok(())
}

/// `r,tag,value` lines; `-inf` stays literal.
pub fn curves_csv(curves: &[GrowthCurve]) -> String {
    let mut s = String::from("r,tag,value\n");
    for row in curve_rows(curves) {
        writeln!(s, "{},{},{}", row.r, row.kind, row.value).expect("writing to a String");
    }
    s
}

pub fn curves(
    system: &Path,
    grid: &GridArgs,
    which: &str,
    tol: Option<f64>,
    samples: usize,
    strategy: &str,
    out: Option<&Path>,
) -> CliResult<()> {
    let spec = read_spec(system)?;
    let grid = grid_from(grid, DEFAULT_GRID)?;
    let which = parse_which(which)?;
    let mut setup = CurveSetup::new(&spec);
    setup.tol = options(tol)?.tol;
    setup.samples = samples;
    setup.strategy = strategy.parse::<Strategy>()?;
    let csv = curves_csv(&compute_curves(&setup, &grid, &which)?);
    match out {
        Some(p) => write_file(p, &csv),
        None => {
            print!("{csv}");
            Ok(())
        }
    }
}

pub fn bound_check(system: &Path, d: f64, c: f64, grid: &GridArgs, family: &str, alpha: Option<f64>) -> CliResult<()> {
    let spec = read_spec(system)?;
    let r = grid_from(grid, (1e2, 1e6, 9))?.points();
    let report = match family {
        "recipe" => {
            let p = spec
                .as_profile()
                .ok_or_else(|| CliError::Input(format!("the recipe family needs a profile, got {}", spec.kind_name())))?;
            let m = modulus_for(p)?;
            romanov_check(&spec, d, &|x| thm14_recipe(&spec, x, &m).map(|(b, _)| b), c, &r)?
        }
        "romanov" => {
            let a = alpha.ok_or_else(|| CliError::Input("--family romanov needs --alpha".into()))?;
            romanov_check(&spec, d, &|x| romanov_family(&spec, x, a), c, &r)?
        }
        other => return Err(CliError::Input(format!("unknown bound family '{other}' (expected recipe or romanov)"))),
    };
    let rows: Vec<Value> =
        report.rows.iter().map(|w| json!({"r": w.r, "lhs": w.lhs, "rhs": w.rhs, "ok": w.ok})).collect();
    print_json(&json!({
        "d": report.d,
        "c": report.c,
        "rows": rows,
        "all_ok": report.all_ok(),
        "violated": report.violated(),
        "implied_k": report.implied_k,
    }));
    Ok(())
}

pub fn cut_check(system: &Path, keep: Option<&str>, seed: Option<u64>, rmax: f64, points: usize) -> CliResult<()> {
    let spec = read_spec(system)?;
    let HamiltonianSpec::Hamburger(h) = &spec else {
        return Err(CliError::Input(format!("cut-check needs a Hamburger spec, got {}", spec.kind_name())));
    };
    let keep = match (keep, seed) {
        (Some(k), _) => parse::indices(k)?,
        (None, Some(s)) => {
            let n = h.len();
            let mut rng = ChaCha8Rng::seed_from_u64(s);
            sample(&mut rng, n, n.div_ceil(2)).into_iter().collect()
        }
        (None, None) => return Err(CliError::Input("cut-check needs --keep or --seed".into())),
    };
    let rep = cut_zero_inequality(h, &keep, rmax, points)?;
    let rows: Vec<Value> = rep.rows.iter().map(|(r, n, m)| json!({"r": r, "n": n, "n_cut": m})).collect();
    print_json(&json!({
        "keep": keep,
        "holds": rep.holds(),
        "max_violation": rep.max_violation,
        "rows": rows,
    }));
    Ok(())
}

pub fn kdb(system: &Path, rmax: f64) -> CliResult<()> {
    let spec = read_spec(system)?;
    let k = kdb_density(&spec, rmax)?;
    print_json(&json!({"R": rmax, "count": k.count, "empirical": k.empirical, "predicted": k.predicted}));
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use canogrowth::curves::CurveKind;

    #[test]
    fn csv_rows_ordered_and_neg_inf_literal() {
        let c = |kind, value: Vec<f64>| GrowthCurve { kind, r: vec![1.0, 10.0], value };
        let csv = curves_csv(&[
            c(CurveKind::UpperRecipe, vec![3.0, 4.0]),
            c(CurveKind::Lower, vec![f64::NEG_INFINITY, 0.5]),
        ]);
        assert_eq!(csv, "r,tag,value\n1,lower,-inf\n1,upper:recipe,3\n10,lower,0.5\n10,upper:recipe,4\n");
        assert!(json!({"v": f64::NEG_INFINITY})["v"].is_null());
    }
}
