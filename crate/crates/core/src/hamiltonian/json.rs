//! JSON documents for [`HamiltonianSpec`]; unknown keys are rejected.

use serde_json::{json, Map, Value};

use super::{
    AngleFn, AngleProfile, ConstantSpec, DensityFn, DiagonalSpec, HamburgerSpec, HamiltonianSpec,
    Polygon, Steps, Table,
};
use crate::error::{Error, Result};
use crate::mat2::Mat2;

fn obj<'a>(v: &'a Value, ctx: &str) -> Result<&'a Map<String, Value>> {
    v.as_object().ok_or_else(|| Error::input(format!("{ctx}: expected a JSON object")))
}

fn check_keys(m: &Map<String, Value>, allowed: &[&str], ctx: &str) -> Result<()> {
    if let Some(k) = m.keys().find(|k| !allowed.contains(&k.as_str())) {
        return Err(Error::input(format!("{ctx}: unknown key '{k}'")));
    }
    Ok(())
}

fn field<'a>(m: &'a Map<String, Value>, key: &str, ctx: &str) -> Result<&'a Value> {
    m.get(key).ok_or_else(|| Error::input(format!("{ctx}: missing key '{key}'")))
}

fn num(m: &Map<String, Value>, key: &str, ctx: &str) -> Result<f64> {
    field(m, key, ctx)?
        .as_f64()
        .ok_or_else(|| Error::input(format!("{ctx}: key '{key}' must be a number")))
}

fn nums(m: &Map<String, Value>, key: &str, ctx: &str) -> Result<Vec<f64>> {
    let bad = || Error::input(format!("{ctx}: key '{key}' must be an array of numbers"));
    field(m, key, ctx)?
        .as_array()
        .ok_or_else(bad)?
        .iter()
        .map(|x| x.as_f64().ok_or_else(bad))
        .collect()
}

fn pairs(m: &Map<String, Value>, key: &str, ctx: &str) -> Result<Vec<(f64, f64)>> {
    let bad = || Error::input(format!("{ctx}: key '{key}' must be an array of [a, b] pairs"));
    field(m, key, ctx)?
        .as_array()
        .ok_or_else(bad)?
        .iter()
        .map(|p| match p.as_array().map(|a| a.as_slice()) {
            Some([a, b]) => Ok((a.as_f64().ok_or_else(bad)?, b.as_f64().ok_or_else(bad)?)),
            _ => Err(bad()),
        })
        .collect()
}

fn domain(m: &Map<String, Value>, ctx: &str) -> Result<(f64, f64)> {
    match nums(m, "domain", ctx)?.as_slice() {
        [a, b] => Ok((*a, *b)),
        _ => Err(Error::input(format!("{ctx}: key 'domain' must be [a, b]"))),
    }
}

fn name<'a>(m: &'a Map<String, Value>, ctx: &str) -> Result<&'a str> {
    field(m, "name", ctx)?
        .as_str()
        .ok_or_else(|| Error::input(format!("{ctx}: key 'name' must be a string")))
}

fn angle_from(v: &Value) -> Result<AngleFn> {
    let ctx = "phi";
    let m = obj(v, ctx)?;
    let f = match name(m, ctx)? {
        "const" => {
            check_keys(m, &["name", "value"], ctx)?;
            AngleFn::Constant(num(m, "value", ctx)?)
        }
        "chirp" => {
            check_keys(m, &["name", "gamma", "beta"], ctx)?;
            AngleFn::Chirp { gamma: num(m, "gamma", ctx)?, beta: num(m, "beta", ctx)? }
        }
        "holder" => {
            check_keys(m, &["name", "c", "alpha"], ctx)?;
            AngleFn::HolderPower { c: num(m, "c", ctx)?, alpha: num(m, "alpha", ctx)? }
        }
        "polygon" => {
            check_keys(m, &["name", "plateaus", "ramps", "heights"], ctx)?;
            AngleFn::Polygon(Polygon::new(
                nums(m, "plateaus", ctx)?,
                nums(m, "ramps", ctx)?,
                nums(m, "heights", ctx)?,
            )?)
        }
        "table" => {
            check_keys(m, &["name", "t", "value"], ctx)?;
            AngleFn::Table(Table::new(nums(m, "t", ctx)?, nums(m, "value", ctx)?)?)
        }
        "steps" => {
            check_keys(m, &["name", "breaks", "values"], ctx)?;
            AngleFn::Steps(Steps::new(nums(m, "breaks", ctx)?, nums(m, "values", ctx)?)?)
        }
        "reparam" => {
            check_keys(m, &["name", "inner", "kappa"], ctx)?;
            AngleFn::Reparam {
                inner: Box::new(angle_from(field(m, "inner", ctx)?)?),
                kappa: num(m, "kappa", ctx)?,
            }
        }
        other => return Err(Error::input(format!("phi: unknown name '{other}'"))),
    };
    Ok(f)
}

fn density_from(v: &Value) -> Result<DensityFn> {
    let ctx = "density";
    let m = obj(v, ctx)?;
    let f = match name(m, ctx)? {
        "const" => {
            check_keys(m, &["name", "value"], ctx)?;
            DensityFn::Const(num(m, "value", ctx)?)
        }
        "power" => {
            check_keys(m, &["name", "c", "exponent"], ctx)?;
            DensityFn::Power { c: num(m, "c", ctx)?, exponent: num(m, "exponent", ctx)? }
        }
        "table" => {
            check_keys(m, &["name", "t", "value"], ctx)?;
            DensityFn::Table(Table::new(nums(m, "t", ctx)?, nums(m, "value", ctx)?)?)
        }
        "steps" => {
            check_keys(m, &["name", "breaks", "values"], ctx)?;
            DensityFn::Steps(Steps::new(nums(m, "breaks", ctx)?, nums(m, "values", ctx)?)?)
        }
        "reparam" => {
            check_keys(m, &["name", "inner", "kappa"], ctx)?;
            DensityFn::Reparam {
                inner: Box::new(density_from(field(m, "inner", ctx)?)?),
                kappa: num(m, "kappa", ctx)?,
            }
        }
        other => return Err(Error::input(format!("density: unknown name '{other}'"))),
    };
    Ok(f)
}

fn angle_to(f: &AngleFn) -> Value {
    match f {
        AngleFn::Constant(c) => json!({"name": "const", "value": c}),
        AngleFn::Chirp { gamma, beta } => json!({"name": "chirp", "gamma": gamma, "beta": beta}),
        AngleFn::HolderPower { c, alpha } => json!({"name": "holder", "c": c, "alpha": alpha}),
        AngleFn::Polygon(p) => json!({
            "name": "polygon", "plateaus": p.plateaus, "ramps": p.ramps, "heights": p.heights
        }),
        AngleFn::Table(t) => json!({"name": "table", "t": t.t, "value": t.value}),
        AngleFn::Steps(s) => json!({"name": "steps", "breaks": s.breaks, "values": s.values}),
        AngleFn::Reparam { inner, kappa } => {
            json!({"name": "reparam", "inner": angle_to(inner), "kappa": kappa})
        }
    }
}

fn density_to(f: &DensityFn) -> Value {
    match f {
        DensityFn::Const(c) => json!({"name": "const", "value": c}),
        DensityFn::Power { c, exponent } => json!({"name": "power", "c": c, "exponent": exponent}),
        DensityFn::Table(t) => json!({"name": "table", "t": t.t, "value": t.value}),
        DensityFn::Steps(s) => json!({"name": "steps", "breaks": s.breaks, "values": s.values}),
        DensityFn::Reparam { inner, kappa } => {
            json!({"name": "reparam", "inner": density_to(inner), "kappa": kappa})
        }
    }
}

impl HamiltonianSpec {
    /// Parse and validate a JSON document.
    pub fn from_json_str(s: &str) -> Result<Self> {
        let v: Value =
            serde_json::from_str(s).map_err(|e| Error::input(format!("malformed JSON: {e}")))?;
        Self::from_json(&v)
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        let m = obj(v, "spec")?;
        let kind = field(m, "kind", "spec")?
            .as_str()
            .ok_or_else(|| Error::input("spec: key 'kind' must be a string"))?;
        match kind {
            "hamburger" => {
                let ctx = "hamburger spec";
                check_keys(m, &["kind", "lengths", "angles"], ctx)?;
                Ok(HamiltonianSpec::Hamburger(HamburgerSpec::new(
                    nums(m, "lengths", ctx)?,
                    nums(m, "angles", ctx)?,
                )?))
            }
            "profile" => {
                let ctx = "profile spec";
                check_keys(m, &["kind", "domain", "phi", "density"], ctx)?;
                let phi = angle_from(field(m, "phi", ctx)?)?;
                let density = match m.get("density") {
                    Some(d) => density_from(d)?,
                    None => DensityFn::Const(1.0),
                };
                Ok(HamiltonianSpec::Profile(AngleProfile::new(domain(m, ctx)?, phi, density)?))
            }
            "diagonal" => {
                let ctx = "diagonal spec";
                check_keys(m, &["kind", "domain", "h1_intervals"], ctx)?;
                Ok(HamiltonianSpec::Diagonal(DiagonalSpec::new(
                    domain(m, ctx)?,
                    pairs(m, "h1_intervals", ctx)?,
                )?))
            }
            "constant" => {
                let ctx = "constant spec";
                check_keys(m, &["kind", "matrix", "length"], ctx)?;
                let rows = pairs(m, "matrix", ctx)?;
                if rows.len() != 2 {
                    return Err(Error::input("constant spec: key 'matrix' must be 2x2"));
                }
                let mat = Mat2::new(rows[0].0, rows[0].1, rows[1].0, rows[1].1);
                Ok(HamiltonianSpec::ConstantMatrix(ConstantSpec::new(mat, num(m, "length", ctx)?)?))
            }
            other => Err(Error::input(format!("spec: unknown kind '{other}'"))),
        }
    }

    pub fn to_json(&self) -> Value {
        match self {
            HamiltonianSpec::Hamburger(h) => {
                json!({"kind": "hamburger", "lengths": h.lengths, "angles": h.angles})
            }
            HamiltonianSpec::Profile(p) => json!({
                "kind": "profile",
                "domain": [p.domain.0, p.domain.1],
                "phi": angle_to(&p.phi),
                "density": density_to(&p.density),
            }),
            HamiltonianSpec::Diagonal(d) => json!({
                "kind": "diagonal",
                "domain": [d.domain.0, d.domain.1],
                "h1_intervals": d.h1_intervals.iter().map(|(a, b)| [*a, *b]).collect::<Vec<_>>(),
            }),
            HamiltonianSpec::ConstantMatrix(c) => json!({
                "kind": "constant",
                "matrix": c.matrix.rows(),
                "length": c.length,
            }),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_all_kinds_and_roundtrip() {
        let docs = [
            r#"{"kind":"hamburger","lengths":[1,2],"angles":[0,1.5]}"#,
            r#"{"kind":"profile","domain":[0,1],"phi":{"name":"chirp","gamma":1,"beta":1},"density":{"name":"const","value":1}}"#,
            r#"{"kind":"profile","domain":[0,1],"phi":{"name":"table","t":[0,1],"value":[0,2]}}"#,
            r#"{"kind":"profile","domain":[0,2.5],"phi":{"name":"polygon","plateaus":[1,1],"ramps":[0.5],"heights":[0,0.3]}}"#,
            r#"{"kind":"profile","domain":[0,1],"phi":{"name":"reparam","inner":{"name":"table","t":[0,1],"value":[0,1]},"kappa":2},"density":{"name":"power","c":2,"exponent":1}}"#,
            r#"{"kind":"diagonal","domain":[0,1],"h1_intervals":[[0,0.5]]}"#,
            r#"{"kind":"constant","matrix":[[1,0],[0,1]],"length":1}"#,
        ];
        for d in docs {
            let s = HamiltonianSpec::from_json_str(d).unwrap();
            let back = HamiltonianSpec::from_json(&s.to_json()).unwrap();
            assert_eq!(s, back, "{d}");
        }
    }

    #[test]
    fn errors_name_the_key() {
        let e = HamiltonianSpec::from_json_str(r#"{"kind":"hamburger","lengths":[1],"angles":[0],"extra":1}"#)
            .unwrap_err();
        assert!(e.to_string().contains("'extra'"), "{e}");
        let e = HamiltonianSpec::from_json_str(r#"{"kind":"hamburger","angles":[0]}"#).unwrap_err();
        assert!(e.to_string().contains("'lengths'"), "{e}");
        let e = HamiltonianSpec::from_json_str(r#"{"kind":"profile","domain":[0,1],"phi":{"name":"chirp","gamma":1,"beta":1,"zeta":2}}"#)
            .unwrap_err();
        assert!(e.to_string().contains("'zeta'"), "{e}");
        assert!(HamiltonianSpec::from_json_str("{not json").unwrap_err().is_input_error());
        assert!(HamiltonianSpec::from_json_str(r#"{"kind":"weird"}"#).is_err());
    }
}
