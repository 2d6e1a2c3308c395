use std::collections::BTreeSet;

use num_complex::Complex64;

use crate::{CliError, CliResult};

/// Parse `a+bi` or `a-bi`, whitespace allowed anywhere.
pub fn complex(s: &str) -> CliResult<Complex64> {
    let bad = || CliError::Input(format!("cannot parse complex literal '{s}' (expected a+bi)"));
    let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    let body = t.strip_suffix('i').ok_or_else(bad)?;
    let b = body.as_bytes();
    let split = (1..b.len())
        .rev()
        .find(|&k| (b[k] == b'+' || b[k] == b'-') && !matches!(b[k - 1], b'e' | b'E'))
        .ok_or_else(bad)?;
    let re: f64 = body[..split].parse().map_err(|_| bad())?;
    let im: f64 = match &body[split..] {
        "+" => 1.0,
        "-" => -1.0,
        x => x.parse().map_err(|_| bad())?,
    };
    Ok(Complex64::new(re, im))
}

/// Comma-separated nonnegative indices.
pub fn indices(s: &str) -> CliResult<BTreeSet<usize>> {
    s.split(',')
        .filter(|t| !t.trim().is_empty())
        .map(|t| t.trim().parse().map_err(|_| CliError::Input(format!("bad index '{t}' in '{s}'"))))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn literals() {
        assert_eq!(complex("1+0i").unwrap(), Complex64::new(1.0, 0.0));
        assert_eq!(complex(" -2.5 - 3i ").unwrap(), Complex64::new(-2.5, -3.0));
        assert_eq!(complex("1e-3+2E+1i").unwrap(), Complex64::new(1e-3, 20.0));
        assert_eq!(complex("0-i").unwrap(), Complex64::new(0.0, -1.0));
        for bad in ["1", "i", "1+2", "a+bi", "+3i"] {
            assert!(complex(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn index_lists() {
        assert_eq!(indices("3, 0,3").unwrap().into_iter().collect::<Vec<_>>(), vec![0, 3]);
        assert!(indices("1,x").is_err());
    }
}
