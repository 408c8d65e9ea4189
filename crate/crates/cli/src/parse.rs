//! Flag values: comma lists, points and complex numbers.

use std::str::FromStr;

use num_complex::Complex64;
use serde::Serialize;

use crate::CliError;

pub fn reals(s: &str) -> Result<Vec<f64>, CliError> {
    s.split(',')
        .map(|v| v.trim().parse::<f64>().map_err(|e| CliError::Usage(format!("bad number {v:?}: {e}"))))
        .collect()
}

/// Comma list of reals, each repeated flag appending to the list.
pub fn real_lists(items: &[String]) -> Result<Vec<f64>, CliError> {
    let mut out = Vec::new();
    for s in items {
        out.extend(reals(s)?);
    }
    Ok(out)
}

pub fn usizes(s: &str) -> Result<Vec<usize>, CliError> {
    s.split(',')
        .map(|v| v.trim().parse::<usize>().map_err(|e| CliError::Usage(format!("bad integer {v:?}: {e}"))))
        .collect()
}

/// `origin` or `x1,...,xN`, checked against the dimension.
pub fn point(s: &str, n: usize) -> Result<Vec<f64>, CliError> {
    let x = if s.trim() == "origin" { vec![0.0; n] } else { reals(s)? };
    if x.len() != n {
        return Err(CliError::Usage(format!("point {s:?} has {} coordinates, N = {n}", x.len())));
    }
    Ok(x)
}

/// `2`, `-1.5i`, `0.3+2i`; comma lists allowed.
pub fn complexes(items: &[String]) -> Result<Vec<Complex64>, CliError> {
    let mut out = Vec::new();
    for s in items {
        for v in s.split(',') {
            let z = Complex64::from_str(v.trim()).map_err(|e| CliError::Usage(format!("bad complex number {v:?}: {e}")))?;
            out.push(z);
        }
    }
    Ok(out)
}

/// Serialized name of a library enum, e.g. a method or precision tag.
pub fn label<T: Serialize>(v: &T) -> String {
    match serde_json::to_value(v) {
        Ok(serde_json::Value::String(s)) => s,
        _ => String::new(),
    }
}

pub fn coords(x: &[f64]) -> String {
    x.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(",")
}
