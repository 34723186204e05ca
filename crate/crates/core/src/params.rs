//! `name:key=value,key=value` strings used to address builtins, operators
//! and classes from the command line.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::Complex;

#[derive(Debug, Default)]
pub struct Params {
    source: String,
    values: BTreeMap<String, String>,
}

/// Splits `name:k=v,...` into the lower-cased name and its parameters.
pub fn parse_params(s: &str) -> Result<(String, Params)> {
    let s = s.trim();
    let (name, rest) = match s.split_once(':') {
        Some((n, r)) => (n, r),
        None => (s, ""),
    };
    if name.is_empty() {
        return Err(Error::Parse(format!("missing name in '{s}'")));
    }
    let mut values = BTreeMap::new();
    for item in rest.split(',').map(str::trim).filter(|i| !i.is_empty()) {
        let (k, v) = item
            .split_once('=')
            .ok_or_else(|| Error::Parse(format!("expected key=value, got '{item}' in '{s}'")))?;
        let k = k.trim().to_ascii_lowercase();
        if values.insert(k.clone(), v.trim().to_string()).is_some() {
            return Err(Error::Parse(format!("duplicate key '{k}' in '{s}'")));
        }
    }
    Ok((
        name.trim().to_ascii_lowercase(),
        Params {
            source: s.to_string(),
            values,
        },
    ))
}

impl Params {
    pub fn take(&mut self, key: &str) -> Option<String> {
        self.values.remove(key)
    }

    pub fn real(&mut self, key: &str) -> Result<f64> {
        let raw = self
            .take(key)
            .ok_or_else(|| Error::Parse(format!("missing '{key}' in '{}'", self.source)))?;
        parse_real(&raw)
    }

    pub fn real_or(&mut self, key: &str, default: f64) -> Result<f64> {
        match self.take(key) {
            Some(raw) => parse_real(&raw),
            None => Ok(default),
        }
    }

    pub fn complex_or(&mut self, key: &str, default: Complex) -> Result<Complex> {
        match self.take(key) {
            Some(raw) => parse_complex(&raw),
            None => Ok(default),
        }
    }

    pub fn integer_or(&mut self, key: &str, default: u64) -> Result<u64> {
        match self.take(key) {
            Some(raw) => raw
                .parse()
                .map_err(|_| Error::Parse(format!("'{key}' must be a nonnegative integer, got '{raw}'"))),
            None => Ok(default),
        }
    }

    /// Remaining keys, in sorted order.
    pub fn remaining(&self) -> Vec<(String, String)> {
        self.values
            .iter()
            .map(|(k, v)| (k.clone(), v.clone()))
            .collect()
    }

    /// Rejects any key that was not consumed.
    pub fn finish(self) -> Result<()> {
        match self.values.keys().next() {
            None => Ok(()),
            Some(k) => Err(Error::Parse(format!("unknown key '{k}' in '{}'", self.source))),
        }
    }
}

pub fn parse_real(raw: &str) -> Result<f64> {
    let v: f64 = raw
        .trim()
        .parse()
        .map_err(|_| Error::Parse(format!("not a number: '{raw}'")))?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::Parse(format!("not a finite number: '{raw}'")))
    }
}

/// Accepts `a`, `bi`, `a+bi` and `a-bi`.
pub fn parse_complex(raw: &str) -> Result<Complex> {
    let s = raw.trim();
    let err = || Error::Parse(format!("not a complex number: '{raw}'"));
    let Some(body) = s.strip_suffix('i') else {
        return Ok(Complex::new(parse_real(s)?, 0.0));
    };
    // split at the last sign that is not part of an exponent or the leading sign
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&k| (bytes[k] == b'+' || bytes[k] == b'-') && !matches!(bytes[k - 1], b'e' | b'E'));
    let (re, im) = match split {
        Some(k) => (parse_real(&body[..k])?, &body[k..]),
        None => (0.0, body),
    };
    let im = match im {
        "" | "+" => 1.0,
        "-" => -1.0,
        other => parse_real(other).map_err(|_| err())?,
    };
    Ok(Complex::new(re, im))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn splits_name_and_values() {
        let (name, mut p) = parse_params("Koebe:lambda=0.25, x=1").unwrap();
        assert_eq!(name, "koebe");
        assert_eq!(p.real("lambda").unwrap(), 0.25);
        assert_eq!(p.real("x").unwrap(), 1.0);
        p.finish().unwrap();
    }

    #[test]
    fn unknown_keys_rejected() {
        let (_, mut p) = parse_params("starlike:lambda=0.5,bogus=1").unwrap();
        p.real("lambda").unwrap();
        assert!(p.finish().is_err());
        assert!(parse_params("x:a").is_err());
        assert!(parse_params("x:a=1,a=2").is_err());
    }

    #[test]
    fn complex_forms() {
        assert_eq!(parse_complex("1").unwrap(), Complex::new(1.0, 0.0));
        assert_eq!(parse_complex("-0.5i").unwrap(), Complex::new(0.0, -0.5));
        assert_eq!(parse_complex("0.6+0.8i").unwrap(), Complex::new(0.6, 0.8));
        assert_eq!(parse_complex("0.6-0.8i").unwrap(), Complex::new(0.6, -0.8));
        assert_eq!(parse_complex("1e-3-2e-2i").unwrap(), Complex::new(1e-3, -2e-2));
        assert_eq!(parse_complex("i").unwrap(), Complex::new(0.0, 1.0));
        assert!(parse_complex("abc").is_err());
    }
}
