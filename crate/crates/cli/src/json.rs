//! Canonical JSON: sorted keys, exact dyadics as `[-]0x<hex>p<exp>`, rationals as `p/q`.

use std::str::FromStr;

use cantorcert::rignum::{DyInterval, Dyadic};
use num_rational::BigRational;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::CliError;

pub fn dy(d: &Dyadic) -> Value {
    Value::String(d.to_hex())
}

pub fn iv(x: &DyInterval) -> Value {
    json!([dy(x.lo()), dy(x.hi())])
}

pub fn ivs(xs: &[DyInterval]) -> Value {
    Value::Array(xs.iter().map(iv).collect())
}

pub fn rat(q: &BigRational) -> Value {
    Value::String(q.to_string())
}

/// Compact rendering; `serde_json` keeps object keys sorted.
pub fn canonical(v: &Value) -> String {
    serde_json::to_string(v).expect("values serialize")
}

/// File rendering: pretty, sorted, newline-terminated.
pub fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("values serialize");
    s.push('\n');
    s
}

pub fn sha256(parts: &[&Value]) -> String {
    let mut h = Sha256::new();
    for p in parts {
        h.update(canonical(p).as_bytes());
        h.update(b"\n");
    }
    hex::encode(h.finalize())
}

fn schema(what: &str) -> CliError {
    CliError::Schema(what.to_string())
}

pub fn field<'a>(v: &'a Value, key: &str) -> Result<&'a Value, CliError> {
    v.get(key).ok_or_else(|| schema(&format!("missing field `{key}`")))
}

pub fn array<'a>(v: &'a Value, what: &str) -> Result<&'a Vec<Value>, CliError> {
    v.as_array().ok_or_else(|| schema(&format!("`{what}` must be an array")))
}

pub fn string<'a>(v: &'a Value, what: &str) -> Result<&'a str, CliError> {
    v.as_str().ok_or_else(|| schema(&format!("`{what}` must be a string")))
}

pub fn uint(v: &Value, what: &str) -> Result<u64, CliError> {
    v.as_u64().ok_or_else(|| schema(&format!("`{what}` must be a non-negative integer")))
}

pub fn int(v: &Value, what: &str) -> Result<i64, CliError> {
    v.as_i64().ok_or_else(|| schema(&format!("`{what}` must be an integer")))
}

pub fn parse_dy(v: &Value, what: &str) -> Result<Dyadic, CliError> {
    Dyadic::from_hex(string(v, what)?).ok_or_else(|| schema(&format!("`{what}` is not a hex dyadic")))
}

pub fn parse_iv(v: &Value, what: &str, prec: u32) -> Result<DyInterval, CliError> {
    let a = array(v, what)?;
    if a.len() != 2 {
        return Err(schema(&format!("`{what}` must be a [lo, hi] pair")));
    }
    let (lo, hi) = (parse_dy(&a[0], what)?, parse_dy(&a[1], what)?);
    DyInterval::new(lo, hi, prec).map_err(|_| schema(&format!("`{what}` has lo > hi")))
}

pub fn parse_ivs(v: &Value, what: &str, prec: u32) -> Result<Vec<DyInterval>, CliError> {
    array(v, what)?.iter().map(|x| parse_iv(x, what, prec)).collect()
}

pub fn parse_rat(s: &str) -> Result<BigRational, CliError> {
    let s = s.trim();
    let q = match s.split_once('/') {
        Some(_) => BigRational::from_str(s),
        None => BigRational::from_str(&format!("{s}/1")),
    };
    q.ok().ok_or_else(|| CliError::Usage(format!("`{s}` is not a rational p/q")))
}

pub fn parse_rat_value(v: &Value, what: &str) -> Result<BigRational, CliError> {
    parse_rat(string(v, what)?).map_err(|_| schema(&format!("`{what}` is not a rational")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn intervals_round_trip() {
        let x = DyInterval::from_ratio(2, 3, 96);
        let back = parse_iv(&iv(&x), "x", 96).unwrap();
        assert_eq!(back, x);
    }

    #[test]
    fn keys_are_sorted() {
        let v = json!({"b": 1, "a": {"d": 2, "c": 3}});
        assert_eq!(canonical(&v), r#"{"a":{"c":3,"d":2},"b":1}"#);
    }

    #[test]
    fn rationals() {
        assert_eq!(parse_rat("3/6").unwrap(), BigRational::new(1.into(), 2.into()));
        assert_eq!(parse_rat("2").unwrap(), BigRational::from_integer(2.into()));
        assert!(parse_rat("1/0").is_err());
        assert!(parse_rat("x").is_err());
    }
}
