//! JSON number conventions shared by the file formats: a scalar is a number, a `"p/q"`
//! string, or a `[re, im]` pair of those.

use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::ToPrimitive;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::linalg::CMat;
use crate::scalar::{parse_real_literal, ExactScalar, ScalarMatrix};

fn real_from_value(v: &Value) -> Result<BigRational> {
    match v {
        Value::Number(n) => {
            if let Some(i) = n.as_i64() {
                return Ok(BigRational::from_integer(i.into()));
            }
            let f = n.as_f64().ok_or_else(|| Error::Parse(format!("unsupported number {n}")))?;
            BigRational::from_float(f).ok_or_else(|| Error::Parse(format!("non-finite number {n}")))
        }
        Value::String(s) => {
            let t = s.trim();
            let (neg, body) = match t.strip_prefix('-') {
                Some(b) => (true, b),
                None => (false, t.strip_prefix('+').unwrap_or(t)),
            };
            let q = parse_real_literal(body).ok_or_else(|| Error::Parse(format!("invalid rational '{s}'")))?;
            Ok(if neg { -q } else { q })
        }
        other => Err(Error::Parse(format!("expected a number, found {other}"))),
    }
}

pub fn scalar_from_value(v: &Value) -> Result<ExactScalar> {
    match v {
        Value::Array(parts) if parts.len() == 2 => {
            Ok(ExactScalar::new(real_from_value(&parts[0])?, real_from_value(&parts[1])?))
        }
        Value::Array(_) => Err(Error::Parse("complex entries must be [re, im] pairs".into())),
        Value::String(s) if s.contains('i') => s.parse(),
        _ => Ok(ExactScalar::new(real_from_value(v)?, BigRational::from_integer(0.into()))),
    }
}

fn real_to_value(q: &BigRational) -> Value {
    if q.is_integer() {
        if let Some(i) = q.numer().to_i64() {
            return json!(i);
        }
    }
    if let Some(f) = q.to_f64() {
        if BigRational::from_float(f).as_ref() == Some(q) {
            return json!(f);
        }
    }
    if q.is_integer() {
        Value::String(q.numer().to_string())
    } else {
        Value::String(format!("{}/{}", q.numer(), q.denom()))
    }
}

/// `[re, im]`, each exact: integers and doubles as numbers, other rationals as `"p/q"`.
pub fn scalar_to_value(z: &ExactScalar) -> Value {
    Value::Array(vec![real_to_value(&z.re), real_to_value(&z.im)])
}

pub fn c64_to_value(z: Complex64) -> Value {
    json!([z.re, z.im])
}

pub fn matrix_from_value(v: &Value) -> Result<ScalarMatrix> {
    let rows = v.as_array().ok_or_else(|| Error::Parse("matrix must be an array of rows".into()))?;
    let parsed = rows
        .iter()
        .map(|r| {
            r.as_array()
                .ok_or_else(|| Error::Parse("matrix row must be an array".into()))?
                .iter()
                .map(scalar_from_value)
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    ScalarMatrix::from_rows(&parsed)
}

pub fn matrix_to_value(m: &ScalarMatrix) -> Value {
    Value::Array(
        (0..m.rows())
            .map(|i| Value::Array((0..m.cols()).map(|j| scalar_to_value(&m[(i, j)])).collect()))
            .collect(),
    )
}

pub fn cmat_to_value(m: &CMat) -> Value {
    Value::Array(
        (0..m.nrows())
            .map(|i| Value::Array((0..m.ncols()).map(|j| c64_to_value(m[(i, j)])).collect()))
            .collect(),
    )
}

pub fn cmat_from_value(v: &Value) -> Result<CMat> {
    Ok(matrix_from_value(v)?.to_cmat())
}
