use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::io;
use crate::linalg::{self, CMat};

/// An evaluation point `X = (X_1, ..., X_n)` of square complex matrices of a common size.
#[derive(Clone, Debug)]
pub struct MatrixTuple {
    dim: usize,
    mats: Vec<CMat>,
    selfadjoint: bool,
}

impl MatrixTuple {
    /// Validates shapes and, when `selfadjoint` is set, that every matrix is Hermitian to
    /// within `1e-12 * ||X_i||`.
    pub fn new(mats: Vec<CMat>, selfadjoint: bool) -> Result<Self> {
        let dim = mats.first().map_or(0, |m| m.nrows());
        for (i, m) in mats.iter().enumerate() {
            if m.nrows() != dim || m.ncols() != dim {
                return Err(Error::DimensionMismatch(format!(
                    "matrix {} is {}x{}, expected {dim}x{dim}",
                    i + 1,
                    m.nrows(),
                    m.ncols()
                )));
            }
            if selfadjoint && linalg::hermitian_defect(m) > 1e-12 * m.norm().max(1e-300) {
                return Err(Error::NotSelfadjoint);
            }
        }
        Ok(MatrixTuple { dim, mats, selfadjoint })
    }

    /// A tuple of `dim x dim` matrices with no variables.
    pub fn empty(dim: usize) -> Self {
        MatrixTuple { dim, mats: Vec::new(), selfadjoint: true }
    }

    pub fn from_real_rows(mats: &[&[&[f64]]], selfadjoint: bool) -> Result<Self> {
        let ms = mats
            .iter()
            .map(|rows| {
                let n = rows.len();
                CMat::from_fn(n, rows.first().map_or(0, |r| r.len()), |i, j| rows[i][j].into())
            })
            .collect();
        MatrixTuple::new(ms, selfadjoint)
    }

    pub fn n(&self) -> usize {
        self.mats.len()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn mats(&self) -> &[CMat] {
        &self.mats
    }

    pub fn is_selfadjoint(&self) -> bool {
        self.selfadjoint
    }

    /// `{"n": .., "dim": .., "mats": [matrix, ...], "selfadjoint": bool}`.
    pub fn to_json_value(&self) -> Value {
        json!({
            "n": self.n(),
            "dim": self.dim,
            "mats": self.mats.iter().map(io::cmat_to_value).collect::<Vec<_>>(),
            "selfadjoint": self.selfadjoint,
        })
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let v: Value = serde_json::from_str(text)?;
        let mats = v
            .get("mats")
            .and_then(Value::as_array)
            .ok_or_else(|| Error::Parse("tuple JSON needs a \"mats\" array".into()))?
            .iter()
            .map(io::cmat_from_value)
            .collect::<Result<Vec<_>>>()?;
        if let Some(n) = v.get("n").and_then(Value::as_u64) {
            if n as usize != mats.len() {
                return Err(Error::DimensionMismatch(format!("n = {n} but {} matrices given", mats.len())));
            }
        }
        let selfadjoint = v.get("selfadjoint").and_then(Value::as_bool).unwrap_or(false);
        let t = MatrixTuple::new(mats, selfadjoint)?;
        if let Some(d) = v.get("dim").and_then(Value::as_u64) {
            if t.n() > 0 && d as usize != t.dim {
                return Err(Error::DimensionMismatch(format!("dim = {d} but matrices are {}x{}", t.dim, t.dim)));
            }
            if t.n() == 0 {
                return Ok(MatrixTuple::empty(d as usize));
            }
        }
        Ok(t)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_non_hermitian_when_flagged() {
        let r = MatrixTuple::from_real_rows(&[&[&[0.0, 1.0], &[0.0, 0.0]]], true);
        assert!(matches!(r, Err(Error::NotSelfadjoint)));
        assert!(MatrixTuple::from_real_rows(&[&[&[0.0, 1.0], &[0.0, 0.0]]], false).is_ok());
    }

    #[test]
    fn rejects_mixed_sizes() {
        let a = linalg::identity(2);
        let b = linalg::identity(3);
        assert!(MatrixTuple::new(vec![a, b], false).is_err());
    }

    #[test]
    fn json_round_trip() {
        let t = MatrixTuple::from_real_rows(&[&[&[1.0, 2.0], &[2.0, -1.0]], &[&[0.5, 0.0], &[0.0, 3.0]]], true).unwrap();
        let back = MatrixTuple::from_json(&t.to_json_value().to_string()).unwrap();
        assert_eq!(back.n(), 2);
        assert_eq!(back.mats()[0], t.mats()[0]);
        assert!(back.is_selfadjoint());
    }
}
