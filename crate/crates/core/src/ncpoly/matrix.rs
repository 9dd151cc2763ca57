use serde::{Deserialize, Serialize};

use super::{MatrixTuple, NCPoly};
use crate::error::{Error, Result};
use crate::linalg::{self, CMat};
use crate::scalar::{ExactScalar, ScalarMatrix};

/// A matrix over `C<x_1, ..., x_n>`, row-major.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PolyMatrix {
    rows: usize,
    cols: usize,
    nvars: usize,
    entries: Vec<NCPoly>,
}

#[derive(Serialize, Deserialize)]
struct PolyMatrixJson {
    rows: usize,
    cols: usize,
    nvars: usize,
    entries: Vec<Vec<String>>,
}

impl PolyMatrix {
    pub fn zeros(rows: usize, cols: usize, nvars: usize) -> Self {
        PolyMatrix { rows, cols, nvars, entries: vec![NCPoly::zero(nvars); rows * cols] }
    }

    pub fn identity(n: usize, nvars: usize) -> Self {
        let mut m = PolyMatrix::zeros(n, n, nvars);
        for i in 0..n {
            m.set(i, i, NCPoly::one(nvars));
        }
        m
    }

    pub fn from_rows(nvars: usize, rows: Vec<Vec<NCPoly>>) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::DimensionMismatch("ragged matrix rows".into()));
        }
        let entries: Vec<NCPoly> = rows.into_iter().flatten().collect();
        if let Some(bad) = entries.iter().find(|p| p.nvars() != nvars) {
            return Err(Error::VarCountMismatch(bad.nvars(), nvars));
        }
        Ok(PolyMatrix { rows: r, cols: c, nvars, entries })
    }

    /// Parses every entry with the polynomial text format.
    pub fn parse_rows(nvars: usize, rows: &[&[&str]]) -> Result<Self> {
        let parsed = rows
            .iter()
            .map(|row| row.iter().map(|s| NCPoly::parse(s, Some(nvars))).collect::<Result<Vec<_>>>())
            .collect::<Result<Vec<_>>>()?;
        PolyMatrix::from_rows(nvars, parsed)
    }

    pub fn from_scalar(m: &ScalarMatrix, nvars: usize) -> Self {
        let mut out = PolyMatrix::zeros(m.rows(), m.cols(), nvars);
        for i in 0..m.rows() {
            for j in 0..m.cols() {
                out.set(i, j, NCPoly::constant(nvars, m[(i, j)].clone()));
            }
        }
        out
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn get(&self, i: usize, j: usize) -> &NCPoly {
        &self.entries[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, p: NCPoly) {
        assert_eq!(p.nvars(), self.nvars);
        self.entries[i * self.cols + j] = p;
    }

    pub fn entries(&self) -> &[NCPoly] {
        &self.entries
    }

    /// Largest entry degree; `None` for the zero matrix.
    pub fn degree(&self) -> Option<usize> {
        self.entries.iter().filter_map(NCPoly::degree).max()
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(NCPoly::is_zero)
    }

    /// `true` at `(i, j)` when the entry is a nonzero polynomial.
    pub fn nonzero_pattern(&self) -> Vec<Vec<bool>> {
        (0..self.rows).map(|i| (0..self.cols).map(|j| !self.get(i, j).is_zero()).collect()).collect()
    }

    pub fn submatrix(&self, rows: &[usize], cols: &[usize]) -> PolyMatrix {
        let mut out = PolyMatrix::zeros(rows.len(), cols.len(), self.nvars);
        for (a, &i) in rows.iter().enumerate() {
            for (b, &j) in cols.iter().enumerate() {
                out.set(a, b, self.get(i, j).clone());
            }
        }
        out
    }

    pub fn add(&self, other: &PolyMatrix) -> Result<PolyMatrix> {
        if (self.rows, self.cols) != (other.rows, other.cols) {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} + {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let entries = self.entries.iter().zip(&other.entries).map(|(a, b)| a.add(b)).collect::<Result<_>>()?;
        Ok(PolyMatrix { rows: self.rows, cols: self.cols, nvars: self.nvars, entries })
    }

    pub fn mul(&self, other: &PolyMatrix) -> Result<PolyMatrix> {
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} * {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        if self.nvars != other.nvars {
            return Err(Error::VarCountMismatch(self.nvars, other.nvars));
        }
        let mut out = PolyMatrix::zeros(self.rows, other.cols, self.nvars);
        for i in 0..self.rows {
            for j in 0..other.cols {
                let mut acc = NCPoly::zero(self.nvars);
                for k in 0..self.cols {
                    let (a, b) = (self.get(i, k), other.get(k, j));
                    if !a.is_zero() && !b.is_zero() {
                        acc = acc.add(&a.mul(b)?)?;
                    }
                }
                out.set(i, j, acc);
            }
        }
        Ok(out)
    }

    pub fn mul_scalar_left(&self, s: &ScalarMatrix) -> Result<PolyMatrix> {
        PolyMatrix::from_scalar(s, self.nvars).mul(self)
    }

    /// Conjugate transpose with the involution applied entrywise.
    pub fn adjoint(&self) -> PolyMatrix {
        let mut out = PolyMatrix::zeros(self.cols, self.rows, self.nvars);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.set(j, i, self.get(i, j).adjoint());
            }
        }
        out
    }

    /// Block matrix `(P_ij(X))`, of size `rows*d x cols*d`.
    pub fn eval(&self, x: &MatrixTuple) -> Result<CMat> {
        if x.n() < self.nvars {
            return Err(Error::DimensionMismatch(format!(
                "matrix in {} variables evaluated at a {}-tuple",
                self.nvars,
                x.n()
            )));
        }
        let d = x.dim();
        let mut out = linalg::zeros(self.rows * d, self.cols * d);
        for i in 0..self.rows {
            for j in 0..self.cols {
                let e = self.get(i, j);
                if !e.is_zero() {
                    out.view_mut((i * d, j * d), (d, d)).copy_from(&e.eval(x)?);
                }
            }
        }
        Ok(out)
    }

    /// Coefficient matrix of a word across all entries.
    pub fn coefficient_matrix(&self, w: &super::Word) -> ScalarMatrix {
        ScalarMatrix::from_fn(self.rows, self.cols, |i, j| self.get(i, j).coefficient(w))
    }

    pub fn to_json(&self) -> String {
        let j = PolyMatrixJson {
            rows: self.rows,
            cols: self.cols,
            nvars: self.nvars,
            entries: (0..self.rows).map(|i| (0..self.cols).map(|c| self.get(i, c).to_string()).collect()).collect(),
        };
        serde_json::to_string(&j).expect("serializable")
    }

    pub fn from_json(text: &str) -> Result<PolyMatrix> {
        let j: PolyMatrixJson = serde_json::from_str(text)?;
        if j.entries.len() != j.rows || j.entries.iter().any(|r| r.len() != j.cols) {
            return Err(Error::DimensionMismatch("entries do not match rows/cols".into()));
        }
        let rows = j
            .entries
            .iter()
            .map(|r| r.iter().map(|s| NCPoly::parse(s, Some(j.nvars))).collect::<Result<Vec<_>>>())
            .collect::<Result<Vec<_>>>()?;
        PolyMatrix::from_rows(j.nvars, rows)
    }

    pub fn scalar_entry(nvars: usize, c: i64) -> NCPoly {
        NCPoly::constant(nvars, ExactScalar::from_int(c))
    }
}
