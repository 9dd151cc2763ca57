//! Linear pencils `A_0 + A_1 x_1 + ... + A_n x_n`, hollowness, the quantum operator and its
//! flatness constants, and monic reduction.

use num_complex::Complex64;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::io;
use crate::linalg::{self, CMat};
use crate::matching;
use crate::ncpoly::{MatrixTuple, NCPoly, PolyMatrix, Word};
use crate::rng;
use crate::scalar::{ExactScalar, ScalarMatrix};

/// Square linear pencil. Coefficients are held exactly (floats convert to their exact dyadic
/// value) with a cached floating copy for numerics.
#[derive(Clone, Debug)]
pub struct LinearPencil {
    size: usize,
    exact: Vec<ScalarMatrix>,
    coeffs: Vec<CMat>,
    selfadjoint: bool,
}

impl PartialEq for LinearPencil {
    fn eq(&self, other: &Self) -> bool {
        self.exact == other.exact && self.selfadjoint == other.selfadjoint
    }
}

impl LinearPencil {
    /// `coeffs[0]` is the constant term. Fails unless every coefficient is `N x N`, and, with
    /// `selfadjoint`, exactly Hermitian.
    pub fn new(coeffs: Vec<ScalarMatrix>, selfadjoint: bool) -> Result<Self> {
        let first = coeffs.first().ok_or_else(|| Error::DimensionMismatch("pencil needs coefficients".into()))?;
        let n = first.rows();
        for c in &coeffs {
            if c.rows() != c.cols() {
                return Err(Error::NotSquare { rows: c.rows(), cols: c.cols() });
            }
            if c.rows() != n {
                return Err(Error::DimensionMismatch(format!("coefficient is {0}x{0}, expected {n}x{n}", c.rows())));
            }
            if selfadjoint && !c.is_hermitian() {
                return Err(Error::NotSelfadjoint);
            }
        }
        let floats = coeffs.iter().map(ScalarMatrix::to_cmat).collect();
        Ok(LinearPencil { size: n, exact: coeffs, coeffs: floats, selfadjoint })
    }

    /// Floating coefficients; with `selfadjoint` they must be Hermitian within `1e-12 * ||A_i||`
    /// and are then symmetrized exactly.
    pub fn from_cmats(coeffs: &[CMat], selfadjoint: bool) -> Result<Self> {
        let mut exact = Vec::with_capacity(coeffs.len());
        for c in coeffs {
            let mut e = ScalarMatrix::from_cmat(c)?;
            if selfadjoint {
                if linalg::hermitian_defect(c) > 1e-12 * c.norm() {
                    return Err(Error::NotSelfadjoint);
                }
                let half = ExactScalar::from_ratio(1, 2);
                e = e.add(&e.adjoint()).scale(&half);
            }
            exact.push(e);
        }
        LinearPencil::new(exact, selfadjoint)
    }

    /// Integer coefficients, constant term first.
    pub fn from_ints(coeffs: &[&[&[i64]]], selfadjoint: bool) -> Result<Self> {
        LinearPencil::new(coeffs.iter().map(|c| ScalarMatrix::from_ints(c)).collect(), selfadjoint)
    }

    /// Reads off the coefficients of a square matrix of degree at most one.
    pub fn from_poly_matrix(p: &PolyMatrix) -> Result<Self> {
        if p.rows() != p.cols() {
            return Err(Error::NotSquare { rows: p.rows(), cols: p.cols() });
        }
        for i in 0..p.rows() {
            for j in 0..p.cols() {
                if let Some(d) = p.get(i, j).degree().filter(|&d| d > 1) {
                    return Err(Error::NotLinear { row: i, col: j, degree: d });
                }
            }
        }
        let mut coeffs = vec![p.coefficient_matrix(&Word::unit())];
        for k in 0..p.nvars() {
            coeffs.push(p.coefficient_matrix(&Word::letter(k as u32)));
        }
        let sa = coeffs.iter().all(ScalarMatrix::is_hermitian);
        LinearPencil::new(coeffs, sa)
    }

    pub fn to_poly_matrix(&self) -> PolyMatrix {
        let n = self.nvars();
        let mut out = PolyMatrix::zeros(self.size, self.size, n);
        for i in 0..self.size {
            for j in 0..self.size {
                let terms = self.exact.iter().enumerate().map(|(k, c)| {
                    let w = if k == 0 { Word::unit() } else { Word::letter(k as u32 - 1) };
                    (w, c[(i, j)].clone())
                });
                out.set(i, j, NCPoly::from_terms(n, terms).expect("letters below nvars"));
            }
        }
        out
    }

    /// `N`.
    pub fn size(&self) -> usize {
        self.size
    }

    /// Number of variables `n`.
    pub fn nvars(&self) -> usize {
        self.exact.len() - 1
    }

    pub fn is_selfadjoint(&self) -> bool {
        self.selfadjoint
    }

    /// `A_0, ..., A_n` in floating point.
    pub fn coeffs(&self) -> &[CMat] {
        &self.coeffs
    }

    pub fn exact_coeffs(&self) -> &[ScalarMatrix] {
        &self.exact
    }

    /// `A_1, ..., A_n`.
    pub fn homogeneous_coeffs(&self) -> &[CMat] {
        &self.coeffs[1..]
    }

    /// The pencil with its constant term replaced by zero.
    pub fn homogeneous_part(&self) -> LinearPencil {
        let mut exact = self.exact.clone();
        exact[0] = ScalarMatrix::zeros(self.size, self.size);
        LinearPencil::new(exact, self.selfadjoint).expect("same shape")
    }

    /// `P - lambda * 1`, with `lambda` taken exactly.
    pub fn shifted(&self, lambda: &ExactScalar) -> LinearPencil {
        let mut exact = self.exact.clone();
        exact[0] = exact[0].sub(&ScalarMatrix::identity(self.size).scale(lambda));
        let sa = self.selfadjoint && lambda.is_real();
        LinearPencil::new(exact, sa).expect("same shape")
    }

    /// Union of the nonzero patterns of all coefficients.
    pub fn pattern(&self) -> Vec<Vec<bool>> {
        (0..self.size)
            .map(|i| (0..self.size).map(|j| self.exact.iter().any(|c| !c[(i, j)].is_zero())).collect())
            .collect()
    }

    /// `A_0 (x) 1_d + sum_i A_i (x) X_i`.
    pub fn eval(&self, x: &MatrixTuple) -> Result<CMat> {
        if x.n() < self.nvars() {
            return Err(Error::DimensionMismatch(format!(
                "pencil in {} variables evaluated at a {}-tuple",
                self.nvars(),
                x.n()
            )));
        }
        Ok(self.eval_mats(x.dim(), x.mats()))
    }

    pub(crate) fn eval_mats(&self, d: usize, mats: &[CMat]) -> CMat {
        let mut out = linalg::kron(&self.coeffs[0], &linalg::identity(d));
        for (a, xm) in self.coeffs[1..].iter().zip(mats) {
            if a.iter().any(|z| *z != Complex64::new(0.0, 0.0)) {
                out += linalg::kron(a, xm);
            }
        }
        out
    }

    /// `L(b) = sum_{i >= 1} A_i b A_i^*`; the constant term is excluded.
    pub fn quantum_operator(&self, b: &CMat) -> Result<CMat> {
        self.apply_cp(&self.coeffs[1..], b)
    }

    /// `L_+(b) = sum_{i >= 0} A_i b A_i^*`, the constant term included.
    pub fn quantum_operator_with_constant(&self, b: &CMat) -> Result<CMat> {
        self.apply_cp(&self.coeffs, b)
    }

    fn apply_cp(&self, ops: &[CMat], b: &CMat) -> Result<CMat> {
        if b.shape() != (self.size, self.size) {
            return Err(Error::DimensionMismatch(format!(
                "operand is {}x{}, pencil is {n}x{n}",
                b.nrows(),
                b.ncols(),
                n = self.size
            )));
        }
        let mut out = linalg::zeros(self.size, self.size);
        for a in ops {
            out += a * b * a.adjoint();
        }
        Ok(out)
    }

    /// `{"N": .., "n": .., "coeffs": [A_0, ..., A_n], "selfadjoint": bool}`.
    pub fn to_json_value(&self) -> Value {
        json!({
            "N": self.size,
            "n": self.nvars(),
            "coeffs": self.exact.iter().map(io::matrix_to_value).collect::<Vec<_>>(),
            "selfadjoint": self.selfadjoint,
        })
    }

    pub fn to_json(&self) -> String {
        self.to_json_value().to_string()
    }

    pub fn from_json_value(v: &Value) -> Result<Self> {
        let coeffs = v
            .get("coeffs")
            .and_then(Value::as_array)
            .ok_or_else(|| Error::Parse("pencil JSON needs a \"coeffs\" array".into()))?
            .iter()
            .map(io::matrix_from_value)
            .collect::<Result<Vec<_>>>()?;
        let selfadjoint = v.get("selfadjoint").and_then(Value::as_bool).unwrap_or(false);
        let p = LinearPencil::new(coeffs, selfadjoint)?;
        if let Some(n) = v.get("N").and_then(Value::as_u64) {
            if n as usize != p.size {
                return Err(Error::DimensionMismatch(format!("N = {n} but coefficients are {0}x{0}", p.size)));
            }
        }
        if let Some(n) = v.get("n").and_then(Value::as_u64) {
            if n as usize != p.nvars() {
                return Err(Error::DimensionMismatch(format!("n = {n} but {} coefficients given", p.exact.len())));
            }
        }
        Ok(p)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        LinearPencil::from_json_value(&serde_json::from_str(text)?)
    }
}

/// Zero block `(R, S)` with `|R| + |S| > max(m, n)`, if one exists. The block found has
/// `|R| + |S|` maximal.
pub fn is_hollow(p: &PolyMatrix) -> Option<(Vec<usize>, Vec<usize>)> {
    hollow_pattern(&p.nonzero_pattern(), p.cols())
}

/// [`is_hollow`] on the joint nonzero pattern of the coefficients.
pub fn is_hollow_pencil(p: &LinearPencil) -> Option<(Vec<usize>, Vec<usize>)> {
    hollow_pattern(&p.pattern(), p.size())
}

pub(crate) fn hollow_pattern(pattern: &[Vec<bool>], cols: usize) -> Option<(Vec<usize>, Vec<usize>)> {
    let rows = pattern.len();
    let (r, s) = matching::max_zero_block(pattern, cols);
    (r.len() + s.len() > rows.max(cols)).then_some((r, s))
}

#[derive(Clone, Debug)]
pub struct FlatnessReport {
    /// `N * min_v lambda_min(L(v v^*))` over unit vectors.
    pub c_lower: f64,
    /// `N * max_v lambda_max(L(v v^*))` over unit vectors.
    pub c_upper: f64,
    pub flat: bool,
    pub semi_flat: bool,
    /// Unit vector attaining `c_lower`.
    pub witness_vector: CMat,
}

fn rank_one(v: &CMat) -> CMat {
    v * v.adjoint()
}

fn normalize(v: &mut CMat) {
    let n = v.norm();
    *v /= Complex64::new(n, 0.0);
}

impl LinearPencil {
    /// Extreme eigenvalue of `L(v v^*)` and its eigenvector.
    fn extreme(&self, v: &CMat, lowest: bool) -> (f64, CMat) {
        let l = self.quantum_operator(&rank_one(v)).expect("square");
        let (vals, vecs) = linalg::hermitian_eigh(&l);
        let k = if lowest { 0 } else { self.size - 1 };
        (vals[k], vecs.columns(k, 1).into_owned())
    }

    /// `(sum_i A_i^* w w^* A_i) v`, the gradient of `v -> w^* L(v v^*) w` up to a factor 2.
    fn gradient(&self, v: &CMat, w: &CMat) -> CMat {
        let mut g = linalg::zeros(self.size, 1);
        for a in self.homogeneous_coeffs() {
            let aw = a.adjoint() * w;
            let s = (w.adjoint() * a * v)[(0, 0)];
            g += aw * s;
        }
        g
    }

    /// Projected gradient with Armijo backtracking, then alternating eigenvector steps.
    fn optimize(&self, v0: CMat, iters: usize, lowest: bool) -> (f64, CMat) {
        let sign = if lowest { 1.0 } else { -1.0 };
        let mut v = v0;
        let (mut f, mut w) = self.extreme(&v, lowest);
        let mut step = 0.1;
        for _ in 0..iters {
            let g = self.gradient(&v, &w);
            let inner = (v.adjoint() * &g)[(0, 0)];
            let tangent = &g - &v * inner;
            let gnorm2 = tangent.norm_squared();
            if gnorm2 < 1e-28 {
                break;
            }
            let mut accepted = false;
            let mut t = step;
            while t > 1e-12 {
                let mut cand = &v - &tangent * Complex64::new(sign * t, 0.0);
                normalize(&mut cand);
                let (fc, wc) = self.extreme(&cand, lowest);
                if sign * (fc - f) <= -1e-4 * t * gnorm2 {
                    v = cand;
                    f = fc;
                    w = wc;
                    accepted = true;
                    break;
                }
                t *= 0.5;
            }
            if !accepted {
                break;
            }
            step = (t * 2.0).min(0.1);
        }
        // For fixed w the objective w^* L(v v^*) w is the quadratic form of G_w.
        for _ in 0..50 {
            let mut gw = linalg::zeros(self.size, self.size);
            for a in self.homogeneous_coeffs() {
                let aw = a.adjoint() * &w;
                gw += &aw * aw.adjoint();
            }
            let (_, vecs) = linalg::hermitian_eigh(&gw);
            let k = if lowest { 0 } else { self.size - 1 };
            let cand = vecs.columns(k, 1).into_owned();
            let (fc, wc) = self.extreme(&cand, lowest);
            if sign * (fc - f) < -1e-15 * f.abs().max(1.0) {
                v = cand;
                f = fc;
                w = wc;
            } else {
                break;
            }
        }
        (f, v)
    }

    /// Estimates the flatness constants by multi-start optimization over rank-one inputs.
    /// The values are estimates attained at the reported witness, not certified bounds.
    pub fn flatness_constants(&self, restarts: usize, iters: usize, seed: u64) -> FlatnessReport {
        let n = self.size;
        let mut best_low = (f64::INFINITY, linalg::zeros(n, 1));
        let mut best_high = f64::NEG_INFINITY;
        if n == 0 || self.nvars() == 0 {
            return FlatnessReport { c_lower: 0.0, c_upper: 0.0, flat: false, semi_flat: false, witness_vector: best_low.1 };
        }
        let mut starts: Vec<CMat> = (0..n).map(|k| CMat::from_fn(n, 1, |i, _| Complex64::new((i == k) as u8 as f64, 0.0))).collect();
        for r in 0..restarts {
            let mut g = rng::derived(seed, r as u64);
            starts.push(linalg::random_unit_vector(&mut g, n));
        }
        for v0 in starts {
            let (lo, v) = self.optimize(v0.clone(), iters, true);
            if lo < best_low.0 {
                best_low = (lo, v);
            }
            let (hi, _) = self.optimize(v0, iters, false);
            best_high = best_high.max(hi);
        }
        let scale = n as f64;
        let c_lower = (best_low.0 * scale).max(0.0);
        let c_upper = best_high * scale;
        let semi_flat = c_lower > 1e-10 * c_upper.max(1.0);
        FlatnessReport { c_lower, c_upper, flat: semi_flat, semi_flat, witness_vector: best_low.1 }
    }
}

/// `U * P * Q = diag(B, 1_s)`.
#[derive(Clone, Debug)]
pub struct MonicReduction {
    pub u: ScalarMatrix,
    pub q: PolyMatrix,
    pub b: LinearPencil,
    pub s: usize,
}

fn stacked_homogeneous(coeffs: &[ScalarMatrix]) -> ScalarMatrix {
    let k = coeffs[0].rows();
    let n = coeffs.len() - 1;
    ScalarMatrix::from_fn(n * k, k, |r, c| coeffs[1 + r / k][(r % k, c)].clone())
}

fn embed(m: &ScalarMatrix, n: usize) -> ScalarMatrix {
    let mut out = ScalarMatrix::identity(n);
    for i in 0..m.rows() {
        for j in 0..m.cols() {
            out[(i, j)] = m[(i, j)].clone();
        }
    }
    out
}

/// Invertible matrix whose last column is the nonzero vector `c`.
fn with_last_column(c: &[ExactScalar]) -> ScalarMatrix {
    let k = c.len();
    let p = (0..k).rev().find(|&i| !c[i].is_zero()).expect("nonzero vector");
    let mut m = ScalarMatrix::identity(k);
    if p != k - 1 {
        m[(p, p)] = ExactScalar::zero();
        m[(k - 1, p)] = ExactScalar::one();
        m[(k - 1, k - 1)] = ExactScalar::zero();
    }
    for (i, ci) in c.iter().enumerate() {
        m[(i, k - 1)] = ci.clone();
    }
    m
}

impl LinearPencil {
    /// Peels off unit blocks until the remaining block is left monic, i.e. its stacked
    /// homogeneous coefficients `[A_1; ...; A_n]` have full column rank.
    ///
    /// Each round takes a common kernel vector of the homogeneous coefficients, moves it to the
    /// last column by a scalar column operation, maps the resulting constant column to `e_k` by
    /// a scalar row operation and clears the last row by a linear column operation. `Q` is the
    /// product of those column factors, so its degree can exceed one when `s >= 2`.
    pub fn monic_reduce(&self) -> Result<MonicReduction> {
        let n = self.size;
        let nvars = self.nvars();
        let mut u = ScalarMatrix::identity(n);
        let mut q = PolyMatrix::identity(n, nvars);
        let mut cur: Vec<ScalarMatrix> = self.exact.clone();
        let mut k = n;
        while k > 0 {
            let kernel = stacked_homogeneous(&cur).kernel();
            let Some(c) = kernel.into_iter().next() else { break };
            let col = with_last_column(&c);
            cur = cur.iter().map(|a| a.mul(&col)).collect();
            let a0 = cur[0].column(k - 1);
            if a0.iter().all(ExactScalar::is_zero) {
                return Err(Error::NotReducible(format!(
                    "column {k} of the {k}x{k} block vanishes identically, so the pencil is hollow"
                )));
            }
            let g = with_last_column(&a0).inverse().expect("invertible by construction");
            cur = cur.iter().map(|a| g.mul(a)).collect();
            let mut e = PolyMatrix::identity(k, nvars);
            for j in 0..k - 1 {
                let terms = cur.iter().enumerate().map(|(t, a)| {
                    let w = if t == 0 { Word::unit() } else { Word::letter(t as u32 - 1) };
                    (w, -&a[(k - 1, j)])
                });
                e.set(k - 1, j, NCPoly::from_terms(nvars, terms)?);
            }
            u = embed(&g, n).mul(&u);
            let step = PolyMatrix::from_scalar(&embed(&col, n), nvars).mul(&embed_poly(&e, n))?;
            q = q.mul(&step)?;
            cur = cur.iter().map(|a| a.submatrix(&(0..k - 1).collect::<Vec<_>>(), &(0..k - 1).collect::<Vec<_>>())).collect();
            k -= 1;
        }
        let b = if k == 0 {
            LinearPencil { size: 0, exact: vec![ScalarMatrix::zeros(0, 0); nvars + 1], coeffs: vec![linalg::zeros(0, 0); nvars + 1], selfadjoint: self.selfadjoint }
        } else {
            LinearPencil::new(cur, false)?
        };
        let out = MonicReduction { u, q, b, s: n - k };
        out.verify(self)?;
        Ok(out)
    }
}

fn embed_poly(m: &PolyMatrix, n: usize) -> PolyMatrix {
    let mut out = PolyMatrix::identity(n, m.nvars());
    for i in 0..m.rows() {
        for j in 0..m.cols() {
            out.set(i, j, m.get(i, j).clone());
        }
    }
    out
}

impl MonicReduction {
    /// Checks `U * P * Q = diag(B, 1_s)` in exact arithmetic.
    pub fn verify(&self, p: &LinearPencil) -> Result<()> {
        let lhs = p.to_poly_matrix().mul_scalar_left(&self.u)?.mul(&self.q)?;
        let k = self.b.size();
        let mut rhs = PolyMatrix::identity(p.size(), p.nvars());
        if k > 0 {
            let bp = self.b.to_poly_matrix();
            for i in 0..k {
                for j in 0..k {
                    rhs.set(i, j, bp.get(i, j).clone());
                }
            }
        }
        if lhs != rhs {
            return Err(Error::CertificateInvalid("U P Q differs from diag(B, 1)".into()));
        }
        if k > 0 && stacked_homogeneous(self.b.exact_coeffs()).rank() < k {
            return Err(Error::CertificateInvalid("remaining block is not left monic".into()));
        }
        Ok(())
    }
}
