//! Noncommutative rank of linear pencils and polynomial matrices.
//!
//! Fullness of a pencil is decided by three randomized testers that must agree: the rank of a
//! generic blow-up, a search for rank-decreasing inputs of the quantum operator, and the
//! second Wong sequence of a generic blow-up of the homogenized coefficient family.

use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::linalg::{self, CMat};
use crate::ncpoly::{MatrixTuple, PolyMatrix};
use crate::pencil::{hollow_pattern, LinearPencil};
use crate::rng;
use crate::scalar::{ExactScalar, ScalarMatrix};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CertificateKind {
    Full,
    ShrunkSubspace,
    /// Non-full because the zero pattern alone is hollow.
    Hollow,
}

impl CertificateKind {
    pub fn as_str(self) -> &'static str {
        match self {
            CertificateKind::Full => "Full",
            CertificateKind::ShrunkSubspace => "ShrunkSubspace",
            CertificateKind::Hollow => "Hollow",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Confidence {
    Exact,
    Randomized { trials: usize, tol: f64 },
}

impl Confidence {
    pub fn to_json_value(self) -> Value {
        match self {
            Confidence::Exact => json!("exact"),
            Confidence::Randomized { trials, tol } => json!({"randomized": {"trials": trials, "tol": tol}}),
        }
    }
}

#[derive(Clone, Debug)]
pub struct RankCertificate {
    pub kind: CertificateKind,
    pub rho: usize,
    /// Orthonormal basis of a shrunk subspace `V`; present iff `kind` is `ShrunkSubspace`.
    pub v_basis: Option<CMat>,
    /// Orthonormal basis of `W` with `A_i V` inside `W` for every `i`, `dim W < dim V`.
    pub w_basis: Option<CMat>,
    pub confidence: Confidence,
}

impl RankCertificate {
    pub fn is_full(&self) -> bool {
        self.kind == CertificateKind::Full
    }

    pub fn to_json_value(&self) -> Value {
        let mut v = json!({
            "rho": self.rho,
            "kind": self.kind.as_str(),
            "confidence": self.confidence.to_json_value(),
        });
        if let (Some(vb), Some(wb)) = (&self.v_basis, &self.w_basis) {
            v["dim_v"] = json!(vb.ncols());
            v["dim_w"] = json!(wb.ncols());
        }
        v
    }

    /// Largest `||A_i V - P_W A_i V||` over all coefficients, for a shrunk-subspace certificate.
    pub fn residual(&self, p: &LinearPencil) -> Result<f64> {
        let (Some(v), Some(w)) = (&self.v_basis, &self.w_basis) else {
            return Err(Error::CertificateInvalid("certificate carries no subspaces".into()));
        };
        Ok(shrunk_residual(p, v, w))
    }
}

fn shrunk_residual(p: &LinearPencil, v: &CMat, w: &CMat) -> f64 {
    p.coeffs()
        .iter()
        .map(|a| {
            let av = a * v;
            let proj = w * (w.adjoint() * &av);
            (av - proj).norm()
        })
        .fold(0.0, f64::max)
}

/// Knobs shared by the randomized rank routines.
#[derive(Clone, Copy, Debug)]
pub struct RankOptions {
    /// Blow-up dimension; `None` means the pencil size.
    pub dim: Option<usize>,
    pub trials: usize,
    /// Relative singular-value cliff, scaled by the largest matrix dimension.
    pub rel_tol: f64,
    pub seed: u64,
}

impl Default for RankOptions {
    fn default() -> Self {
        RankOptions { dim: None, trials: 3, rel_tol: linalg::REL_TOL, seed: 0 }
    }
}

impl RankOptions {
    pub fn with_seed(seed: u64) -> Self {
        RankOptions { seed, ..RankOptions::default() }
    }

    fn confidence(&self) -> Confidence {
        Confidence::Randomized { trials: self.trials, tol: self.rel_tol }
    }
}

const MAX_DOUBLINGS: usize = 3;
const SUBSPACE_TOL: f64 = 1e-8;
const RESIDUAL_TOL: f64 = 1e-9;

fn random_mats(seed: u64, stream: u64, count: usize, d: usize) -> Vec<CMat> {
    let mut g = rng::derived(seed, stream);
    (0..count).map(|_| linalg::ginibre(&mut g, d, d)).collect()
}

fn blowup_trial(p: &LinearPencil, d: usize, mats: &[CMat], tol: f64) -> usize {
    let m = p.eval_mats(d, mats);
    linalg::numeric_rank_with(&m, tol).div_ceil(d)
}

/// `max` over trials of `ceil(rank(A_0 (x) 1 + sum_i A_i (x) X_i) / d)` with independent
/// complex Gaussian `X_i`.
pub fn blowup_rank(p: &LinearPencil, d: usize, trials: usize, tol: f64, seed: u64) -> usize {
    per_trial_ranks(p, d, trials, tol, seed).into_iter().max().unwrap_or(0)
}

fn per_trial_ranks(p: &LinearPencil, d: usize, trials: usize, tol: f64, seed: u64) -> Vec<usize> {
    assert!(d >= 1 && trials >= 1, "blow-up needs d >= 1 and at least one trial");
    let mut ranks = Vec::with_capacity(trials);
    for t in 0..trials {
        let r = blowup_trial(p, d, &random_mats(seed, t as u64, p.nvars(), d), tol);
        ranks.push(r);
        // Later trials cannot raise the maximum past the pencil size.
        if r == p.size() {
            break;
        }
    }
    ranks
}

/// Blow-up rank starting at `opts.dim` (default `N`), doubling `d` while trials disagree.
/// Returns the rank and the final dimension.
pub fn blowup_rank_adaptive(p: &LinearPencil, opts: &RankOptions) -> (usize, usize) {
    let mut d = opts.dim.unwrap_or(p.size()).max(1);
    let mut ranks = per_trial_ranks(p, d, opts.trials, opts.rel_tol, opts.seed);
    for _ in 0..MAX_DOUBLINGS {
        if ranks.iter().all(|&r| r == ranks[0]) {
            break;
        }
        d *= 2;
        ranks = per_trial_ranks(p, d, opts.trials, opts.rel_tol, opts.seed);
    }
    (ranks.into_iter().max().unwrap_or(0), d)
}

fn hcat(blocks: &[CMat], rows: usize) -> CMat {
    let cols: usize = blocks.iter().map(CMat::ncols).sum();
    let mut out = linalg::zeros(rows, cols);
    let mut at = 0;
    for b in blocks {
        out.columns_mut(at, b.ncols()).copy_from(b);
        at += b.ncols();
    }
    out
}

/// Span of the `C^N` factors of a set of vectors in `C^N (x) C^d`.
fn left_factor_span(vectors: &CMat, n: usize, d: usize) -> CMat {
    if vectors.ncols() == 0 {
        return linalg::zeros(n, 0);
    }
    let blocks: Vec<CMat> = (0..vectors.ncols())
        .map(|c| linalg::unvec_kron(vectors.column(c).as_slice(), n, d))
        .collect();
    linalg::range_basis_above(&hcat(&blocks, n), SUBSPACE_TOL)
}

fn image_span(p: &LinearPencil, s: &CMat) -> CMat {
    if s.ncols() == 0 {
        return linalg::zeros(p.size(), 0);
    }
    let imgs: Vec<CMat> = p.coeffs().iter().map(|a| a * s).collect();
    let scale = p.coeffs().iter().map(CMat::norm).fold(1.0, f64::max);
    linalg::range_basis_above(&hcat(&imgs, p.size()), SUBSPACE_TOL * scale)
}

/// Limit `(S, W)` of the second Wong sequence of `T = sum_{i >= 0} A_i (x) Y_i` for generic
/// `Y_i`: `W_0 = 0`, `S_k` the `C^N`-factor span of `T^{-1}(W_k (x) C^d)`, `W_{k+1}` the span of
/// all `A_i S_k`. The pencil is non-full iff `dim S > dim W`.
pub fn wong_subspaces(p: &LinearPencil, d: usize, tol: f64, seed: u64) -> (CMat, CMat) {
    let n = p.size();
    let ys = random_mats(seed, 1 << 32, p.nvars() + 1, d);
    let mut s = linalg::zeros(n, 0);
    let mut w = linalg::zeros(n, 0);
    for _ in 0..=2 * n + 1 {
        let wperp = linalg::complement(&w, n);
        let pre = if wperp.ncols() == 0 {
            linalg::identity(n * d)
        } else {
            let mut m = linalg::zeros(wperp.ncols() * d, n * d);
            for (a, y) in p.coeffs().iter().zip(&ys) {
                m += linalg::kron(&(wperp.adjoint() * a), y);
            }
            linalg::kernel_basis(&m, tol)
        };
        let s_new = left_factor_span(&pre, n, d);
        let w_new = image_span(p, &s_new);
        let stable = s_new.ncols() == s.ncols() && w_new.ncols() == w.ncols();
        s = s_new;
        w = w_new;
        if stable {
            break;
        }
    }
    (s, w)
}

/// Largest `rank(b) - rank(L_+(b))` over the probes and the probe attaining it.
fn rank_decrease(p: &LinearPencil, probes: &[CMat]) -> (usize, Option<CMat>) {
    let mut best = (0, None);
    let n = p.size() as f64;
    let scale = p.coeffs().iter().map(linalg::op_norm).fold(1.0, f64::max);
    for b in probes {
        let rb = linalg::numeric_rank_with(b, 1e-9);
        let lb = p.quantum_operator_with_constant(b).expect("square probe");
        // Absolute threshold: L_+(b) can vanish up to rounding, leaving no relative scale.
        let rl = linalg::rank_above(&lb, n * 1e-9 * linalg::op_norm(b) * scale * scale);
        if rb > rl && rb - rl > best.0 {
            best = (rb - rl, Some(b.clone()));
        }
    }
    best
}

fn projector(basis: &CMat) -> CMat {
    basis * basis.adjoint()
}

struct TesterOutcome {
    rho_blowup: usize,
    rho_probe: usize,
    shrunk: (CMat, CMat),
}

fn run_testers(p: &LinearPencil, opts: &RankOptions, attempt: u64) -> TesterOutcome {
    let n = p.size();
    let base = opts.dim.unwrap_or(n).max(1) << attempt;
    let seed = opts.seed.wrapping_add(attempt.wrapping_mul(0x9E37_79B9_7F4A_7C15));
    let (rho_blowup, d) = blowup_rank_adaptive(p, &RankOptions { dim: Some(base), seed, ..*opts });
    let shrunk = wong_subspaces(p, d, opts.rel_tol, seed);

    let mut g = rng::derived(seed, 2 << 32);
    let mut probes: Vec<CMat> = (1..=n)
        .map(|r| {
            let f = linalg::ginibre(&mut g, n, r);
            &f * f.adjoint()
        })
        .collect();
    if shrunk.0.ncols() > 0 {
        probes.push(projector(&shrunk.0));
    }
    let mats = random_mats(seed, 3 << 32, p.nvars(), d);
    let kernel = linalg::kernel_basis(&p.eval_mats(d, &mats), opts.rel_tol);
    let kspan = left_factor_span(&kernel, n, d);
    if kspan.ncols() > 0 {
        probes.push(projector(&kspan));
    }
    let (defect, _) = rank_decrease(p, &probes);
    TesterOutcome { rho_blowup, rho_probe: n - defect, shrunk }
}

/// Certifies fullness of a square pencil, or produces a shrunk subspace.
///
/// The three testers are rerun at doubled blow-up dimension when they disagree; persistent
/// disagreement is reported as [`Error::Inconsistent`].
pub fn is_full(p: &LinearPencil, opts: &RankOptions) -> Result<RankCertificate> {
    let n = p.size();
    if n == 0 {
        return Ok(RankCertificate { kind: CertificateKind::Full, rho: 0, v_basis: None, w_basis: None, confidence: Confidence::Exact });
    }
    let mut last = String::new();
    for attempt in 0..3 {
        let t = run_testers(p, opts, attempt);
        let (s, w) = t.shrunk;
        let rho_wong = n - s.ncols().saturating_sub(w.ncols());
        let full = [t.rho_blowup == n, t.rho_probe == n, rho_wong == n];
        if full.iter().all(|&f| f) {
            return Ok(RankCertificate {
                kind: CertificateKind::Full,
                rho: n,
                v_basis: None,
                w_basis: None,
                confidence: opts.confidence(),
            });
        }
        if full.iter().all(|&f| !f) && t.rho_blowup == rho_wong && t.rho_probe == rho_wong {
            let res = shrunk_residual(p, &s, &w);
            if res < RESIDUAL_TOL * p.coeffs().iter().map(CMat::norm).fold(1.0, f64::max) {
                return Ok(RankCertificate {
                    kind: CertificateKind::ShrunkSubspace,
                    rho: rho_wong,
                    v_basis: Some(s),
                    w_basis: Some(w),
                    confidence: opts.confidence(),
                });
            }
            last = format!("shrunk-subspace residual {res:e}");
            continue;
        }
        last = format!(
            "blow-up rank {}, rank-decreasing probe {}, shrunk subspace {} (dim V {}, dim W {})",
            t.rho_blowup,
            t.rho_probe,
            rho_wong,
            s.ncols(),
            w.ncols()
        );
    }
    Err(Error::Inconsistent(last))
}

/// Unitaries `P_u, Q_u` such that every `P_u A_i Q_u` has a zero block of size
/// `(N - dim W) x dim V` in its top-left corner, making the pencil visibly hollow.
pub fn hollow_certificate(p: &LinearPencil, cert: &RankCertificate) -> Result<(CMat, CMat)> {
    let n = p.size();
    if crate::pencil::is_hollow_pencil(p).is_some() {
        return Ok((linalg::identity(n), linalg::identity(n)));
    }
    if cert.kind != CertificateKind::ShrunkSubspace {
        return Err(Error::CertificateInvalid(format!("{} certificate carries no subspaces", cert.kind.as_str())));
    }
    let (Some(v), Some(w)) = (&cert.v_basis, &cert.w_basis) else {
        return Err(Error::CertificateInvalid("missing subspaces".into()));
    };
    if v.ncols() <= w.ncols() {
        return Err(Error::CertificateInvalid("dim V must exceed dim W".into()));
    }
    let qu = linalg::complete_unitary(v);
    let wperp = linalg::complement(w, n);
    let pu_cols = hcat(&[wperp.clone(), w.clone()], n);
    let pu = pu_cols.adjoint();
    let rows = wperp.ncols();
    let cols = v.ncols();
    let mut pattern = vec![vec![false; n]; n];
    for a in p.coeffs() {
        let t = &pu * a * &qu;
        let scale = 1e-8 * a.norm().max(1.0);
        for i in 0..n {
            for j in 0..n {
                let tiny = t[(i, j)].norm() < scale;
                if i < rows && j < cols && !tiny {
                    return Err(Error::CertificateInvalid(format!("entry ({i}, {j}) of the zero block is {:e}", t[(i, j)].norm())));
                }
                pattern[i][j] |= !tiny;
            }
        }
    }
    if hollow_pattern(&pattern, n).is_none() {
        return Err(Error::CertificateInvalid("transformed pencil is not hollow".into()));
    }
    Ok((pu, qu))
}

/// Certificate for a square polynomial matrix: `Hollow` when the zero pattern alone forces
/// non-fullness, otherwise the pencil testers for linear matrices.
pub fn certify_poly_matrix(p: &PolyMatrix, opts: &RankOptions) -> Result<RankCertificate> {
    if p.rows() != p.cols() {
        return Err(Error::NotSquare { rows: p.rows(), cols: p.cols() });
    }
    if crate::pencil::is_hollow(p).is_some() {
        let rho = inner_rank_poly(p, RankMethod::Blowup, opts)?;
        return Ok(RankCertificate { kind: CertificateKind::Hollow, rho, v_basis: None, w_basis: None, confidence: Confidence::Exact });
    }
    is_full(&LinearPencil::from_poly_matrix(p)?, opts)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RankMethod {
    Blowup,
    FullBlock,
}

fn generic_tuple(nvars: usize, d: usize, seed: u64, stream: u64) -> MatrixTuple {
    MatrixTuple::new(random_mats(seed, stream, nvars, d), false).expect("square blocks")
}

fn poly_blowup_rank(p: &PolyMatrix, d: usize, opts: &RankOptions) -> Result<usize> {
    let mut best = 0;
    for t in 0..opts.trials {
        let m = p.eval(&generic_tuple(p.nvars(), d, opts.seed, t as u64))?;
        best = best.max(linalg::numeric_rank_with(&m, opts.rel_tol).div_ceil(d));
    }
    Ok(best)
}

fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(k);
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    rec(0, n, k, &mut cur, &mut out);
    out
}

fn block_is_full(b: &PolyMatrix, opts: &RankOptions) -> Result<bool> {
    if crate::pencil::is_hollow(b).is_some() {
        return Ok(false);
    }
    if b.degree().is_some_and(|d| d <= 1) {
        let pencil = LinearPencil::from_poly_matrix(b)?;
        let (s, w) = wong_subspaces(&pencil, pencil.size().max(1), opts.rel_tol, opts.seed);
        return Ok(s.ncols() <= w.ncols());
    }
    let k = b.rows();
    let d = (b.degree().unwrap_or(0) + 1) * k;
    Ok(poly_blowup_rank(b, d, opts)? == k)
}

/// Inner rank of a polynomial matrix.
///
/// `Blowup` evaluates at generic tuples of dimension `(deg + 1) * max(m, n)`, doubling until two
/// consecutive dimensions agree. `FullBlock` returns the size of the largest square block
/// certified full; it is exhaustive and meant for `max(m, n) <= 4`.
pub fn inner_rank_poly(p: &PolyMatrix, method: RankMethod, opts: &RankOptions) -> Result<usize> {
    if p.is_zero() {
        return Ok(0);
    }
    match method {
        RankMethod::Blowup => {
            let mut d = opts.dim.unwrap_or((p.degree().unwrap_or(0) + 1) * p.rows().max(p.cols()));
            let mut prev = poly_blowup_rank(p, d, opts)?;
            for _ in 0..MAX_DOUBLINGS {
                d *= 2;
                let next = poly_blowup_rank(p, d, opts)?;
                if next == prev {
                    break;
                }
                prev = next;
            }
            Ok(prev)
        }
        RankMethod::FullBlock => {
            for k in (1..=p.rows().min(p.cols())).rev() {
                for rows in subsets(p.rows(), k) {
                    for cols in subsets(p.cols(), k) {
                        if block_is_full(&p.submatrix(&rows, &cols), opts)? {
                            return Ok(k);
                        }
                    }
                }
            }
            Ok(0)
        }
    }
}

/// The `(k+1) x (k+1)` pencil `[[0, u], [v, A]]`.
pub fn bordered_pencil(u: &[ExactScalar], a: &LinearPencil, v: &[ExactScalar]) -> Result<LinearPencil> {
    let k = a.size();
    if u.len() != k || v.len() != k {
        return Err(Error::DimensionMismatch(format!("border vectors of length {}, {} for a {k}x{k} pencil", u.len(), v.len())));
    }
    let coeffs = a
        .exact_coeffs()
        .iter()
        .enumerate()
        .map(|(t, c)| {
            ScalarMatrix::from_fn(k + 1, k + 1, |i, j| match (i, j) {
                (0, 0) => ExactScalar::zero(),
                (0, j) if t == 0 => u[j - 1].clone(),
                (i, 0) if t == 0 => v[i - 1].clone(),
                (0, _) | (_, 0) => ExactScalar::zero(),
                (i, j) => c[(i - 1, j - 1)].clone(),
            })
        })
        .collect();
    LinearPencil::new(coeffs, false)
}

/// Whether `u A^{-1} v` is zero in the free field, for a full `k x k` pencil `A`: the bordered
/// pencil then has inner rank `k` or `k + 1`.
pub fn bordered_is_zero(u: &[ExactScalar], a: &LinearPencil, v: &[ExactScalar], opts: &RankOptions) -> Result<bool> {
    let k = a.size();
    if u.iter().all(ExactScalar::is_zero) || v.iter().all(ExactScalar::is_zero) {
        return Ok(true);
    }
    let bordered = bordered_pencil(u, a, v)?;
    let (rho, _) = blowup_rank_adaptive(&bordered, &RankOptions { dim: Some(opts.dim.unwrap_or(k + 1)), ..*opts });
    match rho {
        r if r == k => Ok(true),
        r if r == k + 1 => Ok(false),
        r => Err(Error::Inconsistent(format!("bordered pencil of size {} has blow-up rank {r}; expected {k} or {}", k + 1, k + 1))),
    }
}

/// Rank of a complex matrix as seen by the blow-up tolerance; shared by callers that evaluate
/// pencils themselves.
pub fn numeric_rank(m: &CMat, opts: &RankOptions) -> usize {
    linalg::numeric_rank_with(m, opts.rel_tol)
}
