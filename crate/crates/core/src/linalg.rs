//! Floating-point dense kernels. Small-matrix algebra uses nalgebra; decompositions go
//! through faer.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

pub type CMat = DMatrix<Complex64>;

/// Relative cliff for numeric rank: singular values below `max_dim * sigma_max * REL_TOL`
/// count as zero.
pub const REL_TOL: f64 = 1e-10;

fn to_faer(m: &CMat) -> faer::Mat<Complex64> {
    faer::Mat::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
}

fn from_faer(m: faer::MatRef<'_, Complex64>) -> CMat {
    CMat::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
}

pub fn zeros(r: usize, c: usize) -> CMat {
    CMat::zeros(r, c)
}

pub fn identity(n: usize) -> CMat {
    CMat::identity(n, n)
}

pub fn kron(a: &CMat, b: &CMat) -> CMat {
    a.kronecker(b)
}

/// Singular values in nonincreasing order.
pub fn singular_values(m: &CMat) -> Vec<f64> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Vec::new();
    }
    to_faer(m).singular_values().expect("svd did not converge")
}

/// Full SVD `m = U diag(s) V*`.
pub fn svd(m: &CMat) -> (CMat, Vec<f64>, CMat) {
    let (r, c) = m.shape();
    if r == 0 || c == 0 {
        return (identity(r), Vec::new(), identity(c));
    }
    let f = to_faer(m);
    let dec = f.svd().expect("svd did not converge");
    let s = dec.S().column_vector();
    let sv = (0..r.min(c)).map(|i| s[i].re).collect();
    (from_faer(dec.U()), sv, from_faer(dec.V()))
}

pub fn rank_threshold(shape: (usize, usize), sigma_max: f64, rel: f64) -> f64 {
    shape.0.max(shape.1) as f64 * sigma_max * rel
}

pub fn numeric_rank_with(m: &CMat, rel: f64) -> usize {
    let s = singular_values(m);
    let Some(&top) = s.first() else { return 0 };
    if top == 0.0 {
        return 0;
    }
    let tol = rank_threshold(m.shape(), top, rel);
    s.iter().filter(|&&x| x > tol).count()
}

/// Number of singular values above the absolute threshold `tol`.
pub fn rank_above(m: &CMat, tol: f64) -> usize {
    singular_values(m).iter().filter(|&&x| x > tol).count()
}

pub fn numeric_rank(m: &CMat) -> usize {
    numeric_rank_with(m, REL_TOL)
}

/// Orthonormal basis of the column space.
pub fn range_basis(m: &CMat, rel: f64) -> CMat {
    let (u, s, _) = svd(m);
    let top = s.first().copied().unwrap_or(0.0);
    let r = if top == 0.0 {
        0
    } else {
        let tol = rank_threshold(m.shape(), top, rel);
        s.iter().filter(|&&x| x > tol).count()
    };
    u.columns(0, r).into_owned()
}

/// Orthonormal basis of the span of the left singular vectors with singular value above the
/// absolute threshold `tol`.
pub fn range_basis_above(m: &CMat, tol: f64) -> CMat {
    if m.ncols() == 0 {
        return zeros(m.nrows(), 0);
    }
    let (u, s, _) = svd(m);
    let r = s.iter().filter(|&&x| x > tol).count();
    u.columns(0, r).into_owned()
}

/// Orthonormal basis of the right kernel.
pub fn kernel_basis(m: &CMat, rel: f64) -> CMat {
    let c = m.ncols();
    if m.nrows() == 0 {
        return identity(c);
    }
    let rank_of = |s: &[f64]| {
        let top = s.first().copied().unwrap_or(0.0);
        if top == 0.0 { 0 } else { s.iter().filter(|&&x| x > rank_threshold(m.shape(), top, rel)).count() }
    };
    // Singular values alone are cheaper and settle the common injective case.
    if m.nrows() >= c && c >= 64 && rank_of(&singular_values(m)) == c {
        return zeros(c, 0);
    }
    let (_, s, v) = svd(m);
    let r = rank_of(&s);
    v.columns(r, c - r).into_owned()
}

/// Orthonormal basis of the orthogonal complement of the span of `basis` in `C^n`.
pub fn complement(basis: &CMat, n: usize) -> CMat {
    if basis.ncols() == 0 {
        return identity(n);
    }
    kernel_basis(&basis.adjoint(), 1e-9)
}

/// Orthonormal basis `[basis | complement]` of the whole space.
pub fn complete_unitary(basis: &CMat) -> CMat {
    let n = basis.nrows();
    let comp = complement(basis, n);
    let mut out = zeros(n, basis.ncols() + comp.ncols());
    out.columns_mut(0, basis.ncols()).copy_from(basis);
    out.columns_mut(basis.ncols(), comp.ncols()).copy_from(&comp);
    out
}

/// Eigenvalues of a Hermitian matrix (lower triangle is read), ascending.
pub fn hermitian_eigenvalues(m: &CMat) -> Vec<f64> {
    if m.nrows() == 0 {
        return Vec::new();
    }
    to_faer(m)
        .self_adjoint_eigenvalues(faer::Side::Lower)
        .expect("eigensolver did not converge")
}

/// Eigenpairs of a Hermitian matrix, eigenvalues ascending, eigenvectors as columns.
pub fn hermitian_eigh(m: &CMat) -> (Vec<f64>, CMat) {
    let n = m.nrows();
    if n == 0 {
        return (Vec::new(), zeros(0, 0));
    }
    let dec = to_faer(m)
        .self_adjoint_eigen(faer::Side::Lower)
        .expect("eigensolver did not converge");
    let s = dec.S().column_vector();
    ((0..n).map(|i| s[i].re).collect(), from_faer(dec.U()))
}

/// Spectral norm.
pub fn op_norm(m: &CMat) -> f64 {
    singular_values(m).first().copied().unwrap_or(0.0)
}

pub fn hermitian_defect(m: &CMat) -> f64 {
    (m - m.adjoint()).norm()
}

/// `i.i.d.` standard complex Gaussian entries, `E|z|^2 = 1`.
pub fn ginibre<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> CMat {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    CMat::from_fn(rows, cols, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        Complex64::new(re * s, im * s)
    })
}

pub fn random_unit_vector<R: Rng + ?Sized>(rng: &mut R, n: usize) -> CMat {
    let mut v = ginibre(rng, n, 1);
    let nrm = v.norm();
    v /= Complex64::new(nrm, 0.0);
    v
}

/// Reshapes a vector of `C^N (x) C^d` (index `a*d + x`) into an `N x d` matrix.
pub fn unvec_kron(v: &[Complex64], n: usize, d: usize) -> CMat {
    CMat::from_fn(n, d, |a, x| v[a * d + x])
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    #[test]
    fn rank_and_kernel() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        let b = ginibre(&mut rng, 6, 2);
        let c = ginibre(&mut rng, 2, 5);
        let m = &b * &c;
        assert_eq!(numeric_rank(&m), 2);
        let k = kernel_basis(&m, REL_TOL);
        assert_eq!(k.ncols(), 3);
        assert!((&m * &k).norm() < 1e-10);
        let r = range_basis(&m, REL_TOL);
        assert_eq!(r.ncols(), 2);
        let u = complete_unitary(&r);
        assert!((u.adjoint() * &u - identity(6)).norm() < 1e-10);
    }

    #[test]
    fn eigen_matches_trace() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2);
        let g = ginibre(&mut rng, 5, 5);
        let h = &g + g.adjoint();
        let ev = hermitian_eigenvalues(&h);
        let tr: f64 = ev.iter().sum();
        assert!((tr - h.trace().re).abs() < 1e-10);
        assert!(ev.windows(2).all(|w| w[0] <= w[1]));
        let (vals, vecs) = hermitian_eigh(&h);
        let recon = &vecs * CMat::from_diagonal(&nalgebra::DVector::from_iterator(5, vals.iter().map(|&x| Complex64::new(x, 0.0)))) * vecs.adjoint();
        assert!((recon - h).norm() < 1e-10);
    }
}
