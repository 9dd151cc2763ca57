//! Spectral predictions for selfadjoint pencils `b_0 + sum_j b_j X_j` evaluated at free
//! semicircular tuples: atoms, entropy dimension and the Hölder constant of the distribution
//! function.

use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::linalg;
use crate::ncrank::{self, RankOptions};
use crate::pencil::{FlatnessReport, LinearPencil};
use crate::scalar::ExactScalar;

/// Eigenvalues of `b_0` closer than this are tested once.
pub const CLUSTER_TOL: f64 = 1e-8;
/// Starting points and iteration budget handed to the flatness optimizer.
pub const FLATNESS_RESTARTS: usize = 64;
pub const FLATNESS_ITERS: usize = 500;

#[derive(Clone, Debug, PartialEq)]
pub struct Atom {
    pub lambda: f64,
    /// Inner rank of `P - lambda 1`.
    pub rho: usize,
    /// `(N - rho) / N`.
    pub weight: f64,
}

#[derive(Clone, Debug)]
pub struct AtomReport {
    pub pencil: LinearPencil,
    pub atoms: Vec<Atom>,
    /// Representatives of the eigenvalue clusters of `b_0`, ascending.
    pub candidates_checked: Vec<f64>,
    pub delta_star: f64,
}

impl AtomReport {
    pub fn to_json_value(&self) -> Value {
        json!({
            "size": self.pencil.size(),
            "atoms": self.atoms.iter().map(|a| json!({"lambda": a.lambda, "rho": a.rho, "weight": a.weight})).collect::<Vec<_>>(),
            "candidates_checked": self.candidates_checked,
            "delta_star": self.delta_star,
            "validity": "valid under delta*-maximality of the operator tuple",
        })
    }
}

fn cluster(mut vals: Vec<f64>, tol: f64) -> Vec<f64> {
    vals.sort_by(f64::total_cmp);
    let mut groups: Vec<Vec<f64>> = Vec::new();
    for v in vals {
        match groups.last_mut() {
            Some(g) if v - g[g.len() - 1] <= tol => g.push(v),
            _ => groups.push(vec![v]),
        }
    }
    groups.into_iter().map(|g| g.iter().sum::<f64>() / g.len() as f64).collect()
}

/// `1 - sum (N - rho)^2 / N^2` over the given inner ranks.
fn delta_star(n: usize, rhos: impl Iterator<Item = usize>) -> f64 {
    if n == 0 {
        return 1.0;
    }
    let defect: usize = rhos.map(|r| (n - r) * (n - r)).sum();
    1.0 - defect as f64 / (n * n) as f64
}

/// Atoms of the distribution of `P(S)` for a free semicircular tuple `S`: the eigenvalues
/// `lambda` of `b_0` at which `P - lambda 1` fails to be full.
pub fn full_spectrum(p: &LinearPencil, opts: &RankOptions) -> Result<AtomReport> {
    if !p.is_selfadjoint() {
        return Err(Error::NotSelfadjoint);
    }
    let n = p.size();
    let b0 = &p.coeffs()[0];
    let candidates = cluster(linalg::hermitian_eigenvalues(b0), CLUSTER_TOL);
    let mut atoms = Vec::new();
    for &lambda in &candidates {
        let shift = ExactScalar::from_f64(lambda, 0.0)?;
        let cert = ncrank::is_full(&p.shifted(&shift), opts)?;
        if cert.rho < n {
            atoms.push(Atom { lambda, rho: cert.rho, weight: (n - cert.rho) as f64 / n as f64 });
        }
    }
    let delta_star = delta_star(n, atoms.iter().map(|a| a.rho));
    Ok(AtomReport { pencil: p.clone(), atoms, candidates_checked: candidates, delta_star })
}

/// `1 - (1/N^2) sum_lambda (N - rho_lambda)^2`.
pub fn entropy_dimension(report: &AtomReport) -> f64 {
    delta_star(report.pencil.size(), report.atoms.iter().map(|a| a.rho))
}

#[derive(Clone, Debug)]
pub struct HoelderReport {
    /// `C = 4 c^{-2/3} (sum_j ||b_j||^2)^{1/3} fisher^{1/3}`.
    pub constant: f64,
    /// Semi-flatness constant of the homogeneous part.
    pub c: f64,
    pub exponent: f64,
    pub sum_norms_sq: f64,
    pub fisher: f64,
    pub flatness: FlatnessReport,
}

impl HoelderReport {
    pub fn to_json_value(&self) -> Value {
        json!({
            "C": self.constant,
            "c": self.c,
            "c_upper": self.flatness.c_upper,
            "exponent": self.exponent,
            "sum_norms_sq": self.sum_norms_sq,
            "fisher": self.fisher,
            "log_energy_bound": -3.0 * self.constant,
        })
    }
}

/// Hölder constant of the distribution function for exponent 2/3, from the flatness estimate
/// of the homogeneous part and a caller-supplied Fisher information `fisher`.
pub fn hoelder_constant(p: &LinearPencil, fisher: f64, seed: u64) -> Result<HoelderReport> {
    hoelder_from_flatness(p, fisher, p.flatness_constants(FLATNESS_RESTARTS, FLATNESS_ITERS, seed))
}

/// [`hoelder_constant`] with a precomputed flatness report.
pub fn hoelder_from_flatness(p: &LinearPencil, fisher: f64, flatness: FlatnessReport) -> Result<HoelderReport> {
    if !(fisher > 0.0 && fisher.is_finite()) {
        return Err(Error::InvalidArgument(format!("Fisher information must be positive and finite, got {fisher}")));
    }
    if !flatness.semi_flat {
        return Err(Error::NotSemiFlat(flatness.c_lower));
    }
    let c = flatness.c_lower;
    let sum_norms_sq: f64 = p.homogeneous_coeffs().iter().map(|b| linalg::op_norm(b).powi(2)).sum();
    let constant = 4.0 * c.powf(-2.0 / 3.0) * sum_norms_sq.cbrt() * fisher.cbrt();
    Ok(HoelderReport { constant, c, exponent: 2.0 / 3.0, sum_norms_sq, fisher, flatness })
}

/// Lower bound `-3 C` on the logarithmic energy of the distribution.
pub fn log_energy_bound(p: &LinearPencil, fisher: f64, seed: u64) -> Result<f64> {
    Ok(-3.0 * hoelder_constant(p, fisher, seed)?.constant)
}
