//! GUE sampling and empirical spectral statistics of evaluated pencils.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::linalg::{self, CMat};
use crate::ncpoly::MatrixTuple;
use crate::pencil::LinearPencil;
use crate::rng;

/// Half-width used to look for clustered eigenvalues in a continuous bulk.
pub const CLUSTER_HALF_WIDTH: f64 = 0.02;
/// Number of anchor points where distribution-function increments are measured.
pub const CDF_ANCHORS: usize = 1000;
pub const DEFAULT_SAMPLES: usize = 8;

/// Hermitian `d x d` with `E|x_ij|^2 = 1/d`: off-diagonal `(a + ib)/sqrt(2d)`, diagonal
/// `N(0, 1/d)`. The spectrum approaches the semicircle on `[-2, 2]`.
pub fn sample_gue(d: usize, seed: u64) -> CMat {
    assert!(d >= 1, "GUE dimension must be positive");
    let mut g = rng::seeded(seed);
    let mut m = linalg::zeros(d, d);
    let diag = (1.0 / d as f64).sqrt();
    let off = (1.0 / (2.0 * d as f64)).sqrt();
    for i in 0..d {
        let x: f64 = g.sample(StandardNormal);
        m[(i, i)] = Complex64::new(x * diag, 0.0);
        for j in i + 1..d {
            let re: f64 = g.sample(StandardNormal);
            let im: f64 = g.sample(StandardNormal);
            let z = Complex64::new(re * off, im * off);
            m[(i, j)] = z;
            m[(j, i)] = z.conj();
        }
    }
    m
}

/// `n` independent GUE matrices; matrix `j` uses the stream `j` derived from `seed`.
pub fn gue_tuple(n: usize, d: usize, seed: u64) -> MatrixTuple {
    let mats = (0..n).map(|j| sample_gue(d, rng::derived(seed, j as u64).random())).collect();
    MatrixTuple::new(mats, true).expect("GUE matrices are Hermitian")
}

/// Seed of sample `s` in a run seeded with `seed`.
pub fn sample_seed(seed: u64, s: usize) -> u64 {
    seed.wrapping_add((s as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15))
}

#[derive(Clone, Debug)]
pub struct SpectralSample {
    pub dim: usize,
    /// Pencil size `N`.
    pub size: usize,
    pub seed: u64,
    /// Ascending, `N * dim` entries.
    pub eigenvalues: Vec<f64>,
}

impl SpectralSample {
    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    /// Fraction of eigenvalues in `[lo, hi]`.
    pub fn fraction_in(&self, lo: f64, hi: f64) -> f64 {
        if self.is_empty() || hi < lo {
            return 0.0;
        }
        let a = self.eigenvalues.partition_point(|&e| e < lo);
        let b = self.eigenvalues.partition_point(|&e| e <= hi);
        (b - a) as f64 / self.len() as f64
    }

    fn scale(&self) -> f64 {
        self.eigenvalues.iter().fold(1.0f64, |m, e| m.max(e.abs()))
    }
}

/// Spectrum of `P(X)` at a GUE tuple drawn from `seed`.
pub fn pencil_spectrum(p: &LinearPencil, d: usize, seed: u64) -> Result<SpectralSample> {
    if !p.is_selfadjoint() {
        return Err(Error::NotSelfadjoint);
    }
    let x = gue_tuple(p.nvars(), d, seed);
    let mut eigenvalues = linalg::hermitian_eigenvalues(&p.eval(&x)?);
    eigenvalues.sort_by(f64::total_cmp);
    Ok(SpectralSample { dim: d, size: p.size(), seed, eigenvalues })
}

/// `samples` spectra at independent GUE tuples, in sample order.
pub fn pencil_spectra(p: &LinearPencil, d: usize, samples: usize, seed: u64) -> Result<Vec<SpectralSample>> {
    (0..samples).map(|s| pencil_spectrum(p, d, sample_seed(seed, s))).collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct EmpiricalAtom {
    pub lambda: f64,
    pub mean: f64,
    /// Sample standard deviation; zero for a single sample.
    pub std: f64,
}

fn mean_std(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = if xs.len() > 1 { xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0) } else { 0.0 };
    (mean, var.sqrt())
}

/// Mean fraction of eigenvalues within `window` of each `lambda`. `None` selects
/// `1e-6 * max(1, max |eigenvalue|)` per sample, which counts numerically exact kernels.
pub fn empirical_atoms(spectra: &[SpectralSample], lambdas: &[f64], window: Option<f64>) -> Vec<EmpiricalAtom> {
    lambdas
        .iter()
        .map(|&lambda| {
            let fractions: Vec<f64> = spectra
                .iter()
                .map(|s| {
                    let w = window.unwrap_or(1e-6 * s.scale());
                    s.fraction_in(lambda - w, lambda + w)
                })
                .collect();
            let (mean, std) = if fractions.is_empty() { (0.0, 0.0) } else { mean_std(&fractions) };
            EmpiricalAtom { lambda, mean, std }
        })
        .collect()
}

/// Largest fraction of eigenvalues in a window `[e - w, e + w]` centred at an eigenvalue,
/// with the centre attaining it.
pub fn max_cluster_weight(sample: &SpectralSample, half_width: f64) -> (f64, f64) {
    let e = &sample.eigenvalues;
    let mut best = (0.0, f64::NAN);
    let (mut lo, mut hi) = (0, 0);
    for (k, &c) in e.iter().enumerate() {
        while e[lo] < c - half_width {
            lo += 1;
        }
        hi = hi.max(k);
        while hi + 1 < e.len() && e[hi + 1] <= c + half_width {
            hi += 1;
        }
        let frac = (hi + 1 - lo) as f64 / e.len() as f64;
        if frac > best.0 {
            best = (frac, c);
        }
    }
    best
}

/// For each `delta`, the largest `F([t, t + delta])` over `CDF_ANCHORS` equally spaced anchors
/// `t` spanning the sample, `F` the empirical distribution.
pub fn cdf_modulus(sample: &SpectralSample, deltas: &[f64]) -> Vec<f64> {
    let e = &sample.eigenvalues;
    if e.is_empty() {
        return vec![0.0; deltas.len()];
    }
    let (min, max) = (e[0], e[e.len() - 1]);
    let step = (max - min) / (CDF_ANCHORS - 1) as f64;
    deltas
        .iter()
        .map(|&delta| {
            (0..CDF_ANCHORS)
                .map(|k| {
                    let t = if k + 1 == CDF_ANCHORS { max } else { min + step * k as f64 };
                    sample.fraction_in(t, t + delta)
                })
                .fold(0.0, f64::max)
        })
        .collect()
}

/// `{"dim", "samples", "seed", "atoms": [...], "max_cluster": {...}, "cdf_modulus": [...]}`.
pub fn summary_json(
    spectra: &[SpectralSample],
    predicted: &[(f64, f64)],
    atoms: &[EmpiricalAtom],
    deltas: &[f64],
) -> Value {
    let clusters: Vec<(f64, f64)> = spectra.iter().map(|s| max_cluster_weight(s, CLUSTER_HALF_WIDTH)).collect();
    let worst = clusters.iter().cloned().fold((0.0, f64::NAN), |a, b| if b.0 > a.0 { b } else { a });
    let moduli: Vec<Vec<f64>> = spectra.iter().map(|s| cdf_modulus(s, deltas)).collect();
    let modulus: Vec<Value> = deltas
        .iter()
        .enumerate()
        .map(|(k, &d)| {
            let vals: Vec<f64> = moduli.iter().map(|m| m[k]).collect();
            let (mean, std) = mean_std(&vals);
            json!({"delta": d, "mean": mean, "std": std})
        })
        .collect();
    json!({
        "dim": spectra.first().map_or(0, |s| s.dim),
        "samples": spectra.len(),
        "seeds": spectra.iter().map(|s| s.seed).collect::<Vec<_>>(),
        "atoms": predicted.iter().zip(atoms).map(|((lambda, weight), a)| json!({
            "lambda": lambda,
            "predicted": weight,
            "empirical_mean": a.mean,
            "empirical_std": a.std,
        })).collect::<Vec<_>>(),
        "max_cluster": {"half_width": CLUSTER_HALF_WIDTH, "weight": worst.0, "center": if worst.1.is_nan() { Value::Null } else { json!(worst.1) }},
        "cdf_modulus": modulus,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ncpoly::PolyMatrix;

    fn from_values(v: Vec<f64>) -> SpectralSample {
        SpectralSample { dim: v.len(), size: 1, seed: 0, eigenvalues: v }
    }

    #[test]
    fn gue_is_reproducible_and_hermitian() {
        let a = sample_gue(30, 5);
        assert_eq!(a, sample_gue(30, 5));
        assert_ne!(a, sample_gue(30, 6));
        assert!(linalg::hermitian_defect(&a) == 0.0);
    }

    #[test]
    fn gue_spectrum_follows_the_semicircle() {
        let m = sample_gue(2000, 1);
        let mut e = linalg::hermitian_eigenvalues(&m);
        e.sort_by(f64::total_cmp);
        let edge = e[0].abs().max(e[e.len() - 1].abs());
        assert!((1.9..=2.1).contains(&edge), "{edge}");
        let s = from_values(e);
        let below = s.fraction_in(f64::NEG_INFINITY, 0.0);
        assert!((0.48..=0.52).contains(&below), "{below}");
    }

    #[test]
    fn modulus_limits() {
        let s = from_values(vec![-1.0, 0.0, 0.5, 2.0]);
        assert_eq!(cdf_modulus(&s, &[3.0]), vec![1.0]);
        let point = from_values(vec![0.7; 10]);
        assert_eq!(cdf_modulus(&point, &[1e-3, 1.0]), vec![1.0, 1.0]);
        assert_eq!(max_cluster_weight(&point, 0.02).0, 1.0);
    }

    #[test]
    fn cluster_weight_finds_the_densest_window() {
        let s = from_values(vec![0.0, 1.0, 1.01, 1.02, 5.0]);
        let (w, c) = max_cluster_weight(&s, 0.015);
        assert_eq!(w, 0.6);
        assert_eq!(c, 1.01);
    }

    #[test]
    fn kernel_of_the_all_ones_pencil() {
        let p = LinearPencil::from_poly_matrix(&PolyMatrix::parse_rows(1, &[&["x1", "x1"], &["x1", "x1"]]).unwrap()).unwrap();
        let spectra = pencil_spectra(&p, 100, 2, 0).unwrap();
        assert!(spectra.iter().all(|s| s.len() == 200));
        let a = empirical_atoms(&spectra, &[0.0], None);
        assert!((a[0].mean - 0.5).abs() < 0.03, "{a:?}");
    }
}
