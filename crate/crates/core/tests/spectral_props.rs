use ncfield::linalg::{self, CMat};
use ncfield::ncrank;
use ncfield::rmtlab;
use ncfield::spectra;
use ncfield::{LinearPencil, RankOptions, RationalFunction};
use num_complex::Complex64;
use rand::Rng;

fn real(g: &mut impl Rng, r: usize, c: usize) -> CMat {
    CMat::from_fn(r, c, |_, _| Complex64::new(g.random_range(-1.0..1.0), 0.0))
}

fn hermitian(g: &mut impl Rng, n: usize) -> CMat {
    let m = linalg::ginibre(g, n, n);
    (&m + m.adjoint()) * Complex64::new(0.5, 0.0)
}

#[test]
fn reports_stay_on_the_candidate_set() {
    let mut g = ncfield::rng::seeded(1);
    let opts = RankOptions::default();
    for _ in 0..20 {
        let n = g.random_range(1..=3);
        let nvars = g.random_range(0..=2);
        let mut coeffs = vec![hermitian(&mut g, n)];
        for _ in 0..nvars {
            // Low-rank homogeneous parts so that atoms occur.
            let v = real(&mut g, n, 1);
            coeffs.push(&v * v.adjoint());
        }
        let p = LinearPencil::from_cmats(&coeffs, true).unwrap();
        let report = spectra::full_spectrum(&p, &opts).unwrap();
        let eigs = linalg::hermitian_eigenvalues(&p.coeffs()[0]);
        let mut total = 0.0;
        for a in &report.atoms {
            assert!(eigs.iter().any(|e| (e - a.lambda).abs() < 1e-7), "atom {} off the spectrum of b0", a.lambda);
            assert!(a.weight > 0.0 && a.weight <= 1.0);
            total += a.weight;
        }
        assert!(total <= 1.0 + 1e-12);
        assert!((0.0..=1.0).contains(&report.delta_star));
        assert_eq!(report.delta_star == 1.0, report.atoms.is_empty());
        if ncrank::is_full(&p.homogeneous_part(), &opts).unwrap().is_full() {
            assert!(report.atoms.is_empty());
        }
    }
}

#[test]
fn kernel_fraction_law_for_planted_pencils() {
    let mut g = ncfield::rng::seeded(2);
    let opts = RankOptions::default();
    for case in 0..20 {
        let n = g.random_range(2..=4);
        let r = g.random_range(1..n);
        // Selfadjoint B_i = F^* M_i F has rank at most r: inner rank r generically.
        let f = real(&mut g, r, n);
        let coeffs: Vec<CMat> = (0..3)
            .map(|k| if k == 0 { linalg::zeros(n, n) } else { f.adjoint() * hermitian(&mut g, r) * &f })
            .collect();
        let p = LinearPencil::from_cmats(&coeffs, true).unwrap();
        let rho = ncrank::is_full(&p, &opts).unwrap().rho;
        let expected = (n - rho) as f64 / n as f64;
        let s = rmtlab::pencil_spectra(&p, 400, 1, case).unwrap();
        let w = rmtlab::empirical_atoms(&s, &[0.0], None)[0].mean;
        assert!((w - expected).abs() <= 0.05, "case {case}: empirical {w}, predicted {expected} (rho {rho})");
    }
}

#[test]
fn full_pencils_have_no_empirical_atoms() {
    let mut g = ncfield::rng::seeded(3);
    for case in 0..5 {
        let n = g.random_range(1..=3);
        let coeffs: Vec<CMat> = (0..4)
            .map(|_| {
                let h = hermitian(&mut g, n);
                let s = linalg::op_norm(&h);
                h / Complex64::new(s, 0.0)
            })
            .collect();
        let p = LinearPencil::from_cmats(&coeffs, true).unwrap();
        let s = rmtlab::pencil_spectrum(&p, 400, case).unwrap();
        let (w, c) = rmtlab::max_cluster_weight(&s, rmtlab::CLUSTER_HALF_WIDTH);
        assert!(w < 0.05, "cluster {w} at {c}");
    }
}

#[test]
fn zero_functions_vanish_on_gue_samples() {
    let rf = RationalFunction::parse("inv(x - inv(y)) - inv(x) - inv(x*y*x - x)", &RankOptions::default()).unwrap();
    assert!(rf.is_zero().unwrap());
    for seed in 0..5 {
        let x = rmtlab::gue_tuple(2, 30, seed);
        match rf.evaluate(&x) {
            Ok(v) => assert!(v.norm() <= 1e-6, "{}", v.norm()),
            Err(ncfield::Error::Domain { .. }) => {}
            Err(e) => panic!("{e}"),
        }
    }
}

#[test]
fn simulated_samples_are_sorted_and_reproducible() {
    let p = LinearPencil::from_cmats(&[linalg::zeros(1, 1), linalg::identity(1)], true).unwrap();
    let a = rmtlab::pencil_spectra(&p, 50, 3, 9).unwrap();
    let b = rmtlab::pencil_spectra(&p, 50, 3, 9).unwrap();
    for (x, y) in a.iter().zip(&b) {
        assert_eq!(x.eigenvalues, y.eigenvalues);
        assert!(x.eigenvalues.windows(2).all(|w| w[0] <= w[1]));
        assert_eq!(x.len(), 50);
    }
    assert_ne!(a[0].eigenvalues, a[1].eigenvalues);
}
