use criterion::{black_box, criterion_group, criterion_main, Criterion};
use ncfield::{ncrank, rmtlab, LinearPencil, RankOptions, RatExpr, RationalFunction};

fn pauli() -> LinearPencil {
    let text = r#"{"coeffs": [[[0,0],[0,0]], [[0,1],[1,0]], [[0,[0,-1]],[[0,1],0]], [[1,0],[0,-1]]], "selfadjoint": true}"#;
    LinearPencil::from_json(text).expect("valid pencil")
}

fn points_pencil(n: usize) -> LinearPencil {
    // Diagonal pencil diag(x1, ..., xn) plus a cyclic shift in x1.
    let coeffs: Vec<Vec<Vec<i64>>> = (0..=n)
        .map(|k| {
            (0..n)
                .map(|i| {
                    (0..n)
                        .map(|j| match k {
                            0 => 0,
                            1 if j == (i + 1) % n => 1,
                            k if i == j && k == i + 1 => 1,
                            _ => 0,
                        })
                        .collect()
                })
                .collect()
        })
        .collect();
    let rows: Vec<Vec<&[i64]>> = coeffs.iter().map(|m| m.iter().map(Vec::as_slice).collect()).collect();
    let mats: Vec<&[&[i64]]> = rows.iter().map(Vec::as_slice).collect();
    LinearPencil::from_ints(&mats, false).expect("square coefficients")
}

fn rank(c: &mut Criterion) {
    let opts = RankOptions::default();
    for n in [4, 8] {
        let p = points_pencil(n);
        c.bench_function(&format!("blowup_rank n={n}"), |b| b.iter(|| ncrank::blowup_rank(black_box(&p), n, 3, opts.rel_tol, 0)));
        c.bench_function(&format!("is_full n={n}"), |b| b.iter(|| ncrank::is_full(black_box(&p), &opts).unwrap()));
    }
}

fn free_field(c: &mut Criterion) {
    let opts = RankOptions::default();
    let text = "inv(x - inv(y)) - inv(x) - inv(x*y*x - x)";
    c.bench_function("linearize hua", |b| b.iter(|| ncfield::linearize(&RatExpr::parse(black_box(text)).unwrap())));
    c.bench_function("zero test hua", |b| b.iter(|| RationalFunction::parse(black_box(text), &opts).unwrap().is_zero().unwrap()));
}

fn spectral(c: &mut Criterion) {
    let p = pauli();
    c.bench_function("flatness pauli", |b| b.iter(|| black_box(&p).flatness_constants(8, 100, 0)));
    let mut g = c.benchmark_group("gue spectrum");
    g.sample_size(10);
    for d in [100, 200] {
        g.bench_function(format!("pauli d={d}"), |b| b.iter(|| rmtlab::pencil_spectrum(black_box(&p), d, 0).unwrap()));
    }
    g.finish();
}

criterion_group!(benches, rank, free_field, spectral);
criterion_main!(benches);
