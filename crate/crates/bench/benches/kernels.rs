use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

use cmspace::canonical::normalize;
use cmspace::chart::{from_chart, to_chart};
use cmspace::flowcalc::{bracket_flow, unit};
use cmspace::linalg::{eig, ONE};
use cmspace::sl2flows::{induced_field_numeric, FieldOptions, SL2Generator};
use cmspace::variety::{augment, random_gauge, random_point};
use cmspace::{AugmentedPair, GeneratorKind, DEFAULT_TOL};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const SIZES: [usize; 3] = [2, 4, 6];

fn pair(n: usize) -> AugmentedPair {
    augment(&random_point(n, 2, ONE, n as u64).unwrap()).unwrap()
}

fn eigen(c: &mut Criterion) {
    let mut group = c.benchmark_group("eig");
    for n in SIZES {
        let a_hat = pair(n).a_hat;
        group.bench_with_input(BenchmarkId::from_parameter(n + 1), &a_hat, |b, m| b.iter(|| eig(black_box(m), DEFAULT_TOL).unwrap()));
    }
    group.finish();
}

fn normal_form(c: &mut Criterion) {
    let mut group = c.benchmark_group("normalize");
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for n in SIZES {
        let p = pair(n).conjugate(&random_gauge(n, &mut rng)).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(n), &p, |b, p| b.iter(|| normalize(black_box(p), DEFAULT_TOL).unwrap()));
    }
    group.finish();
}

fn chart(c: &mut Criterion) {
    let mut group = c.benchmark_group("chart");
    for n in SIZES {
        let p = pair(n);
        let point = to_chart(&p, DEFAULT_TOL).unwrap();
        group.bench_with_input(BenchmarkId::new("to_chart", n), &p, |b, p| b.iter(|| to_chart(black_box(p), DEFAULT_TOL).unwrap()));
        group.bench_with_input(BenchmarkId::new("from_chart", n), &point, |b, c| b.iter(|| from_chart(black_box(c), DEFAULT_TOL).unwrap()));
    }
    group.finish();
}

fn fields(c: &mut Criterion) {
    let mut group = c.benchmark_group("induced_field_numeric");
    let gen = SL2Generator::new(GeneratorKind::E);
    for n in SIZES {
        let point = to_chart(&pair(n), DEFAULT_TOL).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(n), &point, |b, c| {
            b.iter(|| induced_field_numeric(&gen, black_box(c), FieldOptions::default()).unwrap())
        });
    }
    group.finish();
}

fn bracket(c: &mut Criterion) {
    let mut group = c.benchmark_group("bracket_flow");
    let p = pair(3);
    let (e, f) = (unit(GeneratorKind::E), unit(GeneratorKind::F));
    for steps in [64, 1024] {
        group.bench_with_input(BenchmarkId::from_parameter(steps), &steps, |b, &s| {
            b.iter(|| bracket_flow(&e, &f, 0.25, s, black_box(&p)).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, eigen, normal_form, chart, fields, bracket);
criterion_main!(benches);
