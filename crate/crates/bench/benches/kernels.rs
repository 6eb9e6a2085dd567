use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use holeburn::medium::{chi_exact_gaussian, chi_quadrature, inverse_group_velocity};
use holeburn::oracle::time_domain_propagate;
use holeburn::propagation::propagate;
use holeburn::special::{dawson, erfc};
use holeburn::storage::{efficiency, established_signal, kappa_quadrature, restored_field_full};
use holeburn::{ChiModel, HoleProfile, Method};
use holeburn_bench::{envelope, medium, protocol, stored};

fn special(c: &mut Criterion) {
    c.bench_function("dawson", |b| b.iter(|| dawson(black_box(2.3)).unwrap()));
    c.bench_function("erfc", |b| b.iter(|| erfc(black_box(4.1)).unwrap()));
}

fn susceptibility(c: &mut Criterion) {
    let m = medium(100.0);
    c.bench_function("chi_exact_gaussian", |b| b.iter(|| chi_exact_gaussian(black_box(0.7), &m).unwrap()));
    c.bench_function("chi_quadrature", |b| {
        b.iter(|| chi_quadrature(black_box(0.7), &HoleProfile::Gaussian, &m).unwrap())
    });
    let narrow = holeburn::MediumParams::reduced(100.0, 1e-3, 0.0).unwrap();
    c.bench_function("inverse_group_velocity", |b| {
        b.iter(|| inverse_group_velocity(&HoleProfile::Gaussian, black_box(&narrow)).unwrap())
    });
}

fn transport(c: &mut Criterion) {
    let m = medium(100.0);
    let env = envelope(100.0, 10.0);
    c.bench_function("propagate_exact_gaussian", |b| {
        b.iter(|| propagate(black_box(&env), 100.0, &ChiModel::ExactGaussian, &m).unwrap())
    });
    let small = medium(10.0);
    let env10 = envelope(10.0, 10.0);
    let mut g = c.benchmark_group("oracle");
    g.sample_size(10);
    g.bench_function("time_domain_propagate_64_atoms", |b| {
        b.iter(|| time_domain_propagate(black_box(&env10), 10.0, &HoleProfile::Gaussian, &small, 64, 200).unwrap())
    });
    g.finish();
}

fn retrieval(c: &mut Criterion) {
    let p = stored(100.0, 19.0);
    let t = p.schedule.t_pi2 + 3.0;
    c.bench_function("kappa_quadrature", |b| b.iter(|| kappa_quadrature(black_box(1.0), &p).unwrap()));
    c.bench_function("established_signal", |b| b.iter(|| established_signal(black_box(t), &p).unwrap()));
    c.bench_function("restored_field_full", |b| b.iter(|| restored_field_full(black_box(t), &p).unwrap()));
    let q = protocol(25.0);
    let mut g = c.benchmark_group("efficiency");
    g.sample_size(10);
    g.bench_function("established_alpha0L_25", |b| b.iter(|| efficiency(black_box(&q), Method::Established).unwrap()));
    g.finish();
}

criterion_group!(benches, special, susceptibility, transport, retrieval);
criterion_main!(benches);
