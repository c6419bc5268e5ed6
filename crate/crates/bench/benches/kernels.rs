use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use dirheat_core::{
    blocked_set, expand, propagate, synthesize_lumped, Actuator, ActuatorKind, DirichletSeries, Drive,
    ExactReal, SpectralState, SynthesisParams,
};

fn heat_series(terms: usize) -> DirichletSeries {
    let pairs: Vec<(f64, f64)> = (1..=terms)
        .map(|j| (1.0 / j as f64, (std::f64::consts::PI * j as f64).powi(2)))
        .collect();
    DirichletSeries::from_pairs(&pairs).unwrap()
}

fn actuator(a: &str, b: &str, kind: ActuatorKind) -> Actuator {
    Actuator::new(a.parse::<ExactReal>().unwrap(), b.parse::<ExactReal>().unwrap(), kind).unwrap()
}

fn series(c: &mut Criterion) {
    let mut group = c.benchmark_group("series");
    for terms in [8, 64, 512] {
        let s = heat_series(terms);
        group.bench_with_input(BenchmarkId::new("evaluate", terms), &s, |b, s| {
            b.iter(|| s.evaluate(black_box(0.01)).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("expand_order_30", terms), &s, |b, s| {
            b.iter(|| expand(s, black_box(0.05), 30).unwrap())
        });
    }
    group.finish();
}

fn spectral(c: &mut Criterion) {
    let rational = actuator("1/4", "3/4", ActuatorKind::Lumped);
    let irrational = actuator("0", "0+1/2*sqrt2", ActuatorKind::Lumped);
    c.bench_function("blocked_set rational j<=10000", |b| {
        b.iter(|| blocked_set(&rational, black_box(10_000)).unwrap())
    });
    c.bench_function("blocked_set irrational j<=10000", |b| {
        b.iter(|| blocked_set(&irrational, black_box(10_000)).unwrap())
    });
}

fn control(c: &mut Criterion) {
    let act = actuator("0", "1/3", ActuatorKind::Lumped);
    let z0 = SpectralState::eigenmode(1, 6);
    let z1 = SpectralState::zeros(6);
    let params = SynthesisParams::new(0.5, 6, 1e-6);
    c.bench_function("synthesize_lumped N=6", |b| {
        b.iter(|| synthesize_lumped(&z0, &z1, &act, black_box(&params)).unwrap())
    });

    let synthesis = synthesize_lumped(&z0, &z1, &act, &params).unwrap();
    let padded = z0.resized(16);
    c.bench_function("propagate 16 modes 256 steps", |b| {
        b.iter(|| propagate(&padded, Drive::Control(&synthesis.control), &act, 0.5, black_box(256)).unwrap())
    });
}

criterion_group!(benches, series, spectral, control);
criterion_main!(benches);
