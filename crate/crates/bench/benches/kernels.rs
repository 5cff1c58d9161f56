use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use qakit_bench::{bump, ladder, reciprocal_tail, structural};
use qakit_core::comb::{recip_coeff, stirling2, verify_suite};
use qakit_core::gfun::{dilate_pair, ModelDistribution, StructuredUD, TestFunction};
use qakit_core::qa::{negint_expansion_check, ratio_ladder, structural_data, Ladder, Method};
use qakit_core::svf::{Locus, SlowlyVaryingFn};
use qakit_core::weights::{estimate_tail_constants, tail_stirling_sum, WeightSequence};

fn comb(c: &mut Criterion) {
    let mut g = c.benchmark_group("comb");
    g.bench_function("stirling2_60_30", |b| {
        b.iter(|| stirling2(black_box(60), black_box(30)))
    });
    g.bench_function("recip_coeff_row_20", |b| {
        b.iter(|| (0..=20).map(|j| recip_coeff(20, j).unwrap()).collect::<Vec<_>>())
    });
    g.sample_size(10);
    g.bench_function("verify_suite_12", |b| b.iter(|| verify_suite(black_box(12))));
    g.finish();
}

fn weights(c: &mut Criterion) {
    let mut g = c.benchmark_group("weights");
    for s in [1.5, 2.0, 3.0] {
        let m = WeightSequence::gevrey(s, 64).unwrap();
        g.bench_with_input(BenchmarkId::new("tail_stirling_p20", s), &m, |b, m| {
            b.iter(|| tail_stirling_sum(m, black_box(1.0), 20, 1e-12).unwrap())
        });
    }
    let m = WeightSequence::gevrey(2.0, 64).unwrap();
    g.bench_function("tail_constants_p50", |b| {
        b.iter(|| estimate_tail_constants(&m, 1.0, 50, 1e-12).unwrap())
    });
    g.finish();
}

fn test_functions(c: &mut Criterion) {
    let mut g = c.benchmark_group("testfn");
    let phi = bump();
    for m in [0usize, 6, 12, 24] {
        g.bench_with_input(BenchmarkId::new("bump_derivative", m), &m, |b, &m| {
            b.iter(|| phi.derivative(m, black_box(0.37)))
        });
    }
    let gauss = TestFunction::gaussian(1.0).unwrap();
    g.bench_function("gaussian_derivative_24", |b| {
        b.iter(|| gauss.derivative(24, black_box(1.3)))
    });
    g.finish();
}

fn pairing(c: &mut Criterion) {
    let mut g = c.benchmark_group("pairing");
    let phi = bump();
    g.bench_function("finite_part_k3", |b| {
        b.iter(|| ModelDistribution::FinitePartPlus(3).pair(&phi, 1e-10).unwrap())
    });
    let f = structural(SlowlyVaryingFn::one(Locus::Infinity));
    for s in [10.0, 1e6] {
        g.bench_with_input(BenchmarkId::new("dilate_structural", s), &s, |b, &s| {
            b.iter(|| dilate_pair(&f, s, &phi, 1e-10).unwrap())
        });
    }
    g.finish();
}

fn ladders(c: &mut Criterion) {
    let mut g = c.benchmark_group("ladder");
    g.sample_size(20);
    let phi = bump();
    for spec in ["1", "log"] {
        let l = SlowlyVaryingFn::parse(spec, Locus::Infinity).unwrap();
        let f = structural(l);
        g.bench_with_input(BenchmarkId::new("ratio_ladder", spec), &f, |b, f| {
            b.iter(|| ratio_ladder(f, &l, 0.5, &phi, &ladder(), 1e-10).unwrap())
        });
        g.bench_with_input(BenchmarkId::new("structural_data", spec), &f, |b, f| {
            b.iter(|| structural_data(f, 0.5, &l, &ladder(), Method::RichardsonLog, 1e-10).unwrap())
        });
    }
    let one = SlowlyVaryingFn::one(Locus::Infinity);
    let tail = reciprocal_tail();
    let rungs = Ladder::new(10.0, 10.0, 6).unwrap();
    g.bench_function("negint_expansion", |b| {
        b.iter(|| negint_expansion_check(&tail, &one, 1.0, 0.0, &phi, &rungs, Method::PlainLast, 1e-5).unwrap())
    });
    let empty = StructuredUD::new(Locus::Infinity);
    g.bench_function("ratio_ladder_empty", |b| {
        b.iter(|| ratio_ladder(&empty, &one, 0.5, &phi, &ladder(), 1e-10).unwrap())
    });
    g.finish();
}

criterion_group!(benches, comb, weights, test_functions, pairing, ladders);
criterion_main!(benches);
