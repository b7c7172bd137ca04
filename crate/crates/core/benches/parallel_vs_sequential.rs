//! Parallel against sequential execution on the heavy entry points. With
//! the `parallel` feature off both arms run sequentially.

use std::f64::consts::FRAC_PI_2;
use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use sectorial::convergence::run_convergence;
use sectorial::generators::{example45, random_penalization, Example45Config};
use sectorial::relations::m_sectorial_check;
use sectorial::selftest::run_selftest;
use sectorial::semigroups::{semigroup_contour, ContourSpec};
use sectorial::{Execution, Tolerance, C64};

const MODES: [(&str, Execution); 2] = [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)];

fn convergence(c: &mut Criterion) {
    let tol = Tolerance::default();
    let seq = random_penalization(3, 6, 0.9, 50, &tol).unwrap();
    let e45 = example45(&Example45Config::new(32, (1..=50).collect()).unwrap(), &tol).unwrap();
    let zs = [C64::new(0.0, 1.0), C64::new(0.2, -0.5)];
    let mut g = c.benchmark_group("run_convergence");
    g.sample_size(10);
    for (label, exec) in MODES {
        g.bench_with_input(BenchmarkId::new("penalization", label), &exec, |b, &exec| {
            b.iter(|| run_convergence(black_box(&seq), &zs, None, &tol, exec).unwrap())
        });
        g.bench_with_input(BenchmarkId::new("example45_n32", label), &exec, |b, &exec| {
            b.iter(|| run_convergence(black_box(&e45), &zs, None, &tol, exec).unwrap())
        });
    }
    g.finish();
}

fn contour(c: &mut Criterion) {
    let tol = Tolerance::default();
    let seq = random_penalization(5, 6, 0.9, 2, &tol).unwrap();
    let rel = seq.members()[0].associate(&tol).unwrap();
    let theta = m_sectorial_check(&rel, FRAC_PI_2, &tol).angle_theta.unwrap();
    let spec = ContourSpec::for_angle(theta);
    let mut g = c.benchmark_group("semigroup_contour");
    for (label, exec) in MODES {
        g.bench_with_input(BenchmarkId::from_parameter(label), &exec, |b, &exec| {
            b.iter(|| semigroup_contour(black_box(&rel), 0.5, &spec, &tol, exec).unwrap())
        });
    }
    g.finish();
}

fn selftest(c: &mut Criterion) {
    let mut g = c.benchmark_group("selftest_50");
    g.sample_size(10);
    for (label, exec) in MODES {
        g.bench_with_input(BenchmarkId::from_parameter(label), &exec, |b, &exec| b.iter(|| run_selftest(7, 50, exec)));
    }
    g.finish();
}

criterion_group!(benches, convergence, contour, selftest);
criterion_main!(benches);
