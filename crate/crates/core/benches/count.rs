//! Sequential versus data-parallel schedules on the exhaustive workloads.
//!
//! Build with `--no-default-features` to measure the fallback, where every
//! schedule runs the sequential loop.

use std::hint::black_box;
use std::sync::Arc;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use igusa::count::{count_ni, region_series, CountJob, DEFAULT_BUDGET};
use igusa::gf::{FieldConfig, FqElem};
use igusa::hybrid::{zeta_hybrid, DiagParams};
use igusa::mvpoly::MultiPoly;
use igusa::par::Exec;
use igusa::symb::CharClass;

const SCHEDULES: [(&str, Exec); 3] = [("sequential", Exec::Sequential), ("parallel", Exec::Parallel), ("threads-4", Exec::Threads(4))];

fn example_poly() -> MultiPoly {
    MultiPoly::parse(Arc::new(FieldConfig::new(3, 1).unwrap()), "x^3+y^4*z^2+z^6").unwrap()
}

fn bench_count(c: &mut Criterion) {
    let f = example_poly();
    let mut g = c.benchmark_group("count_ni/example-level4");
    g.sample_size(10);
    for (name, exec) in SCHEDULES {
        g.bench_with_input(BenchmarkId::from_parameter(name), &exec, |b, &exec| {
            let job = CountJob { poly: f.clone(), level: 4, budget: DEFAULT_BUDGET, structured: false, exec };
            b.iter(|| black_box(count_ni(&job).unwrap().n_i))
        });
    }
    g.finish();

    let mut g = c.benchmark_group("count_ni/structured-level5");
    g.sample_size(10);
    for (name, exec) in SCHEDULES {
        g.bench_with_input(BenchmarkId::from_parameter(name), &exec, |b, &exec| {
            let job = CountJob { poly: f.clone(), level: 5, budget: DEFAULT_BUDGET, structured: true, exec };
            b.iter(|| black_box(count_ni(&job).unwrap().n_i))
        });
    }
    g.finish();
}

fn bench_region(c: &mut Criterion) {
    let f = example_poly();
    let mut g = c.benchmark_group("region_series/example-prec3");
    g.sample_size(10);
    for (name, exec) in SCHEDULES {
        g.bench_with_input(BenchmarkId::from_parameter(name), &exec, |b, &exec| {
            b.iter(|| black_box(region_series(&f, 3, |o| o[2].finite() == Some(0), DEFAULT_BUDGET, exec).unwrap()))
        });
    }
    g.finish();
}

fn bench_hybrid(c: &mut Criterion) {
    let f = Arc::new(FieldConfig::new(3, 3).unwrap());
    let d = DiagParams::new(f, 4, 2, FqElem::ONE, FqElem::ONE).unwrap();
    let chi = CharClass::trivial(27);
    let mut g = c.benchmark_group("zeta_hybrid/q27");
    g.sample_size(10);
    for (name, exec) in SCHEDULES {
        g.bench_with_input(BenchmarkId::from_parameter(name), &exec, |b, &exec| b.iter(|| black_box(zeta_hybrid(&d, &chi, exec).unwrap())));
    }
    g.finish();
}

criterion_group!(benches, bench_count, bench_region, bench_hybrid);
criterion_main!(benches);
