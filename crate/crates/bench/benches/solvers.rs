use std::f64::consts::{PI, TAU};
use std::hint::black_box;

use converse_core::hill::{integrate_frame, solve_converse_ghys, GhysOptions, Sl2};
use converse_core::{
    count_sign_changes, inner_product, solve_converse_shk, solve_hobby_rice, ChebyshevSystem, CircleFunction,
    HobbyRiceOptions, QuadratureRule, SHKProblem,
};
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

fn bench_primitives(c: &mut Criterion) {
    let f = CircleFunction::parse("sin(2*x)+0.1*cos(x)+0.05*sin(7*x)", TAU).unwrap();
    let g = CircleFunction::parse("cos(3*x)", TAU).unwrap();
    let rule = QuadratureRule::default();
    c.bench_function("inner_product", |b| b.iter(|| inner_product(black_box(&f), &g, &rule).unwrap()));
    c.bench_function("count_sign_changes", |b| b.iter(|| count_sign_changes(black_box(&f), 0.0).unwrap()));

    let k = CircleFunction::parse("1+0.2*cos(4*x)", PI).unwrap();
    let mut group = c.benchmark_group("integrate_frame");
    for grid in [512, 2048, 8192] {
        group.bench_with_input(BenchmarkId::from_parameter(grid), &grid, |b, &grid| {
            b.iter(|| integrate_frame(black_box(&k), Sl2::IDENTITY, grid).unwrap())
        });
    }
    group.finish();
}

fn bench_solvers(c: &mut Criterion) {
    let mut group = c.benchmark_group("solvers");
    group.sample_size(10);
    for order in [1, 2] {
        let system = ChebyshevSystem::trig(order);
        group.bench_with_input(BenchmarkId::new("hobby_rice", order), &system, |b, system| {
            b.iter(|| solve_hobby_rice(system.basis(), &HobbyRiceOptions::default()).unwrap())
        });
    }
    let cases = [(1, "0.8*sin(2*x)+0.1*cos(x)"), (2, "sin(3*x)+0.5*cos(4*x)+0.01*cos(x)")];
    for (order, text) in cases {
        let problem = SHKProblem::new(CircleFunction::parse(text, TAU).unwrap(), ChebyshevSystem::trig(order));
        group.bench_with_input(BenchmarkId::new("shk", order), &problem, |b, problem| {
            b.iter(|| solve_converse_shk(problem).unwrap())
        });
    }
    let k = CircleFunction::parse("1+0.2*cos(4*x)", PI).unwrap();
    group.bench_function("ghys", |b| b.iter(|| solve_converse_ghys(&k, &GhysOptions::default()).unwrap()));
    group.finish();
}

criterion_group!(benches, bench_primitives, bench_solvers);
criterion_main!(benches);
