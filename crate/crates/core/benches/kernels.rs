use std::hint::black_box;
use std::sync::Arc;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use bbdg_core::mesh::build_cube_mesh;
use bbdg_core::solver::{
    exact_solution, Basis, Discretization, Execution, LiftMode, Materials, ReferenceOperators,
};

fn setup(degree: usize, basis: Basis, lift: LiftMode, exec: Execution) -> Discretization<f64> {
    let mesh = Arc::new(build_cube_mesh(4, [-0.5; 3], [0.5; 3]).unwrap());
    let ops = Arc::new(ReferenceOperators::new(degree, basis).unwrap());
    let mat = Materials::uniform(mesh.len(), 1.0, 1.0);
    Discretization::new(ops, mesh, mat, lift, exec).unwrap()
}

fn execution(c: &mut Criterion) {
    let mut group = c.benchmark_group("rhs_execution");
    group.sample_size(20);
    for degree in [3, 5] {
        for (name, exec) in [
            ("sequential", Execution::Sequential),
            ("parallel", Execution::Parallel),
        ] {
            let d = setup(degree, Basis::Bernstein, LiftMode::Optimal, exec);
            let s = d.project(|x| exact_solution(x, 0.2), 0.2);
            let mut out = vec![0.0; s.data.len()];
            group.bench_with_input(BenchmarkId::new(name, degree), &degree, |b, _| {
                b.iter(|| d.rhs(black_box(&s), &mut out).unwrap())
            });
        }
    }
    group.finish();
}

fn lift_modes(c: &mut Criterion) {
    let mut group = c.benchmark_group("surface_lift");
    group.sample_size(20);
    for degree in [3, 5, 7] {
        for mode in [LiftMode::Dense, LiftMode::Factorized, LiftMode::Optimal] {
            let d = setup(degree, Basis::Bernstein, mode, Execution::Sequential);
            let s = d.project(|x| exact_solution(x, 0.2), 0.2);
            let mut out = vec![0.0; s.data.len()];
            group.bench_with_input(BenchmarkId::new(mode.name(), degree), &degree, |b, _| {
                b.iter(|| d.surface_rhs(black_box(&s), &mut out).unwrap())
            });
        }
        let d = setup(degree, Basis::Nodal, LiftMode::Dense, Execution::Sequential);
        let s = d.project(|x| exact_solution(x, 0.2), 0.2);
        let mut out = vec![0.0; s.data.len()];
        group.bench_with_input(BenchmarkId::new("nodal_dense", degree), &degree, |b, _| {
            b.iter(|| d.surface_rhs(black_box(&s), &mut out).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, execution, lift_modes);
criterion_main!(benches);
