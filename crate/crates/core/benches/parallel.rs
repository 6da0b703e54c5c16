use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

use fklab_core::chain_opt::{free_minimizers, SolverOptions};
use fklab_core::environments::{AlphaValue, EnvPoint};
use fklab_core::holonomic_lp::{discretize_circle, solve_batch};
use fklab_core::lagrangians::LagrangianSpec;
use fklab_core::mane_calibration::{cocycle_defects, mane_table};
use fklab_core::Exec;

const POLICIES: [(&str, Exec); 2] = [("sequential", Exec::Sequential), ("parallel", Exec::Parallel)];

fn free_dp(c: &mut Criterion) {
    let mut g = c.benchmark_group("free_dp");
    g.sample_size(10);
    let model = LagrangianSpec::sturm(1.0, 0.5, 1.0);
    let env = EnvPoint::quasicrystal(AlphaValue::fibonacci(), 0.0);
    let e = model.bind(&env).unwrap();
    for (name, exec) in POLICIES {
        let opts = SolverOptions::for_model(&model).with_exec(exec);
        g.bench_with_input(BenchmarkId::new(name, 32), &opts, |b, o| {
            b.iter(|| black_box(free_minimizers(&e, &[8, 16, 32], None, o).unwrap()))
        });
    }
    g.finish();
}

fn mane_layered(c: &mut Criterion) {
    let mut g = c.benchmark_group("mane_layered");
    g.sample_size(10);
    let model = LagrangianSpec::circle(0.5, 1.0);
    let env = EnvPoint::circle(0.0);
    for (name, exec) in POLICIES {
        g.bench_function(BenchmarkId::new(name, "X4_h0.02_n64"), |b| {
            b.iter(|| black_box(mane_table(&model, &env, 0.0, 4.0, 0.02, 64, exec).unwrap()))
        });
    }
    let table = mane_table(&model, &env, 0.0, 3.0, 0.05, 60, Exec::Parallel).unwrap();
    for (name, exec) in POLICIES {
        g.bench_function(BenchmarkId::new(name, "cocycle_16_shifts"), |b| {
            b.iter(|| black_box(cocycle_defects(&table, 16, 1, exec).unwrap()))
        });
    }
    g.finish();
}

fn lp_batch(c: &mut Criterion) {
    let mut g = c.benchmark_group("lp_n32");
    g.sample_size(10);
    let problems: Vec<_> = [0.0, 0.5, 1.0, 2.0]
        .iter()
        .map(|&k| discretize_circle(&LagrangianSpec::circle(0.5, k), 32, 2.0).unwrap())
        .collect();
    for (name, exec) in POLICIES {
        g.bench_function(name, |b| b.iter(|| black_box(solve_batch(&problems, exec))));
    }
    g.finish();
}

criterion_group!(benches, free_dp, mane_layered, lp_batch);
criterion_main!(benches);
