use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use torvar::{
    gen_member, herm_eig, intertwiner, joint_diagonalize, op_norm, psra_1d, psra_md, VarietyKind,
};

fn bench_op_norm(c: &mut Criterion) {
    let mut group = c.benchmark_group("op_norm");
    for n in [16usize, 64] {
        let x = gen_member(VarietyKind::Disk, n, 1, 1).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(n), &x, |b, x| {
            b.iter(|| op_norm(x.get(0)))
        });
    }
    group.finish();
}

fn bench_herm_eig(c: &mut Criterion) {
    let mut group = c.benchmark_group("herm_eig");
    for n in [16usize, 64] {
        let x = gen_member(VarietyKind::Cube, n, 1, 2).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(n), &x, |b, x| {
            b.iter(|| herm_eig(x.get(0)).unwrap())
        });
    }
    group.finish();
}

fn bench_joint_diagonalize(c: &mut Criterion) {
    let mut group = c.benchmark_group("joint_diagonalize_m2");
    group.sample_size(20);
    for n in [16usize, 64] {
        let x = gen_member(VarietyKind::Disk, n, 2, 3).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(n), &x, |b, x| {
            b.iter(|| joint_diagonalize(x).unwrap())
        });
    }
    group.finish();
}

fn bench_psra(c: &mut Criterion) {
    let mut group = c.benchmark_group("psra");
    group.sample_size(20);
    let x1 = gen_member(VarietyKind::Cube, 64, 1, 4).unwrap();
    group.bench_function("1d_n64_delta0.1", |b| {
        b.iter(|| psra_1d(x1.get(0), 0.1).unwrap())
    });
    let x2 = gen_member(VarietyKind::Cube, 32, 2, 5).unwrap();
    group.bench_function("md_n32_m2_delta0.1", |b| {
        b.iter(|| psra_md(&x2, 0.1).unwrap())
    });
    group.finish();
}

fn bench_intertwiner(c: &mut Criterion) {
    let x = gen_member(VarietyKind::Disk, 16, 2, 6).unwrap();
    let y = torvar::gen_perturbation(&x, VarietyKind::Disk, 0.05, 7).unwrap();
    c.bench_function("intertwiner_n16_m2", |b| {
        b.iter(|| intertwiner(&x, &y).unwrap())
    });
}

criterion_group!(
    benches,
    bench_op_norm,
    bench_herm_eig,
    bench_joint_diagonalize,
    bench_psra,
    bench_intertwiner
);
criterion_main!(benches);
