use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use extsdp::bounds::{cpptp_general, e2pe_general, e2pe_qec_reduced, e2pe_teleport_reduced};
use extsdp::solver::SolverConfig;
use extsdp::ChoiChannel;
use extsdp_bench::{amp_damp, mixed, tmsv};

fn reduced(c: &mut Criterion) {
    let cfg = SolverConfig::default();
    let mut g = c.benchmark_group("reduced");
    g.sample_size(10);
    for d in [2, 3] {
        let rho = mixed(0.4, d);
        g.bench_with_input(BenchmarkId::new("teleport_mixed", d), &rho, |b, rho| {
            b.iter(|| e2pe_teleport_reduced(black_box(rho), d, &cfg).unwrap().value)
        });
    }
    let rho = tmsv(0.5);
    g.bench_function("teleport_tmsv_d2", |b| b.iter(|| e2pe_teleport_reduced(black_box(&rho), 2, &cfg).unwrap().value));
    let ch = amp_damp(0.3, 0.1, 0.1);
    for d in [2, 3] {
        g.bench_with_input(BenchmarkId::new("qec_amp_damp", d), &ch, |b, ch| {
            b.iter(|| e2pe_qec_reduced(black_box(ch), d, &cfg).unwrap().value)
        });
    }
    g.finish();
}

fn general(c: &mut Criterion) {
    let cfg = SolverConfig::default();
    let id = ChoiChannel::identity(2);
    let rho = mixed(0.4, 2);
    let mut g = c.benchmark_group("general_qubit");
    g.sample_size(10);
    g.bench_function("e2pe", |b| b.iter(|| e2pe_general(&id, black_box(&rho), &cfg).unwrap().value));
    g.bench_function("cpptp", |b| b.iter(|| cpptp_general(&id, black_box(&rho), &cfg).unwrap().value));
    g.finish();
}

criterion_group!(benches, reduced, general);
criterion_main!(benches);
