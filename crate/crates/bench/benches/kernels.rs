use std::hint::black_box;

use a2i_core::bandpass::simulated_response;
use a2i_core::{
    effective_matrix, make_multiband_signal, measure, omp, phase_transition, seed_derive,
    NuwbsLayout, PhaseTransitionConfig, PipelineConfig, SubBandSpec,
};
use criterion::{criterion_group, criterion_main, Criterion};

fn spec() -> SubBandSpec {
    SubBandSpec::new(256, vec![48..64, 160..176]).unwrap()
}

fn layout() -> NuwbsLayout {
    NuwbsLayout::new(&spec(), &[4.0, 4.0], 16).unwrap()
}

fn bench_effective_matrix(c: &mut Criterion) {
    let plan = layout().select(1.0, &mut seed_derive(1, &[])).unwrap();
    c.bench_function("effective_matrix/nuwbs_32x256", |b| {
        b.iter(|| effective_matrix(black_box(&plan)))
    });
}

fn bench_omp(c: &mut Criterion) {
    let spec = spec();
    let plan = layout().select(0.75, &mut seed_derive(2, &[])).unwrap();
    let theta = effective_matrix(&plan);
    let sigma = spec.support();
    for k in [4, 8] {
        let (_, x) = make_multiband_signal(&spec, k, &mut seed_derive(3, &[k as u64])).unwrap();
        let y = measure(&plan, &x, f64::INFINITY, &mut seed_derive(4, &[])).unwrap();
        c.bench_function(&format!("omp/m24_k{k}"), |b| {
            b.iter(|| omp(black_box(&theta), black_box(&y), k, &sigma).unwrap())
        });
    }
}

fn bench_phase_cell(c: &mut Criterion) {
    let cfg = PhaseTransitionConfig {
        spec: spec(),
        gamma: 16,
        widths: vec![4.0, 4.0],
        m_grid: vec![16],
        k_grid: vec![4],
        trials: 100,
        snr_db: f64::INFINITY,
        master_seed: 2024,
    };
    let mut group = c.benchmark_group("phase_cell");
    group.sample_size(20);
    group.bench_function("m16_k4_100_trials", |b| {
        b.iter(|| phase_transition(black_box(&cfg)).unwrap())
    });
    group.finish();
}

fn bench_rejection(c: &mut Criterion) {
    let cfg = PipelineConfig::preset();
    let mut group = c.benchmark_group("rejection");
    group.sample_size(20);
    group.bench_function("simulated_response_preset", |b| {
        b.iter(|| simulated_response(black_box(&cfg), 0.0503, 1.0).unwrap())
    });
    group.finish();
}

criterion_group!(
    benches,
    bench_effective_matrix,
    bench_omp,
    bench_phase_cell,
    bench_rejection
);
criterion_main!(benches);
