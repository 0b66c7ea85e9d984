use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use thzlab::{
    alignment_duration, optimize_update_period, outage_scheme1, outage_scheme2, simulate_fpt,
    AggregateMode, FptDistribution, FptOptions, SeriesSpec, SimSpec,
};
use thzlab_bench::reference_model;

fn options(mode: AggregateMode) -> FptOptions {
    FptOptions {
        mode,
        ..FptOptions::default()
    }
}

fn pdf_eval(c: &mut Criterion) {
    let single = FptDistribution::exact(0.089, 0.005, SeriesSpec::default()).unwrap();
    c.bench_function("pdf_single_axis_exact", |b| {
        b.iter(|| single.pdf(black_box(0.3)))
    });
    for mode in [AggregateMode::ExactSeries, AggregateMode::LognormalApprox] {
        let dist = reference_model(options(mode)).distribution().unwrap();
        c.bench_function(&format!("pdf_aggregate_{mode:?}"), |b| {
            b.iter(|| dist.pdf(black_box(0.3)))
        });
    }
}

fn outage_integrals(c: &mut Criterion) {
    let m = reference_model(options(AggregateMode::ExactSeries));
    let dist = m.distribution().unwrap();
    let t_b = alignment_duration(&m.system);
    c.bench_function("outage_on_demand", |b| {
        b.iter(|| outage_scheme1(&dist, black_box(t_b)).unwrap())
    });
    c.bench_function("outage_periodic", |b| {
        b.iter(|| outage_scheme2(&dist, t_b, black_box(0.2)).unwrap())
    });
}

fn update_period(c: &mut Criterion) {
    let m = reference_model(options(AggregateMode::ExactSeries));
    c.bench_function("optimize_update_period", |b| {
        b.iter(|| optimize_update_period(black_box(&m)).unwrap())
    });
}

fn simulation(c: &mut Criterion) {
    let m = reference_model(FptOptions::default());
    let bounds = thzlab::misalignment_boundaries(&m.system);
    let spec = SimSpec {
        dt: Some(1e-3),
        n_trials: 1_000,
        ..SimSpec::default()
    };
    let mut g = c.benchmark_group("simulation");
    g.sample_size(10);
    g.bench_function("fpt_1000_trials", |b| {
        b.iter(|| simulate_fpt(&m.mobility, &bounds, black_box(&spec)).unwrap())
    });
    g.finish();
}

criterion_group!(
    benches,
    pdf_eval,
    outage_integrals,
    update_period,
    simulation
);
criterion_main!(benches);
