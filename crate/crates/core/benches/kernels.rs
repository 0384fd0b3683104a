use criterion::{criterion_group, criterion_main, Criterion};
use viscoelastic::diagnostics::defect_study;
use viscoelastic::dynamics::evaluate;
use viscoelastic::integrator::IntegratorConfig;
use viscoelastic::io::{make_initial, GeneratorParams, Scenario};
use viscoelastic::{AdvectionForm, Grid, SimState};

fn state(n: usize) -> SimState {
    let mut sc = Scenario::new("bench", Grid::new(2, n).unwrap(), "random_divfree");
    sc.params = GeneratorParams { amplitude: 0.5, f_amplitude: 0.3, f_identity: true, seed: 1, ..Default::default() };
    sc.eps = 0.05;
    make_initial(&sc).unwrap()
}

#[cfg(feature = "parallel")]
fn pools() -> Vec<(String, rayon::ThreadPool)> {
    let default = rayon::current_num_threads();
    let mut out = vec![("1-thread".to_string(), rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap())];
    out.push((format!("{default}-threads"), rayon::ThreadPoolBuilder::new().build().unwrap()));
    out
}

#[cfg(feature = "parallel")]
fn rhs(c: &mut Criterion) {
    let mut group = c.benchmark_group("rhs");
    for n in [64, 128] {
        let s = state(n);
        for (name, pool) in pools() {
            group.bench_with_input(criterion::BenchmarkId::new(name, n), &s, |b, s| {
                b.iter(|| pool.install(|| evaluate(s, AdvectionForm::Convective)))
            });
        }
    }
    group.finish();
}

#[cfg(feature = "parallel")]
fn eps_sweep(c: &mut Criterion) {
    let mut group = c.benchmark_group("eps_sweep");
    group.sample_size(10);
    let s = state(32);
    let cfg = IntegratorConfig::new(0.01, 0.1);
    for (name, pool) in pools() {
        group.bench_function(name, |b| {
            b.iter(|| pool.install(|| defect_study(&s, &[0.1, 0.05, 0.025, 0.0125], &cfg, 1e-12).unwrap()))
        });
    }
    group.finish();
}

#[cfg(not(feature = "parallel"))]
fn rhs(c: &mut Criterion) {
    let s = state(64);
    c.bench_function("rhs/sequential/64", |b| b.iter(|| evaluate(&s, AdvectionForm::Convective)));
}

#[cfg(not(feature = "parallel"))]
fn eps_sweep(c: &mut Criterion) {
    let s = state(32);
    let cfg = IntegratorConfig::new(0.01, 0.1);
    let mut group = c.benchmark_group("eps_sweep");
    group.sample_size(10);
    group.bench_function("sequential", |b| {
        b.iter(|| defect_study(&s, &[0.1, 0.05, 0.025, 0.0125], &cfg, 1e-12).unwrap())
    });
    group.finish();
}

criterion_group!(benches, rhs, eps_sweep);
criterion_main!(benches);
