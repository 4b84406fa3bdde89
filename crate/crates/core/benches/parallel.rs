//! Sequential against data-parallel execution of the main hot paths. Build with
//! `--no-default-features` to measure the sequential fallback alone.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use surfscale::catalog;
use surfscale::constants::{mu_universal, HalfSpaceConfig, HalfSpaceScore};
use surfscale::exec::Workers;
use surfscale::harness::{evaluate, run_experiment, ExperimentConfig, Input, Statistic};
use surfscale::rng::SeedRecord;
use surfscale::sampler::sample_poisson;
use surfscale::scores::ScoreOptions;
use surfscale::voronoi::BoundaryMode;

fn modes() -> Vec<(&'static str, Workers)> {
    let mut m = vec![("sequential", Workers::SEQUENTIAL)];
    if surfscale::exec::parallel_enabled() {
        m.push(("parallel", Workers::default()));
    }
    m
}

fn single_sample(c: &mut Criterion) {
    let mut g = c.benchmark_group("evaluate");
    g.sample_size(10);
    for (stat, scene) in [("maximal", "triangle-pareto"), ("volume", "disk:0.25"), ("perimeter", "disk:0.3")] {
        let sc = catalog::scene(scene).unwrap();
        let s = Statistic::parse(stat).unwrap();
        let lambda = 32768.0;
        let pts = sample_poisson(lambda, &sc.density, &SeedRecord::new(1, &[])).unwrap();
        for (name, w) in modes() {
            let opts = ScoreOptions {
                workers: w,
                ..ScoreOptions::default()
            };
            g.bench_with_input(BenchmarkId::new(stat, name), &opts, |b, o| {
                b.iter(|| evaluate(&s, &pts, &sc, lambda, o.clone()).unwrap())
            });
        }
    }
    g.finish();
}

fn replicates(c: &mut Criterion) {
    let mut g = c.benchmark_group("run_experiment");
    g.sample_size(10);
    let cfg = ExperimentConfig {
        scene: "disk:0.25".into(),
        statistic: "volume".into(),
        levels: vec![4096.0, 8192.0],
        replicates: 16,
        seed: 3,
        boundary: BoundaryMode::Clip,
        input: Input::Poisson,
        probes_per_site: None,
        out: None,
    };
    for (name, w) in modes() {
        g.bench_function(name, |b| b.iter(|| run_experiment(&cfg, w).unwrap()));
    }
    g.finish();
}

fn half_space(c: &mut Criterion) {
    let mut g = c.benchmark_group("mu_universal");
    g.sample_size(10);
    let cfg = HalfSpaceConfig {
        replicates: 500,
        ..HalfSpaceConfig::default()
    };
    for (name, w) in modes() {
        g.bench_function(name, |b| b.iter(|| mu_universal(&HalfSpaceScore::Zeta, 2, &cfg, w).unwrap()));
    }
    g.finish();
}

criterion_group!(benches, single_sample, replicates, half_space);
criterion_main!(benches);
