use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use num_complex::Complex64;
use pdhmc::oracle::{conjugate_posterior_draws, simulate_gaussian_stat};
use pdhmc::random::random_pd;
use pdhmc::{run_chains, stream_rng, Execution, PdMatrix, PosteriorModel, PriorSpec, SamplerConfig};

fn modes() -> [(&'static str, Execution); 2] {
    [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)]
}

fn chains(c: &mut Criterion) {
    let mut rng = stream_rng(1, 0);
    let truth = random_pd::<Complex64, _>(4, &mut rng);
    let stat = simulate_gaussian_stat(&truth, 80, &mut rng).unwrap();
    let prior = PriorSpec::inverse_wishart(PdMatrix::identity(4), 6.0).unwrap();
    let model = PosteriorModel::new(stat, prior).unwrap();
    let config = SamplerConfig { iterations: 300, warmup: 100, step_jitter: 0.5, ..SamplerConfig::default_for(4) };

    let mut group = c.benchmark_group("run_chains_4x300");
    group.sample_size(10);
    for (name, exec) in modes() {
        group.bench_function(name, |b| b.iter(|| black_box(run_chains(&model, &config, 4, exec).unwrap())));
    }
    group.finish();
}

fn exact_draws(c: &mut Criterion) {
    let mut rng = stream_rng(2, 0);
    let truth = random_pd::<f64, _>(5, &mut rng);
    let stat = simulate_gaussian_stat(&truth, 50, &mut rng).unwrap();
    let prior = PriorSpec::inverse_wishart(PdMatrix::identity(5), 7.0).unwrap();

    let mut group = c.benchmark_group("conjugate_draws_5000");
    group.sample_size(20);
    for (name, exec) in modes() {
        group.bench_function(name, |b| {
            b.iter(|| black_box(conjugate_posterior_draws(&prior, &stat, 5000, 3, exec).unwrap()))
        });
    }
    group.finish();
}

criterion_group!(benches, chains, exact_draws);
criterion_main!(benches);
