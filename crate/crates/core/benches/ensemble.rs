use criterion::{criterion_group, criterion_main, Criterion};
use minority_cavity::engine::{run, GameConfig};
use minority_cavity::ensemble::{ensemble_seeds, run_sequential};
use minority_cavity::market::{NoiseModel, OperatingRange, PriceFunction};
use minority_cavity::measures::observables;
use std::hint::black_box;

fn cfg() -> GameConfig {
    let price = PriceFunction::linear(OperatingRange::new(-50.0, 50.0).unwrap());
    GameConfig::new(256, 256, 2, 256 * 100, price, NoiseModel::none()).with_warmup(256 * 20)
}

fn job(seed: u64) -> Result<f64, String> {
    let c = GameConfig { seed, ..cfg() };
    let ts = run(&c).map_err(|e| e.to_string())?;
    Ok(observables(&ts, 0.0).map_err(|e| e.to_string())?.sigma)
}

fn ensembles(c: &mut Criterion) {
    let seeds = ensemble_seeds(7, 8);
    let mut g = c.benchmark_group("ensemble_8_runs");
    g.sample_size(10);
    g.bench_function("sequential", |b| b.iter(|| run_sequential(black_box(&seeds), job).unwrap()));
    #[cfg(feature = "parallel")]
    g.bench_function("parallel", |b| b.iter(|| minority_cavity::ensemble::run_parallel(black_box(&seeds), job).unwrap()));
    g.finish();
}

criterion_group!(benches, ensembles);
criterion_main!(benches);
