//! Independent runs over a list of seeds, in parallel (feature `parallel`)
//! or sequentially, with results always ordered by seed.

use serde::{Deserialize, Serialize};

use crate::engine::{run, GameConfig};
use crate::error::{EngineError, MeasureError};
use crate::measures::{observables, ObservableSet};
use crate::rng::member_seed;

/// Seeds of an ensemble of `size` members keyed by `master`.
pub fn ensemble_seeds(master: u64, size: usize) -> Vec<u64> {
    (0..size as u64).map(|k| member_seed(master, k)).collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Member<T> {
    pub seed: u64,
    pub result: T,
}

/// The member that failed first in seed order.
#[derive(Clone, Debug, PartialEq, thiserror::Error)]
#[error("run with seed {seed} failed: {error}")]
pub struct MemberError<E: std::fmt::Display> {
    pub seed: u64,
    pub error: E,
}

fn collect<T, E: std::fmt::Display>(mut out: Vec<(u64, Result<T, E>)>) -> Result<Vec<Member<T>>, MemberError<E>> {
    out.sort_by_key(|(s, _)| *s);
    out.into_iter().map(|(seed, r)| r.map(|result| Member { seed, result }).map_err(|error| MemberError { seed, error })).collect()
}

/// Runs `job` once per seed on the calling thread.
pub fn run_sequential<T, E, F>(seeds: &[u64], job: F) -> Result<Vec<Member<T>>, MemberError<E>>
where
    E: std::fmt::Display,
    F: Fn(u64) -> Result<T, E>,
{
    collect(seeds.iter().map(|&s| (s, job(s))).collect())
}

/// Runs `job` once per seed on the current rayon pool.
#[cfg(feature = "parallel")]
pub fn run_parallel<T, E, F>(seeds: &[u64], job: F) -> Result<Vec<Member<T>>, MemberError<E>>
where
    T: Send,
    E: Send + std::fmt::Display,
    F: Fn(u64) -> Result<T, E> + Sync,
{
    use rayon::prelude::*;
    collect(seeds.par_iter().map(|&s| (s, job(s))).collect())
}

/// [`run_parallel`] when built with `parallel`, else [`run_sequential`].
pub fn run_members<T, E, F>(seeds: &[u64], job: F) -> Result<Vec<Member<T>>, MemberError<E>>
where
    T: Send,
    E: Send + std::fmt::Display,
    F: Fn(u64) -> Result<T, E> + Sync,
{
    #[cfg(feature = "parallel")]
    {
        run_parallel(seeds, job)
    }
    #[cfg(not(feature = "parallel"))]
    {
        run_sequential(seeds, job)
    }
}

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum SimulationError {
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error(transparent)]
    Measure(#[from] MeasureError),
}

/// One game per seed, measured against the configured bias.
pub fn simulate_ensemble(cfg: &GameConfig, seeds: &[u64]) -> Result<Vec<Member<ObservableSet>>, MemberError<SimulationError>> {
    run_members(seeds, |seed| {
        let c = GameConfig { seed, ..cfg.clone() };
        let ts = run(&c)?;
        Ok(observables(&ts, c.b)?)
    })
}

/// Mean over members with the standard error of that mean.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub mean: f64,
    pub se: f64,
    pub sd: f64,
    pub members: usize,
}

impl Aggregate {
    pub fn of(values: &[f64]) -> Self {
        let n = values.len();
        let mean = values.iter().sum::<f64>() / n as f64;
        let sd = if n > 1 { (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt() } else { 0.0 };
        Self { mean, se: sd / (n as f64).sqrt(), sd, members: n }
    }
}

/// Ensemble averages of the scalar observables.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnsembleSummary {
    pub seeds: Vec<u64>,
    pub sigma: Aggregate,
    pub sigma2: Aggregate,
    pub q_x: Aggregate,
    #[serde(rename = "q_A")]
    pub q_a: Aggregate,
    pub q_g: Aggregate,
    pub phi: Aggregate,
    pub gbar: Aggregate,
    pub kurtosis_a: Aggregate,
}

pub fn summarize(members: &[Member<ObservableSet>]) -> EnsembleSummary {
    let pick = |f: fn(&ObservableSet) -> f64| Aggregate::of(&members.iter().map(|m| f(&m.result)).collect::<Vec<_>>());
    EnsembleSummary {
        seeds: members.iter().map(|m| m.seed).collect(),
        sigma: pick(|o| o.sigma),
        sigma2: pick(|o| o.sigma * o.sigma),
        q_x: pick(|o| o.q_x),
        q_a: pick(|o| o.q_a),
        q_g: pick(|o| o.q_g),
        phi: pick(|o| o.phi),
        gbar: pick(|o| o.gbar),
        kurtosis_a: pick(|o| o.kurtosis_a),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::market::{NoiseModel, OperatingRange, PriceFunction};

    fn cfg() -> GameConfig {
        GameConfig::new(33, 16, 2, 16 * 300, PriceFunction::linear(OperatingRange::new(-50.0, 50.0).unwrap()), NoiseModel::none()).with_warmup(1600)
    }

    #[test]
    fn results_sorted_by_seed_and_mode_independent() {
        let seeds = vec![9, 3, 7, 1];
        let a = run_sequential(&seeds, |s| Ok::<_, String>(s * 2)).unwrap();
        let b = run_members(&seeds, |s| Ok::<_, String>(s * 2)).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.iter().map(|m| m.seed).collect::<Vec<_>>(), vec![1, 3, 7, 9]);
    }

    #[test]
    fn first_failure_in_seed_order_is_reported() {
        let r = run_members(&[5, 2, 8], |s| if s > 1 { Err(format!("bad {s}")) } else { Ok(s) });
        assert_eq!(r.unwrap_err(), MemberError { seed: 2, error: "bad 2".to_string() });
    }

    #[test]
    fn simulation_ensemble_is_deterministic() {
        let seeds = ensemble_seeds(1, 3);
        let a = simulate_ensemble(&cfg(), &seeds).unwrap();
        let b = run_sequential(&seeds, |seed| {
            let c = GameConfig { seed, ..cfg() };
            Ok::<_, SimulationError>(observables(&run(&c)?, 0.0)?)
        })
        .unwrap();
        assert_eq!(a, b);
        let s = summarize(&a);
        assert_eq!(s.sigma.members, 3);
        assert!(s.sigma.se > 0.0);
    }

    #[test]
    fn aggregate_of_constant() {
        let a = Aggregate::of(&[2.0, 2.0, 2.0]);
        assert_eq!((a.mean, a.se, a.members), (2.0, 0.0, 3));
    }
}
