//! Independent re-derivations of what the library computes, written the
//! slow and obvious way.

use minority_cavity::cavity::fields::{agent_field_variance, preference_moment, reaction_rg, signal_field_variance, signal_moments, solve_site};
use minority_cavity::cavity::{xhat, CavityModel, EffectiveNoise, Smoother};
use minority_cavity::engine::{draw_strategies, init_scores, run, GameConfig};
use minority_cavity::market::{NoiseModel, OperatingRange, PriceFunction};
use minority_cavity::measures::observables;
use minority_cavity::rng::{stream, Stream};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

/// Plays the game with explicit per-strategy scores, agent by agent,
/// on the signal and noise sequence the engine recorded.
fn reference_demand(cfg: &GameConfig, mu: &[u32], eta: &[f64]) -> Vec<f64> {
    let table = draw_strategies(cfg, &mut stream(cfg.seed, Stream::Strategies));
    let state = init_scores(cfg, &mut stream(cfg.seed, Stream::InitScores));
    let mut u: Vec<Vec<f64>> = (0..cfg.n).map(|i| (0..cfg.s).map(|s| state.score(i, s)).collect()).collect();
    let root = (cfg.n as f64).sqrt();
    let mut out = Vec::new();
    for (&m, &e) in mu.iter().zip(eta) {
        let m = m as usize;
        let mut sum = 0i64;
        for (i, ui) in u.iter().enumerate() {
            // first maximum wins
            let mut best = 0;
            for s in 1..cfg.s {
                if ui[s] > ui[best] {
                    best = s;
                }
            }
            sum += table.entry(i, best, m) as i64;
        }
        let a = sum as f64 / root;
        let g = cfg.price.eval(a + e).unwrap();
        for (i, ui) in u.iter_mut().enumerate() {
            for (s, us) in ui.iter_mut().enumerate() {
                *us -= table.entry(i, s, m) as f64 * g;
            }
        }
        out.push(a);
    }
    out
}

#[test]
fn engine_matches_reference_game() {
    let range = OperatingRange::new(-30.0, 30.0).unwrap();
    let cubic = PriceFunction::polynomial(vec![1.0, 0.05, 0.05], range).unwrap();
    for (s, price, noise) in [
        (2, PriceFunction::linear(range), NoiseModel::none()),
        (3, PriceFunction::linear(range), NoiseModel::gaussian(0.5).unwrap()),
        (2, cubic, NoiseModel::gaussian(0.3).unwrap()),
    ] {
        let cfg = GameConfig::new(41, 13, s, 3000, price, noise).with_seed(17).with_warmup(500);
        let ts = run(&cfg).unwrap();
        let reference = reference_demand(&cfg, &ts.mu, &ts.eta);
        let mismatches = ts.a.iter().zip(&reference).filter(|(x, y)| (*x - *y).abs() > 1e-9).count();
        assert_eq!(mismatches, 0, "S = {s}");
    }
}

#[test]
fn observables_match_direct_averages() {
    let range = OperatingRange::new(-30.0, 30.0).unwrap();
    let cfg = GameConfig::new(51, 25, 2, 25 * 300, PriceFunction::linear(range), NoiseModel::none()).with_seed(3).with_warmup(25 * 100);
    let ts = run(&cfg).unwrap();
    let o = observables(&ts, 0.0).unwrap();
    let w = ts.window_a();
    let s2 = w.iter().map(|a| a * a).sum::<f64>() / w.len() as f64;
    assert!((o.sigma - s2.sqrt()).abs() < 1e-12);
    let gbar = ts.window_g().iter().sum::<f64>() / w.len() as f64;
    assert!((o.gbar - gbar).abs() < 1e-12);
    // per-signal means straight from the series
    let mut sum = vec![0.0; cfg.p];
    let mut count = vec![0usize; cfg.p];
    for (k, &a) in w.iter().enumerate() {
        let m = ts.mu[cfg.warmup as usize + k] as usize;
        sum[m] += a;
        count[m] += 1;
    }
    for m in 0..cfg.p {
        assert!((o.a_mu[m] - sum[m] / count[m] as f64).abs() < 1e-12);
    }
    assert!(o.phi >= 0.0 && o.phi <= 1.0);
}

fn mc(rng: &mut ChaCha8Rng, mean: f64, var: f64, n: usize, f: impl Fn(f64) -> f64) -> f64 {
    let sd = var.sqrt();
    (0..n / 2)
        .map(|_| {
            let z: f64 = StandardNormal.sample(rng);
            f(mean + sd * z) + f(mean - sd * z)
        })
        .sum::<f64>()
        / (2 * (n / 2)) as f64
}

#[test]
fn quadrature_agrees_with_monte_carlo() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let price = PriceFunction::polynomial(vec![1.0, 0.08, 0.05], OperatingRange::new(-9.0, 9.0).unwrap()).unwrap();
    let model = CavityModel::new(price, NoiseModel::gaussian(0.4).unwrap());
    let (alpha, q_x, q_g, r_x, r_g, b) = (1.3, 0.55, 0.2, -0.3, -1.7, -0.05);
    let noise = EffectiveNoise::new(&model.noise, q_x);
    let sm = Smoother::new(&model.price, &noise, &model.quadrature);
    let n = 400_000;

    let vx = agent_field_variance(alpha, q_g);
    let q_mc = mc(&mut rng, 0.0, vx, n, |z| xhat(z, r_x).unwrap().powi(2));
    assert!((q_mc - preference_moment(alpha, r_x, q_g).unwrap()).abs() < 3e-3);
    let frozen_mc = 1.0 - mc(&mut rng, 0.0, vx, n, |z| (z.abs() < -r_x) as u8 as f64);
    assert!((frozen_mc - reaction_rg(alpha, r_x, q_g).unwrap().1).abs() < 3e-3);

    let (q_g_quad, q_a_quad) = signal_moments(r_g, q_x, b, &sm, &model.quadrature).unwrap();
    let vg = signal_field_variance(q_x);
    let q_g_mc = mc(&mut rng, b, vg, n, |z| solve_site(z, r_g, &sm).unwrap().g.powi(2));
    let q_a_mc = mc(&mut rng, b, vg, n, |z| (solve_site(z, r_g, &sm).unwrap().a - b).powi(2));
    assert!((q_g_mc - q_g_quad).abs() < 2e-3, "{q_g_mc} {q_g_quad}");
    assert!((q_a_mc - q_a_quad).abs() < 2e-3, "{q_a_mc} {q_a_quad}");
}
