//! Acceptance suite: one block per criterion, each printing a single
//! `criterion N: PASS|FAIL ...` line.
//!
//! Runs as a plain binary (`harness = false`). Positional arguments select
//! criteria (`cargo test --test acceptance -- 2 5`). Red criteria are
//! reported but only fail the process when `ACCEPTANCE_STRICT=1`.

use std::sync::OnceLock;
use std::time::Instant;

use minority_cavity::cavity::fields::{
    preference_moment, reaction_rg, reaction_rx, signal_field_variance, signal_moments, bias_residual, agent_field_variance, solve_site,
};
use minority_cavity::cavity::{
    find_alpha_c, ghat, ghat_prime, near_transition_reactions, solve_self_consistent, sweep_continuation, xhat, CavityModel, CavitySolution,
    EffectiveNoise, Smoother,
};
use minority_cavity::dynamics::{
    cross_agent_decorrelation, record_trajectories, regime_summary, RegimeSummary, Schedule, TrajectoryRecord,
};
use minority_cavity::engine::{run, GameConfig};
use minority_cavity::ensemble::{ensemble_seeds, simulate_ensemble, summarize, Aggregate, Member};
use minority_cavity::market::{NoiseModel, OperatingRange, PriceFunction};
use minority_cavity::measures::{observables, ObservableSet};
use minority_cavity::stats::{ks_distance_lattice, normal_cdf};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: String) -> Verdict {
    Verdict { pass, detail }
}

fn linear_for(n: usize, sigma_eta: f64) -> PriceFunction {
    let h = (n as f64).sqrt() + 8.0 * sigma_eta + 8.0;
    PriceFunction::linear(OperatingRange::new(-h, h).unwrap())
}

fn linear_model() -> CavityModel {
    CavityModel::new(PriceFunction::linear(OperatingRange::new(-50.0, 50.0).unwrap()), NoiseModel::none())
}

/// `g(x) = x + c2 x² + 0.05 x³`.
fn cubic_model(c2: f64, sigma_eta: f64) -> CavityModel {
    let h = 8.0 * (1.0 + sigma_eta * sigma_eta).sqrt();
    let price = PriceFunction::polynomial(vec![1.0, c2, 0.05], OperatingRange::new(-h, h).unwrap()).unwrap();
    CavityModel::new(price, NoiseModel::gaussian(sigma_eta).unwrap())
}

fn game(n: usize, p: usize, t: u64, warmup: u64, noise: f64) -> GameConfig {
    let nm = if noise > 0.0 { NoiseModel::gaussian(noise).unwrap() } else { NoiseModel::none() };
    GameConfig::new(n, p, 2, t, linear_for(n, noise), nm).with_warmup(warmup)
}

const ALPHAS: [f64; 5] = [0.5, 1.0, 2.0, 4.0, 8.0];

/// The twenty-member ensembles at N = 1024, shared by criteria 2 and 5.
fn agreement_runs() -> &'static Vec<(f64, Vec<Member<ObservableSet>>)> {
    static RUNS: OnceLock<Vec<(f64, Vec<Member<ObservableSet>>)>> = OnceLock::new();
    RUNS.get_or_init(|| {
        let n = 1024;
        let seeds = ensemble_seeds(2024, 20);
        ALPHAS
            .iter()
            .map(|&a| {
                let p = (a * n as f64).round() as usize;
                let t = 200 * p as u64;
                let cfg = game(n, p, t, 100 * p as u64, 0.0);
                (a, simulate_ensemble(&cfg, &seeds).unwrap())
            })
            .collect()
    })
}

fn criterion_1() -> Verdict {
    let cp = find_alpha_c(&linear_model()).unwrap();
    let ok = (0.3364..=0.3384).contains(&cp.alpha_c) && (0.6606..=0.6646).contains(&cp.phi);
    verdict(ok, format!("alpha_c = {:.6} (need [0.3364, 0.3384]), phi = {:.6} (need [0.6606, 0.6646])", cp.alpha_c, cp.phi))
}

fn criterion_2() -> Verdict {
    let model = linear_model();
    let mut ok = true;
    let mut parts = Vec::new();
    for (a, members) in agreement_runs() {
        let th = solve_self_consistent(*a, &model).unwrap().sigma;
        let s = summarize(members).sigma;
        let d = (s.mean - th).abs();
        ok &= d <= 0.05;
        parts.push(format!("a={a}: sim {:.4}±{:.4} th {:.4}", s.mean, s.se, th));
    }
    let s16 = solve_self_consistent(16.0, &model).unwrap().sigma;
    ok &= (0.95..=1.0).contains(&s16);
    parts.push(format!("theory a=16: {s16:.4} (need [0.95, 1])"));
    verdict(ok, parts.join("; "))
}

fn criterion_3() -> Verdict {
    let seeds = ensemble_seeds(303, 10);
    let mut ok = true;
    let mut parts = Vec::new();
    for alpha in [1.0, 2.0] {
        let agg: Vec<Aggregate> = [512usize, 2048]
            .iter()
            .map(|&n| {
                let p = (alpha * n as f64) as usize;
                let cfg = game(n, p, 200 * p as u64, 100 * p as u64, 0.0);
                summarize(&simulate_ensemble(&cfg, &seeds).unwrap()).sigma
            })
            .collect();
        let band = 3.0 * (agg[0].se.powi(2) + agg[1].se.powi(2)).sqrt();
        let d = (agg[0].mean - agg[1].mean).abs();
        ok &= d <= band;
        parts.push(format!("a={alpha}: N=512 {:.4}±{:.4}, N=2048 {:.4}±{:.4}, |diff| {d:.4} vs 3se {band:.4}", agg[0].mean, agg[0].se, agg[1].mean, agg[1].se));
    }
    verdict(ok, parts.join("; "))
}

fn criterion_4() -> Verdict {
    let samples = 100_000;
    let wide = {
        let (n, p) = (1024, 512);
        let w = 100 * p as u64;
        observables(&run(&game(n, p, w + samples, w, 0.0).with_seed(41)).unwrap(), 0.0).unwrap().kurtosis_a
    };
    let narrow = {
        let (n, p) = (512, 4);
        let w = 10_000;
        observables(&run(&game(n, p, w + samples, w, 0.0).with_seed(42)).unwrap(), 0.0).unwrap().kurtosis_a
    };
    // same alpha at the larger size, reported alongside
    let large = {
        let (n, p) = (4100, 32);
        let w = 100_000;
        observables(&run(&game(n, p, w + samples, w, 0.0).with_seed(43)).unwrap(), 0.0).unwrap().kurtosis_a
    };
    verdict(
        wide.abs() < 0.2 && narrow > 1.0,
        format!("kappa(a=0.5) = {wide:.4} (need |k| < 0.2), kappa(N=512, P=4) = {narrow:.3} (need > 1); for reference kappa(N=4100, P=32) = {large:.2}"),
    )
}

fn criterion_5() -> Verdict {
    let mut worst: Vec<String> = Vec::new();
    let mut bad = 0;
    let mut total = 0;
    for (a, members) in agreement_runs() {
        let z: Vec<f64> = members.iter().map(|m| m.result.identity_residual / m.result.identity_se).collect();
        let fails = z.iter().filter(|z| z.abs() > 3.0).count();
        let zmax = z.iter().fold(0.0f64, |m, z| m.max(z.abs()));
        let mean_res = members.iter().map(|m| m.result.identity_residual).sum::<f64>() / members.len() as f64;
        bad += fails;
        total += z.len();
        worst.push(format!("a={a}: {fails}/{} over, max|z| {zmax:.2}, mean residual {mean_res:+.5}", z.len()));
    }
    let (n, p) = (1024, 1024);
    let o = observables(&run(&game(n, p, 200 * p as u64, 100 * p as u64, 0.5).with_seed(55)).unwrap(), 0.0).unwrap();
    let z = o.identity_residual / o.identity_se;
    total += 1;
    if z.abs() > 3.0 {
        bad += 1;
    }
    worst.push(format!("a=1 sigma_eta=0.5: z {z:.2}"));
    verdict(bad == 0, format!("{bad}/{total} runs outside 3 se; {}", worst.join("; ")))
}

fn criterion_6() -> Verdict {
    let bc: Vec<f64> = [0.0, 0.02, 0.05, 0.1].iter().map(|&c| solve_self_consistent(1.0, &cubic_model(c, 0.0)).unwrap().b).collect();
    let bn: Vec<f64> = [0.0, 0.25, 0.5, 1.0].iter().map(|&s| solve_self_consistent(1.0, &cubic_model(0.05, s)).unwrap().b).collect();
    let bl: Vec<f64> = [0.0, 0.25, 0.5, 1.0]
        .iter()
        .map(|&s| {
            let m = CavityModel::new(PriceFunction::linear(OperatingRange::new(-50.0, 50.0).unwrap()), NoiseModel::gaussian(s).unwrap());
            solve_self_consistent(1.0, &m).unwrap().b
        })
        .collect();
    let ok = bc.windows(2).all(|w| w[1] < w[0]) && bn.windows(2).all(|w| w[1] <= w[0]) && bl.iter().all(|&b| b == 0.0);
    verdict(ok, format!("b(c2) = {bc:.5?}; b(sigma_eta) = {bn:.5?}; linear b = {bl:?}"))
}

fn timescale_run(n: usize, p: usize) -> (RegimeSummary, TrajectoryRecord) {
    let p64 = p as u64;
    let t = 300 * p64;
    let cfg = GameConfig::new(n, p, 2, t, linear_for(n, 0.0), NoiseModel::none()).with_seed(1).with_warmup(10 * p64);
    let schedule = Schedule::standard(t).with_linear(10 * p64, (p64 / 10).max(1), t);
    let ids: Vec<usize> = (0..200).collect();
    let rec = record_trajectories(&cfg, &ids, &schedule).unwrap();
    (regime_summary(std::slice::from_ref(&rec)).unwrap(), rec)
}

/// Frozen agents with `|x| = 1` exactly, and the latest sample (in units of
/// `P`) at which any frozen agent's score changed sign after `10P`.
fn frozen_detail(rec: &TrajectoryRecord) -> (usize, u64) {
    let p = rec.p as u64;
    let w = rec.window(10 * p + 1, u64::MAX);
    let mut last = 0;
    for a in (0..rec.u.len()).filter(|&a| rec.is_frozen(a)) {
        let row = &rec.u[a];
        for k in w.start + 1..w.end {
            if (row[k] < 0.0) != (row[k - 1] < 0.0) {
                last = last.max(rec.times[k] / p);
            }
        }
    }
    ((0..rec.u.len()).filter(|&a| rec.x_final(a).abs() == 1.0).count(), last)
}

fn criterion_7() -> Verdict {
    let (main, _) = timescale_run(1000, 20_000);
    let (low, low_rec) = timescale_run(1000, 500);
    let slope = main.diffusive.slope;
    let median = main.excursions.median_inside;
    let conv = main.binary.converged_fraction;
    let ex = &low.excursions;
    let (strict, last) = frozen_detail(&low_rec);
    let frozen_ok = main.excursions.frozen_sign_changes == 0 && ex.frozen > 0 && ex.frozen_sign_changes == 0;
    let ok = (0.45..=0.55).contains(&slope) && median > 0.9 && frozen_ok && conv >= 0.9;
    verdict(
        ok,
        format!(
            "exponent {slope:.4}±{:.4}; median inside {median:.3} over {} non-frozen; frozen: {} at a=20, {} at a=0.5 ({strict} with |x| = 1) with {} sign changes after 10P, last at {last}P; converged {conv:.3}",
            main.diffusive.ci, main.excursions.non_frozen, main.excursions.frozen, ex.frozen, ex.frozen_sign_changes
        ),
    )
}

fn criterion_8() -> Verdict {
    let mk = |n: usize| {
        let p = 2 * n;
        GameConfig::new(n, p, 2, 4100 * p as u64, linear_for(n, 0.0), NoiseModel::none()).with_warmup(100 * p as u64)
    };
    let r = cross_agent_decorrelation(&mk(64), &mk(256), &[0, 1], 1000).unwrap();
    verdict(
        (2.0..=8.0).contains(&r.ratio),
        format!(
            "P={}->{}: noise-corrected ratio {:.3} (need [2, 8]); raw mean|cov| ratio {:.3}; corrected rms {:.3e} -> {:.3e}",
            r.small.p, r.large.p, r.ratio, r.raw_ratio, r.small.corrected_rms, r.large.corrected_rms
        ),
    )
}

/// Monte-Carlo estimate of `E f(Z)`, `Z ~ Normal(mean, var)`, with antithetic pairs.
fn mc<F: Fn(f64) -> f64>(rng: &mut ChaCha8Rng, mean: f64, var: f64, samples: usize, f: F) -> f64 {
    let sd = var.sqrt();
    let mut acc = 0.0;
    for _ in 0..samples / 2 {
        let z: f64 = StandardNormal.sample(rng);
        acc += f(mean + sd * z) + f(mean - sd * z);
    }
    acc / (2 * (samples / 2)) as f64
}

fn criterion_9() -> Verdict {
    const SAMPLES: usize = 10_000_000;
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut worst_mc: f64 = 0.0;
    for _ in 0..10 {
        let alpha = rng.random_range(0.4..8.0);
        let q_x = rng.random_range(0.1..0.9);
        let q_g = rng.random_range(0.02..0.5);
        let r_x = rng.random_range(-0.8..-0.05);
        let r_g = rng.random_range(-5.0..-0.2);
        let b = rng.random_range(-0.2..0.2);
        let model = cubic_model(rng.random_range(0.0..0.1), rng.random_range(0.0..1.0));
        let noise = EffectiveNoise::new(&model.noise, q_x);
        let sm = Smoother::new(&model.price, &noise, &model.quadrature);
        let quad = &model.quadrature;
        // agent side
        let vx = agent_field_variance(alpha, q_g);
        let qx_mc = mc(&mut rng, 0.0, vx, SAMPLES, |z| xhat(z, r_x).unwrap().powi(2));
        let inside_mc = mc(&mut rng, 0.0, vx, SAMPLES, |z| if z.abs() < -r_x { 1.0 } else { 0.0 });
        let qx_q = preference_moment(alpha, r_x, q_g).unwrap();
        let (_, phi_q) = reaction_rg(alpha, r_x, q_g).unwrap();
        // signal side
        let vg = signal_field_variance(q_x);
        let (qg_q, qa_q) = signal_moments(r_g, q_x, b, &sm, quad).unwrap();
        let gbar_q = bias_residual(b, r_g, q_x, &sm, quad).unwrap();
        let slope_q = reaction_rx(alpha, r_g, q_x, b, &sm, quad).unwrap() / (-0.5 * alpha);
        let sd = vg.sqrt();
        let mut acc = [0.0; 4];
        let half = SAMPLES / 2;
        for _ in 0..half {
            let z: f64 = StandardNormal.sample(&mut rng);
            for zz in [b + sd * z, b - sd * z] {
                let s = solve_site(zz, r_g, &sm).unwrap();
                acc[0] += s.g;
                acc[1] += s.g * s.g;
                acc[2] += (s.a - b) * (s.a - b);
                acc[3] += s.slope;
            }
        }
        let m: Vec<f64> = acc.iter().map(|v| v / (2 * half) as f64).collect();
        let diffs = [qx_mc - qx_q, (1.0 - inside_mc) - phi_q, m[0] - gbar_q, m[1] - qg_q, m[2] - qa_q, m[3] - slope_q];
        worst_mc = diffs.iter().fold(worst_mc, |w, d| w.max(d.abs()));
    }

    // R_g R_x = (1 − phi)/2 along converged sweeps
    let grid: Vec<f64> = (0..30).map(|k| 0.36 * (20.0f64 / 0.36).powf(k as f64 / 29.0)).collect();
    let mut worst_id: f64 = 0.0;
    let mut solved = 0;
    for model in [linear_model(), cubic_model(0.05, 0.0), cubic_model(0.05, 0.5), cubic_model(0.1, 1.0)] {
        for s in sweep_continuation(&grid, &model).into_iter().flatten() {
            worst_id = worst_id.max((s.r_g * s.r_x - 0.5 * (1.0 - s.phi)).abs());
            solved += 1;
        }
    }

    // ĝ' against central differences
    let mut worst_fd: f64 = 0.0;
    for model in [linear_model(), cubic_model(0.05, 0.3), cubic_model(0.1, 0.0)] {
        let noise = EffectiveNoise::new(&model.noise, 0.5);
        let sm = Smoother::new(&model.price, &noise, &model.quadrature);
        for _ in 0..50 {
            let z = rng.random_range(-2.0..2.0);
            let r_g = rng.random_range(-6.0..0.0);
            let h = 1e-5;
            let fd = (ghat(z + h, r_g, &sm).unwrap() - ghat(z - h, r_g, &sm).unwrap()) / (2.0 * h);
            let an = ghat_prime(z, r_g, &sm).unwrap();
            worst_fd = worst_fd.max((fd - an).abs() / an.abs());
        }
    }

    // near-transition expansions
    let model = linear_model();
    let ac = find_alpha_c(&model).unwrap().alpha_c;
    let mut worst_nt: f64 = 0.0;
    for da in [0.005, 0.01, 0.015, 0.019] {
        let s: CavitySolution = solve_self_consistent(ac + da, &model).unwrap();
        let (rx, rg) = near_transition_reactions(&s, &model);
        worst_nt = worst_nt.max(((rx - s.r_x) / s.r_x).abs()).max(((rg - s.r_g) / s.r_g).abs());
    }

    let ok = worst_mc <= 1e-3 && worst_id <= 1e-8 && solved > 0 && worst_fd <= 1e-6 && worst_nt <= 0.05;
    verdict(
        ok,
        format!(
            "quadrature vs MC max |diff| {worst_mc:.2e} (<= 1e-3); R_g R_x identity {worst_id:.1e} over {solved} solutions (<= 1e-8); ghat' vs FD rel {worst_fd:.1e} (<= 1e-6); near-transition rel {worst_nt:.4} (<= 0.05)"
        ),
    )
}

fn criterion_10() -> Verdict {
    let (n, p) = (1024, 512);
    let w = 100 * p as u64;
    let ts = run(&game(n, p, w + 100_000, w, 0.0).with_seed(10)).unwrap();
    let th = solve_self_consistent(0.5, &linear_model()).unwrap();
    let d: Vec<f64> = ts.window_a().iter().zip(ts.window_eta()).map(|(a, e)| a + e).collect();
    let ks = ks_distance_lattice(&d, 2.0 / (n as f64).sqrt(), |x| normal_cdf(x, th.b, th.sigma));
    verdict(ks < 0.02, format!("KS = {ks:.5} over {} samples against Normal({}, {:.5}^2) (need < 0.02)", d.len(), th.b, th.sigma))
}

fn main() {
    let criteria: [(u32, fn() -> Verdict); 10] = [
        (1, criterion_1),
        (2, criterion_2),
        (3, criterion_3),
        (4, criterion_4),
        (5, criterion_5),
        (6, criterion_6),
        (7, criterion_7),
        (8, criterion_8),
        (9, criterion_9),
        (10, criterion_10),
    ];
    let picked: Vec<u32> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let mut red = Vec::new();
    for (id, f) in criteria {
        if !picked.is_empty() && !picked.contains(&id) {
            continue;
        }
        let t0 = Instant::now();
        let v = f();
        let tag = if v.pass { "PASS" } else { "FAIL" };
        println!("criterion {id}: {tag} [{:.1}s] {}", t0.elapsed().as_secs_f64(), v.detail);
        if !v.pass {
            red.push(id);
        }
    }
    if red.is_empty() {
        println!("acceptance: all selected criteria pass");
    } else {
        println!("acceptance: red criteria {red:?}");
        if std::env::var("ACCEPTANCE_STRICT").is_ok_and(|v| v == "1") {
            std::process::exit(1);
        }
    }
}
