//! The six commands. Each takes a validated config and writes its outputs
//! through a [`Sink`].

use std::fmt::Write as _;

use minority_cavity::cavity::{
    find_alpha_c, predict_a_distribution, solve_from, solver::sweep_row, solver::SWEEP_HEADER, CavityModel, CavitySolution, SolverOptions,
    Start,
};
use minority_cavity::dynamics::{cross_agent_decorrelation, record_trajectories, regime_summary, RegimeSummary, Schedule, TrajectoryRecord};
use minority_cavity::engine::{run, GameConfig};
use minority_cavity::ensemble::{ensemble_seeds, run_members, summarize, Aggregate, Member, MemberError, SimulationError};
use minority_cavity::market::{NoiseModel, PriceFunction};
use minority_cavity::measures::{observables, write_demand_histogram, ObservableSet};
use minority_cavity::stats::{ks_distance, ks_distance_lattice, normal_cdf};
use minority_cavity::CavityError;
use serde::Serialize;

use crate::config::{Mode, RunConfig, SweepParameter};
use crate::error::CliError;
use crate::output::Sink;

pub fn seeds_for(mode: Mode, cfg: &RunConfig) -> Vec<u64> {
    match mode {
        Mode::Simulate | Mode::Dynamics | Mode::Compare => {
            let mut s = ensemble_seeds(cfg.ensemble.seed, cfg.ensemble.size);
            s.sort_unstable();
            s
        }
        Mode::Solve | Mode::Sweep | Mode::AlphaC => Vec::new(),
    }
}

fn member_error<E: std::fmt::Display>(e: MemberError<E>) -> CliError {
    CliError::Run(e.to_string())
}

struct SimOutput {
    obs: ObservableSet,
    histogram: String,
    series: Option<String>,
}

pub fn simulate(cfg: &RunConfig, sink: &mut Sink) -> Result<(), CliError> {
    let seeds = sink.prov.seeds.clone();
    if let Some(sw) = &cfg.sweep {
        return simulate_sweep(cfg, &sw.grid()?, &seeds, sink);
    }
    let game = cfg.game(None)?.cfg;
    let bins = cfg.simulate.histogram_bins;
    let keep = cfg.simulate.write_series;
    let members = run_members(&seeds, |seed| -> Result<SimOutput, SimulationError> {
        let c = GameConfig { seed, ..game.clone() };
        let ts = run(&c)?;
        let obs = observables(&ts, c.b)?;
        let mut h = Vec::new();
        write_demand_histogram(&ts, bins, &mut h).expect("in-memory write");
        let series = keep.then(|| {
            let mut s = Vec::new();
            ts.write_csv(&mut s).expect("in-memory write");
            String::from_utf8(s).expect("ascii csv")
        });
        Ok(SimOutput { obs, histogram: String::from_utf8(h).expect("ascii csv"), series })
    })
    .map_err(member_error)?;
    for m in &members {
        sink.json(&format!("observables_seed{}.json", m.seed), &m.result.obs)?;
        sink.csv(&format!("histogram_seed{}.csv", m.seed), &m.result.histogram)?;
        if let Some(s) = &m.result.series {
            sink.csv(&format!("series_seed{}.csv", m.seed), s)?;
        }
    }
    let obs: Vec<Member<ObservableSet>> = members.into_iter().map(|m| Member { seed: m.seed, result: m.result.obs }).collect();
    #[derive(Serialize)]
    struct Ensemble {
        n: usize,
        p: usize,
        alpha: f64,
        t: u64,
        warmup: u64,
        b: f64,
        summary: minority_cavity::ensemble::EnsembleSummary,
    }
    sink.json(
        "ensemble.json",
        &Ensemble { n: game.n, p: game.p, alpha: game.alpha(), t: game.t, warmup: game.warmup, b: game.b, summary: summarize(&obs) },
    )?;
    Ok(())
}

fn simulate_sweep(cfg: &RunConfig, alphas: &[f64], seeds: &[u64], sink: &mut Sink) -> Result<(), CliError> {
    let games: Vec<GameConfig> = alphas.iter().map(|&a| cfg.game(Some(a)).map(|g| g.cfg)).collect::<Result<_, _>>()?;
    let mut body = String::from("alpha,N,P,members,sigma,sigma_se,q_x,q_x_se,q_A,q_A_se,phi,phi_se,gbar,gbar_se\n");
    for g in &games {
        let members = run_members(seeds, |seed| -> Result<ObservableSet, SimulationError> {
            let c = GameConfig { seed, ..g.clone() };
            Ok(observables(&run(&c)?, c.b)?)
        })
        .map_err(member_error)?;
        let s = summarize(&members);
        let f = |a: &Aggregate| format!("{},{}", a.mean, a.se);
        writeln!(body, "{},{},{},{},{},{},{},{},{}", g.alpha(), g.n, g.p, members.len(), f(&s.sigma), f(&s.q_x), f(&s.q_a), f(&s.phi), f(&s.gbar))
            .unwrap();
    }
    sink.csv("simulate_sweep.csv", &body)
}

fn solve_one(alpha: f64, model: &CavityModel, opts: &SolverOptions, warm: Option<&CavitySolution>) -> Result<CavitySolution, CavityError> {
    let start = warm.map(Start::from_solution).unwrap_or_else(|| Start::default_for(model));
    solve_from(alpha, model, start, opts).or_else(|e| match warm {
        Some(_) => solve_from(alpha, model, Start::default_for(model), opts),
        None => Err(e),
    })
}

#[derive(Serialize)]
struct SolveReport {
    solution: CavitySolution,
    predicted_a_mean: f64,
    predicted_a_sd: f64,
    identity_rg_rx: f64,
}

fn solve_report(sol: CavitySolution) -> SolveReport {
    let d = predict_a_distribution(&sol);
    SolveReport { predicted_a_mean: d.mean, predicted_a_sd: d.sd, identity_rg_rx: sol.r_g * sol.r_x - 0.5 * (1.0 - sol.phi), solution: sol }
}

pub fn solve(cfg: &RunConfig, sink: &mut Sink) -> Result<(), CliError> {
    let model = cfg.cavity_model()?;
    let sol = solve_one(cfg.theory_alpha()?, &model, &cfg.solver_options()?, None)?;
    sink.json("solution.json", &solve_report(sol))
}

pub fn sweep(cfg: &RunConfig, sink: &mut Sink) -> Result<(), CliError> {
    let sw = cfg.sweep.as_ref().expect("validated");
    let grid = sw.grid()?;
    let opts = cfg.solver_options()?;
    let base = cfg.cavity_model()?;
    let mut warm: Option<CavitySolution> = None;
    let mut body = String::new();
    match sw.parameter {
        SweepParameter::Alpha => body.push_str(SWEEP_HEADER),
        SweepParameter::C2 => body.push_str(&format!("c2,{SWEEP_HEADER}")),
        SweepParameter::NoiseSigma => body.push_str(&format!("noise_sigma,{SWEEP_HEADER}")),
    }
    body.push('\n');
    for &v in &grid {
        let (alpha, model) = match sw.parameter {
            SweepParameter::Alpha => (v, base.clone()),
            SweepParameter::C2 => {
                let mut c = base.price.polynomial_coeffs().expect("validated polynomial").to_vec();
                c[1] = v;
                let price = PriceFunction::polynomial(c, base.price.range()).map_err(|e| CliError::validation("sweep.values", e.to_string()))?;
                (cfg.theory_alpha()?, CavityModel { price, ..base.clone() })
            }
            SweepParameter::NoiseSigma => {
                let noise = NoiseModel::gaussian(v).map_err(|e| CliError::validation("sweep.values", e.to_string()))?;
                (cfg.theory_alpha()?, CavityModel { noise, ..base.clone() })
            }
        };
        let res = solve_one(alpha, &model, &opts, if sw.continuation { warm.as_ref() } else { None });
        if let Ok(s) = &res {
            warm = Some(*s);
        }
        if sw.parameter != SweepParameter::Alpha {
            write!(body, "{v},").unwrap();
        }
        body.push_str(&sweep_row(alpha, &res));
        body.push('\n');
    }
    sink.csv("sweep.csv", &body)
}

pub fn alpha_c(cfg: &RunConfig, sink: &mut Sink) -> Result<(), CliError> {
    let cp = find_alpha_c(&cfg.cavity_model()?)?;
    sink.json("alpha_c.json", &cp)
}

#[derive(Serialize)]
struct RegimeRow {
    timescale: &'static str,
    behaviour: &'static str,
    statistic: &'static str,
    value: f64,
}

#[derive(Serialize)]
struct DynamicsReport {
    rows: Vec<RegimeRow>,
    summary: RegimeSummary,
}

pub fn dynamics(cfg: &RunConfig, sink: &mut Sink) -> Result<(), CliError> {
    let game = cfg.game(None)?.cfg;
    let d = cfg.dynamics.as_ref().expect("validated");
    let p = game.p as u64;
    let stride = ((d.stride_per_p * p as f64).round() as u64).max(1);
    let schedule = Schedule::standard(game.t).with_linear(10 * p, stride, game.t);
    let ids: Vec<usize> = (0..d.agents).collect();
    let seeds = sink.prov.seeds.clone();
    let recs: Vec<Member<TrajectoryRecord>> =
        run_members(&seeds, |seed| record_trajectories(&GameConfig { seed, ..game.clone() }, &ids, &schedule)).map_err(member_error)?;
    for m in &recs {
        sink.binary(&format!("trajectories_seed{}.bin", m.seed), &m.result.to_binary())?;
        let mut sub = m.result.clone();
        let k = d.csv_agents.min(sub.agent_ids.len());
        sub.agent_ids.truncate(k);
        sub.u.truncate(k);
        sub.u_tau.truncate(k);
        sub.x_running.truncate(k);
        let mut buf = Vec::new();
        sub.write_csv(&mut buf)?;
        sink.csv(&format!("trajectories_seed{}.csv", m.seed), &String::from_utf8(buf).expect("ascii csv"))?;
    }
    let records: Vec<TrajectoryRecord> = recs.into_iter().map(|m| m.result).collect();
    let summary = regime_summary(&records).map_err(|e| CliError::Run(e.to_string()))?;
    let rows = vec![
        RegimeRow { timescale: "t << P", behaviour: "random walk", statistic: "rms_exponent", value: summary.diffusive.slope },
        RegimeRow { timescale: "t ~ P", behaviour: "bounded excursions", statistic: "median_fraction_inside_sqrt_t", value: summary.excursions.median_inside },
        RegimeRow { timescale: "t >> P", behaviour: "binary noise", statistic: "converged_fraction", value: summary.binary.converged_fraction },
    ];
    sink.json("regimes.json", &DynamicsReport { rows, summary })?;
    if let Some(dc) = &d.decorrelation {
        let alpha = game.alpha();
        let mk = |n: usize| -> Result<GameConfig, CliError> {
            let p = ((alpha * n as f64).round() as usize).max(1);
            let c = GameConfig {
                n,
                p,
                t: (dc.t_per_p * p as f64).round() as u64,
                warmup: (dc.warmup_per_p * p as f64).round() as u64,
                price: cfg.price_function(Some(n))?,
                ..game.clone()
            };
            c.validate().map_err(|e| CliError::validation("dynamics.decorrelation", e.to_string()))?;
            Ok(c)
        };
        let rep = cross_agent_decorrelation(&mk(dc.n_small)?, &mk(4 * dc.n_small)?, &seeds, dc.pairs).map_err(|e| CliError::Run(e.to_string()))?;
        sink.json("decorrelation.json", &rep)?;
    }
    Ok(())
}

#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub name: &'static str,
    pub simulated: f64,
    pub simulated_se: f64,
    pub theory: f64,
    pub tolerance: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct CompareReport {
    pub alpha: f64,
    pub n: usize,
    pub p: usize,
    pub b_theory: f64,
    pub b_used: f64,
    pub checks: Vec<Check>,
    /// `sign(ḡ)` agrees with `sign(b_used − b_theory)` (a too-large bias
    /// leaves the price high on average, since g is increasing).
    pub gbar_sign_matches_bias_error: Option<bool>,
    pub solution: CavitySolution,
    pub pass: bool,
}

pub fn compare(cfg: &RunConfig, sink: &mut Sink) -> Result<(), CliError> {
    let base = cfg.game(None)?.cfg;
    let model = CavityModel::new(base.price.clone(), base.noise.clone());
    let model = match cfg.solver.quadrature_order {
        Some(q) => model.with_order(q),
        None => model,
    };
    let sol = solve_one(base.alpha(), &model, &cfg.solver_options()?, None)?;
    let b_used = cfg.compare.bias_override.unwrap_or(sol.b);
    let game = GameConfig { b: b_used, ..base };
    game.validate().map_err(|e| CliError::validation("compare.bias_override", e.to_string()))?;
    let lattice = matches!(game.noise.kind(), minority_cavity::market::NoiseKind::None);
    let h = 2.0 / (game.n as f64).sqrt();
    let seeds = sink.prov.seeds.clone();
    let (pb, psd) = (sol.b, sol.sigma);
    let members = run_members(&seeds, |seed| -> Result<(ObservableSet, f64), SimulationError> {
        let c = GameConfig { seed, ..game.clone() };
        let ts = run(&c)?;
        let obs = observables(&ts, b_used)?;
        let d: Vec<f64> = ts.window_a().iter().zip(ts.window_eta()).map(|(a, e)| a + e).collect();
        let cdf = |x: f64| normal_cdf(x, pb, psd);
        let ks = if lattice { ks_distance_lattice(&d, h, cdf) } else { ks_distance(&d, cdf) };
        Ok((obs, ks))
    })
    .map_err(member_error)?;
    let agg = |f: &dyn Fn(&(ObservableSet, f64)) -> f64| Aggregate::of(&members.iter().map(|m| f(&m.result)).collect::<Vec<_>>());
    let tol = &cfg.compare;
    let mut checks = Vec::new();
    let mut push = |name, a: Aggregate, theory: f64, tolerance: f64| {
        checks.push(Check { name, simulated: a.mean, simulated_se: a.se, theory, tolerance, pass: (a.mean - theory).abs() <= tolerance })
    };
    push("sigma", agg(&|m| m.0.sigma), sol.sigma, tol.sigma);
    push("q_x", agg(&|m| m.0.q_x), sol.q_x, tol.q_x);
    push("q_A", agg(&|m| m.0.q_a), sol.q_a, tol.q_a);
    push("phi", agg(&|m| m.0.phi), sol.phi, tol.phi);
    let ks = agg(&|m| m.1);
    checks.push(Check { name: "ks", simulated: ks.mean, simulated_se: ks.se, theory: 0.0, tolerance: tol.ks, pass: ks.mean < tol.ks });
    // single runs fall back on the within-run batch error
    let g = agg(&|m| m.0.gbar);
    let gse = if members.len() > 1 { g.se } else { members[0].result.0.gbar_se };
    checks.push(Check {
        name: "gbar",
        simulated: g.mean,
        simulated_se: gse,
        theory: 0.0,
        tolerance: tol.gbar_sigmas * gse,
        pass: g.mean.abs() <= tol.gbar_sigmas * gse,
    });
    let db = b_used - sol.b;
    let sign = (db != 0.0).then(|| g.mean.signum() == db.signum());
    let pass = checks.iter().all(|c| c.pass);
    let report = CompareReport { alpha: game.alpha(), n: game.n, p: game.p, b_theory: sol.b, b_used, checks, gbar_sign_matches_bias_error: sign, solution: sol, pass };
    sink.json("compare.json", &report)?;
    if !pass {
        let failed: Vec<&str> = report.checks.iter().filter(|c| !c.pass).map(|c| c.name).collect();
        return Err(CliError::Reconciliation(format!("checks failed: {}", failed.join(", "))));
    }
    Ok(())
}
