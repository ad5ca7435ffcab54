//! Agent-based minority game: quenched strategy tables, hindsight scoring,
//! market clearing through the price function, and full runs.

use rand::seq::index::sample as sample_indices;
use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::EngineError;
use crate::market::{NoiseModel, PriceFunction};
use crate::rng::{stream, Stream};

/// Standard deviation of the initial score jitter.
pub const INIT_SCORE_SD: f64 = 1e-10;

/// Parameters of one game run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GameConfig {
    /// Number of agents.
    pub n: usize,
    /// Number of information items (signals).
    pub p: usize,
    /// Strategies per agent.
    pub s: usize,
    /// Bias of the strategy draw: `P(+1) = ½ + ½ b/√N`.
    pub b: f64,
    pub price: PriceFunction,
    pub noise: NoiseModel,
    /// Total number of steps.
    pub t: u64,
    pub seed: u64,
    /// Steps excluded from stationary averages.
    pub warmup: u64,
}

impl GameConfig {
    /// Config with `b = 0`, seed 0 and the default warmup.
    pub fn new(n: usize, p: usize, s: usize, t: u64, price: PriceFunction, noise: NoiseModel) -> Self {
        Self { n, p, s, b: 0.0, price, noise, t, seed: 0, warmup: Self::default_warmup(p) }
    }

    /// `max(100·P, 10⁴)`.
    pub fn default_warmup(p: usize) -> u64 {
        (100 * p as u64).max(10_000)
    }

    pub fn with_bias(mut self, b: f64) -> Self {
        self.b = b;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_warmup(mut self, warmup: u64) -> Self {
        self.warmup = warmup;
        self
    }

    pub fn alpha(&self) -> f64 {
        self.p as f64 / self.n as f64
    }

    pub fn validate(&self) -> Result<(), EngineError> {
        let bad = |m: String| Err(EngineError::InvalidConfig(m));
        if self.n < 1 {
            return bad("N must be >= 1".into());
        }
        if self.p < 1 || self.p > u32::MAX as usize {
            return bad(format!("P must be in [1, 2^32), got {}", self.p));
        }
        if self.s < 2 {
            return bad(format!("S must be >= 2, got {}", self.s));
        }
        if self.t <= self.warmup {
            return bad(format!("T = {} must exceed warmup = {}", self.t, self.warmup));
        }
        if !self.b.is_finite() || self.b.abs() / (self.n as f64).sqrt() >= 1.0 {
            return bad(format!("|b|/sqrt(N) must be < 1, got b = {}", self.b));
        }
        Ok(())
    }

    /// Probability that a strategy entry is `+1`.
    pub fn plus_probability(&self) -> f64 {
        0.5 + 0.5 * self.b / (self.n as f64).sqrt()
    }
}

/// Quenched strategy entries `s_i(μ) ∈ {−1, +1}`.
///
/// Entries are stored signal-major (`[μ][i·S + s]`) so one step reads a
/// single contiguous column of `N·S` values.
#[derive(Clone, Debug, PartialEq)]
pub struct StrategyTable {
    n: usize,
    p: usize,
    s: usize,
    columns: Vec<i8>,
    omega: Vec<i8>,
    xi: Vec<i8>,
}

impl StrategyTable {
    /// Builds a table from entries given as `entry(i, s, μ)`.
    pub fn from_fn(n: usize, p: usize, s: usize, mut entry: impl FnMut(usize, usize, usize) -> i8) -> Self {
        let mut columns = vec![0i8; n * s * p];
        for i in 0..n {
            for k in 0..s {
                for mu in 0..p {
                    let e = entry(i, k, mu);
                    assert!(e == 1 || e == -1, "strategy entries must be +-1");
                    columns[mu * n * s + i * s + k] = e;
                }
            }
        }
        let (omega, xi) = if s == 2 {
            let mut omega = vec![0i8; n * p];
            let mut xi = vec![0i8; n * p];
            for i in 0..n {
                for mu in 0..p {
                    let up = columns[mu * n * 2 + 2 * i];
                    let down = columns[mu * n * 2 + 2 * i + 1];
                    omega[i * p + mu] = (up + down) / 2;
                    xi[i * p + mu] = (up - down) / 2;
                }
            }
            (omega, xi)
        } else {
            (Vec::new(), Vec::new())
        };
        Self { n, p, s, columns, omega, xi }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn s(&self) -> usize {
        self.s
    }

    #[inline]
    pub fn entry(&self, i: usize, s: usize, mu: usize) -> i8 {
        self.columns[mu * self.n * self.s + i * self.s + s]
    }

    /// All `N·S` entries for signal `mu`, agent-major.
    #[inline]
    pub fn column(&self, mu: usize) -> &[i8] {
        let w = self.n * self.s;
        &self.columns[mu * w..(mu + 1) * w]
    }

    /// `ω_i^μ`; only defined for `S = 2`.
    pub fn omega(&self, i: usize, mu: usize) -> i8 {
        self.omega[i * self.p + mu]
    }

    /// `ξ_i^μ`; only defined for `S = 2`.
    pub fn xi(&self, i: usize, mu: usize) -> i8 {
        self.xi[i * self.p + mu]
    }

    pub fn has_decomposition(&self) -> bool {
        self.s == 2
    }

    pub fn mean_entry(&self) -> f64 {
        self.columns.iter().map(|&e| e as i64).sum::<i64>() as f64 / self.columns.len() as f64
    }
}

/// Draws each of the `N·S·P` entries independently with `P(+1) = ½ + ½b/√N`.
pub fn draw_strategies<R: Rng + ?Sized>(cfg: &GameConfig, rng: &mut R) -> StrategyTable {
    let p_plus = cfg.plus_probability();
    StrategyTable::from_fn(cfg.n, cfg.p, cfg.s, |_, _, _| if rng.random_bool(p_plus) { 1 } else { -1 })
}

/// Live scores of every strategy plus the current best-strategy indices.
///
/// A score is `U_s^t = jitter_s + payoff_s^t`; the two parts are kept apart
/// so that strategies with identical payoff histories keep exactly the
/// ordering given by their initial jitter. For `S = 2` the second payoff
/// slot holds the gap `payoff_↑ − payoff_↓`, which steps with `ξ_i^μ = 0`
/// leave bit-identical.
#[derive(Clone, Debug, PartialEq)]
pub struct GameState {
    s: usize,
    payoff: Vec<f64>,
    jitter: Vec<f64>,
    best: Vec<u32>,
    /// Steps completed.
    pub t: u64,
    /// Exact-equality ties met while picking best strategies.
    pub ties: u64,
}

pub fn init_scores<R: Rng + ?Sized>(cfg: &GameConfig, rng: &mut R) -> GameState {
    let normal = Normal::new(0.0, INIT_SCORE_SD).expect("positive sd");
    let jitter: Vec<f64> = (0..cfg.n * cfg.s).map(|_| normal.sample(rng)).collect();
    GameState::from_jitter(cfg.s, jitter)
}

impl GameState {
    /// State at `t = 0` with the given initial scores, agent-major.
    pub fn from_jitter(s: usize, jitter: Vec<f64>) -> Self {
        assert!(s >= 2 && jitter.len() % s == 0);
        let n = jitter.len() / s;
        let mut state = Self { s, payoff: vec![0.0; n * s], jitter, best: vec![0; n], t: 0, ties: 0 };
        for i in 0..n {
            state.best[i] = state.argmax(i);
        }
        state
    }

    pub fn n(&self) -> usize {
        self.best.len()
    }

    #[inline]
    fn argmax(&mut self, i: usize) -> u32 {
        if self.s == 2 {
            let u = self.score_gap(i);
            if u == 0.0 {
                self.ties += 1;
            }
            return (u < 0.0) as u32;
        }
        let base = i * self.s;
        let mut best = 0;
        for k in 1..self.s {
            let lead = self.payoff[base + k] - self.payoff[base + best];
            let gap = self.jitter[base + best] - self.jitter[base + k];
            if lead > gap {
                best = k;
            } else if lead == gap {
                self.ties += 1;
            }
        }
        best as u32
    }

    /// `U_s^t` of strategy `s` of agent `i`.
    pub fn score(&self, i: usize, s: usize) -> f64 {
        let k = i * self.s + s;
        if self.s == 2 && s == 1 {
            self.jitter[k] + (self.payoff[k - 1] - self.payoff[k])
        } else {
            self.jitter[k] + self.payoff[k]
        }
    }

    pub fn scores(&self) -> Vec<f64> {
        (0..self.n()).flat_map(|i| (0..self.s).map(move |s| (i, s))).map(|(i, s)| self.score(i, s)).collect()
    }

    pub fn best(&self) -> &[u32] {
        &self.best
    }

    /// `U_i^t = U_{s↑} − U_{s↓}` (S = 2).
    #[inline]
    pub fn score_gap(&self, i: usize) -> f64 {
        let k = 2 * i;
        self.payoff[k + 1] + (self.jitter[k] - self.jitter[k + 1])
    }

    /// `x_i^t = ±1`: +1 when the first strategy is in use (S = 2).
    #[inline]
    pub fn preference(&self, i: usize) -> i8 {
        1 - 2 * self.best[i] as i8
    }
}

/// What one market clearing produced.
#[derive(Clone, Debug, PartialEq)]
pub struct StepOutcome {
    /// `A^t = Σ a_i / √N` over participating agents.
    pub a: f64,
    /// `g_t = g(A^t + η^t)`.
    pub g: f64,
    /// Integer net demand `Σ a_i`.
    pub net: i64,
    pub decisions: Vec<i8>,
}

/// The market: strategy table, price function and the agent (if any) whose
/// orders are withheld from the aggregate.
pub struct Market<'a> {
    table: &'a StrategyTable,
    price: &'a PriceFunction,
    inv_sqrt_n: f64,
    excluded: Option<usize>,
}

impl<'a> Market<'a> {
    pub fn new(table: &'a StrategyTable, price: &'a PriceFunction, excluded: Option<usize>) -> Self {
        Self { table, price, inv_sqrt_n: 1.0 / (table.n() as f64).sqrt(), excluded }
    }

    /// Net demand of the current best strategies for signal `mu`.
    /// When `x_acc` is given, adds each agent's `x_i^t` to it.
    #[inline]
    fn play(&self, state: &GameState, mu: usize, x_acc: Option<&mut [i64]>) -> i64 {
        let col = self.table.column(mu);
        let s = self.table.s();
        let mut net: i64 = 0;
        if s == 2 {
            match x_acc {
                Some(acc) => {
                    for (i, (&b, a)) in state.best.iter().zip(acc.iter_mut()).enumerate() {
                        net += col[2 * i + b as usize] as i64;
                        *a += 1 - 2 * b as i64;
                    }
                }
                None => {
                    for (i, &b) in state.best.iter().enumerate() {
                        net += col[2 * i + b as usize] as i64;
                    }
                }
            }
        } else {
            for (i, &b) in state.best.iter().enumerate() {
                net += col[i * s + b as usize] as i64;
            }
        }
        if let Some(k) = self.excluded {
            net -= col[k * s + state.best[k] as usize] as i64;
        }
        net
    }

    /// Hindsight update of every strategy score followed by a new argmax.
    #[inline]
    fn update(&self, state: &mut GameState, mu: usize, g: f64) {
        let col = self.table.column(mu);
        if self.table.s() == 2 {
            let mut ties = 0u64;
            for (((u, e), jit), best) in state
                .payoff
                .chunks_exact_mut(2)
                .zip(col.chunks_exact(2))
                .zip(state.jitter.chunks_exact(2))
                .zip(state.best.iter_mut())
            {
                u[0] -= e[0] as f64 * g;
                u[1] -= (e[0] - e[1]) as f64 * g;
                let gap = u[1] + (jit[0] - jit[1]);
                *best = (gap < 0.0) as u32;
                ties += (gap == 0.0) as u64;
            }
            state.ties += ties;
        } else {
            for (u, &e) in state.payoff.iter_mut().zip(col) {
                *u -= e as f64 * g;
            }
            for i in 0..state.best.len() {
                state.best[i] = state.argmax(i);
            }
        }
        state.t += 1;
    }

    /// One market clearing; on error the state is left untouched.
    #[inline]
    fn advance(&self, state: &mut GameState, mu: usize, eta: f64, x_acc: Option<&mut [i64]>) -> Result<(i64, f64, f64), EngineError> {
        let net = self.play(state, mu, x_acc);
        let a = net as f64 * self.inv_sqrt_n;
        let g = self
            .price
            .eval(a + eta)
            .map_err(|source| EngineError::OutOfRange { t: state.t + 1, a, eta, source })?;
        self.update(state, mu, g);
        Ok((net, a, g))
    }

    fn decisions(&self, state: &GameState, mu: usize) -> Vec<i8> {
        let s = self.table.s();
        let col = self.table.column(mu);
        state.best.iter().enumerate().map(|(i, &b)| col[i * s + b as usize]).collect()
    }
}

/// Plays one step: agents act on the scores from before this step, then all
/// scores are updated with the realised price. `mu` is zero-based.
pub fn step(state: &mut GameState, table: &StrategyTable, cfg: &GameConfig, mu: usize, eta: f64) -> Result<StepOutcome, EngineError> {
    if mu >= table.p() {
        return Err(EngineError::InvalidConfig(format!("signal {mu} outside 0..{}", table.p())));
    }
    let market = Market::new(table, &cfg.price, None);
    let decisions = market.decisions(state, mu);
    let (net, a, g) = market.advance(state, mu, eta, None)?;
    Ok(StepOutcome { a, g, net, decisions })
}

/// Per-signal post-warmup accumulators.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct MuStats {
    pub count: u64,
    pub sum_a: f64,
    pub sum_a2: f64,
    pub sum_g: f64,
    pub sum_g2: f64,
}

/// Accumulators over consecutive non-overlapping batches of the window,
/// used for batch-means standard errors. Only complete batches are kept.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Batches {
    pub len: u64,
    pub count: usize,
    /// Per batch: Σ(A+η), Σ(A+η)², Σg.
    pub demand: Vec<f64>,
    pub demand2: Vec<f64>,
    pub g: Vec<f64>,
    /// Per batch, per agent Σ x_i^t (`[batch][i]`, S = 2 only).
    pub x: Vec<i64>,
    /// Per batch, per signal: visit count, ΣA, Σg (`[batch][μ]`).
    pub mu_count: Vec<u32>,
    pub mu_a: Vec<f64>,
    pub mu_g: Vec<f64>,
}

/// Decisions of all agents at one step, kept for audits.
#[derive(Clone, Debug, PartialEq)]
pub struct SpotCheck {
    pub t: u64,
    pub decisions: Vec<i8>,
}

/// Everything recorded by one run. Per-step vectors are indexed by `t − 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct TimeSeries {
    pub n: usize,
    pub p: usize,
    pub s: usize,
    pub b: f64,
    pub noise_variance: f64,
    pub warmup: u64,
    pub excluded: Option<usize>,
    pub a: Vec<f64>,
    pub g: Vec<f64>,
    pub mu: Vec<u32>,
    pub eta: Vec<f64>,
    /// Σ x_i^t over the window (S = 2 only).
    pub x_counts: Option<Vec<i64>>,
    pub per_mu: Vec<MuStats>,
    pub batches: Batches,
    pub spot_checks: Vec<SpotCheck>,
    pub ties: u64,
    /// Steps played; the per-step vectors are empty when discarded.
    pub steps: u64,
}

impl TimeSeries {
    pub fn len(&self) -> u64 {
        self.steps
    }

    pub fn is_empty(&self) -> bool {
        self.steps == 0
    }

    /// `false` when the run kept only accumulators.
    pub fn has_series(&self) -> bool {
        self.a.len() as u64 == self.steps
    }

    /// Number of post-warmup steps.
    pub fn window_len(&self) -> u64 {
        self.len().saturating_sub(self.warmup)
    }

    /// `true` for steps inside the warmup.
    pub fn is_warmup(&self, t: u64) -> bool {
        t <= self.warmup
    }

    /// Post-warmup slice of `A^t`.
    pub fn window_a(&self) -> &[f64] {
        self.a.get(self.warmup as usize..).unwrap_or(&[])
    }

    pub fn window_g(&self) -> &[f64] {
        self.g.get(self.warmup as usize..).unwrap_or(&[])
    }

    pub fn window_eta(&self) -> &[f64] {
        self.eta.get(self.warmup as usize..).unwrap_or(&[])
    }

    /// Little-endian binary dump: header then `(mu: u32, eta, A, g: f64)` per step.
    pub fn to_binary(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(48 + self.a.len() * 28);
        out.extend_from_slice(b"MGTS0001");
        for v in [self.n as u64, self.p as u64, self.s as u64, self.warmup, self.a.len() as u64] {
            out.extend_from_slice(&v.to_le_bytes());
        }
        out.extend_from_slice(&self.b.to_le_bytes());
        for k in 0..self.a.len() {
            out.extend_from_slice(&self.mu[k].to_le_bytes());
            out.extend_from_slice(&self.eta[k].to_le_bytes());
            out.extend_from_slice(&self.a[k].to_le_bytes());
            out.extend_from_slice(&self.g[k].to_le_bytes());
        }
        out
    }

    /// CSV with columns `t,mu,eta,A,g_t`; `mu` is one-based.
    pub fn write_csv<W: std::io::Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "t,mu,eta,A,g_t")?;
        for k in 0..self.a.len() {
            writeln!(w, "{},{},{},{},{}", k + 1, self.mu[k] + 1, self.eta[k], self.a[k], self.g[k])?;
        }
        Ok(())
    }
}

/// Optional behaviour of [`run_with`].
#[derive(Clone, Debug, Default)]
pub struct RunOptions {
    /// Agent whose actions are withheld from `A^t` (scores still tracked).
    pub excluded: Option<usize>,
    /// Batch length for standard errors; defaults to `10·P`.
    pub batch_len: Option<u64>,
    /// Number of randomly chosen steps whose full decision vector is kept.
    pub spot_checks: usize,
    /// Skip the per-step vectors; accumulators are still filled.
    pub discard_series: bool,
}

/// Read-only view handed to observers after each step.
pub struct StepView<'a> {
    pub t: u64,
    pub mu: usize,
    pub eta: f64,
    pub a: f64,
    pub g: f64,
    pub state: &'a GameState,
    pub table: &'a StrategyTable,
}

/// Runs the game with default options.
pub fn run(cfg: &GameConfig) -> Result<TimeSeries, EngineError> {
    run_with(cfg, &RunOptions::default(), |_| {})
}

/// Runs the game for `cfg.t` steps, calling `observe` after every step.
///
/// Strategy draw, initial scores, signals and noise each use their own
/// sub-stream of `cfg.seed`.
pub fn run_with<F: FnMut(&StepView)>(cfg: &GameConfig, opts: &RunOptions, mut observe: F) -> Result<TimeSeries, EngineError> {
    cfg.validate()?;
    if let Some(k) = opts.excluded {
        if k >= cfg.n {
            return Err(EngineError::InvalidConfig(format!("excluded agent {k} outside 0..{}", cfg.n)));
        }
    }
    let table = draw_strategies(cfg, &mut stream(cfg.seed, Stream::Strategies));
    let mut state = init_scores(cfg, &mut stream(cfg.seed, Stream::InitScores));
    let mut signals = stream(cfg.seed, Stream::Signals);
    let mut noise_rng = stream(cfg.seed, Stream::Noise);
    let noise = cfg.noise.sampler();
    let market = Market::new(&table, &cfg.price, opts.excluded);

    let (n, p) = (cfg.n, cfg.p);
    let steps = cfg.t as usize;
    let batch_len = opts.batch_len.unwrap_or(10 * p as u64).max(1);
    let window = cfg.t - cfg.warmup;
    let n_batches = (window / batch_len) as usize;
    let track_x = cfg.s == 2;

    let mut checks: Vec<u64> = if opts.spot_checks > 0 {
        let k = opts.spot_checks.min(steps);
        let mut v: Vec<u64> =
            sample_indices(&mut stream(cfg.seed, Stream::Audit), steps, k).into_iter().map(|x| x as u64 + 1).collect();
        v.sort_unstable();
        v
    } else {
        Vec::new()
    };
    checks.reverse();
    let mut spot_checks = Vec::with_capacity(checks.len());

    let cap = if opts.discard_series { 0 } else { steps };
    let mut a_rec = Vec::with_capacity(cap);
    let mut g_rec = Vec::with_capacity(cap);
    let mut mu_rec = Vec::with_capacity(cap);
    let mut eta_rec = Vec::with_capacity(cap);
    let mut x_counts = if track_x { vec![0i64; n] } else { Vec::new() };
    let mut per_mu = vec![MuStats::default(); p];
    let mut batches = Batches {
        len: batch_len,
        count: n_batches,
        demand: vec![0.0; n_batches],
        demand2: vec![0.0; n_batches],
        g: vec![0.0; n_batches],
        x: if track_x { vec![0; n_batches * n] } else { Vec::new() },
        mu_count: vec![0; n_batches * p],
        mu_a: vec![0.0; n_batches * p],
        mu_g: vec![0.0; n_batches * p],
    };
    let mut batch_x = if track_x { vec![0i64; n] } else { Vec::new() };

    for t in 1..=cfg.t {
        let mu = signals.random_range(0..p);
        let eta = noise.sample(&mut noise_rng);
        if checks.last() == Some(&t) {
            checks.pop();
            let mut decisions = market.decisions(&state, mu);
            if let Some(k) = opts.excluded {
                decisions[k] = 0;
            }
            spot_checks.push(SpotCheck { t, decisions });
        }
        let in_window = t > cfg.warmup;
        let batch = if in_window { ((t - cfg.warmup - 1) / batch_len) as usize } else { usize::MAX };
        let in_batch = batch < n_batches;
        let acc = if in_window && track_x { Some(&mut batch_x[..]) } else { None };
        let (_, a, g) = market.advance(&mut state, mu, eta, acc)?;

        if !opts.discard_series {
            a_rec.push(a);
            g_rec.push(g);
            mu_rec.push(mu as u32);
            eta_rec.push(eta);
        }
        if in_window {
            let m = &mut per_mu[mu];
            m.count += 1;
            m.sum_a += a;
            m.sum_a2 += a * a;
            m.sum_g += g;
            m.sum_g2 += g * g;
            let closes_batch = (t - cfg.warmup) % batch_len == 0 || t == cfg.t;
            if in_batch {
                let d = a + eta;
                batches.demand[batch] += d;
                batches.demand2[batch] += d * d;
                batches.g[batch] += g;
                batches.mu_count[batch * p + mu] += 1;
                batches.mu_a[batch * p + mu] += a;
                batches.mu_g[batch * p + mu] += g;
            }
            if track_x && closes_batch {
                for (tot, bx) in x_counts.iter_mut().zip(batch_x.iter()) {
                    *tot += *bx;
                }
                if in_batch {
                    batches.x[batch * n..(batch + 1) * n].copy_from_slice(&batch_x);
                }
                batch_x.iter_mut().for_each(|v| *v = 0);
            }
        }
        observe(&StepView { t, mu, eta, a, g, state: &state, table: &table });
    }

    Ok(TimeSeries {
        n,
        p,
        s: cfg.s,
        b: cfg.b,
        noise_variance: cfg.noise.variance(),
        warmup: cfg.warmup,
        excluded: opts.excluded,
        a: a_rec,
        g: g_rec,
        mu: mu_rec,
        eta: eta_rec,
        x_counts: track_x.then_some(x_counts),
        per_mu,
        batches,
        spot_checks,
        ties: state.ties,
        steps: cfg.t,
    })
}

/// The game played once with every agent and once with `excluded`'s orders
/// withheld, on identical strategies, signals and noise.
#[derive(Clone, Debug)]
pub struct CavityPair {
    pub full: TimeSeries,
    pub cavity: TimeSeries,
    pub excluded: usize,
}

impl CavityPair {
    /// Per-step `A_full − A_cavity`.
    pub fn delta_a(&self) -> Vec<f64> {
        self.full.a.iter().zip(&self.cavity.a).map(|(x, y)| x - y).collect()
    }

    pub fn delta_g(&self) -> Vec<f64> {
        self.full.g.iter().zip(&self.cavity.g).map(|(x, y)| x - y).collect()
    }

    /// Window mean of `g_full − g_cavity`.
    pub fn mean_delta_g(&self) -> f64 {
        let w = self.full.warmup as usize;
        let d = &self.delta_g()[w..];
        d.iter().sum::<f64>() / d.len() as f64
    }

    /// Window mean of `|g_full − g_cavity|`.
    pub fn mean_abs_delta_g(&self) -> f64 {
        let w = self.full.warmup as usize;
        let d = &self.delta_g()[w..];
        d.iter().map(|x| x.abs()).sum::<f64>() / d.len() as f64
    }
}

pub fn cavity_experiment(cfg: &GameConfig, excluded: usize) -> Result<CavityPair, EngineError> {
    if cfg.n < 2 {
        return Err(EngineError::InvalidConfig("cavity experiment needs N >= 2".into()));
    }
    let full = run(cfg)?;
    let cavity = run_with(cfg, &RunOptions { excluded: Some(excluded), ..Default::default() }, |_| {})?;
    Ok(CavityPair { full, cavity, excluded })
}
