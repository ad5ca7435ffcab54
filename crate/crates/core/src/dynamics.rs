//! Score trajectories of individual agents and the statistics that expose
//! the three timescales of the dynamics: diffusion for `t ≪ P`, bounded
//! excursions around `t ∼ P`, binary switching for `t ≫ P`.

use std::io::Write;

use rand::seq::index::sample as sample_indices;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::engine::{init_scores, run_with, GameConfig, RunOptions};
use crate::error::DynamicsError;
use crate::measures::EPS_FROZEN;
use crate::rng::{stream, Stream};
use crate::stats::{fit_line, LineFit};

/// Dense recording up to this step.
pub const DENSE_UNTIL: u64 = 1000;
/// Log-spaced points per decade after [`DENSE_UNTIL`].
pub const POINTS_PER_DECADE: f64 = 100.0;
/// Minimum number of recorded times in a fit window.
pub const MIN_FIT_POINTS: usize = 20;
/// Minimum number of (agent, seed) trajectories for ensemble exponents.
pub const MIN_ENSEMBLE: usize = 100;

/// Strictly increasing recording times in `[1, t_max]`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Schedule {
    times: Vec<u64>,
}

impl Schedule {
    /// Every step up to 1000, then 100 log-spaced points per decade, always
    /// ending at `t_max`.
    pub fn standard(t_max: u64) -> Self {
        let mut times: Vec<u64> = (1..=t_max.min(DENSE_UNTIL)).collect();
        if t_max > DENSE_UNTIL {
            let l0 = (DENSE_UNTIL as f64).log10();
            let l1 = (t_max as f64).log10();
            let k = ((l1 - l0) * POINTS_PER_DECADE).ceil() as u64;
            for j in 1..=k {
                let t = (10f64.powf(l0 + j as f64 / POINTS_PER_DECADE).round() as u64).min(t_max);
                if t > *times.last().unwrap() {
                    times.push(t);
                }
            }
            if *times.last().unwrap() != t_max {
                times.push(t_max);
            }
        }
        Self { times }
    }

    /// Adds `start, start + stride, …` up to `end`.
    pub fn with_linear(mut self, start: u64, stride: u64, end: u64) -> Self {
        let stride = stride.max(1);
        let mut t = start.max(1);
        while t <= end {
            self.times.push(t);
            t += stride;
        }
        self.times.sort_unstable();
        self.times.dedup();
        self
    }

    pub fn from_times(times: Vec<u64>, t_max: u64) -> Result<Self, DynamicsError> {
        if times.is_empty() {
            return Err(DynamicsError::BadSchedule("no recording times".into()));
        }
        if times.windows(2).any(|w| w[0] >= w[1]) {
            return Err(DynamicsError::BadSchedule("times must be strictly increasing".into()));
        }
        if times[0] < 1 || *times.last().unwrap() > t_max {
            return Err(DynamicsError::BadSchedule(format!("times must lie in [1, {t_max}]")));
        }
        Ok(Self { times })
    }

    pub fn times(&self) -> &[u64] {
        &self.times
    }
}

/// Sampled score differences `U_i^t = U_{i↑}^t − U_{i↓}^t` of tracked agents.
///
/// `x_running[a][k]` is the mean of `x_i^{t'}` over `x_start < t' ≤ times[k]`
/// (NaN before any such step); with `x_start` equal to the run's warmup the
/// last entry is the agent's `x_i` on the measured window.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryRecord {
    pub p: usize,
    pub seed: u64,
    pub x_start: u64,
    pub agent_ids: Vec<usize>,
    pub times: Vec<u64>,
    /// `[agent][k]`.
    #[serde(rename = "U")]
    pub u: Vec<Vec<f64>>,
    pub u_tau: Vec<Vec<f64>>,
    pub x_running: Vec<Vec<f64>>,
}

impl TrajectoryRecord {
    /// Record from given paths; `x_running` is then the running mean of
    /// `sign(U)` over the recorded samples themselves.
    pub fn from_paths(p: usize, times: Vec<u64>, u: Vec<Vec<f64>>) -> Self {
        let sp = (p as f64).sqrt();
        let u_tau = u.iter().map(|row| row.iter().map(|v| v / sp).collect()).collect();
        let x_running = u
            .iter()
            .map(|row| {
                let mut s = 0.0;
                row.iter().enumerate().map(|(k, &v)| {
                    s += sign(v);
                    s / (k + 1) as f64
                }).collect()
            })
            .collect();
        Self { p, seed: 0, x_start: 0, agent_ids: (0..u.len()).collect(), times, u, u_tau, x_running }
    }

    pub fn tau(&self, k: usize) -> f64 {
        self.times[k] as f64 / self.p as f64
    }

    /// Final window preference of tracked agent `a`.
    pub fn x_final(&self, a: usize) -> f64 {
        *self.x_running[a].last().unwrap()
    }

    pub fn is_frozen(&self, a: usize) -> bool {
        self.x_final(a).abs() >= 1.0 - EPS_FROZEN
    }

    /// Indices of recorded times inside `[lo, hi]`.
    pub fn window(&self, lo: u64, hi: u64) -> std::ops::Range<usize> {
        let a = self.times.partition_point(|&t| t < lo);
        let b = self.times.partition_point(|&t| t <= hi);
        a..b
    }

    /// CSV with columns `t,agent_id,U,u_tau,sign`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "t,agent_id,U,u_tau,sign")?;
        for (a, &id) in self.agent_ids.iter().enumerate() {
            for (k, &t) in self.times.iter().enumerate() {
                writeln!(w, "{t},{id},{},{},{}", self.u[a][k], self.u_tau[a][k], sign(self.u[a][k]) as i8)?;
            }
        }
        Ok(())
    }

    /// Little-endian dump: header, times, then per agent its id and `U` samples.
    pub fn to_binary(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(40 + 8 * self.times.len() * (1 + self.u.len()));
        out.extend_from_slice(b"MGTR0001");
        for v in [self.p as u64, self.seed, self.agent_ids.len() as u64, self.times.len() as u64] {
            out.extend_from_slice(&v.to_le_bytes());
        }
        for &t in &self.times {
            out.extend_from_slice(&t.to_le_bytes());
        }
        for (a, &id) in self.agent_ids.iter().enumerate() {
            out.extend_from_slice(&(id as u64).to_le_bytes());
            for v in &self.u[a] {
                out.extend_from_slice(&v.to_le_bytes());
            }
        }
        out
    }
}

/// `x = +1` for `U ≥ 0`, matching the engine's tie rule.
fn sign(u: f64) -> f64 {
    if u < 0.0 {
        -1.0
    } else {
        1.0
    }
}

/// Plays `cfg` once, sampling `U_i^t` of agents `ids` on `schedule`.
/// Running means of `x_i^t` start after `cfg.warmup`.
pub fn record_trajectories(cfg: &GameConfig, ids: &[usize], schedule: &Schedule) -> Result<TrajectoryRecord, DynamicsError> {
    if cfg.s != 2 {
        return Err(DynamicsError::WrongS(cfg.s));
    }
    cfg.validate()?;
    if let Some(&bad) = ids.iter().find(|&&i| i >= cfg.n) {
        return Err(DynamicsError::BadSchedule(format!("agent {bad} outside 0..{}", cfg.n)));
    }
    Schedule::from_times(schedule.times().to_vec(), cfg.t)?;
    let times = schedule.times().to_vec();
    let m = ids.len();
    let sp = (cfg.p as f64).sqrt();
    let mut u = vec![Vec::with_capacity(times.len()); m];
    let mut x_running = vec![Vec::with_capacity(times.len()); m];
    let mut x_sum = vec![0i64; m];
    // x_i^1 comes from the initial scores
    let init = init_scores(cfg, &mut stream(cfg.seed, Stream::InitScores));
    let mut prev: Vec<i8> = ids.iter().map(|&i| init.preference(i)).collect();
    let mut next = 0usize;
    let warmup = cfg.warmup;
    let opts = RunOptions { discard_series: true, ..Default::default() };
    run_with(cfg, &opts, |v| {
        // prev holds the preference played at step v.t
        if v.t > warmup {
            for (s, &x) in x_sum.iter_mut().zip(&prev) {
                *s += x as i64;
            }
        }
        for (a, &i) in ids.iter().enumerate() {
            prev[a] = v.state.preference(i);
        }
        if next < times.len() && times[next] == v.t {
            let played = v.t.saturating_sub(warmup);
            for (a, &i) in ids.iter().enumerate() {
                u[a].push(v.state.score_gap(i));
                x_running[a].push(if played == 0 { f64::NAN } else { x_sum[a] as f64 / played as f64 });
            }
            next += 1;
        }
    })?;
    let u_tau = u.iter().map(|row| row.iter().map(|x| x / sp).collect()).collect();
    Ok(TrajectoryRecord { p: cfg.p, seed: cfg.seed, x_start: warmup, agent_ids: ids.to_vec(), times, u, u_tau, x_running })
}

/// Which tracked agents enter an ensemble statistic.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Population {
    All,
    Frozen,
    NonFrozen,
}

impl Population {
    fn admits(self, rec: &TrajectoryRecord, a: usize) -> bool {
        match self {
            Population::All => true,
            Population::Frozen => rec.is_frozen(a),
            Population::NonFrozen => !rec.is_frozen(a),
        }
    }
}

/// Growth exponent of the ensemble RMS of `U^t`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExponentFit {
    pub slope: f64,
    /// 95% confidence half-width of the slope.
    pub ci: f64,
    pub fit: LineFit,
    pub trajectories: usize,
    pub lo: u64,
    pub hi: u64,
}

/// Least-squares slope of `log RMS(U^t)` against `log t` over `[lo, hi]`,
/// with the RMS taken over every admitted trajectory of every record.
/// Records must share their schedule.
pub fn rms_exponent(recs: &[TrajectoryRecord], lo: u64, hi: u64, pop: Population, min_ensemble: usize) -> Result<ExponentFit, DynamicsError> {
    let first = recs.first().ok_or(DynamicsError::InsufficientEnsemble { need: min_ensemble, have: 0 })?;
    if recs.iter().any(|r| r.times != first.times) {
        return Err(DynamicsError::BadSchedule("records use different schedules".into()));
    }
    let chosen: Vec<(usize, usize)> =
        recs.iter().enumerate().flat_map(|(r, rec)| (0..rec.u.len()).filter(move |&a| pop.admits(rec, a)).map(move |a| (r, a))).collect();
    if chosen.len() < min_ensemble {
        return Err(DynamicsError::InsufficientEnsemble { need: min_ensemble, have: chosen.len() });
    }
    let win = first.window(lo, hi);
    if win.len() < MIN_FIT_POINTS {
        return Err(DynamicsError::SparseWindow { lo, hi, points: win.len(), need: MIN_FIT_POINTS });
    }
    let (mut xs, mut ys) = (Vec::with_capacity(win.len()), Vec::with_capacity(win.len()));
    for k in win {
        let ms = chosen.iter().map(|&(r, a)| recs[r].u[a][k].powi(2)).sum::<f64>() / chosen.len() as f64;
        if ms > 0.0 {
            xs.push((first.times[k] as f64).ln());
            ys.push(0.5 * ms.ln());
        }
    }
    if xs.len() < MIN_FIT_POINTS {
        return Err(DynamicsError::SparseWindow { lo, hi, points: xs.len(), need: MIN_FIT_POINTS });
    }
    let fit = fit_line(&xs, &ys);
    Ok(ExponentFit { slope: fit.slope, ci: 1.96 * fit.slope_se, fit, trajectories: chosen.len(), lo, hi })
}

/// Short-time diffusion check: RMS exponent over `t ≤ hi` (typically `P/100`).
pub fn random_walk_test(recs: &[TrajectoryRecord], hi: u64) -> Result<ExponentFit, DynamicsError> {
    rms_exponent(recs, 1, hi, Population::All, MIN_ENSEMBLE)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExcursionStats {
    pub lo: u64,
    pub hi: u64,
    /// Per non-frozen trajectory: fraction of samples in the window with `|U| < √t`.
    pub inside_fraction: Vec<f64>,
    pub median_inside: f64,
    pub non_frozen: usize,
    pub frozen: usize,
    /// Sign changes of frozen agents' samples after `frozen_after`.
    pub frozen_sign_changes: u64,
    pub frozen_after: u64,
    /// Mean over non-frozen trajectories of sign changes per `10·P` steps in the window.
    pub alternations_per_10p: f64,
}

/// Bounded-excursion statistics on `[lo, hi]` (typically `[P, 50P]`);
/// frozen agents are checked for sign changes after `10·P`.
pub fn excursion_test(recs: &[TrajectoryRecord], lo: u64, hi: u64) -> ExcursionStats {
    let mut inside = Vec::new();
    let (mut frozen, mut frozen_changes) = (0, 0u64);
    let mut alternations = Vec::new();
    let mut frozen_after = 0;
    for rec in recs {
        let p = rec.p as u64;
        frozen_after = 10 * p;
        let win = rec.window(lo, hi);
        for a in 0..rec.u.len() {
            let row = &rec.u[a];
            if rec.is_frozen(a) {
                frozen += 1;
                let w = rec.window(10 * p + 1, u64::MAX);
                frozen_changes += row[w].windows(2).filter(|w| sign(w[0]) != sign(w[1])).count() as u64;
                continue;
            }
            if win.is_empty() {
                continue;
            }
            let n_in = win.clone().filter(|&k| row[k].abs() < (rec.times[k] as f64).sqrt()).count();
            inside.push(n_in as f64 / win.len() as f64);
            let changes = row[win.clone()].windows(2).filter(|w| sign(w[0]) != sign(w[1])).count();
            let span = rec.times[win.end - 1] - rec.times[win.start];
            if span > 0 {
                alternations.push(changes as f64 * (10 * p) as f64 / span as f64);
            }
        }
    }
    let median_inside = median(&inside);
    let alt = if alternations.is_empty() { f64::NAN } else { alternations.iter().sum::<f64>() / alternations.len() as f64 };
    ExcursionStats {
        lo,
        hi,
        non_frozen: inside.len(),
        inside_fraction: inside,
        median_inside,
        frozen,
        frozen_sign_changes: frozen_changes,
        frozen_after,
        alternations_per_10p: alt,
    }
}

fn median(v: &[f64]) -> f64 {
    if v.is_empty() {
        return f64::NAN;
    }
    let mut s = v.to_vec();
    s.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let m = s.len() / 2;
    if s.len() % 2 == 1 {
        s[m]
    } else {
        0.5 * (s[m - 1] + s[m])
    }
}

/// Long-time statistics of one tracked agent.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BinaryAgent {
    pub agent_id: usize,
    pub seed: u64,
    pub frozen: bool,
    /// Mean of `sign(U)` over the window's samples.
    pub mean: f64,
    pub variance: f64,
    /// Smallest lag (steps) at which the sign autocorrelation fell below
    /// 0.1, if it did so within `10·P`.
    pub decorrelation_lag: Option<u64>,
    /// `|x_running(T) − x_running(T/2)|`.
    pub convergence_gap: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BinaryNoiseStats {
    pub lo: u64,
    pub agents: Vec<BinaryAgent>,
    /// Largest `|variance − (1 − mean²)|` among agents.
    pub max_variance_gap: f64,
    /// Fraction of non-frozen agents whose sign decorrelates within `10·P`.
    pub mixing_fraction: f64,
    /// Fraction of agents with `convergence_gap < 0.05`.
    pub converged_fraction: f64,
}

/// Sign statistics over the uniformly spaced samples with `t ≥ lo`.
///
/// The autocorrelation is computed on the largest run of equally spaced
/// samples in the window, so the schedule should contain a linear segment.
pub fn binary_noise_test(recs: &[TrajectoryRecord], lo: u64) -> BinaryNoiseStats {
    let mut agents = Vec::new();
    for rec in recs {
        let win = rec.window(lo, u64::MAX);
        let uniform = uniform_tail(&rec.times[win.clone()]);
        let stride = uniform.map(|(_, s)| s);
        let t_end = *rec.times.last().unwrap();
        let half = rec.times.partition_point(|&t| t <= t_end / 2);
        for a in 0..rec.u.len() {
            let signs: Vec<f64> = rec.u[a][win.clone()].iter().map(|&u| sign(u)).collect();
            let n = signs.len().max(1) as f64;
            let mean = signs.iter().sum::<f64>() / n;
            let variance = signs.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / n;
            let decorrelation_lag = match (uniform, stride) {
                (Some((start, s)), Some(_)) if variance > 0.0 => {
                    let seq = &signs[start..];
                    let max_lag = (10 * rec.p as u64 / s) as usize;
                    (1..=max_lag.min(seq.len().saturating_sub(2))).find(|&l| autocorrelation(seq, l) < 0.1).map(|l| l as u64 * s)
                }
                _ => None,
            };
            let xr = &rec.x_running[a];
            let gap = if half == 0 { f64::NAN } else { (xr[xr.len() - 1] - xr[half - 1]).abs() };
            agents.push(BinaryAgent {
                agent_id: rec.agent_ids[a],
                seed: rec.seed,
                frozen: rec.is_frozen(a),
                mean,
                variance,
                decorrelation_lag,
                convergence_gap: gap,
            });
        }
    }
    let max_variance_gap = agents.iter().map(|a| (a.variance - (1.0 - a.mean * a.mean)).abs()).fold(0.0, f64::max);
    let nf: Vec<&BinaryAgent> = agents.iter().filter(|a| !a.frozen).collect();
    let mixing_fraction = if nf.is_empty() { f64::NAN } else { nf.iter().filter(|a| a.decorrelation_lag.is_some()).count() as f64 / nf.len() as f64 };
    let converged_fraction = agents.iter().filter(|a| a.convergence_gap < 0.05).count() as f64 / agents.len().max(1) as f64;
    BinaryNoiseStats { lo, agents, max_variance_gap, mixing_fraction, converged_fraction }
}

/// Start index and stride of the longest equally spaced tail of `times`.
fn uniform_tail(times: &[u64]) -> Option<(usize, u64)> {
    if times.len() < 3 {
        return None;
    }
    let n = times.len();
    let s = times[n - 1] - times[n - 2];
    let mut k = n - 2;
    while k > 0 && times[k] - times[k - 1] == s {
        k -= 1;
    }
    (n - k >= 3).then_some((k, s))
}

fn autocorrelation(x: &[f64], lag: usize) -> f64 {
    let n = x.len() - lag;
    let m = x.iter().sum::<f64>() / x.len() as f64;
    let v = x.iter().map(|a| (a - m).powi(2)).sum::<f64>() / x.len() as f64;
    let c = (0..n).map(|k| (x[k] - m) * (x[k + lag] - m)).sum::<f64>() / n as f64;
    c / v
}

/// Three-row summary of the regimes in one record ensemble.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegimeSummary {
    pub p: usize,
    /// `t ≤ P/100`: RMS exponent of all trajectories.
    pub diffusive: ExponentFit,
    /// `t ∈ [10P, 50P]`: RMS exponent of non-frozen trajectories, and `[P, 50P]` excursions.
    pub bounded: Option<ExponentFit>,
    pub excursions: ExcursionStats,
    /// `t ≥ 10P`: binary switching.
    pub binary: BinaryNoiseStats,
}

pub fn regime_summary(recs: &[TrajectoryRecord]) -> Result<RegimeSummary, DynamicsError> {
    let p = recs.first().map(|r| r.p).ok_or(DynamicsError::InsufficientEnsemble { need: MIN_ENSEMBLE, have: 0 })?;
    let pu = p as u64;
    let diffusive = random_walk_test(recs, (pu / 100).max(MIN_FIT_POINTS as u64))?;
    let bounded = rms_exponent(recs, 10 * pu, 50 * pu, Population::NonFrozen, 1).ok();
    Ok(RegimeSummary { p, diffusive, bounded, excursions: excursion_test(recs, pu, 50 * pu), binary: binary_noise_test(recs, 10 * pu) })
}

/// Time-packed `x_i^t` bits (`1` for `+1`) of a set of agents.
#[derive(Clone, Debug, PartialEq)]
pub struct PreferenceBits {
    pub steps: usize,
    /// `[agent][word]`.
    pub bits: Vec<Vec<u64>>,
}

impl PreferenceBits {
    fn new(agents: usize, steps: usize) -> Self {
        Self { steps, bits: vec![vec![0; steps.div_ceil(64)]; agents] }
    }

    #[inline]
    fn set(&mut self, a: usize, k: usize) {
        self.bits[a][k / 64] |= 1 << (k % 64);
    }

    pub fn get(&self, a: usize, k: usize) -> i8 {
        if self.bits[a][k / 64] >> (k % 64) & 1 == 1 {
            1
        } else {
            -1
        }
    }

    pub fn mean(&self, a: usize) -> f64 {
        let ones: u64 = self.bits[a].iter().map(|w| w.count_ones() as u64).sum();
        (2.0 * ones as f64 - self.steps as f64) / self.steps as f64
    }

    /// `mean(x_a^t x_b^{t+shift}) − x̄_a x̄_b` with the shift circular; shifts
    /// are in whole 64-step words.
    pub fn covariance(&self, a: usize, b: usize, shift_words: usize) -> f64 {
        let (wa, wb) = (&self.bits[a], &self.bits[b]);
        let nw = wa.len();
        let full = self.steps / 64;
        let mut differ = 0u64;
        let mut used = 0u64;
        for k in 0..full {
            let j = (k + shift_words) % full.max(1);
            differ += (wa[k] ^ wb[j]).count_ones() as u64;
            used += 64;
        }
        if shift_words == 0 && nw > full {
            let rem = self.steps % 64;
            let mask = (1u64 << rem) - 1;
            differ += ((wa[full] ^ wb[full]) & mask).count_ones() as u64;
            used += rem as u64;
        }
        let prod = 1.0 - 2.0 * differ as f64 / used as f64;
        prod - self.mean(a) * self.mean(b)
    }
}

/// Pairwise covariance magnitudes at one system size.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CovarianceStats {
    pub n: usize,
    pub p: usize,
    pub seeds: Vec<u64>,
    pub pairs: usize,
    pub window: u64,
    pub mean_abs_cov: f64,
    pub rms_cov: f64,
    /// RMS of the same pairs with one series circularly shifted far away.
    pub null_rms: f64,
    /// `√max(0, rms² − null_rms²)`.
    pub corrected_rms: f64,
}

/// Covariances of `x_i^t, x_j^t` over the post-warmup window for `pairs`
/// random agent pairs per seed. Pairs are drawn among a random subset of
/// at most 64 agents.
pub fn pair_covariances(cfg: &GameConfig, seeds: &[u64], pairs: usize) -> Result<CovarianceStats, DynamicsError> {
    if cfg.s != 2 {
        return Err(DynamicsError::WrongS(cfg.s));
    }
    let mut covs = Vec::new();
    let mut nulls = Vec::new();
    for &seed in seeds {
        let c = GameConfig { seed, ..cfg.clone() };
        let (bits, ids_pairs) = record_bits(&c, pairs)?;
        let full = bits.steps / 64;
        for (k, &(a, b)) in ids_pairs.iter().enumerate() {
            covs.push(bits.covariance(a, b, 0));
            // shifts spread over the middle half of the window
            let shift = full / 4 + (k * 7919) % (full / 2).max(1);
            nulls.push(bits.covariance(a, b, shift.max(1)));
        }
    }
    let m = covs.len() as f64;
    let rms = (covs.iter().map(|c| c * c).sum::<f64>() / m).sqrt();
    let null_rms = (nulls.iter().map(|c| c * c).sum::<f64>() / m).sqrt();
    Ok(CovarianceStats {
        n: cfg.n,
        p: cfg.p,
        seeds: seeds.to_vec(),
        pairs: covs.len(),
        window: cfg.t - cfg.warmup,
        mean_abs_cov: covs.iter().map(|c| c.abs()).sum::<f64>() / m,
        rms_cov: rms,
        null_rms,
        corrected_rms: (rms * rms - null_rms * null_rms).max(0.0).sqrt(),
    })
}

/// Post-warmup preference bits of up to 64 random agents, plus `pairs`
/// distinct pairs among them (indices into the bit rows).
fn record_bits(cfg: &GameConfig, pairs: usize) -> Result<(PreferenceBits, Vec<(usize, usize)>), DynamicsError> {
    cfg.validate()?;
    let mut rng = stream(cfg.seed, Stream::Audit);
    let m = cfg.n.min(64);
    let ids: Vec<usize> = sample_indices(&mut rng, cfg.n, m).into_vec();
    let mut all: Vec<(usize, usize)> = (0..m).flat_map(|a| (a + 1..m).map(move |b| (a, b))).collect();
    let k = pairs.min(all.len());
    let pick = sample_indices(&mut rng, all.len(), k).into_vec();
    let chosen: Vec<(usize, usize)> = pick.iter().map(|&j| all[j]).collect();
    all.clear();

    let init = init_scores(cfg, &mut stream(cfg.seed, Stream::InitScores));
    let mut prev: Vec<i8> = ids.iter().map(|&i| init.preference(i)).collect();
    let window = (cfg.t - cfg.warmup) as usize;
    let mut bits = PreferenceBits::new(m, window);
    let warmup = cfg.warmup;
    let opts = RunOptions { discard_series: true, ..Default::default() };
    run_with(cfg, &opts, |v| {
        if v.t > warmup {
            let k = (v.t - warmup - 1) as usize;
            for (a, &x) in prev.iter().enumerate() {
                if x > 0 {
                    bits.set(a, k);
                }
            }
        }
        for (a, &i) in ids.iter().enumerate() {
            prev[a] = v.state.preference(i);
        }
    })?;
    Ok((bits, chosen))
}

/// Covariance scaling between two matched-α systems.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecorrelationReport {
    pub small: CovarianceStats,
    pub large: CovarianceStats,
    /// Ratio of noise-corrected RMS covariances, small over large.
    pub ratio: f64,
    /// Ratio of raw mean `|cov|`.
    pub raw_ratio: f64,
}

/// Measures how pairwise covariances shrink from `small` to `large`
/// (where `large.p` is typically `4·small.p` at the same α).
pub fn cross_agent_decorrelation(small: &GameConfig, large: &GameConfig, seeds: &[u64], pairs: usize) -> Result<DecorrelationReport, DynamicsError> {
    let s = pair_covariances(small, seeds, pairs)?;
    let l = pair_covariances(large, seeds, pairs)?;
    Ok(DecorrelationReport { ratio: s.corrected_rms / l.corrected_rms, raw_ratio: s.mean_abs_cov / l.mean_abs_cov, small: s, large: l })
}

/// Null model: `agents` independent paths of i.i.d. `±1` increments.
pub fn iid_increment_paths<R: Rng + ?Sized>(rng: &mut R, agents: usize, schedule: &Schedule) -> Vec<Vec<f64>> {
    let times = schedule.times();
    (0..agents)
        .map(|_| {
            let (mut u, mut t) = (0.0, 0u64);
            times
                .iter()
                .map(|&tk| {
                    while t < tk {
                        u += if rng.random_bool(0.5) { 1.0 } else { -1.0 };
                        t += 1;
                    }
                    u
                })
                .collect()
        })
        .collect()
}
