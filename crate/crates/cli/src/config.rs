//! Run configuration: one TOML file with nested tables, validated in full
//! before any command starts work.

use std::path::{Path, PathBuf};

use minority_cavity::cavity::{CavityModel, SolverOptions};
use minority_cavity::engine::GameConfig;
use minority_cavity::market::{NoiseModel, OperatingRange, PriceFunction};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Simulate,
    Solve,
    Sweep,
    Dynamics,
    Compare,
    AlphaC,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::Simulate => "simulate",
            Mode::Solve => "solve",
            Mode::Sweep => "sweep",
            Mode::Dynamics => "dynamics",
            Mode::Compare => "compare",
            Mode::AlphaC => "alpha-c",
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// When present it must match the command being run.
    pub mode: Option<Mode>,
    #[serde(default)]
    pub game: GameSection,
    #[serde(default)]
    pub price: PriceSection,
    #[serde(default)]
    pub noise: NoiseSection,
    #[serde(default)]
    pub ensemble: EnsembleSection,
    pub sweep: Option<SweepSection>,
    #[serde(default)]
    pub solver: SolverSection,
    #[serde(default)]
    pub simulate: SimulateSection,
    pub dynamics: Option<DynamicsSection>,
    #[serde(default)]
    pub compare: CompareSection,
    #[serde(default)]
    pub output: OutputSection,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GameSection {
    pub n: Option<usize>,
    /// Either `p` or `alpha` (then `P = round(α·N)`).
    pub p: Option<usize>,
    pub alpha: Option<f64>,
    pub s: Option<usize>,
    pub b: Option<f64>,
    /// Either `t` or `t_per_p` (default 200).
    pub t: Option<u64>,
    pub t_per_p: Option<f64>,
    /// Either `warmup` or `warmup_per_p`; default `min(max(100·P, 10⁴), T/2)`.
    pub warmup: Option<u64>,
    pub warmup_per_p: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PriceSection {
    Linear {
        range: Option<[f64; 2]>,
    },
    /// `g(x) = Σ_k c_k x^k`, `coefficients = [c1, c2, …]`.
    Polynomial {
        coefficients: Vec<f64>,
        range: Option<[f64; 2]>,
    },
    Tabulated {
        x: Vec<f64>,
        y: Vec<f64>,
        range: Option<[f64; 2]>,
    },
}

impl Default for PriceSection {
    fn default() -> Self {
        PriceSection::Linear { range: None }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum NoiseSection {
    #[default]
    None,
    Gaussian {
        sigma: f64,
    },
    Discrete {
        values: Vec<f64>,
        probs: Vec<f64>,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnsembleSection {
    #[serde(default = "one")]
    pub size: usize,
    /// Master seed; member seeds are derived from it.
    #[serde(default)]
    pub seed: u64,
}

impl Default for EnsembleSection {
    fn default() -> Self {
        Self { size: 1, seed: 0 }
    }
}

fn one() -> usize {
    1
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepParameter {
    #[default]
    Alpha,
    /// Second polynomial coefficient of the price function.
    C2,
    /// Standard deviation of Gaussian external noise.
    NoiseSigma,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Spacing {
    Linear,
    Log,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    #[serde(default)]
    pub parameter: SweepParameter,
    /// Explicit grid, or `start`/`stop`/`points`/`spacing`.
    pub values: Option<Vec<f64>>,
    pub start: Option<f64>,
    pub stop: Option<f64>,
    pub points: Option<usize>,
    pub spacing: Option<Spacing>,
    /// Warm-start each point from the previous one.
    #[serde(default = "yes")]
    pub continuation: bool,
}

fn yes() -> bool {
    true
}

impl SweepSection {
    pub fn grid(&self) -> Result<Vec<f64>, CliError> {
        let v = match (&self.values, self.start, self.stop, self.points) {
            (Some(v), None, None, None) => v.clone(),
            (None, Some(a), Some(b), Some(k)) if k >= 2 => match self.spacing.unwrap_or(Spacing::Linear) {
                Spacing::Linear => (0..k).map(|j| a + (b - a) * j as f64 / (k - 1) as f64).collect(),
                Spacing::Log => {
                    if a <= 0.0 || b <= 0.0 {
                        return Err(CliError::validation("sweep", "log spacing needs positive start and stop"));
                    }
                    let mut v: Vec<f64> = (0..k).map(|j| (a.ln() + (b.ln() - a.ln()) * j as f64 / (k - 1) as f64).exp()).collect();
                    (v[0], v[k - 1]) = (a, b);
                    v
                }
            },
            _ => return Err(CliError::validation("sweep", "give either `values` or all of `start`, `stop`, `points` (>= 2)")),
        };
        if v.is_empty() {
            return Err(CliError::validation("sweep.values", "grid is empty"));
        }
        if v.windows(2).any(|w| w[0] >= w[1]) {
            return Err(CliError::validation("sweep.values", "grid must be strictly increasing"));
        }
        if v.iter().any(|x| !x.is_finite()) {
            return Err(CliError::validation("sweep.values", "grid values must be finite"));
        }
        if self.parameter == SweepParameter::Alpha && v[0] <= 0.0 {
            return Err(CliError::validation("sweep.values", "alpha values must be > 0"));
        }
        if self.parameter == SweepParameter::NoiseSigma && v[0] < 0.0 {
            return Err(CliError::validation("sweep.values", "noise sigma must be >= 0"));
        }
        Ok(v)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSection {
    pub alpha: Option<f64>,
    pub tolerance: Option<f64>,
    pub max_iter: Option<usize>,
    pub damping: Option<f64>,
    pub quadrature_order: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateSection {
    #[serde(default = "default_bins")]
    pub histogram_bins: usize,
    /// Also write every member's full `t,mu,eta,A,g_t` series.
    #[serde(default)]
    pub write_series: bool,
}

fn default_bins() -> usize {
    60
}

impl Default for SimulateSection {
    fn default() -> Self {
        Self { histogram_bins: default_bins(), write_series: false }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DynamicsSection {
    /// Tracked agents per seed (the first `agents` indices).
    #[serde(default = "default_agents")]
    pub agents: usize,
    /// Extra linear sampling stride after `10·P`, in units of `P`.
    #[serde(default = "default_stride")]
    pub stride_per_p: f64,
    /// Tracked agents per seed written to CSV (all go to the binary file).
    #[serde(default = "default_csv_agents")]
    pub csv_agents: usize,
    pub decorrelation: Option<DecorrelationSection>,
}

fn default_agents() -> usize {
    100
}
fn default_stride() -> f64 {
    0.1
}
fn default_csv_agents() -> usize {
    10
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DecorrelationSection {
    /// Agents of the smaller system; the larger has four times as many, at the game's α.
    pub n_small: usize,
    #[serde(default = "default_pairs")]
    pub pairs: usize,
    #[serde(default = "default_decor_t")]
    pub t_per_p: f64,
    #[serde(default = "default_decor_warmup")]
    pub warmup_per_p: f64,
}

fn default_pairs() -> usize {
    1000
}
fn default_decor_t() -> f64 {
    4100.0
}
fn default_decor_warmup() -> f64 {
    100.0
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CompareSection {
    #[serde(default = "tol5")]
    pub sigma: f64,
    #[serde(default = "tol5")]
    pub q_x: f64,
    #[serde(default = "tol5", rename = "q_A")]
    pub q_a: f64,
    #[serde(default = "tol5")]
    pub phi: f64,
    #[serde(default = "tol_ks")]
    pub ks: f64,
    /// `|ḡ|` must stay within this many standard errors of zero.
    #[serde(default = "three")]
    pub gbar_sigmas: f64,
    /// Simulate with this bias instead of the solver's `b`.
    pub bias_override: Option<f64>,
}

fn tol5() -> f64 {
    0.05
}
fn tol_ks() -> f64 {
    0.02
}
fn three() -> f64 {
    3.0
}

impl Default for CompareSection {
    fn default() -> Self {
        Self { sigma: 0.05, q_x: 0.05, q_a: 0.05, phi: 0.05, ks: 0.02, gbar_sigmas: 3.0, bias_override: None }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    pub dir: Option<PathBuf>,
    pub workers: Option<usize>,
}

/// Reads and parses a config file; syntax and unknown-field errors carry
/// the line and column reported by the parser.
pub fn load(path: &Path) -> Result<RunConfig, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::validation("config", format!("cannot read {}: {e}", path.display())))?;
    parse(&text)
}

pub fn parse(text: &str) -> Result<RunConfig, CliError> {
    toml::from_str(text).map_err(|e| CliError::Validation(format!("config: {e}")))
}

/// A fully resolved game.
#[derive(Clone, Debug, PartialEq)]
pub struct ResolvedGame {
    pub cfg: GameConfig,
}

impl RunConfig {
    /// Checks everything `mode` needs before any work starts.
    pub fn validate(&self, mode: Mode) -> Result<(), CliError> {
        if let Some(m) = self.mode {
            if m != mode {
                return Err(CliError::validation("mode", format!("config is for `{}`, command is `{}`", m.name(), mode.name())));
            }
        }
        if self.ensemble.size < 1 {
            return Err(CliError::validation("ensemble.size", "must be >= 1"));
        }
        if let Some(w) = self.output.workers {
            if w < 1 {
                return Err(CliError::validation("output.workers", "must be >= 1"));
            }
        }
        if let Some(sw) = &self.sweep {
            sw.grid()?;
        }
        self.solver_options()?;
        // price and noise parse for every command
        self.noise_model()?;
        self.price_function(None)?;
        match mode {
            Mode::Simulate => {
                if let Some(sw) = &self.sweep {
                    if sw.parameter != SweepParameter::Alpha {
                        return Err(CliError::validation("sweep.parameter", "simulate sweeps only over alpha"));
                    }
                    if self.game.p.is_some() || self.game.alpha.is_some() {
                        return Err(CliError::validation("game.p", "an alpha sweep sets P; remove game.p and game.alpha"));
                    }
                    for a in sw.grid()? {
                        self.game(Some(a))?;
                    }
                } else {
                    self.game(None)?;
                }
                if self.simulate.histogram_bins < 1 {
                    return Err(CliError::validation("simulate.histogram_bins", "must be >= 1"));
                }
            }
            Mode::Solve => {
                self.theory_alpha()?;
            }
            Mode::Sweep => {
                let sw = self.sweep.as_ref().ok_or_else(|| CliError::validation("sweep", "missing [sweep] table"))?;
                if sw.parameter != SweepParameter::Alpha {
                    self.theory_alpha()?;
                }
                if sw.parameter == SweepParameter::C2 && !matches!(self.price, PriceSection::Polynomial { ref coefficients, .. } if coefficients.len() >= 2) {
                    return Err(CliError::validation("sweep.parameter", "c2 sweeps need a polynomial price with at least two coefficients"));
                }
                if sw.parameter == SweepParameter::NoiseSigma && !matches!(self.noise, NoiseSection::None | NoiseSection::Gaussian { .. }) {
                    return Err(CliError::validation("sweep.parameter", "noise_sigma sweeps need Gaussian (or no) noise"));
                }
            }
            Mode::Dynamics => {
                let g = self.game(None)?;
                if g.cfg.s != 2 {
                    return Err(CliError::validation("game.s", format!("dynamics needs S = 2, got {}", g.cfg.s)));
                }
                let d = self.dynamics.as_ref().ok_or_else(|| CliError::validation("dynamics", "missing [dynamics] table"))?;
                if d.agents < 1 || d.agents > g.cfg.n {
                    return Err(CliError::validation("dynamics.agents", format!("must be in 1..={}", g.cfg.n)));
                }
                if !(d.stride_per_p > 0.0) {
                    return Err(CliError::validation("dynamics.stride_per_p", "must be > 0"));
                }
                if let Some(dc) = &d.decorrelation {
                    if dc.n_small < 2 || dc.pairs < 1 || !(dc.t_per_p > dc.warmup_per_p) || dc.warmup_per_p < 0.0 {
                        return Err(CliError::validation("dynamics.decorrelation", "need n_small >= 2, pairs >= 1, t_per_p > warmup_per_p >= 0"));
                    }
                }
            }
            Mode::Compare => {
                let g = self.game(None)?;
                if g.cfg.s != 2 {
                    return Err(CliError::validation("game.s", "compare needs S = 2"));
                }
                if self.game.b.is_some() {
                    return Err(CliError::validation("game.b", "compare simulates at the solver's bias; use compare.bias_override"));
                }
                if let Some(a) = self.solver.alpha {
                    if (a - g.cfg.alpha()).abs() > 1e-12 {
                        return Err(CliError::validation(
                            "solver.alpha",
                            format!("mismatched parameter sets: solver alpha {a} but simulated P/N = {}", g.cfg.alpha()),
                        ));
                    }
                }
                let c = &self.compare;
                if [c.sigma, c.q_x, c.q_a, c.phi, c.ks, c.gbar_sigmas].iter().any(|t| !(*t > 0.0)) {
                    return Err(CliError::validation("compare", "tolerances must be > 0"));
                }
            }
            Mode::AlphaC => {}
        }
        Ok(())
    }

    pub fn noise_model(&self) -> Result<NoiseModel, CliError> {
        let r = match &self.noise {
            NoiseSection::None => Ok(NoiseModel::none()),
            NoiseSection::Gaussian { sigma } => NoiseModel::gaussian(*sigma),
            NoiseSection::Discrete { values, probs } => NoiseModel::discrete(values.clone(), probs.clone()),
        };
        r.map_err(|e| CliError::validation("noise", e.to_string()))
    }

    /// Price function; `n` widens the default range of a linear price to
    /// every reachable `A`.
    pub fn price_function(&self, n: Option<usize>) -> Result<PriceFunction, CliError> {
        let noise_sd = self.noise_model()?.variance().sqrt();
        let range = |r: &Option<[f64; 2]>, fallback: f64| -> Result<OperatingRange, CliError> {
            match r {
                Some([lo, hi]) => OperatingRange::new(*lo, *hi),
                None => OperatingRange::new(-fallback, fallback),
            }
            .map_err(|e| CliError::validation("price.range", e.to_string()))
        };
        // |A| ≤ √N always; Gaussian noise is given 8 standard deviations
        let reach = n.map(|n| (n as f64).sqrt()).unwrap_or(10.0) + 8.0 * noise_sd;
        let smooth = 8.0 * (1.0 + noise_sd * noise_sd).sqrt();
        let r = match &self.price {
            PriceSection::Linear { range: r } => Ok(PriceFunction::linear(range(r, reach.max(smooth))?)),
            PriceSection::Polynomial { coefficients, range: r } => PriceFunction::polynomial(coefficients.clone(), range(r, smooth)?),
            PriceSection::Tabulated { x, y, range: r } => {
                let rr = match r {
                    Some(_) => Some(range(r, 0.0)?),
                    None => None,
                };
                PriceFunction::tabulated(x.clone(), y.clone(), rr)
            }
        };
        r.map_err(|e| CliError::validation("price", e.to_string()))
    }

    pub fn solver_options(&self) -> Result<SolverOptions, CliError> {
        let mut o = SolverOptions::default();
        let s = &self.solver;
        if let Some(t) = s.tolerance {
            if !(t > 0.0) {
                return Err(CliError::validation("solver.tolerance", "must be > 0"));
            }
            o.tol = t;
        }
        if let Some(m) = s.max_iter {
            if m < 1 {
                return Err(CliError::validation("solver.max_iter", "must be >= 1"));
            }
            o.max_iter = m;
        }
        if let Some(d) = s.damping {
            if !(d > 0.0 && d <= 1.0) {
                return Err(CliError::validation("solver.damping", "must be in (0, 1]"));
            }
            o.damping = d;
        }
        if let Some(q) = s.quadrature_order {
            if !(2..=512).contains(&q) {
                return Err(CliError::validation("solver.quadrature_order", "must be in 2..=512"));
            }
        }
        Ok(o)
    }

    pub fn cavity_model(&self) -> Result<CavityModel, CliError> {
        let m = CavityModel::new(self.price_function(self.game.n)?, self.noise_model()?);
        Ok(match self.solver.quadrature_order {
            Some(q) => m.with_order(q),
            None => m,
        })
    }

    /// α for theory commands: `solver.alpha`, else the game's α.
    pub fn theory_alpha(&self) -> Result<f64, CliError> {
        let a = match (self.solver.alpha, self.game.alpha, self.game.p, self.game.n) {
            (Some(a), _, _, _) => a,
            (None, Some(a), None, _) => a,
            (None, None, Some(p), Some(n)) => p as f64 / n as f64,
            (None, Some(_), Some(p), Some(n)) => p as f64 / n as f64,
            _ => return Err(CliError::validation("solver.alpha", "no alpha: set solver.alpha or game.alpha / game.p and game.n")),
        };
        if !(a > 0.0 && a.is_finite()) {
            return Err(CliError::validation("solver.alpha", format!("must be > 0, got {a}")));
        }
        Ok(a)
    }

    /// Game parameters, optionally at a different α (`P = round(α·N)`).
    pub fn game(&self, alpha: Option<f64>) -> Result<ResolvedGame, CliError> {
        let g = &self.game;
        let n = g.n.ok_or_else(|| CliError::validation("game.n", "required"))?;
        if n < 1 {
            return Err(CliError::validation("game.n", "must be >= 1"));
        }
        let p = match (alpha, g.p, g.alpha) {
            (Some(a), _, _) => (a * n as f64).round() as usize,
            (None, Some(p), None) => p,
            (None, None, Some(a)) => {
                if !(a > 0.0) {
                    return Err(CliError::validation("game.alpha", "must be > 0"));
                }
                (a * n as f64).round() as usize
            }
            (None, Some(p), Some(a)) => {
                if ((a * n as f64).round() as usize) != p {
                    return Err(CliError::validation("game.p", format!("P = {p} contradicts alpha = {a} at N = {n}")));
                }
                p
            }
            (None, None, None) => return Err(CliError::validation("game.p", "set game.p or game.alpha")),
        };
        if p < 1 {
            return Err(CliError::validation("game.p", "P must be >= 1"));
        }
        let t = match (g.t, g.t_per_p) {
            (Some(t), None) => t,
            (None, tp) => (tp.unwrap_or(200.0) * p as f64).round() as u64,
            (Some(_), Some(_)) => return Err(CliError::validation("game.t", "set only one of t and t_per_p")),
        };
        let warmup = match (g.warmup, g.warmup_per_p) {
            (Some(w), None) => w,
            (None, Some(wp)) => (wp * p as f64).round() as u64,
            (None, None) => GameConfig::default_warmup(p).min(t / 2),
            (Some(_), Some(_)) => return Err(CliError::validation("game.warmup", "set only one of warmup and warmup_per_p")),
        };
        let cfg = GameConfig {
            n,
            p,
            s: g.s.unwrap_or(2),
            b: g.b.unwrap_or(0.0),
            price: self.price_function(Some(n))?,
            noise: self.noise_model()?,
            t,
            seed: self.ensemble.seed,
            warmup,
        };
        cfg.validate().map_err(|e| CliError::validation("game", e.to_string()))?;
        Ok(ResolvedGame { cfg })
    }

    /// The config with everything that cannot change results removed,
    /// used for the provenance hash.
    pub fn fingerprint(&self) -> RunConfig {
        let mut c = self.clone();
        c.output = OutputSection::default();
        c
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_simulate_config() {
        let c = parse("[game]\nn = 101\nalpha = 0.5\n").unwrap();
        c.validate(Mode::Simulate).unwrap();
        let g = c.game(None).unwrap().cfg;
        assert_eq!((g.n, g.p, g.t, g.s), (101, 51, 200 * 51, 2));
        assert_eq!(g.warmup, 5100);
    }

    #[test]
    fn unknown_field_reports_location() {
        let e = parse("[game]\nn = 10\nbogus = 1\n").unwrap_err();
        let msg = e.to_string();
        assert!(msg.contains("bogus") && msg.contains("line 3"), "{msg}");
    }

    #[test]
    fn empty_ensemble_rejected() {
        let c = parse("[game]\nn = 11\np = 5\n[ensemble]\nsize = 0\n").unwrap();
        assert!(matches!(c.validate(Mode::Simulate), Err(CliError::Validation(m)) if m.contains("ensemble.size")));
    }

    #[test]
    fn sweep_grid_rules() {
        let c = parse("[sweep]\nvalues = [0.5, 0.4]\n").unwrap();
        assert!(c.validate(Mode::Sweep).is_err());
        let c = parse("[sweep]\nvalues = [-1.0, 0.4]\n").unwrap();
        assert!(c.validate(Mode::Sweep).is_err());
        let c = parse("[sweep]\nstart = 0.5\nstop = 8.0\npoints = 5\nspacing = \"log\"\n").unwrap();
        let g = c.sweep.as_ref().unwrap().grid().unwrap();
        assert!((g[2] - 2.0).abs() < 1e-12 && (g[4] - 8.0).abs() < 1e-12);
        assert!(parse("mode = \"sweep\"\n").unwrap().validate(Mode::Sweep).is_err());
    }

    #[test]
    fn mode_mismatch_and_s3_dynamics() {
        let c = parse("mode = \"solve\"\n[solver]\nalpha = 1.0\n").unwrap();
        assert!(c.validate(Mode::Sweep).is_err());
        c.validate(Mode::Solve).unwrap();
        let c = parse("[game]\nn = 11\np = 5\ns = 3\n[dynamics]\nagents = 2\n").unwrap();
        assert!(matches!(c.validate(Mode::Dynamics), Err(CliError::Validation(m)) if m.contains("S = 2")));
    }

    #[test]
    fn compare_refuses_mismatched_alpha() {
        let c = parse("[game]\nn = 100\np = 100\n[solver]\nalpha = 2.0\n").unwrap();
        assert!(matches!(c.validate(Mode::Compare), Err(CliError::Validation(m)) if m.contains("mismatched")));
    }

    #[test]
    fn price_and_noise_tables() {
        let c = parse("[price]\nkind = \"polynomial\"\ncoefficients = [1.0, 0.05, 0.05]\n[noise]\nkind = \"gaussian\"\nsigma = 0.5\n[solver]\nalpha = 1.0\n").unwrap();
        c.validate(Mode::Solve).unwrap();
        assert_eq!(c.noise_model().unwrap().variance(), 0.25);
        assert!(!c.price_function(None).unwrap().is_linear());
        assert!(parse("[noise]\nkind = \"gaussian\"\nsigma = 0.5\nextra = 2\n").is_err());
        let bad = parse("[price]\nkind = \"polynomial\"\ncoefficients = [-1.0]\n[solver]\nalpha = 1.0\n").unwrap();
        assert!(bad.validate(Mode::Solve).is_err());
    }

    #[test]
    fn linear_default_range_covers_all_demand() {
        let c = parse("[game]\nn = 400\np = 4\n").unwrap();
        let r = c.game(None).unwrap().cfg.price.range();
        assert!(r.hi >= 20.0 && r.lo <= -20.0);
    }

    #[test]
    fn fingerprint_ignores_output() {
        let a = parse("[game]\nn = 11\np = 5\n[output]\nworkers = 4\n").unwrap();
        let b = parse("[game]\nn = 11\np = 5\n").unwrap();
        assert_eq!(a.fingerprint(), b.fingerprint());
    }
}
