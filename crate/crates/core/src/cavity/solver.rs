//! Damped fixed-point iteration of the stationary cavity equations, the
//! critical-point locator and α sweeps.

use serde::{Deserialize, Serialize};

use super::fields::{
    bias_residual, brent, mean_slope_at, preference_moment, reaction_rg, reaction_rx, signal_moments, Smoother,
    Tolerance,
};
use super::CavityModel;
use crate::error::CavityError;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverOptions {
    /// Convergence threshold on the largest undamped change per outer step.
    pub tol: f64,
    pub max_iter: usize,
    /// Weight of the new iterate in the `(q_x, q_g)` update.
    pub damping: f64,
    /// Smallest accepted `α − (1 − φ)`.
    pub rsb_margin: f64,
    /// Every this many steps, extrapolate `(q_x, q_g)` along the slowest
    /// mode of the last three iterates (0 turns it off).
    pub extrapolate_every: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self { tol: 1e-10, max_iter: 10_000, damping: 0.5, rsb_margin: 1e-3, extrapolate_every: 16 }
    }
}

/// Stationary state predicted by the cavity equations.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CavitySolution {
    pub alpha: f64,
    pub q_x: f64,
    pub q_g: f64,
    #[serde(rename = "q_A")]
    pub q_a: f64,
    #[serde(rename = "R_x")]
    pub r_x: f64,
    #[serde(rename = "R_g")]
    pub r_g: f64,
    pub b: f64,
    pub phi: f64,
    pub sigma: f64,
    /// External noise variance used in `sigma`.
    pub sigma_eta2: f64,
    pub converged: bool,
    pub iterations: usize,
    pub residual: f64,
}

impl CavitySolution {
    /// `α − (1 − φ)`; positive in the replica-symmetric phase.
    pub fn margin(&self) -> f64 {
        self.alpha - (1.0 - self.phi)
    }

    /// `(σ_η², (1 − q_x)/2, q_A)`.
    pub fn sigma2_parts(&self) -> (f64, f64, f64) {
        (self.sigma_eta2, 0.5 * (1.0 - self.q_x), self.q_a)
    }
}

/// Reaction terms at fixed `(q_x, q_g, b)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Reactions {
    pub r_x: f64,
    pub r_g: f64,
    pub phi: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OrderParams {
    pub q_x: f64,
    pub q_g: f64,
    pub q_a: f64,
}

/// Solves the coupled pair `R_x(R_g)`, `R_g(R_x)` at fixed order parameters.
///
/// `f(R_g) = R_g − R_g(R_x(R_g))` is positive at zero and negative for
/// large negative `R_g`, so it is bracketed by doubling and handed to Brent.
pub fn solve_reactions(alpha: f64, q_x: f64, q_g: f64, b: f64, model: &CavityModel, hint: f64) -> Result<Reactions, CavityError> {
    let noise = model.effective_noise(q_x);
    let sm = Smoother::new(&model.price, &noise, &model.quadrature);
    let quad = &model.quadrature;
    let f = |r_g: f64| -> Result<f64, CavityError> {
        let r_x = reaction_rx(alpha, r_g, q_x, b, &sm, quad)?;
        Ok(r_g - reaction_rg(alpha, r_x, q_g)?.0)
    };
    let mut lo = (2.0 * hint).min(-1e-3);
    let mut flo = f(lo)?;
    let mut hi = 0.0;
    if flo > 0.0 {
        // move the upper end down with the lower one to keep the bracket tight
        let mut tries = 0;
        while flo > 0.0 {
            hi = lo;
            lo *= 4.0;
            flo = f(lo)?;
            tries += 1;
            if tries > 40 || !lo.is_finite() {
                return Err(CavityError::NoBracket);
            }
        }
    } else if hint < 0.0 {
        let mid = 0.5 * hint;
        if f(mid)? < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let r_g = brent(lo, hi, Tolerance { x_rel: 1e-15, y_abs: 0.0, max_iter: 200 }, f)?;
    let r_x = reaction_rx(alpha, r_g, q_x, b, &sm, quad)?;
    let (r_g, phi) = reaction_rg(alpha, r_x, q_g)?;
    Ok(Reactions { r_x, r_g, phi })
}

/// Bias `b` solving `∫ ĝ(z_g) P(z_g) dz_g = 0`; the residual is increasing in `b`.
pub fn solve_bias(r_g: f64, q_x: f64, model: &CavityModel, guess: f64) -> Result<f64, CavityError> {
    let noise = model.effective_noise(q_x);
    let sm = Smoother::new(&model.price, &noise, &model.quadrature);
    let h = |b: f64| bias_residual(b, r_g, q_x, &sm, &model.quadrature);
    let h0 = h(guess)?;
    if h0 == 0.0 {
        return Ok(guess);
    }
    let dir = if h0 > 0.0 { -1.0 } else { 1.0 };
    let mut step = 0.05_f64.max(h0.abs());
    let mut prev = guess;
    let mut bracket = None;
    for _ in 0..60 {
        let probe = guess + dir * step;
        let hp = h(probe)?;
        if !hp.is_finite() {
            break;
        }
        if hp == 0.0 {
            return Ok(probe);
        }
        if hp.signum() != h0.signum() {
            bracket = Some((prev, probe));
            break;
        }
        prev = probe;
        step *= 2.0;
    }
    let (a, c) = bracket.ok_or(CavityError::NoBracket)?;
    let b = brent(a, c, Tolerance { x_rel: 1e-16, y_abs: 1e-15, max_iter: 200 }, h)?;
    if h(b)?.abs() > 1e-10 {
        return Err(CavityError::NoBracket);
    }
    Ok(b)
}

/// New `(q_x, q_g, q_A)` from reaction terms and bias.
pub fn update_order_params(
    alpha: f64,
    r_x: f64,
    r_g: f64,
    q_x: f64,
    q_g: f64,
    b: f64,
    model: &CavityModel,
) -> Result<OrderParams, CavityError> {
    let new_qx = preference_moment(alpha, r_x, q_g)?;
    let noise = model.effective_noise(q_x);
    let sm = Smoother::new(&model.price, &noise, &model.quadrature);
    let (new_qg, q_a) = signal_moments(r_g, q_x, b, &sm, &model.quadrature)?;
    Ok(OrderParams { q_x: new_qx, q_g: new_qg, q_a })
}

/// Starting point of the outer iteration.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Start {
    pub q_x: f64,
    pub q_g: f64,
    pub b: f64,
    pub r_x: f64,
    pub r_g: f64,
}

impl Start {
    pub fn default_for(model: &CavityModel) -> Self {
        Self { q_x: 0.5, q_g: 0.1, b: model.price.root(), r_x: -1.0, r_g: -0.1 }
    }

    pub fn from_solution(sol: &CavitySolution) -> Self {
        Self { q_x: sol.q_x, q_g: sol.q_g, b: sol.b, r_x: sol.r_x, r_g: sol.r_g }
    }
}

/// `q_g` below which the iteration is taken to be collapsing into the
/// broken phase.
const COLLAPSED_QG: f64 = 1e-12;

pub fn solve_self_consistent(alpha: f64, model: &CavityModel) -> Result<CavitySolution, CavityError> {
    solve_from(alpha, model, Start::default_for(model), &SolverOptions::default())
}

/// Degenerate fields and reactions during the iteration mean the RS
/// solution has collapsed.
fn collapse(alpha: f64, e: CavityError) -> CavityError {
    match e {
        CavityError::DegenerateField(_) | CavityError::DegenerateReaction(_) => {
            CavityError::ReplicaSymmetryBroken { alpha, margin: 0.0 }
        }
        other => other,
    }
}

pub fn solve_from(alpha: f64, model: &CavityModel, start: Start, opts: &SolverOptions) -> Result<CavitySolution, CavityError> {
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(CavityError::InvalidInput(format!("alpha must be positive, got {alpha}")));
    }
    if !(start.q_g > 0.0 && (0.0..=1.0).contains(&start.q_x)) {
        return Err(CavityError::InvalidInput("start needs q_g > 0 and q_x in [0, 1]".into()));
    }
    let Start { mut q_x, mut q_g, mut b, mut r_x, mut r_g } = start;
    let mut residual = f64::INFINITY;
    let mut history: Vec<[f64; 2]> = Vec::with_capacity(3);
    let mut thin = 0;
    for it in 1..=opts.max_iter {
        let re = solve_reactions(alpha, q_x, q_g, b, model, r_g).map_err(|e| collapse(alpha, e))?;
        let nb = solve_bias(re.r_g, q_x, model, b)?;
        let op = update_order_params(alpha, re.r_x, re.r_g, q_x, q_g, nb, model).map_err(|e| collapse(alpha, e))?;
        let rel = |new: f64, old: f64| (new - old).abs() / old.abs().max(1.0);
        residual = [
            (op.q_x - q_x).abs(),
            (op.q_g - q_g).abs(),
            (nb - b).abs(),
            rel(re.r_x, r_x),
            rel(re.r_g, r_g),
        ]
        .into_iter()
        .fold(0.0, f64::max);
        q_x += opts.damping * (op.q_x - q_x);
        q_g += opts.damping * (op.q_g - q_g);
        b = nb;
        r_x = re.r_x;
        r_g = re.r_g;
        // accepted solutions have q_g of order margin², far above this
        let margin = re.phi + alpha - 1.0;
        if !(q_g > COLLAPSED_QG) {
            return Err(CavityError::ReplicaSymmetryBroken { alpha, margin });
        }
        // early iterates may dip below the margin; a sustained dip means the
        // iteration is heading into (or crawling along) the broken phase
        thin = if it > 20 && margin < opts.rsb_margin { thin + 1 } else { 0 };
        if thin >= 10 {
            return Err(CavityError::ReplicaSymmetryBroken { alpha, margin });
        }
        if residual < opts.tol {
            return finish(alpha, model, q_x, q_g, b, r_g, it, residual, opts);
        }
        if opts.extrapolate_every > 0 {
            if history.len() == 3 {
                history.remove(0);
            }
            history.push([q_x, q_g]);
            if it % opts.extrapolate_every == 0 && history.len() == 3 {
                if let Some([x, g]) = extrapolate(&history) {
                    q_x = x;
                    q_g = g;
                }
                history.clear();
            }
        }
    }
    Err(CavityError::NotConverged { iterations: opts.max_iter, residual })
}

/// Aitken step on three consecutive iterates when they contract
/// geometrically along a single direction.
fn extrapolate(h: &[[f64; 2]]) -> Option<[f64; 2]> {
    let scale = [h[2][0].abs().max(1e-300), h[2][1].abs().max(1e-300)];
    let d0 = [(h[1][0] - h[0][0]) / scale[0], (h[1][1] - h[0][1]) / scale[1]];
    let d1 = [(h[2][0] - h[1][0]) / scale[0], (h[2][1] - h[1][1]) / scale[1]];
    let dot = |u: [f64; 2], v: [f64; 2]| u[0] * v[0] + u[1] * v[1];
    let n0 = dot(d0, d0);
    if !(n0 > 0.0) {
        return None;
    }
    let lambda = dot(d1, d0) / n0;
    let off = [d1[0] - lambda * d0[0], d1[1] - lambda * d0[1]];
    if !(lambda > 0.5 && lambda < 0.999) || dot(off, off) > 1e-4 * dot(d1, d1) {
        return None;
    }
    let k = lambda / (1.0 - lambda);
    let x = h[2][0] + k * (h[2][0] - h[1][0]);
    let g = h[2][1] + k * (h[2][1] - h[1][1]);
    ((0.0..=1.0).contains(&x) && g > 0.5 * h[2][1]).then_some([x, g])
}

#[allow(clippy::too_many_arguments)]
fn finish(
    alpha: f64,
    model: &CavityModel,
    q_x: f64,
    q_g: f64,
    b: f64,
    r_g_hint: f64,
    iterations: usize,
    residual: f64,
    opts: &SolverOptions,
) -> Result<CavitySolution, CavityError> {
    let re = solve_reactions(alpha, q_x, q_g, b, model, r_g_hint).map_err(|e| collapse(alpha, e))?;
    let op = update_order_params(alpha, re.r_x, re.r_g, q_x, q_g, b, model)?;
    let sigma_eta2 = model.noise.variance();
    let sigma = (sigma_eta2 + 0.5 * (1.0 - q_x) + op.q_a).sqrt();
    let sol = CavitySolution {
        alpha,
        q_x,
        q_g,
        q_a: op.q_a,
        r_x: re.r_x,
        r_g: re.r_g,
        b,
        phi: re.phi,
        sigma,
        sigma_eta2,
        converged: true,
        iterations,
        residual,
    };
    if sol.margin() < opts.rsb_margin {
        return Err(CavityError::ReplicaSymmetryBroken { alpha, margin: sol.margin() });
    }
    Ok(sol)
}

/// Leading-order reaction terms near the transition:
/// `R_x ≈ (1 − φ − α)/2 · G` and `R_g ≈ α/((1 − φ − α) G)` with
/// `G = ⟨g'(b + δ + η)⟩`.
pub fn near_transition_reactions(sol: &CavitySolution, model: &CavityModel) -> (f64, f64) {
    let noise = model.effective_noise(sol.q_x);
    let sm = Smoother::new(&model.price, &noise, &model.quadrature);
    let g = mean_slope_at(sol.b, &sm);
    let d = 1.0 - sol.phi - sol.alpha;
    (0.5 * d * g, sol.alpha / (d * g))
}

/// Result of the critical-point search.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CriticalPoint {
    pub alpha_c: f64,
    /// Frozen fraction extrapolated to `alpha_c`.
    pub phi: f64,
    /// Last α at which the solver still accepted the solution.
    pub alpha_boundary: f64,
    /// Converged probes `(α, margin, φ, R_x)` used for the extrapolation.
    pub probes: Vec<(f64, f64, f64, f64)>,
}

/// Locates `α_c`, the root of `α − (1 − φ(α))`.
///
/// Bisection finds the smallest α at which the solver still accepts the
/// solution (margin ≥ `rsb_margin`); the margin and φ of converged probes
/// just above that boundary are then extrapolated to zero margin with a
/// quadratic fit, since the solver refuses to work at the root itself.
pub fn find_alpha_c(model: &CavityModel) -> Result<CriticalPoint, CavityError> {
    let opts = SolverOptions::default();
    let mut hi = 1.0;
    let mut hi_sol = solve_self_consistent(hi, model)?;
    let mut lo = 0.05;
    let try_at = |alpha: f64, warm: &CavitySolution| -> Option<CavitySolution> {
        solve_from(alpha, model, Start::from_solution(warm), &opts)
            .or_else(|_| solve_from(alpha, model, Start::default_for(model), &opts))
            .ok()
    };
    if try_at(lo, &hi_sol).is_some() {
        return Err(CavityError::InvalidInput("no transition found above alpha = 0.05".into()));
    }
    while hi - lo > 1e-5 {
        let mid = 0.5 * (lo + hi);
        match try_at(mid, &hi_sol) {
            Some(s) => {
                hi = mid;
                hi_sol = s;
            }
            None => lo = mid,
        }
    }
    // probes on the accepted side, walking up by continuation
    let mut probes = Vec::new();
    let mut warm = hi_sol;
    for k in 0..6 {
        let alpha = hi + 0.002 * k as f64;
        let s = if k == 0 { hi_sol } else { solve_from(alpha, model, Start::from_solution(&warm), &opts)? };
        probes.push((alpha, s.margin(), s.phi, s.r_x));
        warm = s;
    }
    let xs: Vec<f64> = probes.iter().map(|p| p.0).collect();
    let margins: Vec<f64> = probes.iter().map(|p| p.1).collect();
    let phis: Vec<f64> = probes.iter().map(|p| p.2).collect();
    let m = quadratic_fit(&xs, &margins);
    // Newton from the boundary on the fitted margin
    let mut alpha_c = hi;
    for _ in 0..50 {
        let (v, d) = (m.eval(alpha_c), m.slope(alpha_c));
        let step = v / d;
        alpha_c -= step;
        if step.abs() < 1e-14 {
            break;
        }
    }
    let phi = quadratic_fit(&xs, &phis).eval(alpha_c);
    Ok(CriticalPoint { alpha_c, phi, alpha_boundary: hi, probes })
}

struct Quadratic {
    x0: f64,
    c: [f64; 3],
}

impl Quadratic {
    fn eval(&self, x: f64) -> f64 {
        let u = x - self.x0;
        self.c[0] + u * (self.c[1] + u * self.c[2])
    }

    fn slope(&self, x: f64) -> f64 {
        self.c[1] + 2.0 * self.c[2] * (x - self.x0)
    }
}

/// Least-squares quadratic through `(x, y)`, centred at the first point.
fn quadratic_fit(xs: &[f64], ys: &[f64]) -> Quadratic {
    let x0 = xs[0];
    let mut a = [[0.0; 3]; 3];
    let mut r = [0.0; 3];
    for (&x, &y) in xs.iter().zip(ys) {
        let u = x - x0;
        let p = [1.0, u, u * u];
        for i in 0..3 {
            r[i] += p[i] * y;
            for j in 0..3 {
                a[i][j] += p[i] * p[j];
            }
        }
    }
    // Gaussian elimination on the 3x3 normal equations
    for k in 0..3 {
        for i in k + 1..3 {
            let f = a[i][k] / a[k][k];
            for j in k..3 {
                a[i][j] -= f * a[k][j];
            }
            r[i] -= f * r[k];
        }
    }
    let mut c = [0.0; 3];
    for i in (0..3).rev() {
        let s: f64 = (i + 1..3).map(|j| a[i][j] * c[j]).sum();
        c[i] = (r[i] - s) / a[i][i];
    }
    Quadratic { x0, c }
}

/// Solves along `alphas` in the given order, each point warm-started from
/// the previous converged one.
pub fn sweep_continuation(alphas: &[f64], model: &CavityModel) -> Vec<Result<CavitySolution, CavityError>> {
    let opts = SolverOptions::default();
    let mut warm: Option<CavitySolution> = None;
    alphas
        .iter()
        .map(|&alpha| {
            let start = warm.as_ref().map(Start::from_solution).unwrap_or_else(|| Start::default_for(model));
            let res = solve_from(alpha, model, start, &opts).or_else(|e| match warm {
                Some(_) => solve_from(alpha, model, Start::default_for(model), &opts),
                None => Err(e),
            });
            if let Ok(s) = &res {
                warm = Some(*s);
            }
            res
        })
        .collect()
}

/// Independent solves from the default start, in parallel when available.
pub fn sweep_independent(alphas: &[f64], model: &CavityModel) -> Vec<Result<CavitySolution, CavityError>> {
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        alphas.par_iter().map(|&a| solve_self_consistent(a, model)).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        alphas.iter().map(|&a| solve_self_consistent(a, model)).collect()
    }
}

pub const SWEEP_HEADER: &str = "alpha,sigma,q_x,q_g,q_A,R_x,R_g,b,phi,converged";

/// One CSV row; failed points carry NaNs and `converged = false`.
pub fn sweep_row(alpha: f64, res: &Result<CavitySolution, CavityError>) -> String {
    match res {
        Ok(s) => format!(
            "{},{},{},{},{},{},{},{},{},true",
            s.alpha, s.sigma, s.q_x, s.q_g, s.q_a, s.r_x, s.r_g, s.b, s.phi
        ),
        Err(_) => format!("{alpha},NaN,NaN,NaN,NaN,NaN,NaN,NaN,NaN,false"),
    }
}
