//! Stationary observables of a finished run: volatility, preferences,
//! conditional market means, the three-way volatility split and `ḡ`.
//!
//! Averages run over the post-warmup window. Standard errors use the
//! non-overlapping batches recorded by the engine.

use serde::{Deserialize, Serialize};

use crate::engine::TimeSeries;
use crate::error::MeasureError;
use crate::stats;

/// `|x_i| ≥ 1 − EPS_FROZEN` counts as frozen.
pub const EPS_FROZEN: f64 = 0.01;
/// Minimum post-warmup visits per signal for conditional means.
pub const MIN_VISITS: u64 = 50;

fn check_window(ts: &TimeSeries) -> Result<usize, MeasureError> {
    match ts.window_len() {
        0 => Err(MeasureError::EmptyWindow),
        w => Ok(w as usize),
    }
}

/// Like [`check_window`] for observables that read the per-step series.
fn check_series(ts: &TimeSeries) -> Result<usize, MeasureError> {
    let w = check_window(ts)?;
    if !ts.has_series() {
        return Err(MeasureError::SeriesDiscarded);
    }
    Ok(w)
}

/// `σ = √ mean (A + η − b)²` over the window.
pub fn volatility(ts: &TimeSeries, b: f64) -> Result<f64, MeasureError> {
    let w = check_series(ts)?;
    let s: f64 = ts.window_a().iter().zip(ts.window_eta()).map(|(a, e)| (a + e - b).powi(2)).sum();
    Ok((s / w as f64).sqrt())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Preferences {
    pub x: Vec<f64>,
    pub q_x: f64,
    pub phi: f64,
}

/// Window means `x_i` of `x_i^t`, with `q_x` and the frozen fraction.
pub fn strategy_preferences(ts: &TimeSeries) -> Result<Preferences, MeasureError> {
    if ts.s != 2 {
        return Err(MeasureError::WrongS(ts.s));
    }
    let w = check_window(ts)? as f64;
    let counts = ts.x_counts.as_ref().ok_or(MeasureError::WrongS(ts.s))?;
    let x: Vec<f64> = counts.iter().map(|&c| c as f64 / w).collect();
    Ok(preferences_from(x))
}

pub(crate) fn preferences_from(x: Vec<f64>) -> Preferences {
    let n = x.len() as f64;
    let q_x = x.iter().map(|v| v * v).sum::<f64>() / n;
    let phi = x.iter().filter(|v| v.abs() >= 1.0 - EPS_FROZEN).count() as f64 / n;
    Preferences { x, q_x, phi }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConditionalMarket {
    pub a_mu: Vec<f64>,
    pub g_mu: Vec<f64>,
    /// Bias-corrected `(1/P) Σ (A_μ − b)²`.
    pub q_a: f64,
    /// Bias-corrected `(1/P) Σ g_μ²`.
    pub q_g: f64,
    /// The subtracted sampling-variance terms.
    pub q_a_correction: f64,
    pub q_g_correction: f64,
}

/// Per-signal means of `A^t` and `g_t`.
///
/// The plug-in `(A_μ − b)²` overstates its target by `Var(A|μ)/n_μ`; the
/// estimate of that term is subtracted (same for `g_μ²`).
pub fn conditional_market(ts: &TimeSeries, b: f64) -> Result<ConditionalMarket, MeasureError> {
    check_window(ts)?;
    let starved: Vec<usize> = ts.per_mu.iter().enumerate().filter(|(_, m)| m.count < MIN_VISITS).map(|(k, _)| k).collect();
    if !starved.is_empty() {
        return Err(MeasureError::InsufficientCoverage { min: MIN_VISITS, starved });
    }
    let p = ts.p as f64;
    let (mut a_mu, mut g_mu) = (Vec::with_capacity(ts.p), Vec::with_capacity(ts.p));
    let (mut qa, mut qg, mut ca, mut cg) = (0.0, 0.0, 0.0, 0.0);
    for m in &ts.per_mu {
        let n = m.count as f64;
        let (ma, mg) = (m.sum_a / n, m.sum_g / n);
        // unbiased within-signal variances
        let va = ((m.sum_a2 - n * ma * ma) / (n - 1.0)).max(0.0);
        let vg = ((m.sum_g2 - n * mg * mg) / (n - 1.0)).max(0.0);
        qa += (ma - b).powi(2);
        qg += mg * mg;
        ca += va / n;
        cg += vg / n;
        a_mu.push(ma);
        g_mu.push(mg);
    }
    Ok(ConditionalMarket {
        a_mu,
        g_mu,
        q_a: (qa - ca) / p,
        q_g: (qg - cg) / p,
        q_a_correction: ca / p,
        q_g_correction: cg / p,
    })
}

/// `σ² ≈ σ_η² + (1 − q_x)/2 + q_A`, with the measured `σ²` alongside.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Decomposition {
    /// Window mean of `η²`.
    pub sigma_eta2: f64,
    pub switching: f64,
    pub information: f64,
    pub sum: f64,
    pub sigma2: f64,
    /// `σ² − sum`.
    pub residual: f64,
    /// Delta-method standard error of `residual`.
    pub residual_se: f64,
    /// Batch-means standard error of `σ²`.
    pub sigma2_se: f64,
}

impl Decomposition {
    /// Residual in units of its standard error.
    pub fn z_score(&self) -> f64 {
        self.residual / self.residual_se
    }
}

/// Three-way split of `σ²` and its reconciliation with [`volatility`].
///
/// The standard error linearises `σ² − η² − (1 − q_x)/2 − q_A` around the
/// window estimates and takes batch means of the resulting influence
/// function, so correlations between the parts are accounted for.
pub fn decompose_volatility(ts: &TimeSeries, b: f64) -> Result<Decomposition, MeasureError> {
    let w = check_series(ts)?;
    let prefs = strategy_preferences(ts)?;
    let cm = conditional_market(ts, b)?;
    let sigma2 = volatility(ts, b)?.powi(2);
    let sigma_eta2 = ts.window_eta().iter().map(|e| e * e).sum::<f64>() / w as f64;
    let switching = 0.5 * (1.0 - prefs.q_x);
    let sum = sigma_eta2 + switching + cm.q_a;

    let bt = &ts.batches;
    let k = bt.count;
    if k < 2 {
        return Err(MeasureError::TooFewBatches(k));
    }
    let (n, p, len) = (ts.n, ts.p, bt.len as usize);
    let kf = k as f64;
    let a = ts.window_a();
    let eta = ts.window_eta();
    let mut psi = Vec::with_capacity(k);
    let mut s2_batches = Vec::with_capacity(k);
    for j in 0..k {
        let r = j * len..(j + 1) * len;
        let s2: f64 = a[r.clone()].iter().zip(&eta[r.clone()]).map(|(a, e)| (a + e - b).powi(2)).sum::<f64>() / len as f64;
        let e2: f64 = eta[r].iter().map(|e| e * e).sum::<f64>() / len as f64;
        let xb = &bt.x[j * n..(j + 1) * n];
        let dx: f64 = prefs.x.iter().zip(xb).map(|(x, &c)| x * (c as f64 / len as f64 - x)).sum::<f64>() / n as f64;
        let mut da = 0.0;
        for mu in 0..p {
            let nbar = ts.per_mu[mu].count as f64 / kf;
            let cnt = bt.mu_count[j * p + mu] as f64;
            let am = cm.a_mu[mu];
            da += 2.0 * (am - b) * (bt.mu_a[j * p + mu] - am * cnt) / nbar;
        }
        da /= p as f64;
        s2_batches.push(s2);
        psi.push(s2 - e2 + dx - da);
    }
    Ok(Decomposition {
        sigma_eta2,
        switching,
        information: cm.q_a,
        sum,
        sigma2,
        residual: sigma2 - sum,
        residual_se: stats::batch_means_se(&psi),
        sigma2_se: stats::batch_means_se(&s2_batches),
    })
}

/// Window mean of `g_t` and its batch-means standard error (NaN with
/// fewer than two batches).
pub fn gbar(ts: &TimeSeries) -> (f64, f64) {
    let g = ts.window_g();
    if g.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let bt = &ts.batches;
    let means: Vec<f64> = bt.g.iter().map(|s| s / bt.len as f64).collect();
    (stats::mean(g), stats::batch_means_se(&means))
}

/// Window over which an [`ObservableSet`] was measured.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WindowInfo {
    pub warmup: u64,
    pub steps: u64,
    pub batch_len: u64,
    pub batches: usize,
    pub eps_frozen: f64,
}

/// Every stationary observable of one run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ObservableSet {
    pub sigma: f64,
    pub sigma_se: f64,
    /// `(σ_η², (1 − q_x)/2, q_A)`.
    pub sigma2_parts: (f64, f64, f64),
    pub identity_residual: f64,
    pub identity_se: f64,
    pub q_x: f64,
    #[serde(rename = "q_A")]
    pub q_a: f64,
    pub q_g: f64,
    pub phi: f64,
    pub b_used: f64,
    pub gbar: f64,
    pub gbar_se: f64,
    pub kurtosis_a: f64,
    pub x: Vec<f64>,
    #[serde(rename = "A_mu")]
    pub a_mu: Vec<f64>,
    pub g_mu: Vec<f64>,
    pub window: WindowInfo,
}

/// Measures everything at once; `b` is the bias the deviations refer to.
pub fn observables(ts: &TimeSeries, b: f64) -> Result<ObservableSet, MeasureError> {
    let sigma = volatility(ts, b)?;
    let prefs = strategy_preferences(ts)?;
    let cm = conditional_market(ts, b)?;
    let d = decompose_volatility(ts, b)?;
    let (gm, gse) = gbar(ts);
    Ok(ObservableSet {
        sigma,
        // ∂σ = ∂σ² / 2σ
        sigma_se: d.sigma2_se / (2.0 * sigma),
        sigma2_parts: (d.sigma_eta2, d.switching, d.information),
        identity_residual: d.residual,
        identity_se: d.residual_se,
        q_x: prefs.q_x,
        q_a: cm.q_a,
        q_g: cm.q_g,
        phi: prefs.phi,
        b_used: b,
        gbar: gm,
        gbar_se: gse,
        kurtosis_a: stats::excess_kurtosis(ts.window_a()),
        x: prefs.x,
        a_mu: cm.a_mu,
        g_mu: cm.g_mu,
        window: WindowInfo {
            warmup: ts.warmup,
            steps: ts.window_len(),
            batch_len: ts.batches.len,
            batches: ts.batches.count,
            eps_frozen: EPS_FROZEN,
        },
    })
}

/// Two-column `bin_center,density` CSV of the window's `A^t + η^t`.
pub fn write_demand_histogram<W: std::io::Write>(ts: &TimeSeries, bins: usize, mut w: W) -> std::io::Result<()> {
    let d: Vec<f64> = ts.window_a().iter().zip(ts.window_eta()).map(|(a, e)| a + e).collect();
    let (lo, hi) = d.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), &v| (l.min(v), h.max(v)));
    let pad = 1e-9 * (hi - lo).abs().max(1.0);
    writeln!(w, "bin_center,density")?;
    if d.is_empty() {
        return Ok(());
    }
    for (c, rho) in stats::histogram(&d, lo - pad, hi + pad, bins.max(1)) {
        writeln!(w, "{c},{rho}")?;
    }
    Ok(())
}
