//! Market primitives: the price function `g` mapping excess demand to a
//! return, and the external noise `η` added to the agents' arbitrage.

use rand::distr::weighted::WeightedIndex;
use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::MarketError;

/// Number of grid points used to certify `g' > 0` at construction.
const MONOTONE_GRID: usize = 10_000;

/// Half-width of the default operating range in units of the expected volatility.
pub const DEFAULT_RANGE_SIGMAS: f64 = 8.0;

/// Closed interval of excess demand on which a price function is trusted.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OperatingRange {
    pub lo: f64,
    pub hi: f64,
}

impl OperatingRange {
    pub fn new(lo: f64, hi: f64) -> Result<Self, MarketError> {
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(MarketError::InvalidRange { lo, hi });
        }
        Ok(Self { lo, hi })
    }

    /// `[-8σ, +8σ]` around zero for a caller-supplied expected volatility.
    pub fn around_sigma(sigma_expected: f64) -> Result<Self, MarketError> {
        let w = DEFAULT_RANGE_SIGMAS * sigma_expected;
        Self::new(-w, w)
    }

    pub fn contains(&self, x: f64) -> bool {
        x >= self.lo && x <= self.hi
    }

    pub fn grid(&self, n: usize) -> impl Iterator<Item = f64> + '_ {
        let step = (self.hi - self.lo) / (n - 1) as f64;
        (0..n).map(move |k| self.lo + step * k as f64)
    }
}

/// Monotone piecewise-cubic Hermite interpolant (Fritsch–Carlson slopes).
///
/// Outside the breakpoints the table is continued linearly with the end
/// slopes, which keeps the extension monotone as well.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MonotoneCubic {
    xs: Vec<f64>,
    ys: Vec<f64>,
    slopes: Vec<f64>,
}

impl MonotoneCubic {
    pub fn new(xs: Vec<f64>, ys: Vec<f64>) -> Result<Self, MarketError> {
        let n = xs.len();
        if n < 2 || ys.len() != n {
            return Err(MarketError::BadTable("need at least two (x, y) pairs of equal length".into()));
        }
        if xs.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(MarketError::BadTable("breakpoints must be strictly increasing".into()));
        }
        if ys.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(MarketError::BadTable("values must be strictly increasing".into()));
        }
        let secants: Vec<f64> = (0..n - 1).map(|k| (ys[k + 1] - ys[k]) / (xs[k + 1] - xs[k])).collect();
        let mut slopes = vec![0.0; n];
        slopes[0] = secants[0];
        slopes[n - 1] = secants[n - 2];
        for k in 1..n - 1 {
            let (d0, d1) = (secants[k - 1], secants[k]);
            // weighted harmonic mean; both secants are positive here
            let h0 = xs[k] - xs[k - 1];
            let h1 = xs[k + 1] - xs[k];
            let w0 = 2.0 * h1 + h0;
            let w1 = h1 + 2.0 * h0;
            slopes[k] = (w0 + w1) / (w0 / d0 + w1 / d1);
        }
        Ok(Self { xs, ys, slopes })
    }

    fn segment(&self, x: f64) -> usize {
        match self.xs.binary_search_by(|p| p.partial_cmp(&x).unwrap()) {
            Ok(k) => k.min(self.xs.len() - 2),
            Err(k) => k.saturating_sub(1).min(self.xs.len() - 2),
        }
    }

    pub fn value(&self, x: f64) -> f64 {
        let n = self.xs.len();
        if x <= self.xs[0] {
            return self.ys[0] + self.slopes[0] * (x - self.xs[0]);
        }
        if x >= self.xs[n - 1] {
            return self.ys[n - 1] + self.slopes[n - 1] * (x - self.xs[n - 1]);
        }
        let k = self.segment(x);
        let h = self.xs[k + 1] - self.xs[k];
        let t = (x - self.xs[k]) / h;
        let (t2, t3) = (t * t, t * t * t);
        let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
        let h10 = t3 - 2.0 * t2 + t;
        let h01 = -2.0 * t3 + 3.0 * t2;
        let h11 = t3 - t2;
        h00 * self.ys[k] + h10 * h * self.slopes[k] + h01 * self.ys[k + 1] + h11 * h * self.slopes[k + 1]
    }

    pub fn slope(&self, x: f64) -> f64 {
        let n = self.xs.len();
        if x <= self.xs[0] {
            return self.slopes[0];
        }
        if x >= self.xs[n - 1] {
            return self.slopes[n - 1];
        }
        let k = self.segment(x);
        let h = self.xs[k + 1] - self.xs[k];
        let t = (x - self.xs[k]) / h;
        let t2 = t * t;
        let d00 = (6.0 * t2 - 6.0 * t) / h;
        let d10 = 3.0 * t2 - 4.0 * t + 1.0;
        let d01 = (-6.0 * t2 + 6.0 * t) / h;
        let d11 = 3.0 * t2 - 2.0 * t;
        d00 * self.ys[k] + d10 * self.slopes[k] + d01 * self.ys[k + 1] + d11 * self.slopes[k + 1]
    }

    pub fn breakpoints(&self) -> (&[f64], &[f64]) {
        (&self.xs, &self.ys)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum PriceKind {
    /// `g(x) = x`.
    Linear,
    /// `g(x) = c_1 x + c_2 x² + … + c_K x^K`.
    Polynomial(Vec<f64>),
    Tabulated(MonotoneCubic),
}

/// Strictly increasing map from excess demand `A + η` to the log-return.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PriceFunction {
    kind: PriceKind,
    range: OperatingRange,
}

impl PriceFunction {
    pub fn linear(range: OperatingRange) -> Self {
        Self { kind: PriceKind::Linear, range }
    }

    pub fn polynomial(coeffs: Vec<f64>, range: OperatingRange) -> Result<Self, MarketError> {
        if coeffs.is_empty() || coeffs.iter().any(|c| !c.is_finite()) {
            return Err(MarketError::BadCoefficients);
        }
        Self::checked(PriceKind::Polynomial(coeffs), range)
    }

    /// Tabulated price function; the operating range defaults to the table extent.
    pub fn tabulated(xs: Vec<f64>, ys: Vec<f64>, range: Option<OperatingRange>) -> Result<Self, MarketError> {
        let table = MonotoneCubic::new(xs, ys)?;
        let range = match range {
            Some(r) => r,
            None => {
                let (xs, _) = table.breakpoints();
                OperatingRange::new(xs[0], xs[xs.len() - 1])?
            }
        };
        Self::checked(PriceKind::Tabulated(table), range)
    }

    fn checked(kind: PriceKind, range: OperatingRange) -> Result<Self, MarketError> {
        let g = Self { kind, range };
        for x in range.grid(MONOTONE_GRID) {
            let d = g.slope_unchecked(x);
            if !(d > 0.0) {
                return Err(MarketError::NotIncreasing { x, slope: d });
            }
        }
        Ok(g)
    }

    pub fn kind(&self) -> &PriceKind {
        &self.kind
    }

    pub fn range(&self) -> OperatingRange {
        self.range
    }

    /// Coefficients `c_1..c_K` when `g` is a polynomial (linear is `[1]`).
    pub fn polynomial_coeffs(&self) -> Option<&[f64]> {
        match &self.kind {
            PriceKind::Linear => Some(&[1.0]),
            PriceKind::Polynomial(c) => Some(c),
            PriceKind::Tabulated(_) => None,
        }
    }

    pub fn is_linear(&self) -> bool {
        match &self.kind {
            PriceKind::Linear => true,
            PriceKind::Polynomial(c) => c[0] == 1.0 && c[1..].iter().all(|&x| x == 0.0),
            PriceKind::Tabulated(_) => false,
        }
    }

    pub fn eval(&self, x: f64) -> Result<f64, MarketError> {
        self.guard(x)?;
        Ok(self.value_unchecked(x))
    }

    pub fn derivative(&self, x: f64) -> Result<f64, MarketError> {
        self.guard(x)?;
        Ok(self.slope_unchecked(x))
    }

    fn guard(&self, x: f64) -> Result<(), MarketError> {
        if self.range.contains(x) {
            Ok(())
        } else {
            Err(MarketError::OutOfRange { x, lo: self.range.lo, hi: self.range.hi })
        }
    }

    /// `g(x)` without the operating-range check; polynomials are evaluated
    /// by Horner, tables are extended linearly.
    #[inline]
    pub fn value_unchecked(&self, x: f64) -> f64 {
        match &self.kind {
            PriceKind::Linear => x,
            PriceKind::Polynomial(c) => c.iter().rev().fold(0.0, |acc, &ck| (acc + ck) * x),
            PriceKind::Tabulated(t) => t.value(x),
        }
    }

    #[inline]
    pub fn slope_unchecked(&self, x: f64) -> f64 {
        match &self.kind {
            PriceKind::Linear => 1.0,
            PriceKind::Polynomial(c) => {
                let k = c.len();
                let mut acc = 0.0;
                for j in (0..k).rev() {
                    acc = acc * x + (j + 1) as f64 * c[j];
                }
                acc
            }
            PriceKind::Tabulated(t) => t.slope(x),
        }
    }

    /// The point of the operating range where `|g|` is smallest, i.e. the
    /// root `g(b₀) = 0` when one exists.
    pub fn root(&self) -> f64 {
        let (mut lo, mut hi) = (self.range.lo, self.range.hi);
        let (glo, ghi) = (self.value_unchecked(lo), self.value_unchecked(hi));
        if glo >= 0.0 {
            return lo;
        }
        if ghi <= 0.0 {
            return hi;
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            let v = self.value_unchecked(mid);
            if v == 0.0 {
                return mid;
            }
            if v < 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo < 1e-15 * (1.0 + mid.abs()) {
                break;
            }
        }
        0.5 * (lo + hi)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum NoiseKind {
    None,
    Gaussian { sigma: f64 },
    /// Finite support; the values are stored already shifted to zero mean.
    DiscreteZeroMean { values: Vec<f64>, probs: Vec<f64> },
}

/// Distribution of the external (non-arbitrage) excess demand `η`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoiseModel {
    kind: NoiseKind,
}

impl NoiseModel {
    pub fn none() -> Self {
        Self { kind: NoiseKind::None }
    }

    pub fn gaussian(sigma: f64) -> Result<Self, MarketError> {
        if !(sigma >= 0.0 && sigma.is_finite()) {
            return Err(MarketError::BadNoise(format!("sigma must be finite and >= 0, got {sigma}")));
        }
        if sigma == 0.0 {
            return Ok(Self::none());
        }
        Ok(Self { kind: NoiseKind::Gaussian { sigma } })
    }

    /// Discrete noise; probabilities are normalised and the support is
    /// shifted so that the mean is exactly zero.
    pub fn discrete(values: Vec<f64>, probs: Vec<f64>) -> Result<Self, MarketError> {
        if values.is_empty() || values.len() != probs.len() {
            return Err(MarketError::BadNoise("support and probabilities must be non-empty and of equal length".into()));
        }
        if probs.iter().any(|&p| !(p > 0.0 && p.is_finite())) || values.iter().any(|v| !v.is_finite()) {
            return Err(MarketError::BadNoise("probabilities must be positive and values finite".into()));
        }
        let total: f64 = probs.iter().sum();
        let probs: Vec<f64> = probs.iter().map(|p| p / total).collect();
        let mean: f64 = values.iter().zip(&probs).map(|(v, p)| v * p).sum();
        let values = values.iter().map(|v| v - mean).collect();
        Ok(Self { kind: NoiseKind::DiscreteZeroMean { values, probs } })
    }

    pub fn kind(&self) -> &NoiseKind {
        &self.kind
    }

    pub fn variance(&self) -> f64 {
        match &self.kind {
            NoiseKind::None => 0.0,
            NoiseKind::Gaussian { sigma } => sigma * sigma,
            NoiseKind::DiscreteZeroMean { values, probs } => values.iter().zip(probs).map(|(v, p)| p * v * v).sum(),
        }
    }

    pub fn sampler(&self) -> NoiseSampler {
        match &self.kind {
            NoiseKind::None => NoiseSampler::Zero,
            NoiseKind::Gaussian { sigma } => NoiseSampler::Gaussian(Normal::new(0.0, *sigma).expect("validated sigma")),
            NoiseKind::DiscreteZeroMean { values, probs } => {
                NoiseSampler::Discrete(values.clone(), WeightedIndex::new(probs).expect("validated probabilities"))
            }
        }
    }

    /// One draw of `η`; prefer [`NoiseModel::sampler`] in loops.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        self.sampler().sample(rng)
    }
}

/// Prepared sampler for a [`NoiseModel`].
#[derive(Clone, Debug)]
pub enum NoiseSampler {
    Zero,
    Gaussian(Normal<f64>),
    Discrete(Vec<f64>, WeightedIndex<f64>),
}

impl NoiseSampler {
    #[inline]
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self {
            NoiseSampler::Zero => 0.0,
            NoiseSampler::Gaussian(n) => n.sample(rng),
            NoiseSampler::Discrete(v, w) => v[w.sample(rng)],
        }
    }
}
