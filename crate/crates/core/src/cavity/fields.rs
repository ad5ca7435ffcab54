//! Single-site solutions of the stationary cavity equations: the clipped
//! preference `x̂`, the implicit mean price `ĝ`, and the expected arbitrage `Â`.

use super::quadrature::QuadratureGrid;
use crate::error::CavityError;
use crate::market::{NoiseKind, NoiseModel, PriceFunction, PriceKind};
use crate::stats::{erf, erfc, normal_pdf};

/// Distribution of the total noise `δ + η` felt at a signal.
///
/// Internal noise `δ` is Gaussian with variance `(1 − q_x)/2`; Gaussian
/// external noise is folded into the same Gaussian, a discrete one becomes a
/// mixture of shifted copies.
#[derive(Clone, Debug, PartialEq)]
pub struct EffectiveNoise {
    /// `(shift, weight)` support points of the external part.
    components: Vec<(f64, f64)>,
    /// Variance of the Gaussian part.
    var: f64,
}

impl EffectiveNoise {
    pub fn new(noise: &NoiseModel, q_x: f64) -> Self {
        let internal = (0.5 * (1.0 - q_x)).max(0.0);
        match noise.kind() {
            NoiseKind::None => Self { components: vec![(0.0, 1.0)], var: internal },
            NoiseKind::Gaussian { sigma } => Self { components: vec![(0.0, 1.0)], var: internal + sigma * sigma },
            NoiseKind::DiscreteZeroMean { values, probs } => {
                Self { components: values.iter().copied().zip(probs.iter().copied()).collect(), var: internal }
            }
        }
    }

    /// Variance of the Gaussian part alone.
    pub fn gaussian_variance(&self) -> f64 {
        self.var
    }

    /// Total variance of `δ + η`.
    pub fn variance(&self) -> f64 {
        self.var + self.components.iter().map(|(s, w)| w * s * s).sum::<f64>()
    }

    pub fn components(&self) -> &[(f64, f64)] {
        &self.components
    }
}

/// Noise-averaged price `⟨g(y + δ + η)⟩` and slope `⟨g'(y + δ + η)⟩`.
#[derive(Clone, Copy, Debug)]
pub struct Smoother<'a> {
    price: &'a PriceFunction,
    noise: &'a EffectiveNoise,
    quad: &'a QuadratureGrid,
}

impl<'a> Smoother<'a> {
    pub fn new(price: &'a PriceFunction, noise: &'a EffectiveNoise, quad: &'a QuadratureGrid) -> Self {
        Self { price, noise, quad }
    }

    pub fn noise(&self) -> &EffectiveNoise {
        self.noise
    }

    /// `(⟨g⟩, ⟨g'⟩)` at `y`.
    pub fn smooth(&self, y: f64) -> (f64, f64) {
        let var = self.noise.var;
        let mut acc = (0.0, 0.0);
        for &(shift, w) in &self.noise.components {
            let m = y + shift;
            let (g, d) = match self.price.kind() {
                PriceKind::Linear => (m, 1.0),
                PriceKind::Polynomial(c) => polynomial_gaussian(c, m, var),
                PriceKind::Tabulated(_) => (
                    self.quad.expect(m, var, |x| self.price.value_unchecked(x)),
                    self.quad.expect(m, var, |x| self.price.slope_unchecked(x)),
                ),
            };
            acc.0 += w * g;
            acc.1 += w * d;
        }
        acc
    }
}

/// Exact `E[p(m + Z)]` and `E[p'(m + Z)]` for `Z ~ Normal(0, v)` and
/// `p(x) = Σ c_k x^k` (k ≥ 1), via `M_{k+1} = m M_k + k v M_{k−1}`.
fn polynomial_gaussian(c: &[f64], m: f64, v: f64) -> (f64, f64) {
    let (mut prev, mut cur) = (0.0, 1.0);
    let (mut g, mut d) = (0.0, 0.0);
    for (k, &ck) in c.iter().enumerate() {
        // cur = M_k with k = index
        d += (k + 1) as f64 * ck * cur;
        let next = m * cur + k as f64 * v * prev;
        prev = cur;
        cur = next;
        g += ck * cur;
    }
    (g, d)
}

/// `x̂(z_x) = clamp(z_x/R_x, −1, 1)`.
pub fn xhat(z_x: f64, r_x: f64) -> Result<f64, CavityError> {
    if !(r_x < 0.0) {
        return Err(CavityError::DegenerateReaction(r_x));
    }
    Ok((z_x / r_x).clamp(-1.0, 1.0))
}

/// Everything known about the mean-price equation at one cavity field.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SiteSolution {
    /// `ĝ(z_g)`.
    pub g: f64,
    /// `ĝ'(z_g)`.
    pub slope: f64,
    /// `Â(z_g) = z_g + R_g ĝ(z_g)`.
    pub a: f64,
}

/// Solves `y = ⟨g(z + R_g y + δ + η)⟩` for `y`.
///
/// `F(y) = y − ⟨g(z + R_g y)⟩` has `F' ≥ 1`, so the root lies within
/// `|F(y₀)|` of any starting point; safeguarded Newton inside that bracket.
pub fn solve_site(z: f64, r_g: f64, smoother: &Smoother<'_>) -> Result<SiteSolution, CavityError> {
    if !(r_g <= 0.0) {
        return Err(CavityError::InvalidInput(format!("R_g must be <= 0, got {r_g}")));
    }
    let eval = |y: f64| {
        let (g, d) = smoother.smooth(z + r_g * y);
        (y - g, 1.0 - r_g * d, d)
    };
    let (g0, _) = smoother.smooth(z);
    let mut y = g0;
    let (mut f, mut fp, mut d) = eval(y);
    if !(f.is_finite() && fp.is_finite()) {
        return Err(CavityError::RangeExhausted(z));
    }
    let (mut lo, mut hi) = if f > 0.0 { (y - f, y) } else { (y, y - f) };
    for _ in 0..200 {
        if f == 0.0 || hi - lo <= 4.0 * f64::EPSILON * (1.0 + y.abs()) {
            break;
        }
        if f > 0.0 {
            hi = y;
        } else {
            lo = y;
        }
        let mut next = y - f / fp;
        if !(next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        y = next;
        (f, fp, d) = eval(y);
        if !(f.is_finite() && fp.is_finite()) {
            return Err(CavityError::RangeExhausted(z));
        }
        if f.abs() <= 1e-14 * (1.0 + y.abs()) {
            break;
        }
    }
    let slope = 1.0 / (1.0 / d - r_g);
    Ok(SiteSolution { g: y, slope, a: z + r_g * y })
}

/// `ĝ(z_g)`.
pub fn ghat(z_g: f64, r_g: f64, smoother: &Smoother<'_>) -> Result<f64, CavityError> {
    solve_site(z_g, r_g, smoother).map(|s| s.g)
}

/// `ĝ'(z_g) = 1/(1/⟨g'⟩ − R_g)`.
pub fn ghat_prime(z_g: f64, r_g: f64, smoother: &Smoother<'_>) -> Result<f64, CavityError> {
    solve_site(z_g, r_g, smoother).map(|s| s.slope)
}

/// `Â(z_g) = z_g + R_g ĝ(z_g)`.
pub fn ahat(z_g: f64, r_g: f64, smoother: &Smoother<'_>) -> Result<f64, CavityError> {
    solve_site(z_g, r_g, smoother).map(|s| s.a)
}

/// Variance of the agent cavity field `z_x`: `α q_g / 2`.
pub fn agent_field_variance(alpha: f64, q_g: f64) -> f64 {
    0.5 * alpha * q_g
}

/// Variance of the signal cavity field `z_g` around `b`: `½ + q_x/2`.
pub fn signal_field_variance(q_x: f64) -> f64 {
    0.5 * (1.0 + q_x)
}

/// `R_x = −(α/2) ∫ ĝ'(z_g) P(z_g) dz_g`.
pub fn reaction_rx(alpha: f64, r_g: f64, q_x: f64, b: f64, smoother: &Smoother<'_>, quad: &QuadratureGrid) -> Result<f64, CavityError> {
    let mean_slope = quad.try_expect(b, signal_field_variance(q_x), |z| ghat_prime(z, r_g, smoother))?;
    Ok(-0.5 * alpha * mean_slope)
}

/// `R_g = (1 − φ)/(2 R_x)` with `1 − φ = P(|z_x| < |R_x|)`; returns `(R_g, φ)`.
pub fn reaction_rg(alpha: f64, r_x: f64, q_g: f64) -> Result<(f64, f64), CavityError> {
    if !(r_x < 0.0) {
        return Err(CavityError::DegenerateReaction(r_x));
    }
    if !(q_g > 0.0) {
        return Err(CavityError::DegenerateField(q_g));
    }
    let s = agent_field_variance(alpha, q_g).sqrt();
    let inside = erf(-r_x / (s * std::f64::consts::SQRT_2));
    Ok((inside / (2.0 * r_x), 1.0 - inside))
}

/// `q_x = ∫ x̂(z_x)² P(z_x) dz_x` in closed form.
pub fn preference_moment(alpha: f64, r_x: f64, q_g: f64) -> Result<f64, CavityError> {
    if !(r_x < 0.0) {
        return Err(CavityError::DegenerateReaction(r_x));
    }
    if !(q_g > 0.0) {
        return Err(CavityError::DegenerateField(q_g));
    }
    let s = agent_field_variance(alpha, q_g).sqrt();
    let u = -r_x / s;
    let h = u / std::f64::consts::SQRT_2;
    // E[Z²; |Z| < u] for a standard normal Z
    let inner = if u < 1e-3 { 2.0 * normal_pdf(0.0) * u.powi(3) / 3.0 } else { erf(h) - 2.0 * u * normal_pdf(u) };
    Ok((inner / (u * u) + erfc(h)).clamp(0.0, 1.0))
}

/// Second moments `(q_g, q_A)` of `ĝ` and `Â − b` over `P(z_g)`.
pub fn signal_moments(r_g: f64, q_x: f64, b: f64, smoother: &Smoother<'_>, quad: &QuadratureGrid) -> Result<(f64, f64), CavityError> {
    let var = signal_field_variance(q_x);
    let q_g = quad.try_expect(b, var, |z| {
        let s = solve_site(z, r_g, smoother)?;
        Ok::<_, CavityError>(s.g * s.g)
    })?;
    let q_a = quad.try_expect(b, var, |z| {
        let s = solve_site(z, r_g, smoother)?;
        Ok::<_, CavityError>((s.a - b) * (s.a - b))
    })?;
    Ok((q_g, q_a))
}

/// `∫ ĝ(z_g) P(z_g) dz_g` as a function of the bias.
pub fn bias_residual(b: f64, r_g: f64, q_x: f64, smoother: &Smoother<'_>, quad: &QuadratureGrid) -> Result<f64, CavityError> {
    quad.try_expect(b, signal_field_variance(q_x), |z| ghat(z, r_g, smoother))
}

/// Stopping rule for [`brent`].
pub(crate) struct Tolerance {
    pub x_rel: f64,
    pub y_abs: f64,
    pub max_iter: usize,
}

/// Brent's method on a bracket, one evaluation per step; the first
/// evaluation error aborts the search.
pub(crate) fn brent(
    lo: f64,
    hi: f64,
    tol: Tolerance,
    mut f: impl FnMut(f64) -> Result<f64, CavityError>,
) -> Result<f64, CavityError> {
    let (mut a, mut b) = (lo, hi);
    let (mut fa, mut fb) = (f(a)?, f(b)?);
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa.signum() == fb.signum() || !(fa.is_finite() && fb.is_finite()) {
        return Err(CavityError::NoBracket);
    }
    let (mut c, mut fc) = (b, fb);
    let (mut d, mut e) = (b - a, b - a);
    for _ in 0..tol.max_iter {
        if fb.signum() == fc.signum() {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if fc.abs() < fb.abs() {
            (a, b, c) = (b, c, b);
            (fa, fb, fc) = (fb, fc, fb);
        }
        let tol1 = 2.0 * f64::EPSILON * b.abs() + 0.5 * tol.x_rel * (1.0 + b.abs());
        let xm = 0.5 * (c - b);
        if xm.abs() <= tol1 || fb.abs() <= tol.y_abs {
            return Ok(b);
        }
        if e.abs() >= tol1 && fa.abs() > fb.abs() {
            // inverse quadratic (or secant) step
            let s = fb / fa;
            let (mut p, mut q);
            if a == c {
                p = 2.0 * xm * s;
                q = 1.0 - s;
            } else {
                let qq = fa / fc;
                let r = fb / fc;
                p = s * (2.0 * xm * qq * (qq - r) - (b - a) * (r - 1.0));
                q = (qq - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if p > 0.0 {
                q = -q;
            }
            p = p.abs();
            let min1 = 3.0 * xm * q - (tol1 * q).abs();
            let min2 = (e * q).abs();
            if 2.0 * p < min1.min(min2) {
                e = d;
                d = p / q;
            } else {
                d = xm;
                e = d;
            }
        } else {
            d = xm;
            e = d;
        }
        a = b;
        fa = fb;
        b += if d.abs() > tol1 { d } else { tol1.copysign(xm) };
        fb = f(b)?;
        if fb == 0.0 {
            return Ok(b);
        }
    }
    Ok(b)
}

/// `⟨g'(b + δ + η)⟩`, the slope entering the near-transition expansion.
pub fn mean_slope_at(b: f64, smoother: &Smoother<'_>) -> f64 {
    smoother.smooth(b).1
}
