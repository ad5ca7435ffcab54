//! Gauss–Hermite rules mapped onto arbitrary Gaussians.

use std::f64::consts::PI;

/// Gauss–Hermite nodes and weights for the weight `e^{−x²}`.
#[derive(Clone, Debug, PartialEq)]
pub struct QuadratureGrid {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

pub const DEFAULT_ORDER: usize = 64;

impl QuadratureGrid {
    /// Rule of order `n`; nodes are found by Newton iteration on the
    /// orthonormal Hermite recurrence.
    pub fn new(n: usize) -> Self {
        assert!(n >= 1);
        let pim4 = PI.powf(-0.25);
        let mut x = vec![0.0; n];
        let mut w = vec![0.0; n];
        let m = n.div_ceil(2);
        let nf = n as f64;
        let mut z = 0.0;
        for i in 0..m {
            z = match i {
                0 => (2.0 * nf + 1.0).sqrt() - 1.85575 * (2.0 * nf + 1.0).powf(-0.16667),
                1 => z - 1.14 * nf.powf(0.426) / z,
                2 => 1.86 * z - 0.86 * x[0],
                3 => 1.91 * z - 0.91 * x[1],
                _ => 2.0 * z - x[i - 2],
            };
            let mut pp = 0.0;
            for _ in 0..100 {
                let mut p1 = pim4;
                let mut p2 = 0.0;
                for j in 0..n {
                    let p3 = p2;
                    p2 = p1;
                    let jf = j as f64;
                    p1 = z * (2.0 / (jf + 1.0)).sqrt() * p2 - (jf / (jf + 1.0)).sqrt() * p3;
                }
                pp = (2.0 * nf).sqrt() * p2;
                let z1 = z;
                z = z1 - p1 / pp;
                if (z - z1).abs() <= 1e-15 * (1.0 + z.abs()) {
                    break;
                }
            }
            x[i] = z;
            x[n - 1 - i] = -z;
            w[i] = 2.0 / (pp * pp);
            w[n - 1 - i] = w[i];
        }
        // odd orders: the middle node is exactly zero
        if n % 2 == 1 {
            x[n / 2] = 0.0;
        }
        Self { nodes: x, weights: w }
    }

    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    /// `(z, weight)` pairs for `Normal(mean, var)`; the weights sum to one.
    pub fn gaussian(&self, mean: f64, var: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let scale = (2.0 * var.max(0.0)).sqrt();
        let norm = 1.0 / PI.sqrt();
        self.nodes.iter().zip(&self.weights).map(move |(&x, &w)| (mean + scale * x, w * norm))
    }

    /// `E[f(z)]` for `z ~ Normal(mean, var)`.
    ///
    /// Mirror nodes are summed in pairs, so an integrand odd about `mean`
    /// integrates to exactly zero.
    pub fn expect(&self, mean: f64, var: f64, mut f: impl FnMut(f64) -> f64) -> f64 {
        self.try_expect::<std::convert::Infallible>(mean, var, |z| Ok(f(z))).unwrap_or_else(|e| match e {})
    }

    /// Like [`expect`](Self::expect) but for fallible integrands.
    pub fn try_expect<E>(&self, mean: f64, var: f64, mut f: impl FnMut(f64) -> Result<f64, E>) -> Result<f64, E> {
        if var <= 0.0 {
            return f(mean);
        }
        let scale = (2.0 * var).sqrt();
        let n = self.nodes.len();
        let mut acc = 0.0;
        for i in 0..n / 2 {
            let d = scale * self.nodes[i];
            acc += self.weights[i] * (f(mean + d)? + f(mean - d)?);
        }
        if n % 2 == 1 {
            acc += self.weights[n / 2] * f(mean)?;
        }
        Ok(acc / PI.sqrt())
    }
}

impl Default for QuadratureGrid {
    fn default() -> Self {
        Self::new(DEFAULT_ORDER)
    }
}
