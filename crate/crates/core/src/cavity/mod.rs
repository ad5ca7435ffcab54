//! Cavity-method solution of the stationary state: single-site maps,
//! Gaussian quadrature, the self-consistent solver and its predictions.

pub mod fields;
pub mod quadrature;
pub mod solver;

use serde::{Deserialize, Serialize};

pub use fields::{ahat, ghat, ghat_prime, reaction_rg, reaction_rx, xhat, EffectiveNoise, Smoother};
pub use quadrature::QuadratureGrid;
pub use solver::{
    find_alpha_c, near_transition_reactions, solve_bias, solve_from, solve_reactions, solve_self_consistent,
    sweep_continuation, sweep_independent, update_order_params, CavitySolution, CriticalPoint, SolverOptions, Start,
};

use crate::market::{NoiseModel, PriceFunction};
use crate::stats::{normal_cdf, normal_pdf};

/// Price function, external noise and integration rule of one theory.
#[derive(Clone, Debug, PartialEq)]
pub struct CavityModel {
    pub price: PriceFunction,
    pub noise: NoiseModel,
    pub quadrature: QuadratureGrid,
}

impl CavityModel {
    pub fn new(price: PriceFunction, noise: NoiseModel) -> Self {
        Self { price, noise, quadrature: QuadratureGrid::default() }
    }

    pub fn with_order(mut self, n: usize) -> Self {
        self.quadrature = QuadratureGrid::new(n);
        self
    }

    /// `δ + η` for a given `q_x`.
    pub fn effective_noise(&self, q_x: f64) -> EffectiveNoise {
        EffectiveNoise::new(&self.noise, q_x)
    }
}

/// Predicted stationary law of `A^t + η^t`: `Normal(b, σ²)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PredictedDistribution {
    pub mean: f64,
    pub sd: f64,
}

impl PredictedDistribution {
    pub fn pdf(&self, x: f64) -> f64 {
        normal_pdf((x - self.mean) / self.sd) / self.sd
    }

    pub fn cdf(&self, x: f64) -> f64 {
        normal_cdf(x, self.mean, self.sd)
    }

    pub fn variance(&self) -> f64 {
        self.sd * self.sd
    }
}

pub fn predict_a_distribution(sol: &CavitySolution) -> PredictedDistribution {
    PredictedDistribution { mean: sol.b, sd: sol.sigma }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::market::OperatingRange;

    #[test]
    fn predicted_distribution_uses_solution_moments() {
        let m = CavityModel::new(PriceFunction::linear(OperatingRange::new(-10.0, 10.0).unwrap()), NoiseModel::gaussian(0.3).unwrap());
        let s = solve_self_consistent(0.8, &m).unwrap();
        let d = predict_a_distribution(&s);
        let (a, b, c) = s.sigma2_parts();
        assert!((d.variance() - (a + b + c)).abs() < 1e-15);
        assert_eq!(d.mean, 0.0);
        for &x in &[0.1, 0.7, 1.9] {
            assert!((d.pdf(x) - d.pdf(-x)).abs() < 1e-15);
            assert!((d.cdf(x) + d.cdf(-x) - 1.0).abs() < 1e-15);
        }
    }
}
