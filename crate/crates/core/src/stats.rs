//! Small statistics toolkit shared by the measures and dynamics modules.

use serde::{Deserialize, Serialize};

pub const SQRT_2: f64 = std::f64::consts::SQRT_2;

pub fn erf(x: f64) -> f64 {
    libm::erf(x)
}

pub fn erfc(x: f64) -> f64 {
    libm::erfc(x)
}

pub fn normal_pdf(u: f64) -> f64 {
    (-0.5 * u * u).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

/// CDF of `Normal(mean, sd²)`.
pub fn normal_cdf(x: f64, mean: f64, sd: f64) -> f64 {
    0.5 * erfc(-(x - mean) / (sd * SQRT_2))
}

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Population variance.
pub fn variance(xs: &[f64]) -> f64 {
    let m = mean(xs);
    xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / xs.len() as f64
}

/// Sample excess kurtosis `m₄/m₂² − 3`.
pub fn excess_kurtosis(xs: &[f64]) -> f64 {
    let m = mean(xs);
    let (mut m2, mut m4) = (0.0, 0.0);
    for &x in xs {
        let d = (x - m) * (x - m);
        m2 += d;
        m4 += d * d;
    }
    let n = xs.len() as f64;
    (m4 / n) / (m2 / n).powi(2) - 3.0
}

/// Standard error of the mean from non-overlapping batch means.
pub fn batch_means_se(batch_means: &[f64]) -> f64 {
    let k = batch_means.len();
    if k < 2 {
        return f64::NAN;
    }
    let m = mean(batch_means);
    let s2 = batch_means.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (k - 1) as f64;
    (s2 / k as f64).sqrt()
}

/// Kolmogorov–Smirnov distance between the empirical CDF of `xs` and `cdf`.
pub fn ks_distance(xs: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let mut v = xs.to_vec();
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = v.len() as f64;
    let mut d: f64 = 0.0;
    let mut k = 0;
    while k < v.len() {
        let x = v[k];
        let mut j = k;
        while j < v.len() && v[j] == x {
            j += 1;
        }
        let f = cdf(x);
        d = d.max((f - k as f64 / n).abs()).max((j as f64 / n - f).abs());
        k = j;
    }
    d
}

/// KS distance for data living on a lattice of spacing `h` (e.g. `A^t`,
/// a multiple of `2/√N`). The continuous model is discretised by assigning
/// to each lattice point the mass of its cell `[x − h/2, x + h/2)`.
pub fn ks_distance_lattice(xs: &[f64], h: f64, cdf: impl Fn(f64) -> f64) -> f64 {
    let mut v = xs.to_vec();
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = v.len() as f64;
    let mut d: f64 = 0.0;
    let mut k = 0;
    while k < v.len() {
        let x = v[k];
        let mut j = k;
        while j < v.len() && (v[j] - x).abs() < 0.25 * h {
            j += 1;
        }
        // below the cell and at its top edge
        d = d.max((cdf(x - 0.5 * h) - k as f64 / n).abs()).max((j as f64 / n - cdf(x + 0.5 * h)).abs());
        k = j;
    }
    d
}

/// Ordinary least-squares line `y = intercept + slope·x`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    /// Standard error of the slope.
    pub slope_se: f64,
    pub points: usize,
}

pub fn fit_line(xs: &[f64], ys: &[f64]) -> LineFit {
    let n = xs.len();
    assert!(n >= 2 && ys.len() == n);
    let mx = mean(xs);
    let my = mean(ys);
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rss: f64 = xs.iter().zip(ys).map(|(x, y)| (y - intercept - slope * x).powi(2)).sum();
    let slope_se = if n > 2 { (rss / (n - 2) as f64 / sxx).sqrt() } else { f64::NAN };
    LineFit { slope, intercept, slope_se, points: n }
}

/// Histogram as `(bin_center, density)` rows over `[lo, hi)`.
pub fn histogram(xs: &[f64], lo: f64, hi: f64, bins: usize) -> Vec<(f64, f64)> {
    let w = (hi - lo) / bins as f64;
    let mut counts = vec![0u64; bins];
    for &x in xs {
        if x >= lo && x < hi {
            let k = (((x - lo) / w) as usize).min(bins - 1);
            counts[k] += 1;
        }
    }
    let n = xs.len() as f64;
    counts.iter().enumerate().map(|(k, &c)| (lo + (k as f64 + 0.5) * w, c as f64 / (n * w))).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, Normal};

    #[test]
    fn kurtosis_of_gaussian_and_two_point() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let xs: Vec<f64> = (0..200_000).map(|_| Normal::new(0.0, 2.0).unwrap().sample(&mut rng)).collect();
        assert!(excess_kurtosis(&xs).abs() < 0.05);
        let two: Vec<f64> = (0..1000).map(|k| if k % 2 == 0 { 1.0 } else { -1.0 }).collect();
        assert!((excess_kurtosis(&two) + 2.0).abs() < 1e-12);
    }

    #[test]
    fn ks_of_own_sample_is_small() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let xs: Vec<f64> = (0..100_000).map(|_| Normal::new(0.3, 0.5).unwrap().sample(&mut rng)).collect();
        assert!(ks_distance(&xs, |x| normal_cdf(x, 0.3, 0.5)) < 0.01);
        assert!(ks_distance(&xs, |x| normal_cdf(x, 0.0, 0.5)) > 0.2);
    }

    #[test]
    fn lattice_ks_removes_discretisation_gap() {
        // binomial sums on a lattice of spacing 2/√N
        let n = 256;
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let xs: Vec<f64> = (0..50_000)
            .map(|_| {
                let s: i64 = (0..n).map(|_| if rand::Rng::random_bool(&mut rng, 0.5) { 1 } else { -1 }).sum();
                s as f64 / (n as f64).sqrt()
            })
            .collect();
        let h = 2.0 / (n as f64).sqrt();
        let raw = ks_distance(&xs, |x| normal_cdf(x, 0.0, 1.0));
        let fixed = ks_distance_lattice(&xs, h, |x| normal_cdf(x, 0.0, 1.0));
        assert!(raw > 0.02, "raw={raw}");
        assert!(fixed < 0.01, "fixed={fixed}");
    }

    #[test]
    fn line_fit_exact() {
        let xs = [0.0, 1.0, 2.0, 3.0];
        let ys = [1.0, 3.0, 5.0, 7.0];
        let f = fit_line(&xs, &ys);
        assert!((f.slope - 2.0).abs() < 1e-14 && (f.intercept - 1.0).abs() < 1e-14);
        assert!(f.slope_se < 1e-12);
    }

    #[test]
    fn histogram_integrates_to_one() {
        let xs: Vec<f64> = (0..1000).map(|k| k as f64 / 1000.0).collect();
        let h = histogram(&xs, 0.0, 1.0, 10);
        let total: f64 = h.iter().map(|(_, d)| d * 0.1).sum();
        assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn batch_se_of_constant_is_zero() {
        assert_eq!(batch_means_se(&[2.0, 2.0, 2.0]), 0.0);
        assert!(batch_means_se(&[1.0]).is_nan());
    }
}
