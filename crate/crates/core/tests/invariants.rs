use minority_cavity::cavity::fields::{preference_moment, reaction_rg, solve_site};
use minority_cavity::cavity::{xhat, CavityModel, EffectiveNoise, Smoother};
use minority_cavity::dynamics::Schedule;
use minority_cavity::engine::{run, GameConfig};
use minority_cavity::ensemble::run_members;
use minority_cavity::market::{NoiseModel, OperatingRange, PriceFunction};
use minority_cavity::stats::{excess_kurtosis, ks_distance, normal_cdf};
use proptest::prelude::*;

fn cubic(c2: f64, sigma: f64) -> CavityModel {
    let price = PriceFunction::polynomial(vec![1.0, c2, 0.05], OperatingRange::new(-8.0, 8.0).unwrap()).unwrap();
    CavityModel::new(price, NoiseModel::gaussian(sigma).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn xhat_is_clipped_and_decreasing(z in -10.0..10.0f64, dz in 0.0..5.0f64, r in -3.0..-1e-3f64) {
        let a = xhat(z, r).unwrap();
        let b = xhat(z + dz, r).unwrap();
        prop_assert!((-1.0..=1.0).contains(&a));
        prop_assert!(b <= a);
    }

    #[test]
    fn site_solution_is_a_fixed_point(z in -2.0..2.0f64, r_g in -8.0..0.0f64, c2 in 0.0..0.1f64, sigma in 0.0..1.0f64, q_x in 0.0..1.0f64) {
        let m = cubic(c2, sigma);
        let noise = EffectiveNoise::new(&m.noise, q_x);
        let sm = Smoother::new(&m.price, &noise, &m.quadrature);
        let s = solve_site(z, r_g, &sm).unwrap();
        let (g, d) = sm.smooth(z + r_g * s.g);
        prop_assert!((s.g - g).abs() <= 1e-10 * (1.0 + g.abs()));
        prop_assert!(s.slope > 0.0 && s.slope <= d * (1.0 + 1e-12));
        prop_assert!((s.a - (z + r_g * s.g)).abs() < 1e-12);
        let up = solve_site(z + 0.1, r_g, &sm).unwrap();
        prop_assert!(up.g > s.g);
    }

    #[test]
    fn frozen_fraction_and_q_x_are_consistent(alpha in 0.3..10.0f64, r_x in -2.0..-1e-3f64, q_g in 1e-3..1.0f64) {
        let (r_g, phi) = reaction_rg(alpha, r_x, q_g).unwrap();
        let q_x = preference_moment(alpha, r_x, q_g).unwrap();
        prop_assert!((0.0..=1.0).contains(&phi));
        prop_assert!(r_g <= 0.0);
        // frozen agents contribute 1 each, the rest something non-negative
        prop_assert!(q_x >= phi - 1e-12 && q_x <= 1.0);
        prop_assert!((r_g * r_x - 0.5 * (1.0 - phi)).abs() < 1e-12);
    }

    #[test]
    fn kurtosis_is_affine_invariant(xs in prop::collection::vec(-5.0..5.0f64, 20..200), scale in 0.1..10.0f64, shift in -3.0..3.0f64) {
        let k = excess_kurtosis(&xs);
        prop_assume!(k.is_finite());
        let ys: Vec<f64> = xs.iter().map(|x| scale * x + shift).collect();
        prop_assert!((excess_kurtosis(&ys) - k).abs() < 1e-8 * (1.0 + k.abs()));
    }

    #[test]
    fn ks_distance_is_bounded(xs in prop::collection::vec(-4.0..4.0f64, 1..300), mu in -1.0..1.0f64, sd in 0.2..3.0f64) {
        let d = ks_distance(&xs, |x| normal_cdf(x, mu, sd));
        prop_assert!((0.0..=1.0).contains(&d));
        prop_assert!(d >= 0.5 / xs.len() as f64 - 1e-12);
    }

    #[test]
    fn schedules_are_sorted_and_bounded(t_max in 10u64..200_000, start in 0u64..1000, stride in 1u64..500) {
        let s = Schedule::standard(t_max).with_linear(start, stride, t_max);
        let t = s.times();
        prop_assert!(t.windows(2).all(|w| w[0] < w[1]));
        prop_assert!(t.first().copied() >= Some(1) && t.last().copied() == Some(t_max));
    }

    #[test]
    fn demand_lives_on_the_lattice(n in 2usize..40, p in 1usize..12, s in 2usize..4, seed in 0u64..1000) {
        let range = OperatingRange::new(-10.0, 10.0).unwrap();
        let cfg = GameConfig::new(n, p, s, 400, PriceFunction::linear(range), NoiseModel::none()).with_seed(seed).with_warmup(100);
        let ts = run(&cfg).unwrap();
        let root = (n as f64).sqrt();
        for &a in &ts.a {
            let net = a * root;
            prop_assert!((net - net.round()).abs() < 1e-9);
            prop_assert!(net.round().abs() as usize <= n);
            prop_assert_eq!((net.round() as i64 - n as i64).rem_euclid(2), 0);
        }
        prop_assert_eq!(ts.a.len() as u64, cfg.t);
    }

    #[test]
    fn ensemble_order_does_not_matter(mut seeds in prop::collection::vec(0u64..1_000_000, 1..12)) {
        seeds.sort_unstable();
        seeds.dedup();
        let job = |s: u64| Ok::<_, String>(s.wrapping_mul(31) ^ 7);
        let a = run_members(&seeds, job).unwrap();
        let mut rev = seeds.clone();
        rev.reverse();
        prop_assert_eq!(a, run_members(&rev, job).unwrap());
    }
}
