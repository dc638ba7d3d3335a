use cmh_core::distributions::{Gamma1D, Gaussian1D, IsotropicGaussianBlock, Uniform01, Univariate};
use cmh_core::ergodicity::{solve_cmh_c_threshold, solve_re_thresholds, theorem1_check, Theorem1Inputs};
use cmh_core::{esjd, mse, msjd, ChainSummary, StateVector};
use proptest::prelude::*;

fn gaussian() -> impl Strategy<Value = Gaussian1D> {
    (-50.0..50.0f64, 0.01..20.0f64).prop_map(|(m, s)| Gaussian1D::new(m, s).unwrap())
}

fn gamma() -> impl Strategy<Value = Gamma1D> {
    (0.3..200.0f64, 0.01..50.0f64).prop_map(|(a, b)| Gamma1D::new(a, b).unwrap())
}

fn round_trips<D: Univariate>(d: &D) -> Result<(), TestCaseError> {
    for i in 1..100 {
        let p = i as f64 / 100.0;
        let x = d.quantile(p).unwrap();
        prop_assert!((d.cdf(x) - p).abs() < 1e-8, "p = {p}, x = {x}, cdf = {}", d.cdf(x));
    }
    Ok(())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn gaussian_quantile_inverts_cdf(d in gaussian()) {
        round_trips(&d)?;
    }

    #[test]
    fn gamma_quantile_inverts_cdf(d in gamma()) {
        round_trips(&d)?;
    }

    #[test]
    fn gaussian_interval_mass_is_additive(d in gaussian(), a in -60.0..60.0f64, w1 in 0.0..10.0f64, w2 in 0.0..10.0f64) {
        let (b, c) = (a + w1, a + w1 + w2);
        let whole = d.interval_mass(a, c);
        prop_assert!((0.0..=1.0).contains(&whole));
        prop_assert!((d.interval_mass(a, b) + d.interval_mass(b, c) - whole).abs() < 1e-12);
    }

    #[test]
    fn gamma_interval_mass_is_additive(d in gamma(), a in 0.0..100.0f64, w1 in 0.0..20.0f64, w2 in 0.0..20.0f64) {
        let (b, c) = (a + w1, a + w1 + w2);
        let whole = d.interval_mass(a, c);
        prop_assert!((0.0..=1.0).contains(&whole));
        prop_assert!((d.interval_mass(a, b) + d.interval_mass(b, c) - whole).abs() < 1e-12);
    }

    #[test]
    fn ball_mass_grows_with_radius(
        k in 1usize..8,
        sd in 0.05..5.0f64,
        offset in -3.0..3.0f64,
        r1 in 0.0..6.0f64,
        dr in 0.0..6.0f64,
    ) {
        let block = IsotropicGaussianBlock::new(vec![0.0; k], sd).unwrap();
        let center = vec![offset * sd; k];
        let m1 = block.ball_mass(&center, r1 * sd).unwrap();
        let m2 = block.ball_mass(&center, (r1 + dr) * sd).unwrap();
        prop_assert!(m1 <= m2 + 1e-13, "{m1} > {m2}");
        prop_assert!(block.ball_mass(&center, 50.0 * sd).unwrap() > 1.0 - 1e-12);
    }

    #[test]
    fn one_dimensional_ball_is_an_interval(m in -5.0..5.0f64, sd in 0.05..5.0f64, c in -10.0..10.0f64, r in 0.0..8.0f64) {
        let block = IsotropicGaussianBlock::new(vec![m], sd).unwrap();
        let d = Gaussian1D::new(m, sd).unwrap();
        let ball = block.ball_mass(&[c], r).unwrap();
        prop_assert!((ball - d.interval_mass(c - r, c + r)).abs() < 1e-10);
    }

    #[test]
    fn uniform_quantile_inverts_cdf(p in 0.0..1.0f64) {
        prop_assert!((Uniform01.cdf(Uniform01.quantile(p).unwrap()) - p).abs() < 1e-12);
    }

    #[test]
    fn theorem1_monotone_in_q_max(gamma in 0.01..0.99f64, q_min in 0.0..0.5f64, a in 0.0..1.0f64, b in 0.0..1.0f64) {
        let lo = q_min + (0.999 - q_min) * a.min(b);
        let hi = q_min + (0.999 - q_min) * a.max(b);
        let small = theorem1_check(&Theorem1Inputs::new(gamma, q_min, lo).unwrap());
        let large = theorem1_check(&Theorem1Inputs::new(gamma, q_min, hi).unwrap());
        prop_assert!(!large || small);
    }

    #[test]
    fn theorem1_monotone_in_gamma(g1 in 0.01..0.99f64, g2 in 0.01..0.99f64, q_min in 0.0..0.5f64, t in 0.0..1.0f64) {
        let q_max = q_min + (0.999 - q_min) * t;
        let at = |g: f64| theorem1_check(&Theorem1Inputs::new(g, q_min, q_max).unwrap());
        let (lo, hi) = (g1.min(g2), g1.max(g2));
        prop_assert!(!at(hi) || at(lo));
    }

    #[test]
    fn c_threshold_straddles_the_condition(gamma in 0.05..0.95f64) {
        let c = solve_cmh_c_threshold(gamma).unwrap();
        prop_assert_eq!(c, solve_cmh_c_threshold(gamma).unwrap());
        let q = |c: f64| Gaussian1D::standard().interval_mass(-c, c);
        prop_assert!(theorem1_check(&Theorem1Inputs::new(gamma, 0.0, q(c - 1e-3)).unwrap()));
        prop_assert!(!theorem1_check(&Theorem1Inputs::new(gamma, 0.0, q(c + 1e-3)).unwrap()));
    }

    #[test]
    fn re_thresholds_are_deterministic_roots(k in 1usize..20, m in 1usize..30, a1 in 1.0..60.0f64, a2 in 1.0..60.0f64, gamma in 0.3..0.95f64) {
        let t = solve_re_thresholds(k, m, a1, a2, gamma).unwrap();
        prop_assert_eq!(t, solve_re_thresholds(k, m, a1, a2, gamma).unwrap());
        for r in [t.residual_theta, t.residual_mu, t.residual_lambda] {
            prop_assert!(r.abs() <= 1e-8);
        }
        prop_assert!(t.eps_theta >= t.eps_mu);
    }

    #[test]
    fn msjd_is_translation_invariant(
        points in prop::collection::vec((-10.0..10.0f64, -10.0..10.0f64, -10.0..10.0f64), 2..40),
        shift in (-100.0..100.0f64, -100.0..100.0f64, -100.0..100.0f64),
    ) {
        let chain = |s: (f64, f64, f64)| -> Vec<StateVector> {
            points
                .iter()
                .map(|p| StateVector::new(vec![vec![p.0 + s.0, p.1 + s.1], vec![p.2 + s.2]]).unwrap())
                .collect()
        };
        let base = msjd(&chain((0.0, 0.0, 0.0))).unwrap();
        let moved = msjd(&chain(shift)).unwrap();
        prop_assert!((base - moved).abs() <= 1e-9 * base.max(1.0));
    }

    #[test]
    fn msjd_ignores_block_order(points in prop::collection::vec((-10.0..10.0f64, -10.0..10.0f64), 2..40)) {
        let forward: Vec<StateVector> = points.iter().map(|p| StateVector::from_scalars(&[p.0, p.1]).unwrap()).collect();
        let swapped: Vec<StateVector> = points.iter().map(|p| StateVector::from_scalars(&[p.1, p.0]).unwrap()).collect();
        prop_assert!((msjd(&forward).unwrap() - msjd(&swapped).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn mse_is_translation_consistent(betas in prop::collection::vec(-5.0..5.0f64, 2..50), beta in -5.0..5.0f64, shift in -100.0..100.0f64) {
        let moved: Vec<f64> = betas.iter().map(|b| b + shift).collect();
        let a = mse(&betas, beta).unwrap();
        let b = mse(&moved, beta + shift).unwrap();
        prop_assert!((a.estimate - b.estimate).abs() < 1e-9);
    }

    #[test]
    fn esjd_is_the_replicate_mean_and_order_free(values in prop::collection::vec(0.0..10.0f64, 2..60), rot in 0usize..60) {
        let summaries: Vec<ChainSummary> = values
            .iter()
            .map(|&v| ChainSummary { msjd: v, beta_hat: 0.0, accept_count: 0, step_count: 1 })
            .collect();
        let mean = values.iter().sum::<f64>() / values.len() as f64;
        let e = esjd(&summaries).unwrap();
        prop_assert!((e.estimate - mean).abs() < 1e-12);
        let mut rotated = summaries.clone();
        rotated.rotate_left(rot % values.len());
        let r = esjd(&rotated).unwrap();
        prop_assert!((r.estimate - e.estimate).abs() < 1e-12 && (r.se - e.se).abs() < 1e-12);
    }
}
