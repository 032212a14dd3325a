use fading_rates::channel::{
    log_det_receive_form, log_det_transmit_form, sample_channel, stream_rng, PowerAllocation,
};
use fading_rates::dist_antenna::{dist_outage_analytic, effective_gain, miso_covariance_mi, SchemeParams};
use fading_rates::optimize::{find_root, maximize_scalar, project_simplex, Bracket};
use fading_rates::rates_mimo::{gaussian_throughput, GaussianApprox};
use fading_rates::rates_miso::{g_func, r_func, LayerPlan};
use fading_rates::specfun::{
    digamma_int, exp_integral_e1, lambert_w0, q_function, regularized_gamma_q,
    upper_incomplete_gamma,
};
use num_complex::Complex64;
use proptest::prelude::*;

proptest! {
    #[test]
    fn incomplete_gamma_recurrence(n in 1u32..40, x in 0.0f64..80.0) {
        let lhs = upper_incomplete_gamma(n + 1, x).unwrap();
        let rhs = f64::from(n) * upper_incomplete_gamma(n, x).unwrap()
            + x.powi(n as i32) * (-x).exp();
        prop_assert!((lhs - rhs).abs() <= 1e-10 * lhs);
    }

    #[test]
    fn regularized_gamma_is_a_survival_function(n in 1u32..30, x in 0.0f64..50.0, dx in 0.0f64..5.0) {
        let a = regularized_gamma_q(n, x).unwrap();
        let b = regularized_gamma_q(n, x + dx).unwrap();
        prop_assert!((0.0..=1.0).contains(&a));
        prop_assert!(b <= a);
    }

    #[test]
    fn e1_sandwich(x in 1e-3f64..50.0) {
        let v = exp_integral_e1(x).unwrap();
        let lo = 0.5 * (-x).exp() * (1.0 + 2.0 / x).ln();
        let hi = (-x).exp() * (1.0 + 1.0 / x).ln();
        prop_assert!(lo <= v * (1.0 + 1e-14) && v <= hi * (1.0 + 1e-14));
    }

    #[test]
    fn lambert_residual(x in -0.367_879_441_171_442_3f64..100.0) {
        let w = lambert_w0(x).unwrap();
        prop_assert!(w >= -1.0);
        prop_assert!((w * w.exp() - x).abs() <= 1e-12);
    }

    #[test]
    fn q_symmetry_and_chernoff(z in -30.0f64..30.0) {
        let q = q_function(z).unwrap();
        prop_assert!((q + q_function(-z).unwrap() - 1.0).abs() <= 1e-14);
        if z >= 0.0 {
            prop_assert!(q <= 0.5 * (-0.5 * z * z).exp());
        }
    }

    #[test]
    fn digamma_increments(m in 1u32..5000) {
        let step = digamma_int(m + 1).unwrap() - digamma_int(m).unwrap();
        prop_assert!((step - 1.0 / f64::from(m)).abs() <= 4.0 * f64::EPSILON * digamma_int(m + 1).unwrap().abs().max(1.0));
    }

    #[test]
    fn r_at_most_one_beyond_unit_threshold(nt in 1usize..12, s in 1.0f64..20.0) {
        prop_assert!(r_func(nt, s).unwrap() <= 1.0 + 1e-15);
    }

    #[test]
    fn g_monotone_and_above_s(s in 0.0f64..5.0, p in 0.01f64..100.0, ds in 0.001f64..1.0, dp in 0.001f64..10.0) {
        let g = g_func(s, p).unwrap();
        prop_assert!(g_func(s + ds, p).unwrap() > g);
        if s > 0.0 {
            prop_assert!(g_func(s, p + dp).unwrap() > g);
        }
        if s >= 1.0 {
            prop_assert!(g > s);
        }
    }

    #[test]
    fn simplex_projection_is_feasible(v in prop::collection::vec(-5.0f64..5.0, 1..8), total in 0.0f64..20.0) {
        let w = project_simplex(&v, total);
        prop_assert_eq!(w.len(), v.len());
        prop_assert!(w.iter().all(|&x| x >= 0.0));
        prop_assert!((w.iter().sum::<f64>() - total).abs() <= 1e-9 * total.max(1.0));
    }

    #[test]
    fn scalar_maximum_dominates_the_grid(c in 0.0f64..1.0, a in 0.1f64..10.0, b in -2.0f64..2.0) {
        let f = |x: f64| -a * (x - c).powi(2) + b * (7.0 * x).sin();
        let r = maximize_scalar(f, Bracket::new(0.0, 1.0).unwrap(), 1e-10).unwrap();
        for i in 0..64 {
            prop_assert!(r.value >= f(i as f64 / 63.0));
        }
    }

    #[test]
    fn bisection_brackets_the_root(root in -5.0f64..5.0, k in 0.1f64..10.0) {
        let g = |x: f64| k * (x - root).powi(3) + (x - root);
        let x = find_root(g, Bracket::new(-10.0, 10.0).unwrap(), 1e-12).unwrap();
        prop_assert!((x - root).abs() <= 1e-11);
    }

    #[test]
    fn gaussian_throughput_is_homogeneous(mu in 0.1f64..20.0, sigma in 0.05f64..3.0, c in 0.1f64..10.0) {
        let a = gaussian_throughput(GaussianApprox::new(mu, sigma).unwrap()).unwrap();
        let b = gaussian_throughput(GaussianApprox::new(c * mu, c * sigma).unwrap()).unwrap();
        prop_assert!((b.value - c * a.value).abs() <= 1e-9 * b.value.abs().max(1.0));
        // z = 0 is feasible and yields μ/2
        prop_assert!(a.value >= 0.5 * mu * (1.0 - 1e-12));
    }

    #[test]
    fn layer_plan_invariants(powers in prop::collection::vec(0.0f64..10.0, 1..6), s in 0.01f64..0.99) {
        let k = powers.len();
        let thresholds: Vec<f64> = (0..k).map(|i| s * (i + 1) as f64 / k as f64).collect();
        let plan = LayerPlan::new(powers.clone(), thresholds).unwrap();
        prop_assert_eq!(plan.interference(k - 1), 0.0);
        prop_assert!(plan.rates().iter().all(|&r| r >= 0.0));
        prop_assert!((plan.total_power() - powers.iter().sum::<f64>()).abs() <= 1e-12);
    }

    #[test]
    fn outage_symmetric_in_rho(rho in 0.0f64..1.0, p in 0.1f64..100.0, r in 0.0f64..4.0) {
        let a = dist_outage_analytic(rho, p, r).unwrap();
        let b = dist_outage_analytic(-rho, p, r).unwrap();
        prop_assert_eq!(a, b);
        prop_assert!((0.0..=1.0).contains(&a));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn determinant_forms_agree(nt in 1usize..=6, nr in 1usize..=6, seed in any::<u64>(), scale in 0.01f64..100.0) {
        let mut rng = stream_rng(seed, 0);
        let h = sample_channel(nt, nr, &mut rng);
        let powers = PowerAllocation::new((0..nt).map(|i| scale * (1.0 + i as f64) / nt as f64).collect()).unwrap();
        let a = log_det_receive_form(&h, &powers).unwrap();
        let b = log_det_transmit_form(&h, &powers).unwrap();
        prop_assert!(a >= 0.0);
        prop_assert!((a - b).abs() <= 1e-9 * a.abs().max(1.0));
    }

    #[test]
    fn scheme_rate_equals_miso_rate_per_draw(
        re1 in -3.0f64..3.0, im1 in -3.0f64..3.0, re2 in -3.0f64..3.0, im2 in -3.0f64..3.0,
        rho in -1.0f64..1.0, p in 0.01f64..1000.0,
    ) {
        let fading = [Complex64::new(re1, im1), Complex64::new(re2, im2)];
        let params = SchemeParams::new(rho, p).unwrap();
        let scheme = (effective_gain(fading, rho) * 0.5 * p).ln_1p();
        let miso = miso_covariance_mi(fading, params);
        prop_assert!((scheme - miso).abs() <= 1e-12 * scheme.max(1.0));
    }
}
