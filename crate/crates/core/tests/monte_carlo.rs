//! Monte Carlo estimators against closed forms and against each other.

use fading_rates::channel::{
    mc_ergodic, mc_mi_moments, mc_outage, sample_channel, simulate, stream_rng, McConfig,
    PowerAllocation,
};
use fading_rates::dist_antenna::{
    decode_two_slot, dist_outage_analytic, dist_outage_mc, encode_two_slot, equivalence_check,
    optimal_rho, propagate, SchemeParams,
};
use fading_rates::rates_mimo::{ks_distance_normal, mimo_throughput_surface};
use fading_rates::rates_miso::{miso_ergodic, miso_throughput_max};
use fading_rates::specfun::{exp_integral_e1, regularized_gamma_q};
use num_complex::Complex64;

const SEED: u64 = 0x5EED_CAFE;

fn cfg(samples: u64) -> McConfig {
    McConfig::new(samples, SEED, 4).unwrap()
}

#[test]
fn outage_matches_the_gamma_tail() {
    let (nt, p, r) = (2, 10.0, 1.0);
    let est = mc_outage(nt, 1, &PowerAllocation::equal(nt, p).unwrap(), r, &cfg(1_000_000)).unwrap();
    // I < R  iff  |h|² < nt(e^R − 1)/P
    let exact = 1.0 - regularized_gamma_q(2, nt as f64 * r.exp_m1() / p).unwrap();
    assert!((est.mean - exact).abs() <= 3.0 * est.stderr, "{est:?} vs {exact}");
}

#[test]
fn siso_ergodic_matches_the_exponential_integral() {
    for p in [0.5, 10.0] {
        let (mean, var) = mc_mi_moments(1, 1, p, &cfg(1_000_000)).unwrap();
        let exact = (1.0 / p).exp() * exp_integral_e1(1.0 / p).unwrap();
        let se = (var / 1e6).sqrt();
        assert!((mean - exact).abs() <= 3.0 * se, "P={p}: {mean} vs {exact}");
    }
}

#[test]
fn miso_ergodic_closed_form_within_three_sigma() {
    for nt in [2, 4] {
        let est = mc_ergodic(nt, 1, &PowerAllocation::equal(nt, 10.0).unwrap(), &cfg(1_000_000)).unwrap();
        let exact = miso_ergodic(nt, 10.0).unwrap();
        assert!((est.mean - exact).abs() <= 3.0 * est.stderr, "nt={nt}");
    }
}

#[test]
fn channel_gain_is_unit_exponential() {
    let n = 100_000;
    let mut g = simulate(&cfg(n), |rng| sample_channel(1, 1, rng).gain()).unwrap();
    g.sort_by(f64::total_cmp);
    let nf = n as f64;
    let d = g
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let cdf = -(-x).exp_m1();
            ((i + 1) as f64 / nf - cdf).max(cdf - i as f64 / nf)
        })
        .fold(0.0, f64::max);
    // 1% critical value of the one-sample KS statistic
    assert!(d < 1.628 / nf.sqrt(), "D = {d}");
}

#[test]
fn mimo_mutual_information_is_near_gaussian() {
    let (nt, nr, p) = (4, 4, 10.0);
    let mi = fading_rates::channel::mi_samples(nt, nr, &PowerAllocation::equal(nt, p).unwrap(), &cfg(100_000)).unwrap();
    let (mean, var) = fading_rates::channel::mean_and_variance(&mi);
    let d = ks_distance_normal(&mi, mean, var.sqrt()).unwrap();
    assert!(d < 0.02, "D = {d}");
}

#[test]
fn distributed_outage_analytic_vs_simulated() {
    for rho in [-1.0, -0.3, 0.0, 0.5, 1.0] {
        for (p, r) in [(1.0, 0.5), (10.0, 1.0), (10.0, 3.0)] {
            let est = dist_outage_mc(rho, p, r, &cfg(200_000)).unwrap();
            let exact = dist_outage_analytic(rho, p, r).unwrap();
            assert!(
                (est.mean - exact).abs() <= 3.0 * est.stderr + 1e-12,
                "rho={rho} P={p} R={r}: {} vs {exact}",
                est.mean
            );
        }
    }
}

#[test]
fn full_correlation_gives_exponential_gain() {
    let p = 4.0;
    for r in [0.2, 1.0, 2.5] {
        let x = f64::exp_m1(r);
        // gain |h1 + h2|²·P/2 is exponential with mean P
        let exact = -(-x / p).exp_m1();
        assert!((dist_outage_analytic(1.0, p, r).unwrap() - exact).abs() < 1e-14);
    }
}

#[test]
fn extreme_correlation_minimizes_outage() {
    let grid: Vec<f64> = (0..=20).map(|i| i as f64 / 20.0).collect();
    for (p, r) in [(10.0, 1.0), (1.0, 1.0), (10.0, 3.0)] {
        let (rho, _) = optimal_rho(p, r, &grid).unwrap();
        assert!(rho == 0.0 || rho == 1.0, "P={p} R={r}: rho={rho}");
        // common random numbers make the comparison sharp
        let best = dist_outage_mc(rho, p, r, &cfg(200_000)).unwrap();
        for &other in &grid {
            let est = dist_outage_mc(other, p, r, &cfg(200_000)).unwrap();
            let se = (best.stderr.powi(2) + est.stderr.powi(2)).sqrt();
            assert!(est.mean >= best.mean - 3.0 * se, "rho={other} beats {rho}");
        }
    }
}

#[test]
fn transmit_power_is_shared_evenly_across_slots() {
    let n = 200_000;
    let params = SchemeParams::new(0.6, 8.0).unwrap();
    let per_symbol: f64 = 0.5 * 8.0;
    let powers: Vec<[f64; 4]> = simulate(&cfg(n), |rng| {
        let mut sym = || {
            let h = sample_channel(1, 1, rng).entry(0, 0);
            h * per_symbol.sqrt()
        };
        let (a, b) = (sym(), sym());
        let tx = encode_two_slot(a, b, params);
        [
            tx.slot_t[0].norm_sqr(),
            tx.slot_t[1].norm_sqr(),
            tx.slot_t1[0].norm_sqr(),
            tx.slot_t1[1].norm_sqr(),
        ]
    })
    .unwrap();
    for k in 0..4 {
        let column: Vec<f64> = powers.iter().map(|v| v[k]).collect();
        let (mean, var) = fading_rates::channel::mean_and_variance(&column);
        let se = (var / n as f64).sqrt();
        assert!((mean - per_symbol).abs() <= 3.0 * se, "slot/antenna {k}: {mean}");
    }
}

#[test]
fn decoded_noise_power_is_inverse_gain() {
    let mut rng = stream_rng(SEED, 7);
    let fading = [Complex64::new(0.8, -0.3), Complex64::new(-0.2, 1.1)];
    let params = SchemeParams::new(-0.4, 5.0).unwrap();
    let n = 200_000;
    let mut sq = Vec::with_capacity(n);
    let mut gain = 0.0;
    let mut draw = || sample_channel(1, 1, &mut rng).entry(0, 0);
    for _ in 0..n {
        let (a, b) = (Complex64::new(1.0, 0.0), Complex64::new(0.0, -1.0));
        let block = propagate(encode_two_slot(a, b, params), fading, [draw(), draw()], params);
        let d = decode_two_slot(&block).unwrap();
        gain = d.gain;
        sq.push((d.symbols[0] - a).norm_sqr());
    }
    let (mean, var) = fading_rates::channel::mean_and_variance(&sq);
    let se = (var / n as f64).sqrt();
    assert!((mean - 1.0 / gain).abs() <= 3.0 * se, "{mean} vs {}", 1.0 / gain);
}

#[test]
fn equivalence_holds_with_independent_seeds() {
    for rho in [0.0, 0.7] {
        let a = equivalence_check(rho, 10.0, 1.0, &cfg(100_000)).unwrap();
        let b = equivalence_check(rho, 10.0, 1.0, &cfg(100_000).with_seed(SEED + 1)).unwrap();
        assert_eq!(a.mismatches, 0);
        assert_eq!(b.mismatches, 0);
        let (x, y) = (a.scheme, b.scheme);
        let se = (x.stderr.powi(2) + y.stderr.powi(2)).sqrt();
        assert!((x.mean - y.mean).abs() <= 3.0 * se);
    }
}

#[test]
fn worker_count_does_not_change_estimates() {
    let powers = PowerAllocation::equal(3, 2.0).unwrap();
    let one = mc_ergodic(3, 2, &powers, &cfg(20_000).with_workers(1)).unwrap();
    let many = mc_ergodic(3, 2, &powers, &cfg(20_000).with_workers(7)).unwrap();
    assert_eq!(one, many);
}

#[test]
fn surface_single_receiver_column_matches_closed_form() {
    let powers = [1.0, 10.0];
    let cells = mimo_throughput_surface(&[1, 2], 1, &powers, &cfg(400_000)).unwrap();
    for c in cells {
        let exact = miso_throughput_max(c.nt, c.power).unwrap().value;
        let t = c.throughput;
        assert!((t.value - exact).abs() <= 3.0 * t.stderr + 1e-3 * exact, "nt={} P={}: {} vs {exact}", c.nt, c.power, t.value);
    }
}
