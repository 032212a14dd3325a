//! Closed forms and optimizers against brute-force grids and quadrature.

use fading_rates::oracle::{ergodic_quadrature, grid_max};
use fading_rates::rates_mimo::{gaussian_throughput, hisnr_approx, lowsnr_throughput, GaussianApprox};
use fading_rates::rates_miso::{
    miso_cl_expected_rate, miso_ergodic, miso_expected_rate_k, miso_throughput_max,
    miso_throughput_objective, simo_ergodic, siso_throughput_closed,
};

const POWERS: [f64; 4] = [0.1, 1.0, 10.0, 100.0];

#[test]
fn throughput_optimum_beats_a_fine_grid() {
    for nt in 1..=8 {
        for p in POWERS {
            let opt = miso_throughput_max(nt, p).unwrap();
            let (s, v) = grid_max(|s| miso_throughput_objective(nt, s, p).unwrap(), 1e-9, 1.0, 400_001);
            assert!(opt.value >= v - 1e-13 * v, "nt={nt} P={p}: {} < {v}", opt.value);
            assert!(opt.value - v <= 1e-9 * v, "nt={nt} P={p}");
            assert!((opt.argmax - s).abs() <= 1e-4, "nt={nt} P={p}: {} vs {s}", opt.argmax);
        }
    }
}

#[test]
fn siso_optimum_matches_lambert_form() {
    for p in [0.01, 0.3, 1.0, 7.0, 100.0, 1e4] {
        let (s, v) = siso_throughput_closed(p).unwrap();
        let opt = miso_throughput_max(1, p).unwrap();
        assert!((opt.value - v).abs() <= 1e-12 * v, "P={p}");
        assert!((opt.argmax - s).abs() <= 1e-7 * s, "P={p}");
    }
}

#[test]
fn optimal_threshold_trends() {
    for nt in 1..=8 {
        let s: Vec<f64> = POWERS.iter().map(|&p| miso_throughput_max(nt, p).unwrap().argmax).collect();
        assert!(s.windows(2).all(|w| w[1] < w[0]), "nt={nt}: {s:?}");
    }
    let nts = [1, 2, 4, 8, 16, 32, 64];
    for p in POWERS {
        let opts: Vec<_> = nts.iter().map(|&nt| miso_throughput_max(nt, p).unwrap()).collect();
        assert!(opts.windows(2).all(|w| w[1].value > w[0].value), "P={p}");
        // s° climbs toward 1 once the array is large, at any power
        assert!(opts[3..].windows(2).all(|w| w[1].argmax > w[0].argmax), "P={p}");
        if p >= 10.0 {
            assert!(opts.windows(2).all(|w| w[1].argmax > w[0].argmax), "P={p}");
        }
        // diversity drives the throughput toward the AWGN capacity
        let cap = p.ln_1p();
        assert!(opts.iter().all(|o| o.value < cap));
        assert!(opts.last().unwrap().value > 0.7 * cap, "P={p}");
    }
}

#[test]
fn optimal_threshold_dips_with_a_second_antenna_at_low_power() {
    // Γ(2, 2s)·ln(1 + Ps) = e^{−2s}(1 + 2s)·ln(1 + Ps)
    let two = |s: f64, p: f64| (-2.0 * s).exp() * (1.0 + 2.0 * s) * (p * s).ln_1p();
    for p in [0.1, 1.0] {
        let s1 = siso_throughput_closed(p).unwrap().0;
        let s2 = miso_throughput_max(2, p).unwrap().argmax;
        assert!(s2 < s1, "P={p}");
        assert!(two(s2, p) > two(s1, p));
    }
}

#[test]
fn ergodic_closed_form_matches_quadrature() {
    for nt in 1..=8 {
        for p in POWERS {
            let closed = miso_ergodic(nt, p).unwrap();
            let quad = ergodic_quadrature(nt, p).unwrap();
            assert!((closed - quad).abs() <= 1e-9 * quad, "nt={nt} P={p}: {closed} vs {quad}");
        }
    }
}

#[test]
fn simo_is_miso_with_array_gain() {
    for n in 1..=6 {
        for p in POWERS {
            let simo = simo_ergodic(n, p).unwrap();
            let miso = miso_ergodic(n, n as f64 * p).unwrap();
            assert!((simo - miso).abs() <= 1e-12 * miso);
        }
    }
}

#[test]
fn low_snr_two_by_two_is_four_by_one_at_double_power() {
    let lo = lowsnr_throughput(2, 2, 0.1).unwrap().result.value;
    let miso = miso_throughput_max(4, 0.2).unwrap().value;
    assert!((lo - miso).abs() <= 1e-8, "{lo} vs {miso}");
}

#[test]
fn layering_never_hurts() {
    for nt in [1, 2, 4] {
        for p in [1.0, 10.0] {
            let one = miso_throughput_max(nt, p).unwrap().value;
            let k1 = miso_expected_rate_k(nt, p, 1).unwrap().1;
            let k2 = miso_expected_rate_k(nt, p, 2).unwrap().1;
            let k3 = miso_expected_rate_k(nt, p, 3).unwrap().1;
            let cl = miso_cl_expected_rate(nt, p).unwrap();
            let erg = miso_ergodic(nt, p).unwrap();
            assert!((k1 - one).abs() <= 1e-8 * one, "nt={nt} P={p}");
            assert!(k2 >= k1 - 1e-9 && k3 >= k2 - 1e-9, "nt={nt} P={p}: {k1} {k2} {k3}");
            assert!(cl >= k3 - 1e-6 && erg >= cl, "nt={nt} P={p}: {k3} {cl} {erg}");
        }
    }
}

#[test]
fn gaussian_throughput_beats_a_fine_grid() {
    let cases = [(1.0, 1.0), (10.0, 0.5), (3.0, 2.0), (50.0, 5.0)];
    for (mu, sigma) in cases {
        let g = GaussianApprox::new(mu, sigma).unwrap();
        let opt = gaussian_throughput(g).unwrap();
        let (z, v) = grid_max(|z| g.objective(z), -mu / sigma, 10.0, 2_000_001);
        assert!(opt.value >= v - 1e-12 * v, "mu={mu} sigma={sigma}");
        assert!((opt.argmax - z).abs() <= 1e-4, "{} vs {z}", opt.argmax);
    }
    let g = hisnr_approx(1, 1, 1000.0).unwrap();
    let opt = gaussian_throughput(g).unwrap();
    let (_, v) = grid_max(|z| g.objective(z), -g.mu() / g.sigma(), 10.0, 2_000_001);
    assert!((opt.value - v).abs() <= 1e-9 * v);
}
