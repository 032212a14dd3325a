//! Two single-antenna transmitters, each with power `P/2`, sharing a
//! two-slot code that reproduces the outage behaviour of a `2 × 1` MISO
//! channel with transmit correlation `ρ`.
//!
//! Slot `t`: transmitter 1 sends `X(t)`, transmitter 2 sends
//! `ρX(t) + √(1−ρ²)X(t+1)`. Slot `t+1`: `−X*(t+1)` and
//! `−ρX*(t+1) + √(1−ρ²)X*(t)`. With `ρ = 0` this is the Alamouti layout.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::channel::{
    empirical_throughput, sample_cn, simulate, McConfig, McEstimate, McThroughput,
};
use crate::error::{domain, Error, Result};
use crate::optimize::{find_root, maximize_scalar, Bracket, OptResult, DEFAULT_SCALAR_TOL};
use crate::rates_miso::{boundary_lhs, miso_expected_rate_k, ClBoundaries};
use crate::specfun::{e1, e1_scaled};

/// Correlation `ρ ∈ [−1, 1]` and total power `P` (each transmitter uses
/// `P/2`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SchemeParams {
    rho: f64,
    power: f64,
}

impl SchemeParams {
    pub fn new(rho: f64, power: f64) -> Result<Self> {
        if !(rho.is_finite() && rho.abs() <= 1.0) {
            return Err(domain("rho", rho, "-1 <= rho <= 1"));
        }
        if !(power.is_finite() && power >= 0.0) {
            return Err(domain("P", power, "finite and >= 0"));
        }
        Ok(Self { rho, power })
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn power(&self) -> f64 {
        self.power
    }

    /// Power per transmitter and per symbol, `P/2`.
    pub fn symbol_power(&self) -> f64 {
        0.5 * self.power
    }

    /// Power fraction `δ = (ρ + 1)/2` of the equivalent MISO covariance.
    pub fn delta(&self) -> f64 {
        0.5 * (self.rho + 1.0)
    }

    fn mix(&self) -> f64 {
        (1.0 - self.rho * self.rho).max(0.0).sqrt()
    }
}

/// Transmitted symbols, indexed `[transmitter 1, transmitter 2]` per slot.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoSlotTransmit {
    pub slot_t: [Complex64; 2],
    pub slot_t1: [Complex64; 2],
}

/// One coded block: what was sent, the fading `(h1, h2)` held over both
/// slots, and the received pair `(Y(t), Y(t+1))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoSlotBlock {
    pub params: SchemeParams,
    pub transmit: TwoSlotTransmit,
    pub fading: [Complex64; 2],
    pub received: [Complex64; 2],
}

/// Output of the matched-filter decoder.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Decoded {
    /// estimates of `X(t)` and `X(t+1)`, noise power `1/gain` each
    pub symbols: [Complex64; 2],
    /// `h = |h1 + ρh2|² + |h2|²(1 − ρ²)`
    pub gain: f64,
}

pub fn encode_two_slot(x_t: Complex64, x_t1: Complex64, params: SchemeParams) -> TwoSlotTransmit {
    let (rho, c) = (params.rho, params.mix());
    TwoSlotTransmit {
        slot_t: [x_t, x_t * rho + x_t1 * c],
        slot_t1: [-x_t1.conj(), -x_t1.conj() * rho + x_t.conj() * c],
    }
}

/// Passes a block through fading `[h1, h2]` with additive noise
/// `[Z(t), Z(t+1)]`.
pub fn propagate(
    transmit: TwoSlotTransmit,
    fading: [Complex64; 2],
    noise: [Complex64; 2],
    params: SchemeParams,
) -> TwoSlotBlock {
    let [h1, h2] = fading;
    let received = [
        h1 * transmit.slot_t[0] + h2 * transmit.slot_t[1] + noise[0],
        h1 * transmit.slot_t1[0] + h2 * transmit.slot_t1[1] + noise[1],
    ];
    TwoSlotBlock {
        params,
        transmit,
        fading,
        received,
    }
}

/// Effective channel `G` acting on `(X(t), X(t+1))` after stacking
/// `(Y(t), −Y*(t+1))`.
pub fn effective_channel(fading: [Complex64; 2], params: SchemeParams) -> [[Complex64; 2]; 2] {
    let [h1, h2] = fading;
    let (rho, c) = (params.rho, params.mix());
    [
        [h1 + h2 * rho, h2 * c],
        [-h2.conj() * c, h1.conj() + h2.conj() * rho],
    ]
}

/// Applies `G†` to `(Y(t), −Y*(t+1))`, which yields `h·(X(t), X(t+1))`
/// plus noise, then divides by `h`.
pub fn decode_two_slot(block: &TwoSlotBlock) -> Result<Decoded> {
    let g = effective_channel(block.fading, block.params);
    let v = [block.received[0], -block.received[1].conj()];
    let gain = g[0][0].norm_sqr() + g[1][0].norm_sqr();
    if !(gain > 0.0) {
        return Err(Error::DegenerateBlock);
    }
    let combined = [
        g[0][0].conj() * v[0] + g[1][0].conj() * v[1],
        g[0][1].conj() * v[0] + g[1][1].conj() * v[1],
    ];
    Ok(Decoded {
        symbols: [combined[0] / gain, combined[1] / gain],
        gain,
    })
}

/// `|h1|² + |h2|² + 2ρ Re(h1 h2*)`, the gain seen by the equivalent MISO
/// channel.
pub fn effective_gain(fading: [Complex64; 2], rho: f64) -> f64 {
    let [h1, h2] = fading;
    h1.norm_sqr() + h2.norm_sqr() + 2.0 * rho * (h1 * h2.conj()).re
}

/// Mutual information of the `2 × 1` MISO channel with covariance
/// `U0 · P diag(δ, 1−δ) · U0`, `U0 = [[1, 1], [1, −1]]/√2`, evaluated as
/// `ln(1 + P(δ|g1|² + (1−δ)|g2|²))` with `g = h U0`.
pub fn miso_covariance_mi(fading: [Complex64; 2], params: SchemeParams) -> f64 {
    let [h1, h2] = fading;
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let g1 = (h1 + h2) * s;
    let g2 = (h1 - h2) * s;
    let delta = params.delta();
    (params.power * (delta * g1.norm_sqr() + (1.0 - delta) * g2.norm_sqr())).ln_1p()
}

fn check_rate(r: f64) -> Result<()> {
    if !(r.is_finite() && r >= 0.0) {
        return Err(domain("R", r, "finite and >= 0"));
    }
    Ok(())
}

/// `expm1(t)/t`, continuous at 0.
fn expm1_ratio(t: f64) -> f64 {
    if t.abs() < 1e-8 {
        1.0 + 0.5 * t
    } else {
        t.exp_m1() / t
    }
}

/// Outage probability `P{ln(1 + (|h1|²+|h2|²+2ρRe(h1h2*))P/2) < R}`.
///
/// The gain is `λ1 E1 + λ2 E2` with unit exponentials `E1, E2` and
/// `λ1,2 = P(1 ± |ρ|)/2`, so the outage is a hypoexponential CDF at
/// `x = e^R − 1`.
pub fn dist_outage_analytic(rho: f64, power: f64, rate: f64) -> Result<f64> {
    let params = SchemeParams::new(rho, power)?;
    check_rate(rate)?;
    let x = rate.exp_m1();
    if x == 0.0 {
        return Ok(0.0);
    }
    if power == 0.0 {
        return Ok(1.0);
    }
    let r = params.rho.abs();
    let l1 = 0.5 * power * (1.0 + r);
    let l2 = 0.5 * power * (1.0 - r);
    let survival = if l2 == 0.0 {
        (-x / l1).exp()
    } else {
        // t = x(1/λ2 − 1/λ1) ≥ 0
        let t = x * power * r / (l1 * l2);
        if t < 50.0 {
            (-x / l2).exp() * (1.0 + x / l2 * expm1_ratio(t))
        } else {
            (l1 * (-x / l1).exp() - l2 * (-x / l2).exp()) / (l1 - l2)
        }
    };
    Ok((1.0 - survival).clamp(0.0, 1.0))
}

/// Outage by Monte Carlo over `(h1, h2)`.
pub fn dist_outage_mc(rho: f64, power: f64, rate: f64, cfg: &McConfig) -> Result<McEstimate> {
    SchemeParams::new(rho, power)?;
    check_rate(rate)?;
    let indicators = simulate(cfg, |rng| {
        let fading = [sample_cn(rng), sample_cn(rng)];
        let mi = (effective_gain(fading, rho) * 0.5 * power).ln_1p();
        if mi < rate {
            1.0
        } else {
            0.0
        }
    })?;
    Ok(McEstimate::from_values(&indicators, cfg.seed))
}

/// Result of running the two-slot scheme and the MISO covariance form on
/// common channel draws.
#[derive(Debug, Clone, PartialEq)]
pub struct EquivalenceReport {
    pub scheme: McEstimate,
    pub miso: McEstimate,
    /// draws whose outage indicators differ
    pub mismatches: u64,
    /// largest `|I_scheme − I_miso|` over all draws
    pub max_mi_gap: f64,
    /// draws with a zero effective gain (counted as outage)
    pub degenerate: u64,
}

impl EquivalenceReport {
    pub fn difference(&self) -> f64 {
        self.scheme.mean - self.miso.mean
    }
}

/// Per draw: sample `(h1, h2)`, random symbols of power `P/2` and unit
/// noise; encode, propagate and decode through the two-slot scheme and
/// threshold `ln(1 + h P/2)` at `R`; threshold the MISO covariance form
/// at `R` on the same `(h1, h2)`.
pub fn equivalence_check(
    rho: f64,
    power: f64,
    rate: f64,
    cfg: &McConfig,
) -> Result<EquivalenceReport> {
    let params = SchemeParams::new(rho, power)?;
    check_rate(rate)?;
    let amp = params.symbol_power().sqrt();
    let draws = simulate(cfg, |rng| {
        let fading = [sample_cn(rng), sample_cn(rng)];
        let x = [sample_cn(rng) * amp, sample_cn(rng) * amp];
        let noise = [sample_cn(rng), sample_cn(rng)];
        let block = propagate(encode_two_slot(x[0], x[1], params), fading, noise, params);
        let scheme_mi = decode_two_slot(&block)
            .map(|d| (d.gain * params.symbol_power()).ln_1p())
            .ok();
        (scheme_mi, miso_covariance_mi(fading, params))
    })?;
    let mut scheme = Vec::with_capacity(draws.len());
    let mut miso = Vec::with_capacity(draws.len());
    let mut mismatches = 0;
    let mut degenerate = 0;
    let mut max_mi_gap: f64 = 0.0;
    for (s, m) in draws {
        let s_out = match s {
            Some(v) => {
                max_mi_gap = max_mi_gap.max((v - m).abs());
                v < rate
            }
            None => {
                degenerate += 1;
                true
            }
        };
        let m_out = m < rate;
        if s_out != m_out {
            mismatches += 1;
        }
        scheme.push(if s_out { 1.0 } else { 0.0 });
        miso.push(if m_out { 1.0 } else { 0.0 });
    }
    Ok(EquivalenceReport {
        scheme: McEstimate::from_values(&scheme, cfg.seed),
        miso: McEstimate::from_values(&miso, cfg.seed),
        mismatches,
        max_mi_gap,
        degenerate,
    })
}

/// Single-layer throughput of the two-slot scheme by symbol-level
/// simulation: per draw the block is encoded, propagated through `(h1, h2)`
/// with unit noise and decoded, and `ln(1 + h P/2)` is recorded (0 for a
/// degenerate block). The rate is then chosen to maximize
/// `R · P{I ≥ R}` on the sample set.
pub fn dist_throughput_mc(rho: f64, power: f64, cfg: &McConfig) -> Result<McThroughput> {
    let params = SchemeParams::new(rho, power)?;
    let amp = params.symbol_power().sqrt();
    let mi = simulate(cfg, |rng| {
        let fading = [sample_cn(rng), sample_cn(rng)];
        let x = [sample_cn(rng) * amp, sample_cn(rng) * amp];
        let noise = [sample_cn(rng), sample_cn(rng)];
        let block = propagate(encode_two_slot(x[0], x[1], params), fading, noise, params);
        decode_two_slot(&block)
            .map(|d| (d.gain * params.symbol_power()).ln_1p())
            .unwrap_or(0.0)
    })?;
    Ok(empirical_throughput(&mi, cfg.seed))
}

fn check_power(p: f64) -> Result<()> {
    if !(p.is_finite() && p > 0.0) {
        return Err(domain("P", p, "finite and > 0"));
    }
    Ok(())
}

/// Lower continuous-layer boundary for two transmitters from Cardano's
/// formula for `(P/2)s³ + s² − s − 1 = 0`:
/// `s0 = c + B/c − 2/(3P)`, `c = (√(A² − B³) + A)^{1/3}`, with
/// `A = 1/P − 2/(3P²) − 8/(27P³)` and `B = 2/(3P) + 4/(9P²)`. For small
/// `P` the square root is imaginary, so the roots are taken in the complex
/// plane.
///
/// `A` and `B` grow like `1/P³` while `s0` stays near the golden ratio, so
/// the formula loses digits as `P → 0`; a few Newton steps on the cubic,
/// each kept only if it shrinks the residual, restore full precision.
pub fn cubic_s0(power: f64) -> Result<f64> {
    check_power(power)?;
    let p = power;
    let a = 1.0 / p - 2.0 / (3.0 * p * p) - 8.0 / (27.0 * p * p * p);
    let b = 2.0 / (3.0 * p) + 4.0 / (9.0 * p * p);
    let disc = Complex64::new(a * a - b * b * b, 0.0).sqrt();
    let c = (disc + a).cbrt();
    let mut s0 = (c + b / c - 2.0 / (3.0 * p)).re;
    let cubic = |s: f64| ((0.5 * p * s + 1.0) * s - 1.0) * s - 1.0;
    let slope = |s: f64| (1.5 * p * s + 2.0) * s - 1.0;
    for _ in 0..8 {
        let next = s0 - cubic(s0) / slope(s0);
        if !(next.is_finite() && cubic(next).abs() < cubic(s0).abs()) {
            break;
        }
        s0 = next;
    }
    Ok(s0)
}

/// Upper continuous-layer boundary for two transmitters, the golden ratio.
pub const S1_TWO_TRANSMITTERS: f64 = 1.618_033_988_749_894_8;

/// Boundaries from the closed forms.
pub fn dist_cl_boundaries(power: f64) -> Result<ClBoundaries> {
    Ok(ClBoundaries {
        s0: cubic_s0(power)?,
        s1: S1_TWO_TRANSMITTERS,
    })
}

/// Residual `lhs(s) − 1 − (P/2)s` of the two-antenna lower boundary
/// equation.
pub fn s0_residual(power: f64, s: f64) -> f64 {
    boundary_lhs(2, s) - 1.0 - 0.5 * power * s
}

/// Maximum continuous-layer expected rate of the two-transmitter system,
/// `3E1(s0) + (1−s0)e^{−s0} − 3E1(s1) − (1−s1)e^{−s1}`.
pub fn dist_cl_expected_rate(power: f64) -> Result<f64> {
    let b = dist_cl_boundaries(power)?;
    let part = |s: f64| 3.0 * e1(s) + (1.0 - s) * (-s).exp();
    Ok(part(b.s0) - part(b.s1))
}

/// Ergodic capacity of the two-transmitter system,
/// `1 + (1 − 2/P) e^{2/P} E1(2/P)`.
pub fn dist_ergodic(power: f64) -> Result<f64> {
    check_power(power)?;
    let x = 2.0 / power;
    Ok(1.0 + (1.0 - x) * e1_scaled(x))
}

/// Maximum single-layer throughput `max_{0<s<1} (1+2s)e^{−2s} ln(1+Ps)`.
pub fn dist_throughput_max(power: f64) -> Result<OptResult<f64>> {
    check_power(power)?;
    let f = |s: f64| (1.0 + 2.0 * s) * (-2.0 * s).exp() * (power * s).ln_1p();
    maximize_scalar(f, Bracket::new(0.0, 1.0)?, DEFAULT_SCALAR_TOL)
}

/// One point of the four rate curves of the two-transmitter system.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Fig2Row {
    pub power: f64,
    pub throughput: f64,
    pub throughput_argmax: f64,
    pub two_layer: f64,
    pub continuous: f64,
    pub ergodic: f64,
}

/// Throughput, two-layer expected rate, continuous-layer expected rate and
/// ergodic capacity on `powers`, in grid order.
pub fn fig2_curves(powers: &[f64]) -> Result<Vec<Fig2Row>> {
    powers
        .par_iter()
        .map(|&p| {
            let thr = dist_throughput_max(p)?;
            let (_, two_layer) = miso_expected_rate_k(2, p, 2)?;
            Ok(Fig2Row {
                power: p,
                throughput: thr.value,
                throughput_argmax: thr.argmax,
                two_layer,
                continuous: dist_cl_expected_rate(p)?,
                ergodic: dist_ergodic(p)?,
            })
        })
        .collect()
}

/// `ρ` in `grid` with the smallest analytic outage at `(P, R)`; ties keep
/// the first grid entry.
pub fn optimal_rho(power: f64, rate: f64, grid: &[f64]) -> Result<(f64, f64)> {
    let mut best: Option<(f64, f64)> = None;
    for &rho in grid {
        let out = dist_outage_analytic(rho, power, rate)?;
        if best.is_none_or(|(_, b)| out < b) {
            best = Some((rho, out));
        }
    }
    best.ok_or_else(|| Error::Dimension("empty rho grid".into()))
}

/// Rate at which the outage of `ρ = 0` and `ρ = 1` coincide; below it
/// `ρ = 0` has the smaller outage, above it `ρ = 1` does.
pub fn rho_switch_rate(power: f64) -> Result<f64> {
    check_power(power)?;
    let diff = |r: f64| {
        dist_outage_analytic(0.0, power, r).unwrap_or(f64::NAN)
            - dist_outage_analytic(1.0, power, r).unwrap_or(f64::NAN)
    };
    // ρ = 0 wins for small R: outage ~ x² vs ~ x
    let mut hi = 1.0;
    while diff(hi) < 0.0 {
        hi *= 2.0;
        if hi > 1e4 {
            return Err(Error::NoConvergence {
                what: "rho switch bracket",
                iterations: 14,
            });
        }
    }
    find_root(diff, Bracket::new(1e-9, hi)?, 1e-13)
}
