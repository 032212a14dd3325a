//! MISO, SISO and SIMO rate closed forms: maximum throughput, K-layer and
//! continuous-layer expected-rates and ergodic capacity.
//!
//! With `x = ‖h‖²` gamma distributed of shape `n`, a rate is supported iff
//! `x ≥ m·s` for a normalized threshold `s`. The MISO channel has
//! `n = m = nt`; the low-SNR MIMO forms reuse the same machinery with
//! `n = nt·nr`, `m = nt`, which is why the helpers below are written for a
//! general `(n, m)` pair.

use crate::error::{domain, Error, Result};
use crate::optimize::{
    find_root, maximize_layered_with, maximize_scalar, Bracket, LayeredOptions, LayeredPoint,
    OptResult, DEFAULT_RESTARTS, DEFAULT_SCALAR_TOL,
};
use crate::specfun::{e1, e1_scaled, en_continued_fraction_scaled, gamma_tail};

/// Smallest threshold handed to the optimizers; every objective is 0 at
/// `s = 0` and the stationarity function diverges there.
const S_FLOOR: f64 = 1e-12;

/// Superposition code: layer `i` (0-based, decoded first) carries power
/// `P_i` and threshold `s_i`. Rates follow from
/// `R_i = ln(1 + P_i s_i / (1 + I_i s_i))` with `I_i = Σ_{j>i} P_j`.
#[derive(Debug, Clone, PartialEq)]
pub struct LayerPlan {
    powers: Vec<f64>,
    thresholds: Vec<f64>,
    interference: Vec<f64>,
    rates: Vec<f64>,
}

impl LayerPlan {
    pub fn new(powers: Vec<f64>, thresholds: Vec<f64>) -> Result<Self> {
        if powers.is_empty() || powers.len() != thresholds.len() {
            return Err(Error::Dimension(format!(
                "layer plan needs matching nonempty powers and thresholds, got {} and {}",
                powers.len(),
                thresholds.len()
            )));
        }
        if let Some(&p) = powers.iter().find(|p| !(p.is_finite() && **p >= 0.0)) {
            return Err(domain("layer power", p, "finite and >= 0"));
        }
        if let Some(&s) = thresholds.iter().find(|s| !(s.is_finite() && **s > 0.0)) {
            return Err(domain("layer threshold", s, "finite and > 0"));
        }
        let k = powers.len();
        let mut interference = vec![0.0; k];
        for i in (0..k.saturating_sub(1)).rev() {
            interference[i] = interference[i + 1] + powers[i + 1];
        }
        let rates = (0..k)
            .map(|i| layer_rate(powers[i], interference[i], thresholds[i]))
            .collect();
        Ok(Self {
            powers,
            thresholds,
            interference,
            rates,
        })
    }

    pub fn layers(&self) -> usize {
        self.powers.len()
    }

    pub fn powers(&self) -> &[f64] {
        &self.powers
    }

    pub fn thresholds(&self) -> &[f64] {
        &self.thresholds
    }

    pub fn rates(&self) -> &[f64] {
        &self.rates
    }

    /// `I_i`, the power of the layers above `layer`.
    pub fn interference(&self, layer: usize) -> f64 {
        self.interference[layer]
    }

    pub fn total_power(&self) -> f64 {
        self.powers.iter().sum()
    }
}

fn layer_rate(power: f64, interference: f64, s: f64) -> f64 {
    (power * s / (1.0 + interference * s)).ln_1p()
}

/// Boundaries of the active threshold interval of continuous-layer coding.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClBoundaries {
    pub s0: f64,
    pub s1: f64,
}

fn check_antennas(name: &'static str, n: usize) -> Result<u32> {
    if n == 0 || n > 10_000 {
        return Err(domain(name, n as f64, "1 <= n <= 10000"));
    }
    Ok(n as u32)
}

fn check_power(p: f64) -> Result<()> {
    if !(p.is_finite() && p > 0.0) {
        return Err(domain("P", p, "finite and > 0"));
    }
    Ok(())
}

/// `Γ(n, x) / ((n−1)! x^{n−1} e^{−x})`, i.e. the gamma tail over its
/// density times `x^0`, as `Σ_{j=0}^{n−1} Π_{k<j} (n−1−k)/x`.
fn tail_density_ratio(n: u32, x: f64) -> f64 {
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 0..n.saturating_sub(1) {
        term *= f64::from(n - 1 - k) / x;
        sum += term;
    }
    sum
}

/// `r(s)`: gamma tail over `nt` times its density at `nt·s`.
pub fn r_func(nt: usize, s: f64) -> Result<f64> {
    let n = check_antennas("nt", nt)?;
    if !(s.is_finite() && s > 0.0) {
        return Err(domain("s", s, "finite and > 0"));
    }
    Ok(r_general(n, f64::from(n), s))
}

fn r_general(n: u32, m: f64, s: f64) -> f64 {
    tail_density_ratio(n, m * s) / m
}

/// `g(s, P) = ((1 + Ps)/P) ln(1 + Ps)`.
pub fn g_func(s: f64, p: f64) -> Result<f64> {
    check_power(p)?;
    if !(s.is_finite() && s >= 0.0) {
        return Err(domain("s", s, "finite and >= 0"));
    }
    Ok(g_unchecked(s, p))
}

fn g_unchecked(s: f64, p: f64) -> f64 {
    (1.0 + p * s) / p * (p * s).ln_1p()
}

/// Single-layer throughput `P{x ≥ m s}·ln(1 + Ps)` for `x ~ Gamma(n, 1)`.
fn throughput_objective_general(n: u32, m: f64, s: f64, p: f64) -> f64 {
    gamma_tail(n, m * s) * (p * s).ln_1p()
}

/// Single-layer MISO throughput at threshold `s`:
/// `Γ(nt, nt s)/(nt−1)! · ln(1 + Ps)`.
pub fn miso_throughput_objective(nt: usize, s: f64, p: f64) -> Result<f64> {
    let n = check_antennas("nt", nt)?;
    check_power(p)?;
    if !(s.is_finite() && s >= 0.0) {
        return Err(domain("s", s, "finite and >= 0"));
    }
    Ok(throughput_objective_general(n, f64::from(n), s, p))
}

/// Grid-then-golden maximization over `(0, s_hi]`, then the argmax is
/// polished to the root of the stationarity condition `r(s) = g(s, P)`
/// when that root lies next to it.
pub(crate) fn throughput_max_general(n: u32, m: f64, p: f64, s_hi: f64) -> Result<OptResult<f64>> {
    let bracket = Bracket::new(S_FLOOR, s_hi)?;
    let coarse = maximize_scalar(
        |s| throughput_objective_general(n, m, s, p),
        bracket,
        DEFAULT_SCALAR_TOL,
    )?;
    let width = (10.0 * coarse.tol_achieved).max(1e-7);
    let lo = (coarse.argmax - width).max(S_FLOOR);
    let hi = (coarse.argmax + width).min(s_hi);
    let stationarity = |s: f64| r_general(n, m, s) - g_unchecked(s, p);
    if lo < hi && stationarity(lo) > 0.0 && stationarity(hi) < 0.0 {
        let root = find_root(stationarity, Bracket::new(lo, hi)?, f64::MIN_POSITIVE)?;
        let value = throughput_objective_general(n, m, root, p);
        if value >= coarse.value - 1e-15 * coarse.value.abs() {
            return Ok(OptResult {
                argmax: root,
                value,
                iterations: coarse.iterations,
                tol_achieved: f64::EPSILON * root,
            });
        }
    }
    Ok(coarse)
}

/// Maximum single-layer throughput of the `nt × 1` channel; `argmax` is the
/// optimal normalized threshold `s°`, the rate is `ln(1 + P s°)`.
pub fn miso_throughput_max(nt: usize, p: f64) -> Result<OptResult<f64>> {
    let n = check_antennas("nt", nt)?;
    check_power(p)?;
    throughput_max_general(n, f64::from(n), p, 1.0)
}

/// Single-antenna optimum through the Lambert W function:
/// `s° = 1/W0(P) − 1/P`, value `e^{1/P − 1/W0(P)} ln(P / W0(P))`.
pub fn siso_throughput_closed(p: f64) -> Result<(f64, f64)> {
    check_power(p)?;
    let w = crate::specfun::lambert_w0(p)?;
    let s = 1.0 / w - 1.0 / p;
    let value = (1.0 / p - 1.0 / w).exp() * (p / w).ln();
    Ok((s, value))
}

/// Ergodic capacity of the `nt × 1` Rayleigh channel under equal power.
pub fn miso_ergodic(nt: usize, p: f64) -> Result<f64> {
    let n = check_antennas("nt", nt)?;
    check_power(p)?;
    let x = f64::from(n) / p;
    if x > 1.0 {
        // the double sum below cancels like x^{nt−1}/(nt−1)!; this form
        // has positive terms only
        return Ok((1..=n).map(|k| en_continued_fraction_scaled(k, x)).sum());
    }
    // first part: e^x E1(x) Σ_{ℓ<nt} (−x)^ℓ/ℓ!
    let mut poly = 0.0;
    let mut term = 1.0;
    for l in 0..n {
        if l > 0 {
            term *= -x / f64::from(l);
        }
        poly += term;
    }
    let mut total = e1_scaled(x) * poly;
    // second part: Σ_{ℓ=1}^{nt−1} Σ_{k<ℓ} (−1)^k/((ℓ−k) k!) Σ_{m<ℓ−k} x^{k+m}/m!
    for l in 1..n {
        let mut x_k_over_k_fact = 1.0;
        for k in 0..l {
            if k > 0 {
                x_k_over_k_fact *= x / f64::from(k);
            }
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            let mut inner = 0.0;
            let mut x_m_over_m_fact = 1.0;
            for m in 0..(l - k) {
                if m > 0 {
                    x_m_over_m_fact *= x / f64::from(m);
                }
                inner += x_m_over_m_fact;
            }
            total += sign * x_k_over_k_fact * inner / f64::from(l - k);
        }
    }
    Ok(total)
}

/// Ergodic capacity of the `1 × nr` channel: the `nr × 1` MISO value at
/// power `nr·P`.
pub fn simo_ergodic(nr: usize, p: f64) -> Result<f64> {
    check_power(p)?;
    miso_ergodic(nr, nr as f64 * p)
}

/// Expected rate `Σ P{x ≥ m s_i} R_i` of a plan, `x ~ Gamma(n, 1)`.
fn expected_rate_objective_general(n: u32, m: f64, thresholds: &[f64], powers: &[f64]) -> f64 {
    let mut interference = 0.0;
    let mut total = 0.0;
    for i in (0..thresholds.len()).rev() {
        let s = thresholds[i];
        total += gamma_tail(n, m * s) * layer_rate(powers[i], interference, s);
        interference += powers[i];
    }
    total
}

/// K-layer MISO expected rate of the given thresholds and powers (layer 0
/// decoded first).
pub fn miso_expected_rate_objective(nt: usize, thresholds: &[f64], powers: &[f64]) -> Result<f64> {
    let n = check_antennas("nt", nt)?;
    if thresholds.len() != powers.len() || thresholds.is_empty() {
        return Err(Error::Dimension(format!(
            "{} thresholds for {} powers",
            thresholds.len(),
            powers.len()
        )));
    }
    Ok(expected_rate_objective_general(n, f64::from(n), thresholds, powers))
}

pub(crate) fn expected_rate_max_general(
    n: u32,
    m: f64,
    p: f64,
    k: usize,
    s_hi: f64,
) -> Result<(LayerPlan, f64)> {
    if k == 0 {
        return Err(domain("K", 0.0, "K >= 1"));
    }
    if k == 1 {
        let single = throughput_max_general(n, m, p, s_hi)?;
        let plan = LayerPlan::new(vec![p], vec![single.argmax])?;
        return Ok((plan, single.value));
    }
    // any (K−1)-layer plan embeds with an idle layer on top or at the bottom
    let (lower, _) = expected_rate_max_general(n, m, p, k - 1, s_hi)?;
    let mut top = LayeredPoint {
        thresholds: lower.thresholds().to_vec(),
        powers: lower.powers().to_vec(),
    };
    top.thresholds.push(*lower.thresholds().last().expect("nonempty plan"));
    top.powers.push(0.0);
    let mut bottom = LayeredPoint {
        thresholds: vec![lower.thresholds()[0]],
        powers: vec![0.0],
    };
    bottom.thresholds.extend_from_slice(lower.thresholds());
    bottom.powers.extend_from_slice(lower.powers());

    let opts = LayeredOptions {
        s_range: (S_FLOOR, s_hi),
        restarts: DEFAULT_RESTARTS,
        warm_starts: vec![top, bottom],
        ..LayeredOptions::default()
    };
    let best = maximize_layered_with(
        k,
        p,
        |s, pw| expected_rate_objective_general(n, m, s, pw),
        &opts,
    )?;
    let plan = LayerPlan::new(best.argmax.powers, best.argmax.thresholds)?;
    Ok((plan, best.value))
}

/// Maximum K-layer expected rate of the `nt × 1` channel with equal power
/// per antenna in every layer. `K = 1` is exactly [`miso_throughput_max`].
pub fn miso_expected_rate_k(nt: usize, p: f64, k: usize) -> Result<(LayerPlan, f64)> {
    let n = check_antennas("nt", nt)?;
    check_power(p)?;
    expected_rate_max_general(n, f64::from(n), p, k, 1.0)
}

/// Left side of the boundary equations,
/// `Σ_{ℓ=0}^{n−1} (n−1)!/(ℓ! s^{n−ℓ})`; strictly decreasing in `s`.
pub(crate) fn boundary_lhs(n: u32, s: f64) -> f64 {
    let mut term = 1.0 / s;
    let mut sum = term;
    for j in 2..=n {
        term *= f64::from(n - j + 1) / s;
        sum += term;
    }
    sum
}

fn solve_decreasing(g: impl Fn(f64) -> f64, lo: f64, hi: f64) -> Result<f64> {
    let mut hi = hi;
    let mut tries = 0;
    while g(hi) > 0.0 {
        hi *= 2.0;
        tries += 1;
        if tries > 200 || !hi.is_finite() {
            return Err(Error::NoSignChange {
                lo,
                hi,
                g_lo: g(lo),
                g_hi: g(hi),
            });
        }
    }
    let mut lo = lo;
    tries = 0;
    while g(lo) < 0.0 {
        lo *= 0.5;
        tries += 1;
        if tries > 200 || lo == 0.0 {
            return Err(Error::NoSignChange {
                lo,
                hi,
                g_lo: g(lo),
                g_hi: g(hi),
            });
        }
    }
    find_root(g, Bracket::new(lo, hi)?, f64::MIN_POSITIVE)
}

pub(crate) fn cl_boundaries_general(n: u32, scale: f64) -> Result<ClBoundaries> {
    let nf = f64::from(n);
    let s0 = solve_decreasing(|s| boundary_lhs(n, s) - 1.0 - scale * s, 1e-8, nf.max(1.0))?;
    let s1 = solve_decreasing(|s| boundary_lhs(n, s) - 1.0, 1e-8, 10.0 * nf)?;
    Ok(ClBoundaries { s0, s1 })
}

/// Active threshold interval `[s0, s1]` of continuous-layer coding:
/// `lhs(s0) = 1 + (P/nt) s0` and `lhs(s1) = 1`.
pub fn solve_cl_boundaries(nt: usize, p: f64) -> Result<ClBoundaries> {
    let n = check_antennas("nt", nt)?;
    check_power(p)?;
    cl_boundaries_general(n, p / f64::from(n))
}

/// Continuous-layer integrand `e^{−s}((n+1)/s − 1) Σ_{ℓ<n} s^ℓ/ℓ!`.
pub fn cl_integrand(nt: usize, s: f64) -> Result<f64> {
    let n = check_antennas("nt", nt)?;
    if !(s.is_finite() && s > 0.0) {
        return Err(domain("s", s, "finite and > 0"));
    }
    Ok(cl_integrand_general(n, s))
}

pub(crate) fn cl_integrand_general(n: u32, s: f64) -> f64 {
    let mut term = 1.0;
    let mut sum = 1.0;
    for l in 1..n {
        term *= s / f64::from(l);
        sum += term;
    }
    (-s).exp() * ((f64::from(n) + 1.0) / s - 1.0) * sum
}

pub(crate) fn cl_antiderivative_general(n: u32, s: f64) -> f64 {
    let nf = f64::from(n);
    let mut outer = 0.0;
    // s^ℓ/ℓ! and the partial exponential sum Σ_{k<ℓ} s^k/k!
    let mut s_pow_over_fact = 1.0;
    let mut partial = 0.0;
    for l in 1..n {
        partial += s_pow_over_fact;
        let lf = f64::from(l);
        s_pow_over_fact *= s / lf;
        // (1/ℓ!)(ℓ−1)! = 1/ℓ
        outer += s_pow_over_fact - (nf + 1.0 - lf) / lf * partial;
    }
    (-s).exp() * (outer + 1.0) - (nf + 1.0) * e1(s)
}

/// Antiderivative `R(s)` of [`cl_integrand`].
pub fn cl_antiderivative(nt: usize, s: f64) -> Result<f64> {
    let n = check_antennas("nt", nt)?;
    if !(s.is_finite() && s > 0.0) {
        return Err(domain("s", s, "finite and > 0"));
    }
    Ok(cl_antiderivative_general(n, s))
}

pub(crate) fn cl_rate_general(n: u32, scale: f64) -> Result<(ClBoundaries, f64)> {
    let b = cl_boundaries_general(n, scale)?;
    let value = cl_antiderivative_general(n, b.s1) - cl_antiderivative_general(n, b.s0);
    Ok((b, value))
}

/// Maximum continuous-layer expected rate `R(s1) − R(s0)`.
pub fn miso_cl_expected_rate(nt: usize, p: f64) -> Result<f64> {
    let n = check_antennas("nt", nt)?;
    check_power(p)?;
    Ok(cl_rate_general(n, p / f64::from(n))?.1)
}
