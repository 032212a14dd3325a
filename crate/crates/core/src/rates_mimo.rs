//! MIMO throughput in the low-SNR, high-SNR, large transmit-array and large
//! receive-array regimes, the Gaussian-approximation maximizer they share,
//! and the Monte Carlo throughput surface.

use std::fmt;

use rand::Rng;
use rand_distr::{Distribution, Exp1};

use crate::channel::{
    empirical_throughput, mutual_information, sample_channel, simulate, McConfig, McEstimate,
    McThroughput, PowerAllocation,
};
use crate::error::{domain, Error, Result};
use crate::optimize::{find_root, maximize_scalar, Bracket, OptResult, DEFAULT_SCALAR_TOL};
use crate::rates_miso::{
    cl_rate_general, expected_rate_max_general, throughput_max_general, LayerPlan,
};
use crate::specfun::{
    digamma_int_with, digamma_prime_int, gaussian_density, gaussian_tail, EULER_MASCHERONI,
};

/// `I ~ N(mu, sigma²)` approximation of the mutual information.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianApprox {
    mu: f64,
    sigma: f64,
}

impl GaussianApprox {
    pub fn new(mu: f64, sigma: f64) -> Result<Self> {
        if !mu.is_finite() {
            return Err(domain("mu", mu, "finite"));
        }
        if !(sigma.is_finite() && sigma > 0.0) {
            return Err(domain("sigma", sigma, "finite and > 0"));
        }
        Ok(Self { mu, sigma })
    }

    pub fn from_variance(mu: f64, variance: f64) -> Result<Self> {
        Self::new(mu, variance.sqrt())
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    /// Throughput `Q(z)(σz + μ)` at rate `σz + μ`.
    pub fn objective(&self, z: f64) -> f64 {
        gaussian_tail(z) * (self.sigma * z + self.mu)
    }

    /// Derivative of [`Self::objective`], `σQ(z) − φ(z)(σz + μ)`.
    pub fn stationarity(&self, z: f64) -> f64 {
        self.sigma * gaussian_tail(z) - gaussian_density(z) * (self.sigma * z + self.mu)
    }
}

/// `z` search interval of [`gaussian_throughput`].
pub const Z_RANGE: (f64, f64) = (-10.0, 10.0);

/// Maximizes `Q(z)(σz + μ)` over `z ∈ [−10, 10]`; `argmax` is `z°` and the
/// rate is `σz° + μ`. A maximum on either end of the interval is an error.
pub fn gaussian_throughput(g: GaussianApprox) -> Result<OptResult<f64>> {
    let bracket = Bracket::new(Z_RANGE.0, Z_RANGE.1)?;
    let coarse = maximize_scalar(|z| g.objective(z), bracket, DEFAULT_SCALAR_TOL)?;
    let edge = 1e-6;
    if coarse.argmax <= Z_RANGE.0 + edge || coarse.argmax >= Z_RANGE.1 - edge {
        return Err(Error::EdgeMaximum {
            what: "Gaussian throughput",
            at: coarse.argmax,
        });
    }
    let width = (10.0 * coarse.tol_achieved).max(1e-7);
    let (lo, hi) = (coarse.argmax - width, coarse.argmax + width);
    if g.stationarity(lo) > 0.0 && g.stationarity(hi) < 0.0 {
        let z = find_root(|z| g.stationarity(z), Bracket::new(lo, hi)?, f64::MIN_POSITIVE)?;
        let value = g.objective(z);
        if value >= coarse.value - 1e-15 * coarse.value.abs() {
            return Ok(OptResult {
                argmax: z,
                value,
                iterations: coarse.iterations,
                tol_achieved: f64::EPSILON * z.abs().max(1.0),
            });
        }
    }
    Ok(coarse)
}

/// Reasons an asymptotic formula was applied outside its intended range.
#[derive(Debug, Clone, PartialEq)]
pub enum ValidityWarning {
    /// low-SNR form used with `P > 0.1`
    PowerNotLow { power: f64 },
    /// high-SNR form used with `P < 100`
    PowerNotHigh { power: f64 },
    /// high-SNR mean is not positive
    NonPositiveMean { mu: f64 },
    /// large-array form used with an antenna ratio below 8
    ArrayRatioTooSmall { ratio: f64 },
}

impl fmt::Display for ValidityWarning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::PowerNotLow { power } => write!(f, "low-SNR form used at P = {power} > 0.1"),
            Self::PowerNotHigh { power } => write!(f, "high-SNR form used at P = {power} < 100"),
            Self::NonPositiveMean { mu } => write!(f, "high-SNR mean {mu} is not positive"),
            Self::ArrayRatioTooSmall { ratio } => {
                write!(f, "large-array form used at antenna ratio {ratio} < 8")
            }
        }
    }
}

pub const LOW_SNR_MAX_POWER: f64 = 0.1;
pub const HIGH_SNR_MIN_POWER: f64 = 100.0;
pub const LARGE_ARRAY_MIN_RATIO: f64 = 8.0;

/// Asymptotic throughput with the approximation it came from and any
/// validity warnings.
#[derive(Debug, Clone, PartialEq)]
pub struct RegimeThroughput {
    pub result: OptResult<f64>,
    pub approx: Option<GaussianApprox>,
    pub warnings: Vec<ValidityWarning>,
}

fn check_dims(nt: usize, nr: usize) -> Result<(u32, u32)> {
    if nt == 0 || nr == 0 || nt * nr > 10_000 {
        return Err(Error::Dimension(format!(
            "antenna counts must satisfy 1 <= nt*nr <= 10000, got {nt}x{nr}"
        )));
    }
    Ok((nt as u32, nr as u32))
}

fn check_power(p: f64) -> Result<()> {
    if !(p.is_finite() && p > 0.0) {
        return Err(domain("P", p, "finite and > 0"));
    }
    Ok(())
}

fn low_snr_warnings(p: f64) -> Vec<ValidityWarning> {
    if p > LOW_SNR_MAX_POWER {
        vec![ValidityWarning::PowerNotLow { power: p }]
    } else {
        Vec::new()
    }
}

/// Low-SNR throughput `max_{0<s<nr} Γ(nt nr, nt s)/(nt nr − 1)! · ln(1 + Ps)`;
/// `argmax` is `s` on the `(0, nr)` scale.
pub fn lowsnr_throughput(nt: usize, nr: usize, p: f64) -> Result<RegimeThroughput> {
    let (t, r) = check_dims(nt, nr)?;
    check_power(p)?;
    let result = throughput_max_general(t * r, f64::from(t), p, f64::from(r))?;
    Ok(RegimeThroughput {
        result,
        approx: None,
        warnings: low_snr_warnings(p),
    })
}

/// Low-SNR K-layer expected rate; thresholds are on the `(0, nr)` scale.
pub fn lowsnr_expected_rate_k(nt: usize, nr: usize, p: f64, k: usize) -> Result<(LayerPlan, f64)> {
    let (t, r) = check_dims(nt, nr)?;
    check_power(p)?;
    expected_rate_max_general(t * r, f64::from(t), p, k, f64::from(r))
}

/// Low-SNR continuous-layer expected rate: the continuous-layer closed form
/// with gamma order `nt·nr` and boundary slope `P/nt`.
pub fn lowsnr_cl_expected_rate(nt: usize, nr: usize, p: f64) -> Result<f64> {
    let (t, r) = check_dims(nt, nr)?;
    check_power(p)?;
    Ok(cl_rate_general(t * r, p / f64::from(t))?.1)
}

/// `p = min(nt, nr)` and `n = max(nt, nr)` of the Wishart matrix `HH†`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WishartShape {
    p: u32,
    n: u32,
}

impl WishartShape {
    pub fn new(p: usize, n: usize) -> Result<Self> {
        if p == 0 || p > n || n > 10_000 {
            return Err(Error::Dimension(format!(
                "Wishart shape needs 1 <= p <= n <= 10000, got p={p}, n={n}"
            )));
        }
        Ok(Self {
            p: p as u32,
            n: n as u32,
        })
    }

    pub fn from_antennas(nt: usize, nr: usize) -> Result<Self> {
        Self::new(nt.min(nr), nt.max(nr))
    }

    pub fn p(&self) -> usize {
        self.p as usize
    }

    pub fn n(&self) -> usize {
        self.n as usize
    }
}

/// `E ln det W = Σ_{k<p} ψ(n−k)` and `Var ln det W = Σ_{k<p} ψ′(n−k)`.
pub fn wishart_logdet_moments(shape: WishartShape) -> Result<(f64, f64)> {
    wishart_logdet_moments_with(shape, EULER_MASCHERONI)
}

/// [`wishart_logdet_moments`] with a caller-supplied Euler-Mascheroni
/// constant.
pub fn wishart_logdet_moments_with(shape: WishartShape, euler_mascheroni: f64) -> Result<(f64, f64)> {
    let mut mean = 0.0;
    let mut var = 0.0;
    for k in 0..shape.p {
        mean += digamma_int_with(shape.n - k, euler_mascheroni)?;
        var += digamma_prime_int(shape.n - k)?;
    }
    Ok((mean, var))
}

/// One draw of `ln det W` as `Σ_{ℓ=1}^{p} ln a_ℓℓ²` with
/// `a_ℓℓ² ~ Gamma(n − ℓ + 1, 1)`, each a sum of unit exponentials.
pub fn bartlett_logdet_sample<R: Rng + ?Sized>(shape: WishartShape, rng: &mut R) -> f64 {
    let mut total = 0.0;
    for l in 1..=shape.p {
        let k = shape.n - l + 1;
        let gamma: f64 = (0..k).map(|_| -> f64 { Exp1.sample(rng) }).sum();
        total += gamma.ln();
    }
    total
}

/// Bartlett draws of `ln det W` in sample-index order.
pub fn bartlett_logdet_samples(shape: WishartShape, cfg: &McConfig) -> Result<Vec<f64>> {
    simulate(cfg, |rng| bartlett_logdet_sample(shape, rng))
}

fn hisnr_offset(shape: WishartShape, nt: usize, p: f64) -> f64 {
    f64::from(shape.p) * (p / nt as f64).ln()
}

/// High-SNR Gaussian approximation: `μ = Σψ(n−k) + p ln(P/nt)`,
/// `σ² = Σψ′(n−k)`.
pub fn hisnr_approx(nt: usize, nr: usize, p: f64) -> Result<GaussianApprox> {
    hisnr_approx_with(nt, nr, p, EULER_MASCHERONI)
}

/// [`hisnr_approx`] with a caller-supplied Euler-Mascheroni constant.
pub fn hisnr_approx_with(nt: usize, nr: usize, p: f64, euler_mascheroni: f64) -> Result<GaussianApprox> {
    check_dims(nt, nr)?;
    check_power(p)?;
    let shape = WishartShape::from_antennas(nt, nr)?;
    let (mean, var) = wishart_logdet_moments_with(shape, euler_mascheroni)?;
    GaussianApprox::from_variance(mean + hisnr_offset(shape, nt, p), var)
}

/// High-SNR throughput through the Gaussian approximation.
pub fn hisnr_throughput(nt: usize, nr: usize, p: f64) -> Result<RegimeThroughput> {
    let approx = hisnr_approx(nt, nr, p)?;
    let mut warnings = Vec::new();
    if p < HIGH_SNR_MIN_POWER {
        warnings.push(ValidityWarning::PowerNotHigh { power: p });
    }
    if approx.mu() <= 0.0 {
        warnings.push(ValidityWarning::NonPositiveMean { mu: approx.mu() });
    }
    Ok(RegimeThroughput {
        result: gaussian_throughput(approx)?,
        approx: Some(approx),
        warnings,
    })
}

/// High-SNR throughput by Monte Carlo over Bartlett draws: with
/// `u = P^p/nt^p · Π a_ℓℓ²`, decoding at rate `ln(1 + Ps)` succeeds iff
/// `u ≥ Ps`, so the throughput is the empirical maximum over the samples
/// `ln(1 + u)`.
pub fn hisnr_throughput_mc(nt: usize, nr: usize, p: f64, cfg: &McConfig) -> Result<McThroughput> {
    check_dims(nt, nr)?;
    check_power(p)?;
    let shape = WishartShape::from_antennas(nt, nr)?;
    let offset = hisnr_offset(shape, nt, p);
    let pseudo_mi: Vec<f64> = bartlett_logdet_samples(shape, cfg)?
        .into_iter()
        .map(|l| softplus(l + offset))
        .collect();
    Ok(empirical_throughput(&pseudo_mi, cfg.seed))
}

/// `ln(1 + e^x)` without overflow.
fn softplus(x: f64) -> f64 {
    if x > 0.0 {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}

/// Large transmit-array approximation: `μ = nr ln(1+P)`,
/// `σ² = nr P² / (nt (1 + P²))`.
pub fn large_nt_approx(nt: usize, nr: usize, p: f64) -> Result<GaussianApprox> {
    check_dims(nt, nr)?;
    check_power(p)?;
    let (t, r) = (nt as f64, nr as f64);
    GaussianApprox::from_variance(r * p.ln_1p(), r * p * p / (t * (1.0 + p * p)))
}

/// Large receive-array approximation: `μ = nt ln(1 + nr P/nt)`,
/// `σ² = nt/nr`.
pub fn large_nr_approx(nt: usize, nr: usize, p: f64) -> Result<GaussianApprox> {
    check_dims(nt, nr)?;
    check_power(p)?;
    let (t, r) = (nt as f64, nr as f64);
    GaussianApprox::from_variance(t * (r * p / t).ln_1p(), t / r)
}

fn ratio_warning(ratio: f64) -> Vec<ValidityWarning> {
    if ratio < LARGE_ARRAY_MIN_RATIO {
        vec![ValidityWarning::ArrayRatioTooSmall { ratio }]
    } else {
        Vec::new()
    }
}

pub fn large_nt_throughput(nt: usize, nr: usize, p: f64) -> Result<RegimeThroughput> {
    let approx = large_nt_approx(nt, nr, p)?;
    Ok(RegimeThroughput {
        result: gaussian_throughput(approx)?,
        approx: Some(approx),
        warnings: ratio_warning(nt as f64 / nr as f64),
    })
}

pub fn large_nr_throughput(nt: usize, nr: usize, p: f64) -> Result<RegimeThroughput> {
    let approx = large_nr_approx(nt, nr, p)?;
    Ok(RegimeThroughput {
        result: gaussian_throughput(approx)?,
        approx: Some(approx),
        warnings: ratio_warning(nr as f64 / nt as f64),
    })
}

/// Single-layer throughput by Monte Carlo under equal power, maximized
/// over the rate on the sample set.
pub fn mc_throughput(nt: usize, nr: usize, p: f64, cfg: &McConfig) -> Result<McThroughput> {
    let powers = PowerAllocation::equal(nt, p)?;
    let mi = crate::channel::mi_samples(nt, nr, &powers, cfg)?;
    Ok(empirical_throughput(&mi, cfg.seed))
}

/// Kolmogorov-Smirnov distance between `samples` and `N(mean, sd²)`.
pub fn ks_distance_normal(samples: &[f64], mean: f64, sd: f64) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::Dimension("no samples".into()));
    }
    if !(sd > 0.0) {
        return Err(domain("sd", sd, "> 0"));
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in sorted.iter().enumerate() {
        let cdf = gaussian_tail(-(x - mean) / sd);
        d = d.max((i + 1) as f64 / n - cdf).max(cdf - i as f64 / n);
    }
    Ok(d)
}

/// One `(nt, P)` cell of the throughput surface.
#[derive(Debug, Clone, PartialEq)]
pub struct SurfaceCell {
    pub nt: usize,
    pub nr: usize,
    pub power: f64,
    pub throughput: McThroughput,
    pub ergodic: McEstimate,
}

/// Monte Carlo throughput and ergodic rate over an `nt × P` grid with
/// equal power. Every cell of a row reuses the same channel draws, so each
/// row is pathwise monotone in `P`. Rows come out in `nts` order, cells in
/// `powers` order.
pub fn mimo_throughput_surface(
    nts: &[usize],
    nr: usize,
    powers: &[f64],
    cfg: &McConfig,
) -> Result<Vec<SurfaceCell>> {
    if let Some(&p) = powers.iter().find(|p| !(p.is_finite() && **p >= 0.0)) {
        return Err(domain("P", p, "finite and >= 0"));
    }
    let mut cells = Vec::with_capacity(nts.len() * powers.len());
    for &nt in nts {
        check_dims(nt, nr)?;
        let allocations = powers
            .iter()
            .map(|&p| PowerAllocation::equal(nt, p))
            .collect::<Result<Vec<_>>>()?;
        let per_sample: Vec<Vec<f64>> = simulate(cfg, |rng| {
            let h = sample_channel(nt, nr, rng);
            allocations
                .iter()
                .map(|a| mutual_information(&h, a).unwrap_or(f64::NAN))
                .collect()
        })?;
        for (j, &p) in powers.iter().enumerate() {
            let column: Vec<f64> = per_sample.iter().map(|row| row[j]).collect();
            if let Some(&bad) = column.iter().find(|v| !v.is_finite()) {
                return Err(Error::NonFinite { at: p, value: bad });
            }
            cells.push(SurfaceCell {
                nt,
                nr,
                power: p,
                throughput: empirical_throughput(&column, cfg.seed),
                ergodic: McEstimate::from_values(&column, cfg.seed),
            });
        }
    }
    Ok(cells)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rates_miso::{miso_expected_rate_k, miso_throughput_max};
    use crate::specfun::{BASEL, EULER_MASCHERONI};

    #[test]
    fn gaussian_narrow_distribution() {
        let g = GaussianApprox::new(10.0, 0.1).unwrap();
        let r = gaussian_throughput(g).unwrap();
        assert!(r.argmax < 0.0);
        assert!(r.value > 0.95 * 10.0 && r.value <= 10.0, "{}", r.value);
        assert!(g.stationarity(r.argmax).abs() <= 1e-6);
    }

    #[test]
    fn gaussian_scale_equivariance() {
        let g = GaussianApprox::new(1.3, 0.4).unwrap();
        let scaled = GaussianApprox::new(3.0 * 1.3, 3.0 * 0.4).unwrap();
        let a = gaussian_throughput(g).unwrap();
        let b = gaussian_throughput(scaled).unwrap();
        assert!((b.value - 3.0 * a.value).abs() <= 1e-9 * b.value);
        assert!((a.argmax - b.argmax).abs() <= 1e-7);
    }

    #[test]
    fn gaussian_rejects_degenerate() {
        assert!(GaussianApprox::new(1.0, 0.0).is_err());
        assert!(GaussianApprox::new(f64::NAN, 1.0).is_err());
    }

    #[test]
    fn lowsnr_single_receive_antenna_is_miso() {
        let a = lowsnr_throughput(3, 1, 0.05).unwrap();
        let b = miso_throughput_max(3, 0.05).unwrap();
        assert_eq!(a.result.value, b.value);
        assert!(a.warnings.is_empty());
        let (_, ka) = lowsnr_expected_rate_k(2, 1, 0.05, 2).unwrap();
        let (_, kb) = miso_expected_rate_k(2, 0.05, 2).unwrap();
        assert!((ka - kb).abs() <= 1e-12);
        assert!(!lowsnr_throughput(1, 1, 1.0).unwrap().warnings.is_empty());
    }

    #[test]
    fn lowsnr_matches_miso_mapping() {
        let a = lowsnr_throughput(2, 2, 0.1).unwrap().result;
        let b = miso_throughput_max(4, 0.2).unwrap();
        assert!((a.value - b.value).abs() <= 1e-8);
        assert!((a.argmax / 2.0 - b.argmax).abs() <= 1e-8);
    }

    #[test]
    fn wishart_moments() {
        let (m, v) = wishart_logdet_moments(WishartShape::new(1, 1).unwrap()).unwrap();
        assert!((m + EULER_MASCHERONI).abs() < 1e-15);
        assert!((v - BASEL).abs() < 1e-15);
        let (m, _) = wishart_logdet_moments(WishartShape::new(1, 2).unwrap()).unwrap();
        assert!((m - (1.0 - EULER_MASCHERONI)).abs() < 1e-15);
        let (m, v) = wishart_logdet_moments(WishartShape::new(2, 2).unwrap()).unwrap();
        assert!((m - (1.0 - 2.0 * EULER_MASCHERONI)).abs() < 1e-15);
        assert!((v - (2.0 * BASEL - 1.0)).abs() < 1e-15);
        assert!(WishartShape::new(3, 2).is_err());
    }

    #[test]
    fn high_snr_sign_of_optimum() {
        for nt in 1..=4 {
            for nr in 1..=4 {
                let r = hisnr_throughput(nt, nr, 1000.0).unwrap();
                assert!(r.result.argmax < 0.0, "{nt}x{nr}");
                assert!(r.warnings.is_empty());
            }
        }
    }

    #[test]
    fn large_array_values() {
        let g = large_nr_approx(1, 64, 1.0).unwrap();
        assert!((g.mu() - 65f64.ln()).abs() < 1e-14);
        assert!((g.sigma() * g.sigma() - 1.0 / 64.0).abs() < 1e-16);
        let r = large_nr_throughput(1, 64, 1.0).unwrap();
        assert!(r.result.value <= g.mu());
        assert!(r.warnings.is_empty());
        let small = large_nt_throughput(4, 2, 10.0).unwrap();
        assert_eq!(small.warnings.len(), 1);
        // σ → 0 drives the throughput to the mean
        let huge = large_nt_throughput(10_000 / 2, 2, 10.0).unwrap();
        let mu = 2.0 * 11f64.ln();
        assert!(huge.result.value <= mu && huge.result.value > 0.98 * mu);
    }

    #[test]
    fn softplus_is_stable() {
        assert_eq!(softplus(1000.0), 1000.0);
        assert!((softplus(0.0) - 2f64.ln()).abs() < 1e-16);
        assert!(softplus(-1000.0) >= 0.0);
    }

    #[test]
    fn ks_of_exact_quantiles_is_small() {
        let n = 1000;
        let samples: Vec<f64> = (0..n)
            .map(|i| {
                let u = (i as f64 + 0.5) / n as f64;
                // invert the normal CDF by bisection
                find_root(|x| 1.0 - gaussian_tail(x) - u, Bracket::new(-10.0, 10.0).unwrap(), 1e-14)
                    .unwrap()
            })
            .collect();
        let d = ks_distance_normal(&samples, 0.0, 1.0).unwrap();
        assert!(d <= 0.5 / n as f64 + 1e-9, "{d}");
    }
}
