//! Rayleigh channel sampling, instantaneous mutual information and the
//! Monte Carlo estimators used as an independent check on every closed
//! form.
//!
//! Reproducibility: sample `i` of a run with seed `s` always draws from the
//! ChaCha8 stream `(s, i)`. A run is therefore a pure function of
//! `(samples, seed)`; the worker count only changes how the index range is
//! split, never the values or the order in which they are reduced.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use std::f64::consts::FRAC_1_SQRT_2;

use crate::error::{domain, Error, Result};
use crate::rates_miso::LayerPlan;

/// One block-fading draw `H`, stored row-major with `nr` rows and `nt`
/// columns, so entry `(r, t)` is the gain from transmit antenna `t` to
/// receive antenna `r`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelRealization {
    nr: usize,
    nt: usize,
    entries: Vec<Complex64>,
}

impl ChannelRealization {
    pub fn new(nr: usize, nt: usize, entries: Vec<Complex64>) -> Result<Self> {
        if nr == 0 || nt == 0 {
            return Err(Error::Dimension(format!(
                "channel must be at least 1x1, got {nr}x{nt}"
            )));
        }
        if entries.len() != nr * nt {
            return Err(Error::Dimension(format!(
                "{nr}x{nt} channel needs {} entries, got {}",
                nr * nt,
                entries.len()
            )));
        }
        if let Some(bad) = entries.iter().find(|h| !(h.re.is_finite() && h.im.is_finite())) {
            return Err(domain("channel entry", bad.norm(), "finite"));
        }
        Ok(Self { nr, nt, entries })
    }

    /// MISO row vector `h` (one receive antenna).
    pub fn miso(h: Vec<Complex64>) -> Result<Self> {
        let nt = h.len();
        Self::new(1, nt, h)
    }

    pub fn zeros(nr: usize, nt: usize) -> Result<Self> {
        Self::new(nr, nt, vec![Complex64::new(0.0, 0.0); nr * nt])
    }

    pub fn nr(&self) -> usize {
        self.nr
    }

    pub fn nt(&self) -> usize {
        self.nt
    }

    pub fn entry(&self, r: usize, t: usize) -> Complex64 {
        self.entries[r * self.nt + t]
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.entries
    }

    /// Frobenius norm squared, `Σ |h_{r,t}|²`.
    pub fn gain(&self) -> f64 {
        self.entries.iter().map(|h| h.norm_sqr()).sum()
    }
}

/// Diagonal of the transmit covariance: one non-negative power per
/// transmit antenna.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerAllocation {
    powers: Vec<f64>,
}

impl PowerAllocation {
    pub fn new(powers: Vec<f64>) -> Result<Self> {
        if powers.is_empty() {
            return Err(Error::Dimension("power allocation is empty".into()));
        }
        if let Some(&bad) = powers.iter().find(|p| !(p.is_finite() && **p >= 0.0)) {
            return Err(domain("antenna power", bad, "finite and >= 0"));
        }
        Ok(Self { powers })
    }

    /// Checks the total power constraint `Σ p ≤ budget` as well.
    pub fn with_budget(powers: Vec<f64>, budget: f64) -> Result<Self> {
        let alloc = Self::new(powers)?;
        if alloc.total() > budget + 1e-12 {
            return Err(domain("total power", alloc.total(), "<= budget"));
        }
        Ok(alloc)
    }

    /// `P/nt` on every antenna.
    pub fn equal(nt: usize, total: f64) -> Result<Self> {
        if nt == 0 {
            return Err(domain("nt", 0.0, "nt >= 1"));
        }
        Self::new(vec![total / nt as f64; nt])
    }

    pub fn powers(&self) -> &[f64] {
        &self.powers
    }

    pub fn len(&self) -> usize {
        self.powers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.powers.is_empty()
    }

    pub fn total(&self) -> f64 {
        self.powers.iter().sum()
    }
}

/// Draws `H` with i.i.d. `CN(0, 1)` entries: real and imaginary parts are
/// independent `N(0, 1/2)`, so `E|h|² = 1`.
pub fn sample_channel<R: Rng + ?Sized>(nt: usize, nr: usize, rng: &mut R) -> ChannelRealization {
    let entries = (0..nr * nt).map(|_| sample_cn(rng)).collect();
    ChannelRealization { nr, nt, entries }
}

pub(crate) fn sample_cn<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    Complex64::new(re * FRAC_1_SQRT_2, im * FRAC_1_SQRT_2)
}

fn check_shapes(h: &ChannelRealization, powers: &PowerAllocation) -> Result<()> {
    if powers.len() != h.nt {
        return Err(Error::Dimension(format!(
            "{} antenna powers for a channel with {} transmit antennas",
            powers.len(),
            h.nt
        )));
    }
    Ok(())
}

/// `ln det(I + X)` for Hermitian positive semidefinite `X` (row-major,
/// `n×n`), through a Cholesky factorization of `I + X`. The identity is
/// kept implicit so that `ln(1 + small)` keeps its relative precision.
fn log_det_identity_plus(x: &mut [Complex64], n: usize) -> Result<f64> {
    let mut log_det = 0.0;
    for j in 0..n {
        let mut excess = x[j * n + j].re;
        for k in 0..j {
            excess -= x[j * n + k].norm_sqr();
        }
        // diagonal of I + X minus the projected part is 1 + excess
        if !(1.0 + excess > 0.0) {
            return Err(domain("cholesky pivot", 1.0 + excess, "> 0"));
        }
        log_det += excess.ln_1p();
        let pivot = (1.0 + excess).sqrt();
        x[j * n + j] = Complex64::new(pivot, 0.0);
        for i in j + 1..n {
            let mut v = x[i * n + j];
            for k in 0..j {
                v -= x[i * n + k] * x[j * n + k].conj();
            }
            x[i * n + j] = v / pivot;
        }
    }
    Ok(log_det)
}

/// `ln det(I_nr + H D Hᴴ)` with `D = diag(powers)`.
pub fn log_det_receive_form(h: &ChannelRealization, powers: &PowerAllocation) -> Result<f64> {
    check_shapes(h, powers)?;
    let (nr, nt) = (h.nr, h.nt);
    let p = powers.powers();
    let mut x = vec![Complex64::new(0.0, 0.0); nr * nr];
    for a in 0..nr {
        for b in 0..=a {
            let mut acc = Complex64::new(0.0, 0.0);
            for t in 0..nt {
                acc += h.entry(a, t) * h.entry(b, t).conj() * p[t];
            }
            x[a * nr + b] = acc;
            x[b * nr + a] = acc.conj();
        }
    }
    log_det_identity_plus(&mut x, nr)
}

/// `ln det(I_nt + D^{1/2} Hᴴ H D^{1/2})`, equal to `ln det(I_nt + D Hᴴ H)`.
pub fn log_det_transmit_form(h: &ChannelRealization, powers: &PowerAllocation) -> Result<f64> {
    check_shapes(h, powers)?;
    let (nr, nt) = (h.nr, h.nt);
    let sqrt_p: Vec<f64> = powers.powers().iter().map(|p| p.sqrt()).collect();
    let mut x = vec![Complex64::new(0.0, 0.0); nt * nt];
    for a in 0..nt {
        for b in 0..=a {
            let mut acc = Complex64::new(0.0, 0.0);
            for r in 0..nr {
                acc += h.entry(r, a).conj() * h.entry(r, b);
            }
            let v = acc * (sqrt_p[a] * sqrt_p[b]);
            x[a * nt + b] = v;
            x[b * nt + a] = v.conj();
        }
    }
    log_det_identity_plus(&mut x, nt)
}

/// Instantaneous mutual information in nats for a diagonal transmit
/// covariance. Evaluates whichever determinant form is smaller.
pub fn mutual_information(h: &ChannelRealization, powers: &PowerAllocation) -> Result<f64> {
    if h.nr <= h.nt {
        log_det_receive_form(h, powers)
    } else {
        log_det_transmit_form(h, powers)
    }
}

/// Rate of layer `layer` (0-based, layer 0 decoded first) of a MISO
/// superposition code with power `P_i/nt` per antenna in every layer, the
/// layers above acting as Gaussian interference.
pub fn layered_mutual_information(
    h: &ChannelRealization,
    plan: &LayerPlan,
    layer: usize,
) -> Result<f64> {
    if h.nr != 1 {
        return Err(Error::Dimension(format!(
            "layered rates need a MISO channel, got nr = {}",
            h.nr
        )));
    }
    if layer >= plan.layers() {
        return Err(Error::LayerIndex {
            index: layer,
            layers: plan.layers(),
        });
    }
    let per_antenna_gain = h.gain() / h.nt as f64;
    Ok(layer_rate(plan, layer, per_antenna_gain))
}

fn layer_rate(plan: &LayerPlan, layer: usize, per_antenna_gain: f64) -> f64 {
    let signal = plan.powers()[layer] * per_antenna_gain;
    let interference = plan.interference(layer) * per_antenna_gain;
    (signal / (1.0 + interference)).ln_1p()
}

/// Monte Carlo run parameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct McConfig {
    pub samples: u64,
    pub seed: u64,
    pub workers: usize,
}

impl McConfig {
    pub const DEFAULT_SEED: u64 = 0x5EED_CAFE;

    pub fn new(samples: u64, seed: u64, workers: usize) -> Result<Self> {
        if samples == 0 {
            return Err(domain("samples", 0.0, "samples >= 1"));
        }
        if workers == 0 {
            return Err(domain("workers", 0.0, "workers >= 1"));
        }
        Ok(Self {
            samples,
            seed,
            workers,
        })
    }

    pub fn with_samples(self, samples: u64) -> Self {
        Self { samples, ..self }
    }

    pub fn with_seed(self, seed: u64) -> Self {
        Self { seed, ..self }
    }

    pub fn with_workers(self, workers: usize) -> Self {
        Self { workers, ..self }
    }
}

impl Default for McConfig {
    fn default() -> Self {
        Self {
            samples: 100_000,
            seed: Self::DEFAULT_SEED,
            workers: std::thread::available_parallelism()
                .map(|n| n.get())
                .unwrap_or(1),
        }
    }
}

/// Point estimate with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    pub mean: f64,
    /// sample standard deviation / sqrt(samples)
    pub stderr: f64,
    pub samples: u64,
    pub seed: u64,
}

impl McEstimate {
    /// Mean and standard error of `values`, reduced sequentially in index
    /// order.
    pub fn from_values(values: &[f64], seed: u64) -> Self {
        let (mean, variance) = mean_and_variance(values);
        let n = values.len() as f64;
        Self {
            mean,
            stderr: (variance / n).sqrt(),
            samples: values.len() as u64,
            seed,
        }
    }

    /// `|mean − target|` in units of the standard error (infinite when the
    /// estimate is exact but disagrees).
    pub fn z_score(&self, target: f64) -> f64 {
        let diff = (self.mean - target).abs();
        if diff == 0.0 {
            0.0
        } else if self.stderr == 0.0 {
            f64::INFINITY
        } else {
            diff / self.stderr
        }
    }

    pub fn agrees_with(&self, target: f64, k: f64) -> bool {
        self.z_score(target) <= k
    }
}

/// Mean and unbiased (n−1) variance, two-pass. Variance is 0 for a single
/// value.
pub fn mean_and_variance(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    if n == 1 {
        return (mean, 0.0);
    }
    let ss: f64 = values.iter().map(|v| (v - mean) * (v - mean)).sum();
    (mean, ss / (n - 1) as f64)
}

/// RNG for sample `index` of a run seeded with `seed`.
pub fn stream_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Evaluates `f` on every sample index with that index's private stream,
/// fanning out over `cfg.workers` threads. The output is in index order.
pub fn simulate<T, F>(cfg: &McConfig, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(&mut ChaCha8Rng) -> T + Sync,
{
    let seed = cfg.seed;
    let run = || {
        (0..cfg.samples)
            .into_par_iter()
            .map(|i| f(&mut stream_rng(seed, i)))
            .collect::<Vec<T>>()
    };
    if cfg.workers == 1 {
        return Ok((0..cfg.samples).map(|i| f(&mut stream_rng(seed, i))).collect());
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.workers)
        .build()
        .map_err(|e| Error::WorkerPool(e.to_string()))?;
    Ok(pool.install(run))
}

fn check_config(nt: usize, nr: usize, powers: &PowerAllocation) -> Result<()> {
    if nt == 0 || nr == 0 {
        return Err(Error::Dimension(format!("antenna counts must be >= 1, got {nt}x{nr}")));
    }
    if powers.len() != nt {
        return Err(Error::Dimension(format!(
            "{} antenna powers for {nt} transmit antennas",
            powers.len()
        )));
    }
    Ok(())
}

/// Mutual information of every sample, in sample-index order.
pub fn mi_samples(
    nt: usize,
    nr: usize,
    powers: &PowerAllocation,
    cfg: &McConfig,
) -> Result<Vec<f64>> {
    check_config(nt, nr, powers)?;
    let values = simulate(cfg, |rng| {
        let h = sample_channel(nt, nr, rng);
        mutual_information(&h, powers)
    })?;
    values.into_iter().collect()
}

/// Outage probability `P{I < R}` with its binomial standard error.
pub fn mc_outage(
    nt: usize,
    nr: usize,
    powers: &PowerAllocation,
    rate: f64,
    cfg: &McConfig,
) -> Result<McEstimate> {
    if !(rate >= 0.0) {
        return Err(domain("rate", rate, ">= 0"));
    }
    let mi = mi_samples(nt, nr, powers, cfg)?;
    Ok(outage_from_samples(&mi, rate, cfg.seed))
}

pub(crate) fn outage_from_samples(mi: &[f64], rate: f64, seed: u64) -> McEstimate {
    let indicators: Vec<f64> = mi
        .iter()
        .map(|&i| if i < rate { 1.0 } else { 0.0 })
        .collect();
    McEstimate::from_values(&indicators, seed)
}

/// Sample mean of the mutual information.
pub fn mc_ergodic(
    nt: usize,
    nr: usize,
    powers: &PowerAllocation,
    cfg: &McConfig,
) -> Result<McEstimate> {
    let mi = mi_samples(nt, nr, powers, cfg)?;
    Ok(McEstimate::from_values(&mi, cfg.seed))
}

/// Expected rate of a MISO layer plan: per draw, `Σ R_i` over the layers
/// whose rate is supported by the channel.
pub fn mc_expected_rate(nt: usize, plan: &LayerPlan, cfg: &McConfig) -> Result<McEstimate> {
    if nt == 0 {
        return Err(domain("nt", 0.0, "nt >= 1"));
    }
    let values = simulate(cfg, |rng| {
        let h = sample_channel(nt, 1, rng);
        let per_antenna_gain = h.gain() / nt as f64;
        (0..plan.layers())
            .filter(|&i| layer_rate(plan, i, per_antenna_gain) >= plan.rates()[i])
            .map(|i| plan.rates()[i])
            .sum::<f64>()
    })?;
    Ok(McEstimate::from_values(&values, cfg.seed))
}

/// Sample mean and unbiased variance of the mutual information under equal
/// power `P/nt`.
pub fn mc_mi_moments(nt: usize, nr: usize, power: f64, cfg: &McConfig) -> Result<(f64, f64)> {
    let powers = PowerAllocation::equal(nt, power)?;
    let mi = mi_samples(nt, nr, &powers, cfg)?;
    Ok(mean_and_variance(&mi))
}

/// Single-layer throughput maximized over the rate on a fixed sample set.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McThroughput {
    /// maximizing rate `R` (nats)
    pub rate: f64,
    /// `R · P{I ≥ R}` at that rate
    pub value: f64,
    /// empirical success probability at `rate`
    pub success: f64,
    pub stderr: f64,
    pub samples: u64,
    pub seed: u64,
}

/// Maximizes `R · #{I_j ≥ R}/N` over `R`. The maximum of this step
/// function is attained at one of the samples, so every sample is tried.
pub fn empirical_throughput(values: &[f64], seed: u64) -> McThroughput {
    let n = values.len();
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mut best = (0.0, 0.0, 1.0);
    let mut j = 0;
    while j < n {
        let rate = sorted[j];
        let success = (n - j) as f64 / n as f64;
        let value = rate * success;
        if value > best.1 {
            best = (rate, value, success);
        }
        // skip ties so that `success` counts every sample >= rate
        while j < n && sorted[j] == rate {
            j += 1;
        }
    }
    let (rate, value, success) = best;
    McThroughput {
        rate,
        value,
        success,
        stderr: rate * (success * (1.0 - success) / n as f64).sqrt(),
        samples: n as u64,
        seed,
    }
}
