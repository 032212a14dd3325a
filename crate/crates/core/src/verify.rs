//! Acceptance suite: every closed form checked against an independent
//! oracle (Monte Carlo, quadrature, dense grids or a second closed form).
//!
//! Each criterion returns a [`CriterionReport`] listing every check with
//! its measured deviation and the allowed deviation.

use std::fmt;
use std::str::FromStr;
use std::time::{Duration, Instant};

use rand::Rng;

use crate::channel::{
    mc_ergodic, mc_expected_rate, mc_outage, mean_and_variance, stream_rng, McConfig,
    PowerAllocation,
};
use crate::dist_antenna::{
    cubic_s0, dist_cl_expected_rate, dist_ergodic, dist_outage_analytic, equivalence_check,
    fig2_curves,
};
use crate::error::{Error, Result};
use crate::oracle::{ergodic_quadrature, integrate, two_layer_grid_max};
use crate::rates_mimo::{
    bartlett_logdet_samples, gaussian_throughput, hisnr_approx_with, hisnr_throughput_mc,
    large_nr_throughput, large_nt_throughput, mc_throughput, mimo_throughput_surface,
    wishart_logdet_moments_with, WishartShape,
};
use crate::rates_miso::{
    boundary_lhs, cl_antiderivative, cl_integrand, miso_cl_expected_rate, miso_ergodic,
    miso_expected_rate_k, miso_throughput_max, siso_throughput_closed, solve_cl_boundaries,
};
use crate::specfun::{
    digamma_int_with, exp_integral_e1, lambert_w0, q_function, upper_incomplete_gamma,
    EULER_MASCHERONI,
};

/// Monte Carlo depth of the suite.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Level {
    /// 10^5 samples per estimate
    Fast,
    /// 10^6 samples per estimate
    Full,
}

impl Level {
    pub fn samples(self) -> u64 {
        match self {
            Level::Fast => 100_000,
            Level::Full => 1_000_000,
        }
    }
}

impl FromStr for Level {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "fast" => Ok(Level::Fast),
            "full" => Ok(Level::Full),
            other => Err(format!("level must be `fast` or `full`, got `{other}`")),
        }
    }
}

impl fmt::Display for Level {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Level::Fast => "fast",
            Level::Full => "full",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VerifyOptions {
    pub level: Level,
    pub seed: u64,
    pub workers: usize,
    /// Constant fed to every digamma-based closed form; perturbing it must
    /// make the suite fail.
    pub euler_mascheroni: f64,
}

impl VerifyOptions {
    pub fn new(level: Level) -> Self {
        let d = McConfig::default();
        Self {
            level,
            seed: d.seed,
            workers: d.workers,
            euler_mascheroni: EULER_MASCHERONI,
        }
    }

    fn mc(&self, samples: u64) -> Result<McConfig> {
        McConfig::new(samples, self.seed, self.workers)
    }

    fn level_mc(&self) -> Result<McConfig> {
        self.mc(self.level.samples())
    }
}

/// One measured deviation against its allowance.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub measured: f64,
    pub allowed: f64,
    pub pass: bool,
}

impl Check {
    /// Passes iff `measured ≤ allowed`; NaN fails.
    pub fn at_most(name: impl Into<String>, measured: f64, allowed: f64) -> Self {
        Self {
            name: name.into(),
            measured,
            allowed,
            pass: measured <= allowed,
        }
    }

    /// Passes iff `measured < allowed`.
    pub fn below(name: impl Into<String>, measured: f64, allowed: f64) -> Self {
        Self {
            name: name.into(),
            measured,
            allowed,
            pass: measured < allowed,
        }
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "[{}] {}: measured {:.3e}, allowed {:.3e}",
            if self.pass { " ok " } else { "FAIL" },
            self.name,
            self.measured,
            self.allowed
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CriterionReport {
    pub id: u8,
    pub title: &'static str,
    pub checks: Vec<Check>,
    /// set when a computation errored before all checks ran
    pub error: Option<String>,
    pub elapsed: Duration,
    pub budget: Duration,
}

impl CriterionReport {
    pub fn within_budget(&self) -> bool {
        self.elapsed <= self.budget
    }

    pub fn passed(&self) -> bool {
        self.error.is_none() && self.within_budget() && self.checks.iter().all(|c| c.pass)
    }

    /// Summary line followed by one line per check.
    pub fn details(&self) -> String {
        let mut out = format!("{self}\n");
        if let Some(e) = &self.error {
            out.push_str(&format!("    error: {e}\n"));
        }
        for c in &self.checks {
            out.push_str(&format!("    {c}\n"));
        }
        out
    }
}

impl fmt::Display for CriterionReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let ok = self.checks.iter().filter(|c| c.pass).count();
        write!(
            f,
            "criterion {:>2} {} {}: {}/{} checks, {:.2} s (budget {} s)",
            self.id,
            if self.passed() { "PASS" } else { "FAIL" },
            self.title,
            ok,
            self.checks.len(),
            self.elapsed.as_secs_f64(),
            self.budget.as_secs()
        )
    }
}

pub const CRITERIA: [u8; 11] = [1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11];

pub fn title(id: u8) -> Option<&'static str> {
    Some(match id {
        1 => "special-function identities",
        2 => "ergodic capacity",
        3 => "MISO throughput",
        4 => "K-layer expected rate",
        5 => "continuous-layer closed form",
        6 => "bound chain",
        7 => "Wishart log-det statistics",
        8 => "high-SNR throughput",
        9 => "large-array regimes",
        10 => "distributed antenna equivalence",
        11 => "figure reproductions",
        _ => return None,
    })
}

fn budget(id: u8) -> Duration {
    Duration::from_secs(match id {
        1 => 1,
        2 | 6 | 7 | 10 => 60,
        3 | 8 => 120,
        4 | 9 => 180,
        5 => 5,
        _ => 600,
    })
}

pub fn run_criterion(id: u8, opts: &VerifyOptions) -> Result<CriterionReport> {
    let title = title(id).ok_or_else(|| crate::error::domain("criterion", f64::from(id), "1..=11"))?;
    let start = Instant::now();
    let mut checks = Vec::new();
    let outcome = match id {
        1 => special_functions(opts, &mut checks),
        2 => ergodic(opts, &mut checks),
        3 => throughput(opts, &mut checks),
        4 => layered(opts, &mut checks),
        5 => continuous_layer(&mut checks),
        6 => bound_chain(&mut checks),
        7 => wishart(opts, &mut checks),
        8 => high_snr(opts, &mut checks),
        9 => large_arrays(opts, &mut checks),
        10 => distributed(opts, &mut checks),
        _ => figures(opts, &mut checks),
    };
    Ok(CriterionReport {
        id,
        title,
        checks,
        error: outcome.err().map(|e| e.to_string()),
        elapsed: start.elapsed(),
        budget: budget(id),
    })
}

pub fn run_all(opts: &VerifyOptions) -> Vec<CriterionReport> {
    CRITERIA
        .iter()
        .map(|&id| run_criterion(id, opts).expect("known criterion"))
        .collect()
}

fn mc_check(name: String, mean: f64, stderr: f64, target: f64) -> Check {
    Check::at_most(name, (mean - target).abs(), 3.0 * stderr)
}

fn special_functions(opts: &VerifyOptions, checks: &mut Vec<Check>) -> Result<()> {
    let mut rng = stream_rng(opts.seed, 1);
    let lo = -(-1.0f64).exp();
    let mut worst: f64 = 0.0;
    for i in 0..1000 {
        let x = match i {
            0 => lo,
            1 => 100.0,
            _ => rng.random_range(lo..=100.0),
        };
        let w = lambert_w0(x)?;
        worst = worst.max((w * w.exp() - x).abs());
    }
    checks.push(Check::at_most("Lambert W residual, 1000 points", worst, 1e-12));

    let mut worst: f64 = 0.0;
    for n in 1..=20u32 {
        for &x in &[0.0, 0.1, 0.5, 1.0, 2.0, 5.0, 10.0, 20.0, 50.0] {
            let lhs = upper_incomplete_gamma(n + 1, x)?;
            let rhs = f64::from(n) * upper_incomplete_gamma(n, x)? + x.powi(n as i32) * (-x).exp();
            worst = worst.max((lhs - rhs).abs() / lhs);
        }
    }
    checks.push(Check::at_most("incomplete gamma recurrence", worst, 1e-10));

    for &x in &[0.5, 1.0, 5.0] {
        let h = 1e-5 * x;
        let fd = (exp_integral_e1(x + h)? - exp_integral_e1(x - h)?) / (2.0 * h);
        let exact = -(-x).exp() / x;
        checks.push(Check::at_most(
            format!("E1 derivative at x = {x}"),
            ((fd - exact) / exact).abs(),
            1e-6,
        ));
    }

    let mut worst: f64 = 0.0;
    for i in 0..1000 {
        let z = if i == 0 { 0.0 } else { rng.random_range(-10.0..=10.0) };
        worst = worst.max((q_function(z)? + q_function(-z)? - 1.0).abs());
    }
    checks.push(Check::at_most("Q symmetry, 1000 points", worst, 1e-14));

    let em = opts.euler_mascheroni;
    let mut worst: f64 = 0.0;
    for m in 1..=200u32 {
        let next = digamma_int_with(m + 1, em)?;
        let step = next - digamma_int_with(m, em)?;
        worst = worst.max((step - 1.0 / f64::from(m)).abs() / next.abs().max(1.0));
    }
    checks.push(Check::at_most("digamma unit step", worst, 4.0 * f64::EPSILON));

    // ψ(m) ~ ln m − 1/(2m) − 1/(12m²) + 1/(120m⁴) − 1/(252m⁶)
    let m = 1000.0f64;
    let asymptotic =
        m.ln() - 0.5 / m - 1.0 / (12.0 * m * m) + 1.0 / (120.0 * m.powi(4)) - 1.0 / (252.0 * m.powi(6));
    checks.push(Check::at_most(
        "digamma large-argument expansion at 1000",
        (digamma_int_with(1000, em)? - asymptotic).abs(),
        1e-11,
    ));
    Ok(())
}

const ERGODIC_GRID: [(usize, f64); 9] = [
    (1, 0.1),
    (1, 1.0),
    (1, 10.0),
    (2, 0.1),
    (2, 1.0),
    (2, 10.0),
    (4, 0.1),
    (4, 1.0),
    (4, 10.0),
];

fn ergodic(opts: &VerifyOptions, checks: &mut Vec<Check>) -> Result<()> {
    let cfg = opts.level_mc()?;
    for &(nt, p) in &ERGODIC_GRID {
        let closed = miso_ergodic(nt, p)?;
        let quad = ergodic_quadrature(nt, p)?;
        checks.push(Check::at_most(
            format!("nt={nt} P={p}: closed form vs quadrature"),
            (closed - quad).abs(),
            1e-8,
        ));
        let mc = mc_ergodic(nt, 1, &PowerAllocation::equal(nt, p)?, &cfg)?;
        checks.push(mc_check(
            format!("nt={nt} P={p}: closed form vs Monte Carlo"),
            mc.mean,
            mc.stderr,
            closed,
        ));
    }
    Ok(())
}

fn throughput(opts: &VerifyOptions, checks: &mut Vec<Check>) -> Result<()> {
    for &p in &[0.5, std::f64::consts::E, 10.0, 100.0] {
        let opt = miso_throughput_max(1, p)?;
        let (s, v) = siso_throughput_closed(p)?;
        checks.push(Check::at_most(format!("SISO P={p:.4}: argmax vs Lambert W"), (opt.argmax - s).abs(), 1e-6));
        checks.push(Check::at_most(format!("SISO P={p:.4}: value vs Lambert W"), (opt.value - v).abs(), 1e-6));
    }

    let cfg = opts.level_mc()?;
    for &nt in &[2usize, 4] {
        for &p in &[1.0, 10.0] {
            let opt = miso_throughput_max(nt, p)?;
            let rate = (p * opt.argmax).ln_1p();
            let out = mc_outage(nt, 1, &PowerAllocation::equal(nt, p)?, rate, &cfg)?;
            checks.push(mc_check(
                format!("nt={nt} P={p}: throughput vs Monte Carlo"),
                (1.0 - out.mean) * rate,
                out.stderr * rate,
                opt.value,
            ));
        }
    }

    for &nt in &[2usize, 3, 4] {
        for &p in &[1.0, 10.0] {
            let full = miso_throughput_max(nt, p)?.value;
            let mut best_partial = f64::NEG_INFINITY;
            for lt in 1..nt {
                best_partial = best_partial.max(miso_throughput_max(lt, p)?.value);
            }
            checks.push(Check::below(
                format!("nt={nt} P={p}: best partial array minus full array"),
                best_partial - full,
                0.0,
            ));
        }
    }
    Ok(())
}

fn layered(opts: &VerifyOptions, checks: &mut Vec<Check>) -> Result<()> {
    let cfg = opts.level_mc()?;
    let p = 10.0;
    for &nt in &[1usize, 2] {
        let (plan, value) = miso_expected_rate_k(nt, p, 2)?;
        let grid = two_layer_grid_max(nt, p, 200, 50)?;
        checks.push(Check::at_most(
            format!("K=2 nt={nt} P={p}: optimizer vs 200x200x50 grid"),
            (value - grid.value).abs(),
            1e-4,
        ));
        let mc = mc_expected_rate(nt, &plan, &cfg)?;
        checks.push(mc_check(
            format!("K=2 nt={nt} P={p}: plan value vs Monte Carlo"),
            mc.mean,
            mc.stderr,
            value,
        ));
    }
    Ok(())
}

const CL_NT: [usize; 3] = [1, 2, 4];

fn continuous_layer(checks: &mut Vec<Check>) -> Result<()> {
    for &nt in &CL_NT {
        for &s in &[0.5, 1.0, 2.0] {
            let h = 1e-5 * s;
            let fd = (cl_antiderivative(nt, s + h)? - cl_antiderivative(nt, s - h)?) / (2.0 * h);
            let f = cl_integrand(nt, s)?;
            // absolute below 1e-3 where the integrand crosses zero
            checks.push(Check::at_most(
                format!("nt={nt} s={s}: antiderivative derivative"),
                (fd - f).abs() / f.abs().max(1e-3),
                1e-6,
            ));
        }
    }
    for &nt in &CL_NT {
        let n = nt as u32;
        for &p in &[1.0, 10.0, 100.0] {
            let b = solve_cl_boundaries(nt, p)?;
            let closed = miso_cl_expected_rate(nt, p)?;
            let quad = integrate(|s| cl_integrand(nt, s).unwrap_or(f64::NAN), b.s0, b.s1, 1e-13)?;
            checks.push(Check::at_most(
                format!("nt={nt} P={p}: closed form vs quadrature"),
                (closed - quad).abs(),
                1e-8,
            ));
            let r0 = boundary_lhs(n, b.s0) - 1.0 - p / nt as f64 * b.s0;
            let r1 = boundary_lhs(n, b.s1) - 1.0;
            checks.push(Check::at_most(format!("nt={nt} P={p}: s0 residual"), r0.abs(), 1e-9));
            checks.push(Check::at_most(format!("nt={nt} P={p}: s1 residual"), r1.abs(), 1e-9));
        }
    }
    Ok(())
}

/// Antenna counts and powers on which the bound chain is checked.
pub const CHAIN_NT: [usize; 4] = [1, 2, 3, 4];
pub const CHAIN_POWERS: [f64; 4] = [0.1, 1.0, 10.0, 100.0];
/// Slack between throughput and K=2, K=2 and continuous, continuous and
/// ergodic.
pub const CHAIN_SLACK: [f64; 3] = [1e-6, 1e-4, 1e-9];

fn bound_chain(checks: &mut Vec<Check>) -> Result<()> {
    use rayon::prelude::*;
    let cells: Vec<(usize, f64)> = CHAIN_NT
        .iter()
        .flat_map(|&nt| CHAIN_POWERS.iter().map(move |&p| (nt, p)))
        .collect();
    let values = cells
        .par_iter()
        .map(|&(nt, p)| {
            Ok([
                miso_throughput_max(nt, p)?.value,
                miso_expected_rate_k(nt, p, 2)?.1,
                miso_cl_expected_rate(nt, p)?,
                miso_ergodic(nt, p)?,
            ])
        })
        .collect::<Result<Vec<_>>>()?;
    let names = ["throughput - K=2", "K=2 - continuous", "continuous - ergodic"];
    for (&(nt, p), v) in cells.iter().zip(&values) {
        for j in 0..3 {
            checks.push(Check::at_most(
                format!("nt={nt} P={p}: {}", names[j]),
                v[j] - v[j + 1],
                CHAIN_SLACK[j],
            ));
        }
    }
    Ok(())
}

fn wishart(opts: &VerifyOptions, checks: &mut Vec<Check>) -> Result<()> {
    let cfg = opts.level_mc()?;
    for n in 1..=6usize {
        for p in 1..=n {
            let shape = WishartShape::new(p, n)?;
            let (mu, var) = wishart_logdet_moments_with(shape, opts.euler_mascheroni)?;
            let samples = bartlett_logdet_samples(shape, &cfg)?;
            let count = samples.len() as f64;
            let (m, v) = mean_and_variance(&samples);
            checks.push(mc_check(format!("p={p} n={n}: mean"), m, (v / count).sqrt(), mu));
            let m4 = samples.iter().map(|x| (x - m).powi(4)).sum::<f64>() / count;
            let var_stderr = ((m4 - v * v) / count).sqrt();
            checks.push(mc_check(format!("p={p} n={n}: variance"), v, var_stderr, var));
        }
    }
    Ok(())
}

/// Relative allowance for the model error of Gaussian approximations.
pub const GAUSSIAN_MODEL_BUDGET: f64 = 0.02;

fn high_snr(opts: &VerifyOptions, checks: &mut Vec<Check>) -> Result<()> {
    let cfg = opts.level_mc()?;
    let p = 1000.0;
    for &(nt, nr) in &[(2usize, 2usize), (2, 4)] {
        let approx = hisnr_approx_with(nt, nr, p, opts.euler_mascheroni)?;
        let gauss = gaussian_throughput(approx)?.value;
        let mc = hisnr_throughput_mc(nt, nr, p, &cfg)?;
        checks.push(Check::at_most(
            format!("{nt}x{nr} P={p}: Gaussian vs Bartlett Monte Carlo"),
            (gauss - mc.value).abs(),
            3.0 * mc.stderr + GAUSSIAN_MODEL_BUDGET * mc.value,
        ));
    }
    Ok(())
}

fn large_arrays(opts: &VerifyOptions, checks: &mut Vec<Check>) -> Result<()> {
    let cfg = opts.mc(100_000)?;
    let cases = [
        ("large nt", 64usize, 2usize, 10.0, large_nt_throughput(64, 2, 10.0)?),
        ("large nr", 2, 64, 1.0, large_nr_throughput(2, 64, 1.0)?),
    ];
    for (label, nt, nr, p, approx) in cases {
        let mc = mc_throughput(nt, nr, p, &cfg)?;
        checks.push(Check::at_most(
            format!("{label} {nt}x{nr} P={p}: asymptotic vs Monte Carlo"),
            (approx.result.value - mc.value).abs(),
            3.0 * mc.stderr + GAUSSIAN_MODEL_BUDGET * mc.value,
        ));
    }
    Ok(())
}

/// Powers from −10 dB to 30 dB in 2 dB steps.
pub fn fig2_grid() -> Vec<f64> {
    (0..=20).map(|i| 10f64.powf((-10.0 + 2.0 * f64::from(i)) / 10.0)).collect()
}

fn distributed(opts: &VerifyOptions, checks: &mut Vec<Check>) -> Result<()> {
    let cfg = opts.level_mc()?;
    for &(p, r) in &[(10.0, 1.0), (1.0, 0.5)] {
        for &rho in &[0.0, 0.5, 1.0] {
            let rep = equivalence_check(rho, p, r, &cfg)?;
            checks.push(Check::at_most(
                format!("rho={rho} P={p} R={r}: mismatched outage indicators"),
                rep.mismatches as f64,
                0.0,
            ));
            checks.push(Check::at_most(
                format!("rho={rho} P={p} R={r}: largest per-draw rate gap"),
                rep.max_mi_gap,
                1e-12,
            ));
            if rho == 0.0 {
                let x = 2.0 * r.exp_m1() / p;
                let exact = 1.0 - (-x).exp() * (1.0 + x);
                checks.push(mc_check(
                    format!("rho=0 P={p} R={r}: scheme outage vs 1 - e^-x(1+x)"),
                    rep.scheme.mean,
                    rep.scheme.stderr,
                    exact,
                ));
                checks.push(Check::at_most(
                    format!("rho=0 P={p} R={r}: analytic outage vs 1 - e^-x(1+x)"),
                    (dist_outage_analytic(0.0, p, r)? - exact).abs(),
                    1e-12,
                ));
            }
        }
    }

    let mut powers = vec![0.1, 1.0, 10.0, 100.0];
    powers.extend(fig2_grid());
    let mut worst_res: f64 = 0.0;
    let mut worst_cl: f64 = 0.0;
    let mut worst_erg: f64 = 0.0;
    for &p in &powers {
        let s0 = cubic_s0(p)?;
        worst_res = worst_res.max((boundary_lhs(2, s0) - 1.0 - 0.5 * p * s0).abs());
        worst_cl = worst_cl.max((dist_cl_expected_rate(p)? - miso_cl_expected_rate(2, p)?).abs());
        worst_erg = worst_erg.max((dist_ergodic(p)? - miso_ergodic(2, p)?).abs());
    }
    checks.push(Check::at_most("cubic s0 residual", worst_res, 1e-9));
    checks.push(Check::at_most("two-transmitter vs 2x1 continuous-layer rate", worst_cl, 1e-9));
    checks.push(Check::at_most("two-transmitter vs 2x1 ergodic capacity", worst_erg, 1e-9));
    checks.push(Check::at_most("ergodic capacity at P=2 minus 1", (dist_ergodic(2.0)? - 1.0).abs(), 0.0));
    Ok(())
}

/// Powers from −10 dB to 30 dB in 5 dB steps.
pub fn fig1_grid() -> Vec<f64> {
    (0..=8).map(|i| 10f64.powf((-10.0 + 5.0 * f64::from(i)) / 10.0)).collect()
}

fn figures(opts: &VerifyOptions, checks: &mut Vec<Check>) -> Result<()> {
    let rows = fig2_curves(&fig2_grid())?;
    let mut worst = [f64::NEG_INFINITY; 3];
    let mut worst_drop: f64 = f64::NEG_INFINITY;
    for (i, row) in rows.iter().enumerate() {
        let v = [row.throughput, row.two_layer, row.continuous, row.ergodic];
        for j in 0..3 {
            worst[j] = worst[j].max(v[j] - v[j + 1]);
        }
        if i > 0 {
            let prev = &rows[i - 1];
            let u = [prev.throughput, prev.two_layer, prev.continuous, prev.ergodic];
            for j in 0..4 {
                worst_drop = worst_drop.max(u[j] - v[j]);
            }
        }
    }
    let names = ["throughput - K=2", "K=2 - continuous", "continuous - ergodic"];
    for j in 0..3 {
        checks.push(Check::at_most(format!("two-transmitter curves: {}", names[j]), worst[j], CHAIN_SLACK[j]));
    }
    checks.push(Check::below("two-transmitter curves: largest decrease in P", worst_drop, 0.0));

    let samples = opts.level.samples().min(100_000);
    let nts: Vec<usize> = (1..=8).collect();
    let cells = mimo_throughput_surface(&nts, 4, &fig1_grid(), &opts.mc(samples)?)?;
    let mut worst_drop: f64 = f64::NEG_INFINITY;
    let mut worst_excess: f64 = f64::NEG_INFINITY;
    for pair in cells.windows(2) {
        if pair[0].nt == pair[1].nt {
            worst_drop = worst_drop.max(pair[0].throughput.value - pair[1].throughput.value);
        }
    }
    for c in &cells {
        worst_excess = worst_excess.max(c.throughput.value - c.ergodic.mean - 3.0 * c.ergodic.stderr);
    }
    checks.push(Check::at_most("nr=4 surface: largest decrease in P", worst_drop, 0.0));
    checks.push(Check::at_most("nr=4 surface: throughput above ergodic + 3 stderr", worst_excess, 0.0));
    if cells.len() != nts.len() * fig1_grid().len() {
        return Err(Error::Dimension("surface has missing cells".into()));
    }
    Ok(())
}
