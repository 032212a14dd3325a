//! `fading-rates`: parameter sweeps, figure data and the verification suite.

mod error;
mod output;
mod settings;
mod sweep;

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use fading_rates::channel::McConfig;
use fading_rates::verify::{fig1_grid, fig2_grid, run_criterion, Level, VerifyOptions, CRITERIA};

use crate::error::CliError;
use crate::output::{write_csv, Quantity, ResultRow};
use crate::settings::{layered, ConfigFile, Count, PowerGrid, RhoGrid, Seed, Switch, UsageError};
use crate::sweep::{fig2_rows, run_sweep, Regime, SweepSpec};

/// Throughput, expected rate and ergodic capacity of Rayleigh block-fading
/// multiple-antenna channels. All rates are in nats unless `--bits` is set.
#[derive(Parser, Debug)]
#[command(name = "fading-rates", version)]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Common {
    /// Flat `key = value` file with defaults for any long flag
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Monte Carlo sample count [env: FR_SAMPLES] [default: 100000]
    #[arg(long, global = true)]
    samples: Option<Count>,
    /// Monte Carlo seed, decimal or 0x-hex [env: FR_SEED] [default: 0x5EED_CAFE]
    #[arg(long, global = true)]
    seed: Option<Seed>,
    /// Monte Carlo worker threads [default: available cores]
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Write output here instead of stdout
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Report rates in bits instead of nats
    #[arg(long, global = true)]
    bits: bool,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Evaluate one quantity over a power grid and emit CSV
    Sweep(SweepArgs),
    /// Run the closed-form-vs-oracle acceptance suite
    Verify(VerifyArgs),
    /// Monte Carlo MIMO throughput surface over (nt, P)
    Fig1(Fig1Args),
    /// Four rate curves of the two-transmitter distributed system
    Fig2(Fig2Args),
}

#[derive(Args, Debug)]
struct SweepArgs {
    /// throughput, expected-rate-k, cl-expected-rate, ergodic,
    /// mimo-asymptotic, dist-sim or mimo-surface [default: throughput]
    #[arg(long)]
    quantity: Option<Quantity>,
    /// Transmit antennas (largest nt for mimo-surface) [default: 1, or 2 for dist-sim]
    #[arg(long)]
    nt: Option<usize>,
    /// Receive antennas [default: 1]
    #[arg(long)]
    nr: Option<usize>,
    /// Code layers for expected-rate-k [default: 2]
    #[arg(long = "K")]
    k: Option<usize>,
    /// Comma-separated powers; a `dB` suffix converts from decibels [default: 0.1,1,10,100]
    #[arg(long = "P", allow_hyphen_values = true)]
    p: Option<PowerGrid>,
    /// Correlations of the two-transmitter scheme, comma list or lo:step:hi [default: 0]
    #[arg(long, allow_hyphen_values = true)]
    rho: Option<RhoGrid>,
    /// exact-miso, low-snr, high-snr, large-nt or large-nr
    #[arg(long)]
    regime: Option<Regime>,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    /// fast (10^5 samples) or full (10^6 samples) [default: fast]
    #[arg(long)]
    level: Option<Level>,
    /// Comma-separated criterion numbers [default: all]
    #[arg(long, value_delimiter = ',')]
    criteria: Vec<u8>,
    /// Euler-Mascheroni constant used by the digamma closed forms
    #[arg(long, hide = true)]
    euler_mascheroni: Option<f64>,
}

#[derive(Args, Debug)]
struct Fig1Args {
    /// Largest transmit array [default: 8]
    #[arg(long)]
    nt: Option<usize>,
    /// Receive antennas [default: 4]
    #[arg(long)]
    nr: Option<usize>,
    /// Powers [default: -10dB to 30dB in 5 dB steps]
    #[arg(long = "P", allow_hyphen_values = true)]
    p: Option<PowerGrid>,
}

#[derive(Args, Debug)]
struct Fig2Args {
    /// Powers [default: -10dB to 30dB in 2 dB steps]
    #[arg(long = "P", allow_hyphen_values = true)]
    p: Option<PowerGrid>,
}

struct Resolved {
    file: ConfigFile,
    mc: McConfig,
    out: Option<PathBuf>,
    bits: bool,
}

fn resolve_common(c: &Common) -> Result<Resolved, CliError> {
    let file = match &c.config {
        Some(path) => ConfigFile::load(path)?,
        None => ConfigFile::default(),
    };
    let defaults = McConfig::default();
    let samples = layered("samples", c.samples, Some("FR_SAMPLES"), &file)?
        .map_or(defaults.samples, |n: Count| n.0);
    let seed = layered("seed", c.seed, Some("FR_SEED"), &file)?.map_or(defaults.seed, |s: Seed| s.0);
    let workers = layered("workers", c.workers, None, &file)?.unwrap_or(defaults.workers);
    if workers == 0 {
        return Err(UsageError::new("workers", "must be at least 1").into());
    }
    let mc = McConfig::new(samples, seed, workers)?;
    let out = layered("out", c.out.clone(), None, &file)?;
    let bits = c.bits || layered::<Switch>("bits", None, None, &file)?.is_some_and(|s| s.0);
    Ok(Resolved { file, mc, out, bits })
}

fn sweep_spec(a: &SweepArgs, r: &Resolved) -> Result<SweepSpec, CliError> {
    let f = &r.file;
    let quantity = layered("quantity", a.quantity, None, f)?.unwrap_or(Quantity::Throughput);
    let default_nt = if quantity == Quantity::DistSim { 2 } else { 1 };
    Ok(SweepSpec {
        quantity,
        nt: layered("nt", a.nt, None, f)?.unwrap_or(default_nt),
        nr: layered("nr", a.nr, None, f)?.unwrap_or(1),
        powers: layered("P", a.p.clone(), None, f)?
            .map_or_else(|| vec![0.1, 1.0, 10.0, 100.0], |g: PowerGrid| g.0),
        k: layered("K", a.k, None, f)?.unwrap_or(2),
        rho: layered("rho", a.rho.clone(), None, f)?.map_or_else(|| vec![0.0], |g: RhoGrid| g.0),
        regime: layered("regime", a.regime, None, f)?,
        mc: r.mc,
    })
}

fn emit_csv(r: &Resolved, rows: &[ResultRow]) -> Result<(), CliError> {
    match &r.out {
        Some(path) => {
            let file = File::create(path)
                .map_err(|e| UsageError::new("out", format!("{}: {e}", path.display())))?;
            write_csv(BufWriter::new(file), rows, r.bits)?;
        }
        None => write_csv(io::stdout().lock(), rows, r.bits)?,
    }
    Ok(())
}

fn verify(a: &VerifyArgs, r: &Resolved) -> Result<bool, CliError> {
    let level = layered("level", a.level, None, &r.file)?.unwrap_or(Level::Fast);
    let ids: Vec<u8> = if a.criteria.is_empty() {
        CRITERIA.to_vec()
    } else {
        a.criteria.clone()
    };
    if let Some(bad) = ids.iter().find(|id| !CRITERIA.contains(id)) {
        return Err(UsageError::new("criteria", format!("{bad} is not a criterion (1..=11)")).into());
    }
    let mut opts = VerifyOptions::new(level);
    opts.seed = r.mc.seed;
    opts.workers = r.mc.workers;
    if let Some(em) = a.euler_mascheroni {
        opts.euler_mascheroni = em;
    }
    let mut sink: Box<dyn Write> = match &r.out {
        Some(path) => Box::new(BufWriter::new(
            File::create(path).map_err(|e| UsageError::new("out", format!("{}: {e}", path.display())))?,
        )),
        None => Box::new(io::stdout().lock()),
    };
    writeln!(sink, "verify: level {level}, seed {:#x}, {} workers", opts.seed, opts.workers)?;
    let mut failed = 0;
    for id in ids.iter().copied() {
        let report = run_criterion(id, &opts)?;
        if !report.passed() {
            failed += 1;
        }
        write!(sink, "{}", report.details())?;
        sink.flush()?;
    }
    if failed == 0 {
        writeln!(sink, "verify: all {} criteria passed", ids.len())?;
    } else {
        writeln!(sink, "verify: {failed} of {} criteria failed", ids.len())?;
    }
    sink.flush()?;
    Ok(failed == 0)
}

fn run(cli: Cli) -> Result<bool, CliError> {
    let r = resolve_common(&cli.common)?;
    match &cli.command {
        Command::Sweep(a) => {
            let rows = run_sweep(&sweep_spec(a, &r)?)?;
            emit_csv(&r, &rows)?;
        }
        Command::Verify(a) => return verify(a, &r),
        Command::Fig1(a) => {
            let spec = SweepSpec {
                quantity: Quantity::MimoSurface,
                nt: layered("nt", a.nt, None, &r.file)?.unwrap_or(8),
                nr: layered("nr", a.nr, None, &r.file)?.unwrap_or(4),
                powers: layered("P", a.p.clone(), None, &r.file)?.map_or_else(fig1_grid, |g: PowerGrid| g.0),
                k: 1,
                rho: vec![0.0],
                regime: None,
                mc: r.mc,
            };
            emit_csv(&r, &run_sweep(&spec)?)?;
        }
        Command::Fig2(a) => {
            let powers = layered("P", a.p.clone(), None, &r.file)?.map_or_else(fig2_grid, |g: PowerGrid| g.0);
            emit_csv(&r, &fig2_rows(&powers)?)?;
        }
    }
    Ok(true)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
