//! Sweep specifications and their evaluation into result rows.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use fading_rates::channel::{mc_ergodic, McConfig, PowerAllocation};
use fading_rates::dist_antenna::{
    dist_cl_expected_rate, dist_ergodic, dist_throughput_max, dist_throughput_mc,
};
use fading_rates::rates_mimo::{
    hisnr_throughput, large_nr_throughput, large_nt_throughput, lowsnr_cl_expected_rate,
    lowsnr_expected_rate_k, lowsnr_throughput, mimo_throughput_surface, RegimeThroughput,
};
use fading_rates::rates_miso::{
    miso_cl_expected_rate, miso_ergodic, miso_expected_rate_k, miso_throughput_max, simo_ergodic,
};

use crate::error::CliError;
use crate::output::{Argmax, Quantity, ResultRow};
use crate::settings::UsageError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    ExactMiso,
    LowSnr,
    HighSnr,
    LargeNt,
    LargeNr,
}

impl Regime {
    pub const ALL: [Regime; 5] = [
        Regime::ExactMiso,
        Regime::LowSnr,
        Regime::HighSnr,
        Regime::LargeNt,
        Regime::LargeNr,
    ];

    pub fn label(self) -> &'static str {
        match self {
            Regime::ExactMiso => "exact-miso",
            Regime::LowSnr => "low-snr",
            Regime::HighSnr => "high-snr",
            Regime::LargeNt => "large-nt",
            Regime::LargeNr => "large-nr",
        }
    }
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Regime {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Regime::ALL.into_iter().find(|r| r.label() == s).ok_or_else(|| {
            let names: Vec<_> = Regime::ALL.iter().map(|r| r.label()).collect();
            format!("expected one of {}", names.join(", "))
        })
    }
}

/// A fully resolved sweep. `regime` is `None` when not given anywhere.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub quantity: Quantity,
    pub nt: usize,
    pub nr: usize,
    pub powers: Vec<f64>,
    pub k: usize,
    /// dist-sim sweeps every entry; other quantities ignore it
    pub rho: Vec<f64>,
    pub regime: Option<Regime>,
    pub mc: McConfig,
}

impl SweepSpec {
    /// Rejects inconsistent combinations, naming the offending field.
    pub fn validate(&self) -> Result<(), UsageError> {
        if self.powers.is_empty() {
            return Err(UsageError::new("P", "empty grid"));
        }
        if let Some(&p) = self.powers.iter().find(|p| !(p.is_finite() && **p > 0.0)) {
            return Err(UsageError::new("P", format!("{p} must be finite and > 0")));
        }
        if self.nt == 0 {
            return Err(UsageError::new("nt", "must be at least 1"));
        }
        if self.nr == 0 {
            return Err(UsageError::new("nr", "must be at least 1"));
        }
        if self.k == 0 {
            return Err(UsageError::new("K", "must be at least 1"));
        }
        if self.rho.is_empty() {
            return Err(UsageError::new("rho", "empty grid"));
        }
        if let Some(r) = self.rho.iter().find(|r| !(r.is_finite() && r.abs() <= 1.0)) {
            return Err(UsageError::new("rho", format!("{r} is outside [-1, 1]")));
        }
        let regime = self.regime();
        let miso_family = matches!(
            self.quantity,
            Quantity::Throughput | Quantity::ExpectedRateK | Quantity::ClExpectedRate
        );
        if miso_family {
            match regime {
                Regime::ExactMiso if self.nr != 1 => {
                    return Err(UsageError::new(
                        "nr",
                        format!("{} with regime exact-miso needs nr = 1; use --regime low-snr", self.quantity),
                    ))
                }
                Regime::ExactMiso | Regime::LowSnr => {}
                other => {
                    return Err(UsageError::new(
                        "regime",
                        format!("{} supports exact-miso or low-snr, not {other}", self.quantity),
                    ))
                }
            }
        }
        match self.quantity {
            Quantity::MimoAsymptotic if regime == Regime::ExactMiso => {
                return Err(UsageError::new(
                    "regime",
                    "mimo-asymptotic needs one of low-snr, high-snr, large-nt, large-nr",
                ))
            }
            Quantity::Ergodic | Quantity::DistSim | Quantity::MimoSurface
                if regime != Regime::ExactMiso =>
            {
                return Err(UsageError::new(
                    "regime",
                    format!("{} takes no regime", self.quantity),
                ))
            }
            Quantity::DistSim if self.nt != 2 || self.nr != 1 => {
                return Err(UsageError::new(
                    if self.nt != 2 { "nt" } else { "nr" },
                    "dist-sim models two single-antenna transmitters and one receive antenna (nt = 2, nr = 1)",
                ))
            }
            _ => {}
        }
        Ok(())
    }

    fn regime(&self) -> Regime {
        self.regime.unwrap_or(match self.quantity {
            Quantity::MimoAsymptotic => Regime::HighSnr,
            _ => Regime::ExactMiso,
        })
    }
}

fn regime_row(spec: &SweepSpec, p: f64, r: &RegimeThroughput) -> ResultRow {
    ResultRow {
        quantity: spec.quantity,
        nt: spec.nt,
        nr: spec.nr,
        k: None,
        rho: None,
        power: p,
        value: r.result.value,
        argmax: Argmax::Point(r.result.argmax),
        stderr: None,
        seed: None,
    }
}

/// One row per grid point, in grid order: `(nt, P)` for the surface,
/// `(ρ, P)` for dist-sim, `P` otherwise. Cells are evaluated concurrently.
pub fn run_sweep(spec: &SweepSpec) -> Result<Vec<ResultRow>, CliError> {
    spec.validate()?;
    if spec.quantity == Quantity::MimoSurface {
        let nts: Vec<usize> = (1..=spec.nt).collect();
        let cells = mimo_throughput_surface(&nts, spec.nr, &spec.powers, &spec.mc)?;
        return Ok(cells
            .into_iter()
            .map(|c| ResultRow {
                quantity: Quantity::MimoSurface,
                nt: c.nt,
                nr: c.nr,
                k: None,
                rho: None,
                power: c.power,
                value: c.throughput.value,
                argmax: Argmax::Rate(c.throughput.rate),
                stderr: Some(c.throughput.stderr),
                seed: Some(c.throughput.seed),
            })
            .collect());
    }
    let rhos: &[f64] = if spec.quantity == Quantity::DistSim { &spec.rho } else { &[0.0] };
    let grid: Vec<(f64, f64)> = rhos
        .iter()
        .flat_map(|&rho| spec.powers.iter().map(move |&p| (rho, p)))
        .collect();
    let rows = grid
        .par_iter()
        .map(|&(rho, p)| cell(spec, rho, p))
        .collect::<fading_rates::Result<Vec<_>>>()?;
    // warnings go out in grid order, after every cell finished
    Ok(rows
        .into_iter()
        .map(|(row, warnings)| {
            for w in warnings {
                eprintln!("warning: nt={} nr={} P={}: {w}", row.nt, row.nr, row.power);
            }
            row
        })
        .collect())
}

fn cell(spec: &SweepSpec, rho: f64, p: f64) -> fading_rates::Result<(ResultRow, Vec<String>)> {
    let (nt, nr) = (spec.nt, spec.nr);
    let low = spec.regime() == Regime::LowSnr;
    let mut warnings = Vec::new();
    let mut row = ResultRow {
        quantity: spec.quantity,
        nt,
        nr,
        k: None,
        rho: None,
        power: p,
        value: f64::NAN,
        argmax: Argmax::None,
        stderr: None,
        seed: None,
    };
    match spec.quantity {
        Quantity::Throughput => {
            let r = if low {
                let t = lowsnr_throughput(nt, nr, p)?;
                warnings.extend(t.warnings.iter().map(|w| w.to_string()));
                t.result
            } else {
                miso_throughput_max(nt, p)?
            };
            row.value = r.value;
            row.argmax = Argmax::Point(r.argmax);
        }
        Quantity::ExpectedRateK => {
            let (plan, v) = if low {
                lowsnr_expected_rate_k(nt, nr, p, spec.k)?
            } else {
                miso_expected_rate_k(nt, p, spec.k)?
            };
            row.k = Some(spec.k);
            row.value = v;
            row.argmax = Argmax::Points(plan.thresholds().to_vec());
        }
        Quantity::ClExpectedRate => {
            row.value = if low {
                lowsnr_cl_expected_rate(nt, nr, p)?
            } else {
                miso_cl_expected_rate(nt, p)?
            };
        }
        Quantity::Ergodic => {
            if nr == 1 {
                row.value = miso_ergodic(nt, p)?;
            } else if nt == 1 {
                row.value = simo_ergodic(nr, p)?;
            } else {
                let est = mc_ergodic(nt, nr, &PowerAllocation::equal(nt, p)?, &spec.mc)?;
                row.value = est.mean;
                row.stderr = Some(est.stderr);
                row.seed = Some(est.seed);
            }
        }
        Quantity::MimoAsymptotic => {
            let r = match spec.regime() {
                Regime::LowSnr => lowsnr_throughput(nt, nr, p)?,
                Regime::HighSnr => hisnr_throughput(nt, nr, p)?,
                Regime::LargeNt => large_nt_throughput(nt, nr, p)?,
                _ => large_nr_throughput(nt, nr, p)?,
            };
            let warnings = r.warnings.iter().map(|w| w.to_string()).collect();
            return Ok((regime_row(spec, p, &r), warnings));
        }
        Quantity::DistSim => {
            let t = dist_throughput_mc(rho, p, &spec.mc)?;
            row.rho = Some(rho);
            row.value = t.value;
            row.argmax = Argmax::Rate(t.rate);
            row.stderr = Some(t.stderr);
            row.seed = Some(t.seed);
        }
        Quantity::MimoSurface => unreachable!("handled by run_sweep"),
    }
    Ok((row, warnings))
}

/// Throughput, two-layer expected rate, continuous-layer expected rate and
/// ergodic capacity of the two-transmitter system, four rows per power.
pub fn fig2_rows(powers: &[f64]) -> Result<Vec<ResultRow>, CliError> {
    if let Some(&p) = powers.iter().find(|p| !(p.is_finite() && **p > 0.0)) {
        return Err(UsageError::new("P", format!("{p} must be finite and > 0")).into());
    }
    let per_power = powers
        .par_iter()
        .map(|&p| -> fading_rates::Result<Vec<ResultRow>> {
            let base = ResultRow {
                quantity: Quantity::Throughput,
                nt: 2,
                nr: 1,
                k: None,
                rho: None,
                power: p,
                value: f64::NAN,
                argmax: Argmax::None,
                stderr: None,
                seed: None,
            };
            let thr = dist_throughput_max(p)?;
            let (plan, two) = miso_expected_rate_k(2, p, 2)?;
            Ok(vec![
                ResultRow {
                    value: thr.value,
                    argmax: Argmax::Point(thr.argmax),
                    ..base.clone()
                },
                ResultRow {
                    quantity: Quantity::ExpectedRateK,
                    k: Some(2),
                    value: two,
                    argmax: Argmax::Points(plan.thresholds().to_vec()),
                    ..base.clone()
                },
                ResultRow {
                    quantity: Quantity::ClExpectedRate,
                    value: dist_cl_expected_rate(p)?,
                    ..base.clone()
                },
                ResultRow {
                    quantity: Quantity::Ergodic,
                    value: dist_ergodic(p)?,
                    ..base
                },
            ])
        })
        .collect::<fading_rates::Result<Vec<_>>>()?;
    Ok(per_power.into_iter().flatten().collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(quantity: Quantity) -> SweepSpec {
        SweepSpec {
            quantity,
            nt: 2,
            nr: 1,
            powers: vec![0.1, 1.0, 10.0],
            k: 2,
            rho: vec![0.0],
            regime: None,
            mc: McConfig::new(2000, 7, 1).unwrap(),
        }
    }

    #[test]
    fn throughput_rows_in_grid_order() {
        let rows = run_sweep(&spec(Quantity::Throughput)).unwrap();
        assert_eq!(rows.len(), 3);
        for (r, p) in rows.iter().zip([0.1, 1.0, 10.0]) {
            assert_eq!(r.power, p);
            match r.argmax {
                Argmax::Point(s) => assert!(s > 0.0 && s < 1.0),
                _ => panic!("missing argmax"),
            }
        }
    }

    #[test]
    fn inconsistent_specs_name_the_field() {
        let mut s = spec(Quantity::Throughput);
        s.nr = 2;
        assert_eq!(s.validate().unwrap_err().field, "nr");
        s.regime = Some(Regime::HighSnr);
        assert_eq!(s.validate().unwrap_err().field, "regime");
        let mut s = spec(Quantity::MimoAsymptotic);
        s.regime = Some(Regime::ExactMiso);
        assert_eq!(s.validate().unwrap_err().field, "regime");
        let mut s = spec(Quantity::DistSim);
        s.nt = 3;
        assert_eq!(s.validate().unwrap_err().field, "nt");
        let mut s = spec(Quantity::Throughput);
        s.rho = vec![0.5, 2.0];
        assert_eq!(s.validate().unwrap_err().field, "rho");
        s.rho = vec![0.0];
        s.powers = vec![];
        assert_eq!(s.validate().unwrap_err().field, "P");
    }

    #[test]
    fn dist_sim_sweeps_rho_then_power() {
        let mut s = spec(Quantity::DistSim);
        s.rho = vec![0.0, 1.0];
        s.powers = vec![1.0, 10.0];
        let rows = run_sweep(&s).unwrap();
        let keys: Vec<(Option<f64>, f64)> = rows.iter().map(|r| (r.rho, r.power)).collect();
        assert_eq!(keys, [(Some(0.0), 1.0), (Some(0.0), 10.0), (Some(1.0), 1.0), (Some(1.0), 10.0)]);
    }

    #[test]
    fn fig2_rows_are_ordered() {
        let rows = fig2_rows(&[0.1, 1.0, 10.0, 100.0]).unwrap();
        assert_eq!(rows.len(), 16);
        for chunk in rows.chunks(4) {
            assert!(chunk[0].value <= chunk[1].value + 1e-6);
            assert!(chunk[1].value <= chunk[2].value + 1e-4);
            assert!(chunk[2].value <= chunk[3].value + 1e-9);
        }
    }
}
