//! Result rows and their CSV form.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use std::f64::consts::LN_2;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Quantity {
    Throughput,
    ExpectedRateK,
    ClExpectedRate,
    Ergodic,
    MimoAsymptotic,
    DistSim,
    MimoSurface,
}

impl Quantity {
    pub const ALL: [Quantity; 7] = [
        Quantity::Throughput,
        Quantity::ExpectedRateK,
        Quantity::ClExpectedRate,
        Quantity::Ergodic,
        Quantity::MimoAsymptotic,
        Quantity::DistSim,
        Quantity::MimoSurface,
    ];

    pub fn label(self) -> &'static str {
        match self {
            Quantity::Throughput => "throughput",
            Quantity::ExpectedRateK => "expected-rate-k",
            Quantity::ClExpectedRate => "cl-expected-rate",
            Quantity::Ergodic => "ergodic",
            Quantity::MimoAsymptotic => "mimo-asymptotic",
            Quantity::DistSim => "dist-sim",
            Quantity::MimoSurface => "mimo-surface",
        }
    }
}

impl fmt::Display for Quantity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Quantity {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Quantity::ALL
            .into_iter()
            .find(|q| q.label() == s)
            .ok_or_else(|| {
                let names: Vec<_> = Quantity::ALL.iter().map(|q| q.label()).collect();
                format!("expected one of {}", names.join(", "))
            })
    }
}

/// Location of the maximum that produced a row's value.
#[derive(Debug, Clone, PartialEq)]
pub enum Argmax {
    None,
    /// a dimensionless threshold `s` or a Gaussian abscissa `z`
    Point(f64),
    /// per-layer thresholds, lowest layer first
    Points(Vec<f64>),
    /// a rate in nats
    Rate(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub quantity: Quantity,
    pub nt: usize,
    pub nr: usize,
    pub k: Option<usize>,
    pub rho: Option<f64>,
    pub power: f64,
    /// nats
    pub value: f64,
    pub argmax: Argmax,
    /// present iff the value is a Monte Carlo estimate
    pub stderr: Option<f64>,
    pub seed: Option<u64>,
}

/// `x` with 12 significant digits, trailing zeros dropped.
pub fn sig12(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    // the exponent after rounding to 12 digits decides the layout
    let sci = format!("{x:.11e}");
    let (mantissa, e) = sci.split_once('e').expect("exponent form");
    let exp: i32 = e.parse().expect("integer exponent");
    if (-5..12).contains(&exp) {
        let decimals = (11 - exp) as usize;
        let s = format!("{x:.decimals$}");
        if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s
        }
    } else {
        let mantissa = mantissa.trim_end_matches('0').trim_end_matches('.');
        format!("{mantissa}e{exp}")
    }
}

/// Writes `rows` as CSV with LF line endings. With `bits`, values, standard
/// errors and rate-valued argmaxes are divided by `ln 2` and the value
/// column is named `value_bits`.
pub fn write_csv<W: Write>(out: W, rows: &[ResultRow], bits: bool) -> std::io::Result<()> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out);
    let unit = if bits { LN_2 } else { 1.0 };
    w.write_record([
        "quantity",
        "nt",
        "nr",
        "K",
        "rho",
        "P",
        if bits { "value_bits" } else { "value_nats" },
        "argmax",
        "stderr",
        "seed",
    ])?;
    for r in rows {
        let argmax = match &r.argmax {
            Argmax::None => String::new(),
            Argmax::Point(x) => sig12(*x),
            Argmax::Points(xs) => xs.iter().map(|x| sig12(*x)).collect::<Vec<_>>().join(";"),
            Argmax::Rate(x) => sig12(x / unit),
        };
        w.write_record([
            r.quantity.label().to_string(),
            r.nt.to_string(),
            r.nr.to_string(),
            r.k.map(|k| k.to_string()).unwrap_or_default(),
            r.rho.map(sig12).unwrap_or_default(),
            sig12(r.power),
            sig12(r.value / unit),
            argmax,
            r.stderr.map(|s| sig12(s / unit)).unwrap_or_default(),
            r.seed.map(|s| s.to_string()).unwrap_or_default(),
        ])?;
    }
    w.flush()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn twelve_significant_digits() {
        assert_eq!(sig12(0.0), "0");
        assert_eq!(sig12(1.0), "1");
        assert_eq!(sig12(std::f64::consts::PI), "3.14159265359");
        assert_eq!(sig12(-0.001234), "-0.001234");
        assert_eq!(sig12(1e-9), "1e-9");
        assert_eq!(sig12(123456789012345.0), "1.23456789012e14");
        assert_eq!(sig12(100.0), "100");
        assert_eq!(sig12(9.9999999999999), "10");
    }

    #[test]
    fn csv_layout() {
        let row = ResultRow {
            quantity: Quantity::Throughput,
            nt: 2,
            nr: 1,
            k: None,
            rho: None,
            power: 10.0,
            value: LN_2,
            argmax: Argmax::Point(0.5),
            stderr: None,
            seed: None,
        };
        let mut buf = Vec::new();
        write_csv(&mut buf, std::slice::from_ref(&row), false).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(
            text,
            "quantity,nt,nr,K,rho,P,value_nats,argmax,stderr,seed\n\
             throughput,2,1,,,10,0.69314718056,0.5,,\n"
        );
        let mut buf = Vec::new();
        write_csv(&mut buf, &[row], true).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("quantity,nt,nr,K,rho,P,value_bits,"));
        assert!(text.contains(",10,1,0.5,"));
    }
}
