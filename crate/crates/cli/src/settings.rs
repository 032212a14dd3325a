//! Resolution of every setting from flags, `FR_*` environment variables, an
//! optional `key = value` config file and built-in defaults. Flags beat the
//! environment, which beats the file, which beats the default.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

/// A bad setting, naming the field it came from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UsageError {
    pub field: String,
    pub message: String,
}

impl UsageError {
    pub fn new(field: impl Into<String>, message: impl Into<String>) -> Self {
        Self {
            field: field.into(),
            message: message.into(),
        }
    }
}

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "invalid `{}`: {}", self.field, self.message)
    }
}

impl std::error::Error for UsageError {}

/// Keys accepted in a config file; the same names as the long flags.
pub const CONFIG_KEYS: [&str; 13] = [
    "quantity", "nt", "nr", "K", "P", "rho", "regime", "samples", "seed", "workers", "out",
    "bits", "level",
];

/// Parsed config file: key to raw value.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ConfigFile {
    values: BTreeMap<String, String>,
}

impl ConfigFile {
    pub fn parse(text: &str) -> Result<Self, UsageError> {
        let mut values = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                UsageError::new("config", format!("line {}: expected `key = value`", i + 1))
            })?;
            let key = key.trim();
            if !CONFIG_KEYS.contains(&key) {
                return Err(UsageError::new(key, format!("unknown config key on line {}", i + 1)));
            }
            values.insert(key.to_string(), value.trim().to_string());
        }
        Ok(Self { values })
    }

    pub fn load(path: &Path) -> Result<Self, UsageError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| UsageError::new("config", format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }
}

/// Parses `raw` as the value of `field`.
pub fn parse_field<T: FromStr>(field: &str, raw: &str) -> Result<T, UsageError>
where
    T::Err: fmt::Display,
{
    raw.trim()
        .parse()
        .map_err(|e| UsageError::new(field, format!("cannot parse `{raw}`: {e}")))
}

/// Flag, then environment variable `env`, then config file, then `None`.
pub fn layered<T: FromStr>(
    field: &str,
    flag: Option<T>,
    env: Option<&str>,
    file: &ConfigFile,
) -> Result<Option<T>, UsageError>
where
    T::Err: fmt::Display,
{
    if flag.is_some() {
        return Ok(flag);
    }
    if let Some(var) = env {
        if let Ok(raw) = std::env::var(var) {
            return parse_field(var, &raw).map(Some);
        }
    }
    file.get(field).map(|raw| parse_field(field, raw)).transpose()
}

/// Unsigned integer in decimal or `0x` hexadecimal.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Seed(pub u64);

impl FromStr for Seed {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim().replace('_', "");
        let parsed = match s.strip_prefix("0x").or_else(|| s.strip_prefix("0X")) {
            Some(hex) => u64::from_str_radix(hex, 16),
            None => s.parse(),
        };
        parsed.map(Seed).map_err(|e| e.to_string())
    }
}

/// Positive sample count; accepts `1000000`, `1_000_000` or `1e6`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Count(pub u64);

impl FromStr for Count {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim().replace('_', "");
        let n = match s.parse::<u64>() {
            Ok(n) => n,
            Err(_) => {
                let x: f64 = s.parse().map_err(|_| format!("`{s}` is not a count"))?;
                if !(x.is_finite() && x >= 0.0 && x.fract() == 0.0 && x < 1.8e19) {
                    return Err(format!("`{s}` is not a whole number"));
                }
                x as u64
            }
        };
        if n == 0 {
            return Err("must be at least 1".into());
        }
        Ok(Count(n))
    }
}

/// Nonempty comma-separated list of powers; an entry with a `dB` suffix is
/// converted to linear scale.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerGrid(pub Vec<f64>);

impl FromStr for PowerGrid {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut out = Vec::new();
        for item in s.split(',') {
            let item = item.trim();
            let (number, db) = match item.strip_suffix("dB").or_else(|| item.strip_suffix("db")) {
                Some(n) => (n.trim(), true),
                None => (item, false),
            };
            let x: f64 = number.parse().map_err(|_| format!("`{item}` is not a power"))?;
            let p = if db { 10f64.powf(x / 10.0) } else { x };
            if !(p.is_finite() && p > 0.0) {
                return Err(format!("`{item}` must be finite and > 0"));
            }
            out.push(p);
        }
        if out.is_empty() {
            return Err("empty grid".into());
        }
        Ok(PowerGrid(out))
    }
}

/// Nonempty comma-separated list of correlations; an entry `lo:step:hi`
/// expands to `lo, lo + step, …` up to `hi` inclusive.
#[derive(Debug, Clone, PartialEq)]
pub struct RhoGrid(pub Vec<f64>);

impl FromStr for RhoGrid {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let number = |t: &str| -> Result<f64, String> {
            t.trim().parse().map_err(|_| format!("`{}` is not a number", t.trim()))
        };
        let mut out = Vec::new();
        for item in s.split(',') {
            let parts: Vec<&str> = item.split(':').collect();
            match parts[..] {
                [x] => out.push(number(x)?),
                [lo, step, hi] => {
                    let (lo, step, hi) = (number(lo)?, number(step)?, number(hi)?);
                    if !(step > 0.0 && lo <= hi) {
                        return Err(format!("`{}` needs lo <= hi and step > 0", item.trim()));
                    }
                    // the half-step slack keeps `hi` despite rounding
                    let n = ((hi - lo) / step + 0.5).floor() as usize;
                    if n > 100_000 {
                        return Err(format!("`{}` expands to too many points", item.trim()));
                    }
                    out.extend((0..=n).map(|i| (lo + i as f64 * step).min(hi)));
                }
                _ => return Err(format!("`{}` is neither a value nor lo:step:hi", item.trim())),
            }
        }
        Ok(RhoGrid(out))
    }
}

/// `true`/`false`/`1`/`0`/`yes`/`no`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Switch(pub bool);

impl FromStr for Switch {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "true" | "1" | "yes" => Ok(Switch(true)),
            "false" | "0" | "no" => Ok(Switch(false)),
            other => Err(format!("`{other}` is not a boolean")),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_parsing() {
        let c = ConfigFile::parse("# comment\nnt = 4\n\nP=1,10 # trailing\n").unwrap();
        assert_eq!(c.get("nt"), Some("4"));
        assert_eq!(c.get("P"), Some("1,10"));
        let e = ConfigFile::parse("antennas = 3").unwrap_err();
        assert_eq!(e.field, "antennas");
        assert!(ConfigFile::parse("nt 4").is_err());
    }

    #[test]
    fn value_parsers() {
        assert_eq!("0x5EED_CAFE".parse::<Seed>().unwrap(), Seed(0x5EED_CAFE));
        assert_eq!("1e6".parse::<Count>().unwrap(), Count(1_000_000));
        assert!("0".parse::<Count>().is_err());
        assert!("2.5".parse::<Count>().is_err());
        let g: PowerGrid = "1, 10dB".parse().unwrap();
        assert_eq!(g.0[0], 1.0);
        assert!((g.0[1] - 10.0).abs() < 1e-12);
        assert!("-1".parse::<PowerGrid>().is_err());
    }

    #[test]
    fn flag_beats_file() {
        let c = ConfigFile::parse("nt = 4").unwrap();
        assert_eq!(layered::<usize>("nt", Some(2), None, &c).unwrap(), Some(2));
        assert_eq!(layered::<usize>("nt", None, None, &c).unwrap(), Some(4));
        assert_eq!(layered::<usize>("nr", None, None, &c).unwrap(), None);
        let bad = ConfigFile::parse("nt = four").unwrap();
        assert_eq!(layered::<usize>("nt", None, None, &bad).unwrap_err().field, "nt");
    }

    #[test]
    fn rho_grid_ranges() {
        let g: RhoGrid = "0:0.1:1".parse().unwrap();
        assert_eq!(g.0.len(), 11);
        assert_eq!(*g.0.last().unwrap(), 1.0);
        let g: RhoGrid = "-1, 0.5:0.25:1".parse().unwrap();
        assert_eq!(g.0, vec![-1.0, 0.5, 0.75, 1.0]);
        assert!("1:0:2".parse::<RhoGrid>().is_err());
        assert!("a".parse::<RhoGrid>().is_err());
    }
}
