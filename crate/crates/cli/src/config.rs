//! Run configuration: built-in defaults, then a flat `key = value` file,
//! then command-line flags.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use gravmodes::wavefield::WaveKind;
use gravmodes::Equilibrium;
use serde::Serialize;

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub gamma: f64,
    pub a: f64,
    pub g: f64,
    pub z_plus: f64,
    pub lambda_series: Vec<f64>,
    pub l: f64,
    pub n_max: usize,
    pub n: usize,
    pub tol: f64,
    pub kind: Option<WaveKind>,
    pub eps: f64,
    pub samples: usize,
    pub nx: usize,
    pub nt: usize,
    /// Defaults to one horizontal wavelength.
    pub x_max: Option<f64>,
    /// Defaults to one period of the selected mode.
    pub t_max: Option<f64>,
    pub oracle_cells: usize,
    pub out: Option<PathBuf>,
    pub format: Format,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            gamma: 1.5,
            a: 1.0 / 3.0,
            g: 1.0,
            z_plus: 1.0,
            lambda_series: Vec::new(),
            l: 1.0,
            n_max: 6,
            n: 1,
            tol: 1e-12,
            kind: None,
            eps: 0.01,
            samples: 512,
            nx: 65,
            nt: 17,
            x_max: None,
            t_max: None,
            oracle_cells: 100_000,
            out: None,
            format: Format::Csv,
        }
    }
}

pub const KEYS: &[&str] = &[
    "gamma",
    "A",
    "g",
    "zplus",
    "lambda_series",
    "l",
    "nmax",
    "n",
    "tol",
    "kind",
    "eps",
    "samples",
    "nx",
    "nt",
    "xmax",
    "tmax",
    "oracle_cells",
    "out",
    "format",
];

/// Parses `key = value` lines; `#` starts a comment.
pub fn parse_file_text(text: &str) -> Result<BTreeMap<String, String>, CliError> {
    let mut out = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(CliError::Config(format!("line {}: expected `key = value`, found `{line}`", i + 1)));
        };
        let key = key.trim();
        let value = value.trim();
        if !KEYS.contains(&key) {
            return Err(CliError::Config(format!("line {}: unknown key `{key}`", i + 1)));
        }
        if value.is_empty() {
            return Err(CliError::Config(format!("line {}: empty value for `{key}`", i + 1)));
        }
        if out.insert(key.to_string(), value.to_string()).is_some() {
            return Err(CliError::Config(format!("line {}: duplicate key `{key}`", i + 1)));
        }
    }
    Ok(out)
}

pub fn read_file(path: &Path) -> Result<BTreeMap<String, String>, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read config {}: {e}", path.display())))?;
    parse_file_text(&text)
}

fn number(key: &str, value: &str) -> Result<f64, CliError> {
    value
        .parse::<f64>()
        .map_err(|_| CliError::Config(format!("`{key}`: `{value}` is not a number")))
}

fn count(key: &str, value: &str) -> Result<usize, CliError> {
    value
        .parse::<usize>()
        .map_err(|_| CliError::Config(format!("`{key}`: `{value}` is not a non-negative integer")))
}

pub fn parse_kind(value: &str) -> Result<WaveKind, CliError> {
    match value {
        "1" => Ok(WaveKind::Type1),
        "2" => Ok(WaveKind::Type2),
        other => Err(CliError::Config(format!("`kind`: `{other}` must be 1 or 2"))),
    }
}

pub fn parse_format(value: &str) -> Result<Format, CliError> {
    match value {
        "csv" => Ok(Format::Csv),
        "json" => Ok(Format::Json),
        other => Err(CliError::Config(format!("`format`: `{other}` must be csv or json"))),
    }
}

impl RunConfig {
    /// Applies one setting by key.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), CliError> {
        match key {
            "gamma" => self.gamma = number(key, value)?,
            "A" => self.a = number(key, value)?,
            "g" => self.g = number(key, value)?,
            "zplus" => self.z_plus = number(key, value)?,
            "lambda_series" => {
                self.lambda_series = value
                    .split(',')
                    .map(str::trim)
                    .filter(|v| !v.is_empty())
                    .map(|v| number(key, v))
                    .collect::<Result<_, _>>()?
            }
            "l" => self.l = number(key, value)?,
            "nmax" => self.n_max = count(key, value)?,
            "n" => self.n = count(key, value)?,
            "tol" => self.tol = number(key, value)?,
            "kind" => self.kind = Some(parse_kind(value)?),
            "eps" => self.eps = number(key, value)?,
            "samples" => self.samples = count(key, value)?,
            "nx" => self.nx = count(key, value)?,
            "nt" => self.nt = count(key, value)?,
            "xmax" => self.x_max = Some(number(key, value)?),
            "tmax" => self.t_max = Some(number(key, value)?),
            "oracle_cells" => self.oracle_cells = count(key, value)?,
            "out" => self.out = Some(PathBuf::from(value)),
            "format" => self.format = parse_format(value)?,
            other => return Err(CliError::Config(format!("unknown key `{other}`"))),
        }
        Ok(())
    }

    /// Checks the settings that the library does not check itself.
    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |field: &str, reason: String| Err(CliError::Config(format!("invalid `{field}`: {reason}")));
        if !(self.l > 0.0 && self.l.is_finite()) {
            return bad("l", format!("{} must be positive", self.l));
        }
        if self.n_max == 0 {
            return bad("nmax", "must be at least 1".into());
        }
        if self.n == 0 || self.n > self.n_max {
            return bad("n", format!("{} must lie in [1, nmax = {}]", self.n, self.n_max));
        }
        if !(self.tol >= 1e-12 && self.tol < 1e-2) {
            return bad("tol", format!("{:e} must lie in [1e-12, 1e-2)", self.tol));
        }
        if !self.eps.is_finite() {
            return bad("eps", "must be finite".into());
        }
        for (field, v) in [("samples", self.samples), ("nx", self.nx), ("nt", self.nt)] {
            if v < 2 {
                return bad(field, format!("{v}; at least 2 required"));
            }
        }
        if self.oracle_cells < gravmodes::fd_oracle::MIN_CELLS {
            return bad("oracle_cells", format!("{} is too small", self.oracle_cells));
        }
        for (field, v) in [("xmax", self.x_max), ("tmax", self.t_max)] {
            if let Some(v) = v {
                if !(v > 0.0 && v.is_finite()) {
                    return bad(field, format!("{v} must be positive"));
                }
            }
        }
        if let Some(p) = &self.out {
            if p.as_os_str().is_empty() {
                return bad("out", "path is empty".into());
            }
        }
        Ok(())
    }

    pub fn equilibrium(&self) -> Result<Equilibrium, CliError> {
        let eq = Equilibrium::make_polytropic(self.gamma, self.a, self.g, self.z_plus)?;
        Ok(eq.make_perturbed(&self.lambda_series)?)
    }

    pub fn x_max(&self) -> f64 {
        self.x_max.unwrap_or(2.0 * PI / self.l)
    }

    pub fn t_max(&self, lambda: f64) -> f64 {
        self.t_max.unwrap_or(2.0 * PI / lambda.sqrt())
    }

    /// Settings echoed into JSON reports, in a fixed order.
    pub fn summary(&self) -> ConfigSummary {
        ConfigSummary {
            gamma: self.gamma.into(),
            a: self.a.into(),
            g: self.g.into(),
            zplus: self.z_plus.into(),
            lambda_series: self.lambda_series.iter().map(|&v| v.into()).collect(),
            l: self.l.into(),
            nmax: self.n_max,
            tol: self.tol.into(),
        }
    }
}

#[derive(Debug, Serialize)]
pub struct ConfigSummary {
    pub gamma: crate::output::Num,
    #[serde(rename = "A")]
    pub a: crate::output::Num,
    pub g: crate::output::Num,
    pub zplus: crate::output::Num,
    pub lambda_series: Vec<crate::output::Num>,
    pub l: crate::output::Num,
    pub nmax: usize,
    pub tol: crate::output::Num,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn file_syntax() {
        let map = parse_file_text("# comment\ngamma = 1.4  # trailing\n\n  l=2\nlambda_series = 0.1, -0.2\n").unwrap();
        assert_eq!(map["gamma"], "1.4");
        assert_eq!(map["l"], "2");
        let mut c = RunConfig::default();
        for (k, v) in &map {
            c.set(k, v).unwrap();
        }
        assert_eq!(c.lambda_series, vec![0.1, -0.2]);
        assert_eq!(c.gamma, 1.4);
        assert!(parse_file_text("gamma 1.4").is_err());
        assert!(parse_file_text("colour = red").is_err());
        assert!(parse_file_text("l = 1\nl = 2").is_err());
        assert!(parse_file_text("l =").is_err());
    }

    #[test]
    fn value_errors() {
        let mut c = RunConfig::default();
        assert!(c.set("l", "one").is_err());
        assert!(c.set("kind", "3").is_err());
        assert!(c.set("format", "xml").is_err());
        assert!(c.set("nmax", "-1").is_err());
        c.set("n", "7").unwrap();
        assert!(c.validate().is_err());
    }

    #[test]
    fn default_is_the_reference_profile() {
        let eq = RunConfig::default().equilibrium().unwrap();
        assert!((eq.nu - 2.0).abs() < 1e-15 && (eq.c_rho - 1.0).abs() < 1e-15);
        let c = RunConfig {
            gamma: 2.5,
            ..RunConfig::default()
        };
        let msg = c.equilibrium().unwrap_err().to_string();
        assert!(msg.contains("gamma"), "{msg}");
    }
}
