//! Sweep requests: parsing, config files and defaults.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use hybrid_witness::witness::WitnessCoefficients;
use hybrid_witness::C64;
use serde::{Deserialize, Serialize};

use crate::CliError;

/// Default sweep: 301 points on [−3, 3].
pub const DEFAULT_RANGE: SweepRange = SweepRange {
    min: -3.0,
    max: 3.0,
    steps: 301,
};
pub const DEFAULT_Y: f64 = 1.2;
pub const DEFAULT_DELTAS: [f64; 3] = [100.0, 1.0, 0.01];
pub const DEFAULT_ETA: f64 = 1.0;
pub const DEFAULT_ALPHA: f64 = 1.0;
/// Mixing weight of the third hybrid state; above ½ so the default curve
/// detects at the origin.
pub const DEFAULT_P: f64 = 0.75;
pub const DEFAULT_HYBRID_NMAX: usize = 60;
pub const DEFAULT_SEED: u64 = 42;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scenario {
    Gaussian,
    Thermal,
    Hybrid,
    /// `|Ψ⁺⟩ ⊗ ρ` for one mode in a coherent state, or thermal when a Δ is
    /// given.
    Custom,
}

impl Scenario {
    /// Sweep variable: `x` for the double well, `q'` otherwise.
    pub fn parameter_name(self) -> &'static str {
        match self {
            Scenario::Gaussian => "x",
            _ => "qprime",
        }
    }

    pub fn default_coefficients(self) -> WitnessCoefficients {
        match self {
            Scenario::Gaussian => WitnessCoefficients::ALL_MINUS,
            _ => WitnessCoefficients::PLUS_PLUS_MINUS,
        }
    }
}

impl FromStr for Scenario {
    type Err = CliError;
    fn from_str(s: &str) -> Result<Self, CliError> {
        match s {
            "gaussian" => Ok(Scenario::Gaussian),
            "thermal" => Ok(Scenario::Thermal),
            "hybrid" => Ok(Scenario::Hybrid),
            "custom" => Ok(Scenario::Custom),
            _ => Err(CliError::Usage(format!("unknown scenario '{s}'"))),
        }
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Scenario::Gaussian => "gaussian",
            Scenario::Thermal => "thermal",
            Scenario::Hybrid => "hybrid",
            Scenario::Custom => "custom",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

impl FromStr for Format {
    type Err = CliError;
    fn from_str(s: &str) -> Result<Self, CliError> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            _ => Err(CliError::Usage(format!("unknown format '{s}' (csv or json)"))),
        }
    }
}

/// `MIN:MAX:STEPS`, or `MIN:MAX` with the default step count.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepRange {
    pub min: f64,
    pub max: f64,
    pub steps: usize,
}

impl SweepRange {
    pub fn new(min: f64, max: f64, steps: usize) -> Result<Self, CliError> {
        if !min.is_finite() || !max.is_finite() {
            return Err(CliError::Usage(format!("range bounds must be finite, got {min}:{max}")));
        }
        if min >= max {
            return Err(CliError::Usage(format!("range needs MIN < MAX, got {min}:{max}")));
        }
        if steps < 2 {
            return Err(CliError::Usage(format!("range needs at least 2 steps, got {steps}")));
        }
        Ok(Self { min, max, steps })
    }

    pub fn points(&self) -> Vec<f64> {
        hybrid_witness::numeric::linspace(self.min, self.max, self.steps)
    }

    pub fn reach(&self) -> f64 {
        self.min.abs().max(self.max.abs())
    }
}

impl FromStr for SweepRange {
    type Err = CliError;
    fn from_str(s: &str) -> Result<Self, CliError> {
        let bad = || CliError::Usage(format!("expected MIN:MAX[:STEPS], got '{s}'"));
        let parts: Vec<&str> = s.split(':').map(str::trim).collect();
        if !(2..=3).contains(&parts.len()) {
            return Err(bad());
        }
        let min = parts[0].parse().map_err(|_| bad())?;
        let max = parts[1].parse().map_err(|_| bad())?;
        let steps = match parts.get(2) {
            Some(p) => p.parse().map_err(|_| bad())?,
            None => DEFAULT_RANGE.steps,
        };
        Self::new(min, max, steps)
    }
}

impl<'de> Deserialize<'de> for SweepRange {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Fixed coefficients, or per point the vertex of `[−1, 1]³` that
/// minimizes `⟨W⟩`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CoefficientChoice {
    Fixed(WitnessCoefficients),
    Auto,
}

impl FromStr for CoefficientChoice {
    type Err = CliError;
    fn from_str(s: &str) -> Result<Self, CliError> {
        if s.trim() == "auto" {
            return Ok(CoefficientChoice::Auto);
        }
        s.parse()
            .map(CoefficientChoice::Fixed)
            .map_err(|e: hybrid_witness::Error| CliError::Usage(e.to_string()))
    }
}

impl fmt::Display for CoefficientChoice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CoefficientChoice::Fixed(c) => write!(f, "{c}"),
            CoefficientChoice::Auto => f.write_str("auto"),
        }
    }
}

impl Serialize for CoefficientChoice {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for CoefficientChoice {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Optional settings, as given on the command line or in a JSON config
/// file. Field names match the long flags.
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSettings {
    pub scenario: Option<Scenario>,
    pub range: Option<SweepRange>,
    pub y: Option<f64>,
    #[serde(default)]
    pub delta: Vec<f64>,
    pub eta: Option<f64>,
    pub alpha_re: Option<f64>,
    pub alpha_im: Option<f64>,
    pub p: Option<f64>,
    pub c: Option<CoefficientChoice>,
    pub nmax: Option<usize>,
    pub oracle: Option<bool>,
    pub out: Option<PathBuf>,
    pub format: Option<Format>,
    pub seed: Option<u64>,
}

impl SweepSettings {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Usage(format!("config: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Usage(format!("config {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    /// Fields set in `self` win over those in `fallback`.
    pub fn over(self, fallback: SweepSettings) -> SweepSettings {
        SweepSettings {
            scenario: self.scenario.or(fallback.scenario),
            range: self.range.or(fallback.range),
            y: self.y.or(fallback.y),
            delta: if self.delta.is_empty() { fallback.delta } else { self.delta },
            eta: self.eta.or(fallback.eta),
            alpha_re: self.alpha_re.or(fallback.alpha_re),
            alpha_im: self.alpha_im.or(fallback.alpha_im),
            p: self.p.or(fallback.p),
            c: self.c.or(fallback.c),
            nmax: self.nmax.or(fallback.nmax),
            oracle: self.oracle.or(fallback.oracle),
            out: self.out.or(fallback.out),
            format: self.format.or(fallback.format),
            seed: self.seed.or(fallback.seed),
        }
    }
}

/// Fully resolved sweep.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRequest {
    pub scenario: Scenario,
    pub range: SweepRange,
    pub y: f64,
    pub deltas: Vec<f64>,
    pub eta: f64,
    pub alpha_re: f64,
    pub alpha_im: f64,
    pub p: f64,
    pub c: CoefficientChoice,
    pub nmax: Option<usize>,
    pub oracle: bool,
    #[serde(skip)]
    pub out: Option<PathBuf>,
    pub format: Format,
    pub seed: u64,
}

fn positive(name: &str, v: f64) -> Result<f64, CliError> {
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err(CliError::Usage(format!("--{name} must be finite and positive, got {v}")))
    }
}

fn finite(name: &str, v: f64) -> Result<f64, CliError> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(CliError::Usage(format!("--{name} must be finite, got {v}")))
    }
}

impl SweepRequest {
    /// Fill unset fields with the defaults for `scenario` (or the one named
    /// in the settings) and validate.
    pub fn resolve(scenario: Option<Scenario>, s: SweepSettings) -> Result<Self, CliError> {
        let scenario = scenario
            .or(s.scenario)
            .ok_or_else(|| CliError::Usage("no scenario given (gaussian, thermal, hybrid or custom)".into()))?;
        let deltas = if s.delta.is_empty() {
            match scenario {
                Scenario::Thermal => DEFAULT_DELTAS.to_vec(),
                _ => vec![],
            }
        } else {
            s.delta
        };
        for &d in &deltas {
            positive("delta", d)?;
        }
        let p = s.p.unwrap_or(DEFAULT_P);
        if !(0.0..=1.0).contains(&p) {
            return Err(CliError::Usage(format!("--p must lie in [0, 1], got {p}")));
        }
        if s.nmax == Some(0) {
            return Err(CliError::Usage("--nmax must be at least 1".into()));
        }
        let c = s.c.unwrap_or(CoefficientChoice::Fixed(scenario.default_coefficients()));
        Ok(Self {
            scenario,
            range: s.range.unwrap_or(DEFAULT_RANGE),
            y: positive("y", s.y.unwrap_or(DEFAULT_Y))?,
            deltas,
            eta: positive("eta", s.eta.unwrap_or(DEFAULT_ETA))?,
            alpha_re: finite("alpha-re", s.alpha_re.unwrap_or(DEFAULT_ALPHA))?,
            alpha_im: finite("alpha-im", s.alpha_im.unwrap_or(0.0))?,
            p,
            c,
            nmax: s.nmax,
            oracle: s.oracle.unwrap_or(false),
            out: s.out,
            format: s.format.unwrap_or_default(),
            seed: s.seed.unwrap_or(DEFAULT_SEED),
        })
    }

    pub fn alpha(&self) -> C64 {
        C64::new(self.alpha_re, self.alpha_im)
    }
}
