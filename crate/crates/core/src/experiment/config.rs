//! Flat `key = value` configuration with list-valued sweep axes.

use std::collections::BTreeMap;
use std::f64::consts::{FRAC_PI_2, FRAC_PI_3, FRAC_PI_6, PI};
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scenario {
    EqualPriorXz,
    UnequalPriorXz,
    ConstZ,
}

impl Scenario {
    pub fn as_str(&self) -> &'static str {
        match self {
            Scenario::EqualPriorXz => "equal-prior-xz",
            Scenario::UnequalPriorXz => "unequal-prior-xz",
            Scenario::ConstZ => "const-z",
        }
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Scenario {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().replace('_', "-").as_str() {
            "equal-prior-xz" | "equal" => Ok(Scenario::EqualPriorXz),
            "unequal-prior-xz" | "unequal" => Ok(Scenario::UnequalPriorXz),
            "const-z" | "constz" => Ok(Scenario::ConstZ),
            other => Err(Error::Config(format!("unknown scenario {other:?}"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Csv,
    Json,
}

impl FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            other => Err(Error::Config(format!("unknown format {other:?}"))),
        }
    }
}

/// One scenario with scalar parameters.
///
/// `alpha` is the polar angle of the state pair for the equal-prior
/// scenario and the in-plane direction of the ensemble vector otherwise.
/// Learning budgets are per measurement setting (equal priors) or per
/// Pauli axis (the other scenarios).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub scenario: Scenario,
    pub alpha: f64,
    pub beta: f64,
    pub eta0: f64,
    pub theta: f64,
    pub nz: f64,
    pub phi0: f64,
    pub shots_learn: u64,
    pub shots_holdout: u64,
    pub trials: u64,
    pub seed: u64,
    pub format: OutputFormat,
    pub out: Option<PathBuf>,
    pub weak_threshold: Option<f64>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            scenario: Scenario::EqualPriorXz,
            alpha: FRAC_PI_3,
            beta: FRAC_PI_6,
            eta0: 0.6,
            theta: FRAC_PI_2,
            nz: 0.6,
            phi0: 0.0,
            shots_learn: 100_000,
            shots_holdout: 10_000,
            trials: 10,
            seed: 0,
            format: OutputFormat::Csv,
            out: None,
            weak_threshold: None,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        if self.shots_learn == 0 || self.shots_holdout == 0 || self.trials == 0 {
            return bad("shots_learn, shots_holdout and trials must all be >= 1".into());
        }
        for (name, v) in [("alpha", self.alpha), ("phi0", self.phi0)] {
            if !v.is_finite() {
                return bad(format!("{name} = {v} is not finite"));
            }
        }
        if let Some(t) = self.weak_threshold {
            if !(t >= 0.0 && t.is_finite()) {
                return bad(format!("weak_threshold = {t} must be finite and >= 0"));
            }
        }
        match self.scenario {
            Scenario::EqualPriorXz => {
                if !(0.0..=FRAC_PI_2).contains(&self.beta) {
                    return bad(format!("beta = {} outside [0, pi/2]", self.beta));
                }
            }
            Scenario::UnequalPriorXz | Scenario::ConstZ => {
                if !(self.eta0 > 0.0 && self.eta0 < 1.0) {
                    return bad(format!("eta0 = {} outside (0, 1)", self.eta0));
                }
                if !(0.0..=PI).contains(&self.theta) {
                    return bad(format!("theta = {} outside [0, pi]", self.theta));
                }
                if self.scenario == Scenario::ConstZ && !(self.nz.abs() < 1.0) {
                    return bad(format!("nz = {} outside (-1, 1)", self.nz));
                }
            }
        }
        Ok(())
    }
}

/// Keys accepted in config files and as CLI flags (with `-` for `_`).
pub const KEYS: &[&str] = &[
    "scenario",
    "alpha",
    "beta",
    "eta0",
    "theta",
    "nz",
    "phi0",
    "shots_learn",
    "shots_holdout",
    "trials",
    "seed",
    "format",
    "out",
    "weak_threshold",
];

/// Keys that may carry a comma-separated list in a sweep.
pub const SWEEP_KEYS: &[&str] = &["alpha", "beta", "eta0", "theta", "nz"];

fn normalize_key(key: &str) -> Result<String> {
    let k = key.trim().trim_start_matches("--").replace('-', "_").to_ascii_lowercase();
    if KEYS.contains(&k.as_str()) {
        Ok(k)
    } else {
        Err(Error::Config(format!("unknown key {key:?}")))
    }
}

/// Raw key/value settings; later inserts override earlier ones.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Settings {
    values: BTreeMap<String, String>,
}

impl Settings {
    /// Parses `key = value` lines; `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self> {
        let mut out = Settings::default();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) =
                line.split_once('=').ok_or_else(|| Error::Config(format!("line {}: expected key = value", i + 1)))?;
            let key = normalize_key(k)?;
            if out.values.contains_key(&key) {
                return Err(Error::Config(format!("line {}: duplicate key {key}", i + 1)));
            }
            out.values.insert(key, v.trim().to_string());
        }
        Ok(out)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io { path: path.to_path_buf(), source })?;
        Settings::parse(&text)
    }

    pub fn set(&mut self, key: &str, value: impl Into<String>) -> Result<()> {
        self.values.insert(normalize_key(key)?, value.into());
        Ok(())
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    /// Overlays `other` on top of `self`.
    pub fn merge(&mut self, other: &Settings) {
        for (k, v) in &other.values {
            self.values.insert(k.clone(), v.clone());
        }
    }
}

/// Parses a real number or a multiple of pi: `0.5`, `pi`, `-pi/4`, `2pi/3`, `2*pi/3`.
pub fn parse_angle(text: &str) -> Result<f64> {
    let err = || Error::Config(format!("cannot parse number {text:?}"));
    let t = text.trim().to_ascii_lowercase().replace(' ', "");
    if t.is_empty() {
        return Err(err());
    }
    let (num, den) = match t.split_once('/') {
        Some((n, d)) => (n, Some(d.parse::<f64>().map_err(|_| err())?)),
        None => (t.as_str(), None),
    };
    let value = if let Some(coef) = num.strip_suffix("pi") {
        let coef = coef.strip_suffix('*').unwrap_or(coef);
        let c = match coef {
            "" | "+" => 1.0,
            "-" => -1.0,
            c => c.parse::<f64>().map_err(|_| err())?,
        };
        c * PI
    } else {
        num.parse::<f64>().map_err(|_| err())?
    };
    let value = match den {
        Some(d) if d != 0.0 => value / d,
        Some(_) => return Err(err()),
        None => value,
    };
    if value.is_finite() {
        Ok(value)
    } else {
        Err(err())
    }
}

/// Parses a non-negative integer count; `1e5` style is accepted when integral.
pub fn parse_count(text: &str) -> Result<u64> {
    let t = text.trim();
    if let Ok(v) = t.parse::<u64>() {
        return Ok(v);
    }
    match t.parse::<f64>() {
        Ok(v) if v >= 0.0 && v.fract() == 0.0 && v < 1.8e19 => Ok(v as u64),
        _ => Err(Error::Config(format!("cannot parse count {text:?}"))),
    }
}

fn parse_list(key: &str, text: &str, allow_list: bool) -> Result<Vec<f64>> {
    let items: Vec<&str> = text.split(',').map(str::trim).filter(|s| !s.is_empty()).collect();
    if items.is_empty() {
        return Err(Error::Config(format!("{key}: empty value")));
    }
    if items.len() > 1 && !allow_list {
        return Err(Error::Config(format!("{key}: lists are only accepted by sweep")));
    }
    items.into_iter().map(parse_angle).collect()
}

/// A base configuration plus the value lists of the swept keys.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepGrid {
    pub base: ExperimentConfig,
    pub alpha: Vec<f64>,
    pub beta: Vec<f64>,
    pub eta0: Vec<f64>,
    pub theta: Vec<f64>,
    pub nz: Vec<f64>,
}

impl SweepGrid {
    /// Single-cell grid around `base`.
    pub fn single(base: ExperimentConfig) -> Self {
        SweepGrid {
            alpha: vec![base.alpha],
            beta: vec![base.beta],
            eta0: vec![base.eta0],
            theta: vec![base.theta],
            nz: vec![base.nz],
            base,
        }
    }

    /// Builds a grid from settings over the defaults. With `allow_lists`
    /// false every swept key must hold exactly one value.
    pub fn from_settings(settings: &Settings, allow_lists: bool) -> Result<Self> {
        let mut base = ExperimentConfig::default();
        if let Some(v) = settings.get("scenario") {
            base.scenario = v.parse()?;
        }
        if let Some(v) = settings.get("phi0") {
            base.phi0 = parse_angle(v)?;
        }
        if let Some(v) = settings.get("shots_learn") {
            base.shots_learn = parse_count(v)?;
        }
        if let Some(v) = settings.get("shots_holdout") {
            base.shots_holdout = parse_count(v)?;
        }
        if let Some(v) = settings.get("trials") {
            base.trials = parse_count(v)?;
        }
        if let Some(v) = settings.get("seed") {
            base.seed = parse_count(v)?;
        }
        if let Some(v) = settings.get("format") {
            base.format = v.parse()?;
        }
        if let Some(v) = settings.get("out") {
            base.out = (!v.is_empty() && v != "-").then(|| PathBuf::from(v));
        }
        if let Some(v) = settings.get("weak_threshold") {
            base.weak_threshold = Some(parse_angle(v)?);
        }
        let mut grid = SweepGrid::single(base);
        for key in SWEEP_KEYS {
            if let Some(v) = settings.get(key) {
                let values = parse_list(key, v, allow_lists)?;
                match *key {
                    "alpha" => grid.alpha = values,
                    "beta" => grid.beta = values,
                    "eta0" => grid.eta0 = values,
                    "theta" => grid.theta = values,
                    _ => grid.nz = values,
                }
            }
        }
        grid.base = grid.cells().into_iter().next().expect("grid has at least one cell");
        for cell in grid.cells() {
            cell.validate()?;
        }
        Ok(grid)
    }

    /// Cartesian product in the order eta0, theta, alpha, beta, nz (last varies fastest).
    pub fn cells(&self) -> Vec<ExperimentConfig> {
        let mut out = Vec::new();
        for &eta0 in &self.eta0 {
            for &theta in &self.theta {
                for &alpha in &self.alpha {
                    for &beta in &self.beta {
                        for &nz in &self.nz {
                            out.push(ExperimentConfig { eta0, theta, alpha, beta, nz, ..self.base.clone() });
                        }
                    }
                }
            }
        }
        out
    }
}
