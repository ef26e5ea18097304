//! Experiment configuration.
//!
//! A config file holds `key = value` lines (`#` starts a comment). Command
//! line flags use the same names, with `-` or `_`, and override the file.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use kemeny_elicit::elicitation::{default_budget, default_cert_every};
use kemeny_elicit::{Generator, PacParams, Ranking, StrategyKind};

use crate::error::{config_err, HarnessError, Result};

pub const KEYS: [&str; 17] = [
    "k", "n", "rho", "rho_frac", "delta", "generator", "phi", "reference", "mode", "strategies", "prune",
    "instances", "seed", "cert_every", "budget", "out", "jobs",
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Rho {
    Absolute(f64),
    /// Fraction of the largest possible score, `k(k-1)/2`.
    Fraction(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    WithReplacement,
    WithoutReplacement,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::WithReplacement => "with-replacement",
            Mode::WithoutReplacement => "without-replacement",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub k: usize,
    pub n: usize,
    pub rho: Rho,
    pub delta: f64,
    pub generator: Generator,
    pub mode: Mode,
    pub strategies: Vec<StrategyKind>,
    pub prune: bool,
    pub instances: usize,
    pub seed: u64,
    pub cert_every: Option<u64>,
    pub budget: Option<u64>,
    pub out: PathBuf,
    pub jobs: Option<usize>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            k: 4,
            n: 10,
            rho: Rho::Fraction(0.1),
            delta: 0.05,
            generator: Generator::Uniform,
            mode: Mode::WithReplacement,
            strategies: StrategyKind::ALL.to_vec(),
            prune: true,
            instances: 10,
            seed: 0,
            cert_every: None,
            budget: None,
            out: PathBuf::from("out"),
            jobs: None,
        }
    }
}

impl ExperimentConfig {
    pub fn rho_value(&self) -> f64 {
        match self.rho {
            Rho::Absolute(r) => r,
            Rho::Fraction(f) => f * (self.k * (self.k - 1)) as f64 / 2.0,
        }
    }

    pub fn params(&self) -> Result<PacParams> {
        let n = match self.mode {
            Mode::WithReplacement => None,
            Mode::WithoutReplacement => Some(self.n),
        };
        Ok(PacParams::new(self.k, n, self.rho_value(), self.delta)?)
    }

    pub fn budget_value(&self) -> Result<u64> {
        match self.budget {
            Some(b) => Ok(b),
            None => Ok(default_budget(&self.params()?)?),
        }
    }

    pub fn cert_every_value(&self) -> u64 {
        self.cert_every.unwrap_or_else(|| default_cert_every(self.k))
    }

    /// Builds a config from defaults overridden by `pairs`.
    pub fn from_pairs(pairs: &BTreeMap<String, String>) -> Result<Self> {
        let mut cfg = Self::default();
        let mut phi = None;
        let mut reference = None;
        let mut generator = None;
        for (key, value) in pairs {
            let v = value.trim();
            match key.as_str() {
                "k" => cfg.k = parse_num(key, v)?,
                "n" => cfg.n = parse_num(key, v)?,
                "rho" => {
                    if pairs.contains_key("rho_frac") {
                        return config_err("give either rho or rho_frac, not both");
                    }
                    cfg.rho = Rho::Absolute(parse_num(key, v)?);
                }
                "rho_frac" => cfg.rho = Rho::Fraction(parse_num(key, v)?),
                "delta" => cfg.delta = parse_num(key, v)?,
                "generator" => generator = Some(v.to_string()),
                "phi" => phi = Some(parse_num::<f64>(key, v)?),
                "reference" => reference = Some(parse_ranking(v)?),
                "mode" => {
                    cfg.mode = match v {
                        "with-replacement" | "with" => Mode::WithReplacement,
                        "without-replacement" | "without" => Mode::WithoutReplacement,
                        _ => return config_err(format!("unknown mode {v:?}")),
                    }
                }
                "strategies" => cfg.strategies = parse_strategies(v)?,
                "prune" => cfg.prune = parse_bool(key, v)?,
                "instances" => cfg.instances = parse_num(key, v)?,
                "seed" => cfg.seed = parse_num(key, v)?,
                "cert_every" => cfg.cert_every = Some(parse_num(key, v)?),
                "budget" => cfg.budget = Some(parse_num(key, v)?),
                "out" => cfg.out = PathBuf::from(v),
                "jobs" => cfg.jobs = Some(parse_num(key, v)?),
                _ => return config_err(format!("unknown key {key:?}")),
            }
        }
        let mallows_options = phi.is_some() || reference.is_some();
        cfg.generator = match generator.as_deref().unwrap_or("uniform") {
            "uniform" => Generator::Uniform,
            "mallows" => Generator::Mallows { phi: phi.unwrap_or(0.2), reference },
            "single-peaked" | "single_peaked" => Generator::SinglePeaked,
            other => return config_err(format!("unknown generator {other:?}")),
        };
        if !matches!(cfg.generator, Generator::Mallows { .. }) && mallows_options {
            return config_err("phi and reference only apply to the mallows generator");
        }
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<()> {
        if self.k < 2 {
            return config_err("k must be at least 2");
        }
        if self.k > kemeny_elicit::SOLVER_CAP {
            return config_err(format!("k must be at most {}", kemeny_elicit::SOLVER_CAP));
        }
        if self.n == 0 || self.instances == 0 {
            return config_err("n and instances must be positive");
        }
        if self.strategies.is_empty() {
            return config_err("no strategies given");
        }
        if self.cert_every == Some(0) || self.budget == Some(0) || self.jobs == Some(0) {
            return config_err("cert_every, budget and jobs must be positive");
        }
        if let Generator::Mallows { phi, reference } = &self.generator {
            if !(*phi > 0.0 && *phi <= 1.0) {
                return config_err(format!("phi must lie in (0, 1], got {phi}"));
            }
            if reference.as_ref().is_some_and(|r| r.k() != self.k) {
                return config_err("reference ranking has the wrong number of arms");
            }
        }
        self.params()?;
        Ok(())
    }
}

fn parse_num<T: std::str::FromStr>(key: &str, v: &str) -> Result<T> {
    v.parse().map_err(|_| HarnessError::Config(format!("{key}: cannot parse {v:?}")))
}

fn parse_bool(key: &str, v: &str) -> Result<bool> {
    match v {
        "true" | "on" | "yes" | "1" => Ok(true),
        "false" | "off" | "no" | "0" => Ok(false),
        _ => config_err(format!("{key}: expected true or false, got {v:?}")),
    }
}

fn parse_strategies(v: &str) -> Result<Vec<StrategyKind>> {
    if v == "all" {
        return Ok(StrategyKind::ALL.to_vec());
    }
    let mut out = Vec::new();
    for part in v.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let kind: StrategyKind = part.parse().map_err(|_| HarnessError::Config(format!("unknown strategy {part:?}")))?;
        if !out.contains(&kind) {
            out.push(kind);
        }
    }
    Ok(out)
}

/// Parses a one-based ranking such as `2>1>3`.
pub fn parse_ranking(v: &str) -> Result<Ranking> {
    let order = v
        .split('>')
        .map(|t| match t.trim().parse::<usize>() {
            Ok(a) if a >= 1 => Ok(a - 1),
            _ => config_err(format!("bad ranking {v:?}; expected arms like 1>2>3")),
        })
        .collect::<Result<Vec<_>>>()?;
    Ranking::new(order).map_err(|e| HarnessError::Config(e.to_string()))
}

/// Reads `key = value` lines.
pub fn parse_config_text(text: &str) -> Result<BTreeMap<String, String>> {
    let mut pairs = BTreeMap::new();
    for (no, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return config_err(format!("line {}: expected key = value", no + 1));
        };
        let key = normalize_key(key);
        if !KEYS.contains(&key.as_str()) {
            return config_err(format!("line {}: unknown key {key:?}", no + 1));
        }
        pairs.insert(key, value.trim().to_string());
    }
    Ok(pairs)
}

pub fn normalize_key(key: &str) -> String {
    key.trim().replace('-', "_")
}

pub fn read_config_file(path: &Path) -> Result<BTreeMap<String, String>> {
    let text = std::fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
    parse_config_text(&text)
}
