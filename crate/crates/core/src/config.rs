//! Flat `key = value` run configuration with command-line overrides.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::stability::EtaParams;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Command {
    Profile,
    Solve,
    Stability,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Profile => "profile",
            Command::Solve => "solve",
            Command::Stability => "stability",
        }
    }
}

pub const KEYS: &[&str] = &[
    "nonlinearity", "m", "R", "h", "tol", "k_max", "commands", "output_dir", "seed", "tau_max", "nodes",
    "a_list", "rho1", "rho2", "alpha", "trials", "count", "a0", "full_square",
];

#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    pub nonlinearity: String,
    pub m: usize,
    #[serde(rename = "R")]
    pub r: f64,
    pub h: f64,
    pub tol: f64,
    pub k_max: usize,
    pub commands: Vec<Command>,
    pub output_dir: PathBuf,
    pub seed: u64,
    pub tau_max: f64,
    pub nodes: usize,
    pub a_list: Vec<f64>,
    pub eta: EtaParams,
    pub trials: usize,
    pub count: usize,
    pub a0: f64,
    pub full_square: bool,
}

/// Reads `key = value` lines; `#` starts a comment.
pub fn parse_config_text(text: &str) -> Result<BTreeMap<String, String>> {
    let mut map = BTreeMap::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("line {}: expected key = value, got `{raw}`", n + 1)))?;
        let k = k.trim();
        if !KEYS.contains(&k) {
            return Err(Error::Config(format!("line {}: unknown key `{k}`", n + 1)));
        }
        map.insert(k.to_string(), v.trim().to_string());
    }
    Ok(map)
}

pub fn read_config_file(path: &Path) -> Result<BTreeMap<String, String>> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("cannot read config {}: {e}", path.display())))?;
    parse_config_text(&text)
}

/// Accepts plain numbers and fractions such as `1/16`.
pub fn parse_number(key: &str, v: &str) -> Result<f64> {
    let bad = || Error::Config(format!("`{key}`: cannot parse `{v}` as a number"));
    let x = match v.split_once('/') {
        Some((a, b)) => {
            let (a, b): (f64, f64) = (a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?);
            a / b
        }
        None => v.trim().parse().map_err(|_| bad())?,
    };
    if x.is_finite() {
        Ok(x)
    } else {
        Err(bad())
    }
}

fn parse_int<T: std::str::FromStr>(key: &str, v: &str) -> Result<T> {
    v.trim().parse().map_err(|_| Error::Config(format!("`{key}`: cannot parse `{v}` as an integer")))
}

fn parse_list(key: &str, v: &str) -> Result<Vec<f64>> {
    v.split(',').filter(|x| !x.trim().is_empty()).map(|x| parse_number(key, x)).collect()
}

fn parse_command(v: &str) -> Result<Command> {
    match v.trim() {
        "profile" => Ok(Command::Profile),
        "solve" => Ok(Command::Solve),
        "stability" => Ok(Command::Stability),
        other => Err(Error::Config(format!("unknown command `{other}`"))),
    }
}

impl RunConfig {
    /// Builds a config for `command`; keys missing from `map` take that command's defaults.
    pub fn from_map(command: Command, map: &BTreeMap<String, String>) -> Result<Self> {
        let get = |k: &str| map.get(k).map(String::as_str);
        let stab = command == Command::Stability;
        let num = |k: &str, d: f64| get(k).map_or(Ok(d), |v| parse_number(k, v));
        let cfg = RunConfig {
            nonlinearity: get("nonlinearity").unwrap_or("allen_cahn").to_string(),
            m: get("m").map_or(Ok(if stab { 3 } else { 2 }), |v| parse_int("m", v))?,
            r: num("R", if stab { 128.0 } else { 12.0 })?,
            h: num("h", if stab { 0.125 } else { 0.0625 })?,
            tol: num("tol", 1e-10)?,
            k_max: get("k_max").map_or(Ok(500), |v| parse_int("k_max", v))?,
            commands: match get("commands") {
                Some(v) => v.split(',').filter(|c| !c.trim().is_empty()).map(parse_command).collect::<Result<_>>()?,
                None => vec![command],
            },
            output_dir: PathBuf::from(get("output_dir").unwrap_or("out")),
            seed: get("seed").map_or(Ok(0), |v| parse_int("seed", v))?,
            tau_max: num("tau_max", 8.0)?,
            nodes: get("nodes").map_or(Ok(512), |v| parse_int("nodes", v))?,
            a_list: get("a_list").map_or(Ok(vec![4.0, 8.0, 16.0]), |v| parse_list("a_list", v))?,
            eta: EtaParams::new(num("rho1", 0.1)?, num("rho2", 10.0)?, num("alpha", 1.75)?)?,
            trials: get("trials").map_or(Ok(20), |v| parse_int("trials", v))?,
            count: get("count").map_or(Ok(3), |v| parse_int("count", v))?,
            a0: num("a0", 4.0)?,
            full_square: get("full_square").map_or(Ok(false), |v| match v.trim() {
                "true" | "1" | "yes" => Ok(true),
                "false" | "0" | "no" => Ok(false),
                o => Err(Error::Config(format!("`full_square`: expected true or false, got `{o}`"))),
            })?,
        };
        cfg.check()?;
        Ok(cfg)
    }

    pub fn check(&self) -> Result<()> {
        if self.m < 1 {
            return Err(Error::Config("m must be at least 1".into()));
        }
        if !(self.tol > 0.0) {
            return Err(Error::Config(format!("tol must be positive, got {}", self.tol)));
        }
        if self.a_list.iter().any(|&a| !(a >= 1.0)) {
            return Err(Error::Config("every entry of a_list must be >= 1".into()));
        }
        crate::grid::lattice_size(self.r, self.h)?;
        Ok(())
    }
}
