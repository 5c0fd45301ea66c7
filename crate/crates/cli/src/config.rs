//! Flat `key = value` run configuration.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use fisher_stab::pde_sim::InitialCondition;

pub const OUT_DIR_ENV: &str = "FISHER_STAB_OUT";

#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub alpha: f64,
    pub beta: f64,
    pub rho: f64,
    /// `None` means `γ_k = ρ + 5k` for the detected `N`.
    pub gammas: Option<Vec<f64>>,
    pub grid_m: usize,
    pub dt: f64,
    /// `None` means the command's own default horizon.
    pub t_end: Option<f64>,
    pub u0: String,
    pub window_a: f64,
    pub window_b: f64,
    pub snapshot_every: usize,
    pub out_dir: PathBuf,
    /// Directory the config file lives in, for resolving a relative `u0` path.
    pub base_dir: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            alpha: 30.0,
            beta: 0.3,
            rho: 10.0,
            gammas: None,
            grid_m: 200,
            dt: 1e-4,
            t_end: None,
            u0: "5xexp".into(),
            window_a: 0.0,
            window_b: 1.0,
            snapshot_every: 0,
            out_dir: PathBuf::from("out"),
            base_dir: PathBuf::from("."),
        }
    }
}

fn parse_real(key: &str, raw: &str) -> Result<f64, ConfigError> {
    let v: f64 = raw
        .parse()
        .map_err(|_| ConfigError(format!("{key}: cannot parse {raw:?} as a number")))?;
    if !v.is_finite() {
        return Err(ConfigError(format!("{key}: value must be finite, got {raw}")));
    }
    Ok(v)
}

fn parse_count(key: &str, raw: &str) -> Result<usize, ConfigError> {
    raw.parse()
        .map_err(|_| ConfigError(format!("{key}: expected a non-negative integer, got {raw:?}")))
}

fn parse_list(key: &str, raw: &str) -> Result<Vec<f64>, ConfigError> {
    let inner = raw.trim().trim_start_matches('[').trim_end_matches(']');
    let items: Vec<f64> = inner
        .split(|c: char| c == ',' || c.is_whitespace())
        .filter(|s| !s.is_empty())
        .map(|s| parse_real(key, s))
        .collect::<Result<_, _>>()?;
    if items.is_empty() {
        return Err(ConfigError(format!("{key}: empty list")));
    }
    Ok(items)
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut cfg = Self::default();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| ConfigError(format!("line {}: expected `key = value`", lineno + 1)))?;
            let (key, value) = (key.trim(), value.trim());
            if value.is_empty() {
                return Err(ConfigError(format!("line {}: missing value for {key}", lineno + 1)));
            }
            match key {
                "alpha" => cfg.alpha = parse_real(key, value)?,
                "beta" => cfg.beta = parse_real(key, value)?,
                "rho" => cfg.rho = parse_real(key, value)?,
                "gammas" => cfg.gammas = Some(parse_list(key, value)?),
                "grid_m" => cfg.grid_m = parse_count(key, value)?,
                "dt" => cfg.dt = parse_real(key, value)?,
                "t_end" => cfg.t_end = Some(parse_real(key, value)?),
                "u0" => cfg.u0 = value.to_string(),
                "window_a" => cfg.window_a = parse_real(key, value)?,
                "window_b" => cfg.window_b = parse_real(key, value)?,
                "snapshot_every" => cfg.snapshot_every = parse_count(key, value)?,
                "out_dir" => cfg.out_dir = PathBuf::from(value),
                other => return Err(ConfigError(format!("line {}: unknown key {other:?}", lineno + 1))),
            }
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = fs::read_to_string(path)
            .map_err(|e| ConfigError(format!("cannot read {}: {e}", path.display())))?;
        let mut cfg = Self::parse(&text)?;
        if let Some(dir) = path.parent() {
            cfg.base_dir = dir.to_path_buf();
        }
        Ok(cfg)
    }

    /// Output directory after applying the environment override.
    pub fn resolved_out_dir(&self) -> PathBuf {
        match std::env::var_os(OUT_DIR_ENV) {
            Some(dir) if !dir.is_empty() => PathBuf::from(dir),
            _ => self.out_dir.clone(),
        }
    }

    pub fn horizon_or(&self, default: f64) -> f64 {
        self.t_end.unwrap_or(default)
    }

    /// Preset name, or a file with one nodal value per grid node separated by
    /// whitespace or commas.
    pub fn initial_condition(&self) -> Result<InitialCondition, ConfigError> {
        if let Some(ic) = InitialCondition::preset(&self.u0) {
            return Ok(ic);
        }
        let path = {
            let p = PathBuf::from(&self.u0);
            if p.is_relative() && !p.exists() {
                self.base_dir.join(p)
            } else {
                p
            }
        };
        let text = fs::read_to_string(&path).map_err(|e| {
            ConfigError(format!("u0: {:?} is neither a preset nor a readable sample file ({e})", self.u0))
        })?;
        let values: Vec<f64> = text
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|s| !s.is_empty())
            .map(|s| s.parse::<f64>().map_err(|_| ConfigError(format!("u0: bad sample {s:?}"))))
            .collect::<Result<_, _>>()?;
        if values.len() != self.grid_m + 1 {
            return Err(ConfigError(format!(
                "u0: sample file has {} values, grid_m = {} needs {}",
                values.len(),
                self.grid_m,
                self.grid_m + 1
            )));
        }
        Ok(InitialCondition::Samples(values))
    }
}
