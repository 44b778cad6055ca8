//! Flat `key = value` experiment files.
//!
//! ```text
//! # comment
//! scheme = uncoded, scheme_b_analytic
//! rho = 0.9
//! c = 2
//! csnr_db = 0, 10, 20
//! ```

use std::collections::HashSet;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::optimizer::SearchSpace;
use crate::sim::Scheme;

pub const DEFAULT_TRIALS: u64 = 1_000_000;
pub const DEFAULT_TRIALS_SCHEME_A: u64 = 100_000;
pub const DEFAULT_ORDER: usize = 8;

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub schemes: Vec<Scheme>,
    pub rho: Vec<f64>,
    /// Symmetric interference gains.
    pub c: Vec<f64>,
    pub power: f64,
    pub csnr_db: Vec<f64>,
    /// Overrides the per-scheme default sample count.
    pub trials: Option<u64>,
    pub seed: u64,
    pub quadrature_order: usize,
    pub output: Option<PathBuf>,
    pub search: SearchSpace,
}

impl ExperimentConfig {
    /// Monte Carlo sample count for `scheme`.
    pub fn trials_for(&self, scheme: Scheme) -> u64 {
        self.trials.unwrap_or(match scheme {
            Scheme::SchemeA => DEFAULT_TRIALS_SCHEME_A,
            _ => DEFAULT_TRIALS,
        })
    }
}

fn err(line: usize, msg: impl Into<String>) -> Error {
    Error::Config { line, msg: msg.into() }
}

fn parse_list<T>(line: usize, key: &str, value: &str, f: impl Fn(&str) -> Option<T>) -> Result<Vec<T>> {
    let out: Vec<T> = value
        .split(',')
        .map(|v| f(v.trim()).ok_or_else(|| err(line, format!("bad value '{}' for {key}", v.trim()))))
        .collect::<Result<_>>()?;
    if out.is_empty() {
        return Err(err(line, format!("{key} needs at least one value")));
    }
    Ok(out)
}

fn parse_one<T: std::str::FromStr>(line: usize, key: &str, value: &str) -> Result<T> {
    value.parse().map_err(|_| err(line, format!("bad value '{value}' for {key}")))
}

fn finite(v: &str) -> Option<f64> {
    v.parse::<f64>().ok().filter(|x| x.is_finite())
}

pub fn parse_config(text: &str) -> Result<ExperimentConfig> {
    let mut schemes = None;
    let mut rho = None;
    let mut c = None;
    let mut csnr = None;
    let mut power = 1.0;
    let mut trials = None;
    let mut seed = 1u64;
    let mut order = DEFAULT_ORDER;
    let mut output = None;
    let (mut d_min, mut d_max, mut d_pts) = (0.3, 3.0, 28usize);
    let (mut g_max, mut g_pts) = (None, 31usize);
    let mut refinement = 2usize;
    let mut seen = HashSet::new();

    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let (key, value) = content
            .split_once('=')
            .ok_or_else(|| err(line, format!("expected 'key = value', got '{content}'")))?;
        let (key, value) = (key.trim(), value.trim());
        if value.is_empty() {
            return Err(err(line, format!("missing value for {key}")));
        }
        if !seen.insert(key.to_string()) {
            return Err(err(line, format!("duplicate key {key}")));
        }
        match key {
            "scheme" => schemes = Some(parse_list(line, key, value, |v| v.parse::<Scheme>().ok())?),
            "rho" => rho = Some(parse_list(line, key, value, finite)?),
            "c" => c = Some(parse_list(line, key, value, finite)?),
            "csnr_db" => csnr = Some(parse_list(line, key, value, finite)?),
            "power" => power = parse_one(line, key, value)?,
            "trials" => trials = Some(parse_one(line, key, value)?),
            "seed" => seed = parse_one(line, key, value)?,
            "quadrature_order" => order = parse_one(line, key, value)?,
            "output" => output = Some(PathBuf::from(value)),
            "delta_min" => d_min = parse_one(line, key, value)?,
            "delta_max" => d_max = parse_one(line, key, value)?,
            "delta_points" => d_pts = parse_one(line, key, value)?,
            "digital_gain_max" => g_max = Some(parse_one::<f64>(line, key, value)?),
            "digital_gain_points" => g_pts = parse_one(line, key, value)?,
            "refinement" => refinement = parse_one(line, key, value)?,
            _ => return Err(err(line, format!("unknown key {key}"))),
        }
        match key {
            "rho" if rho.as_ref().is_some_and(|r: &Vec<f64>| r.iter().any(|x| x.abs() >= 1.0)) => {
                return Err(err(line, "rho must satisfy |rho| < 1"));
            }
            "c" if c.as_ref().is_some_and(|v: &Vec<f64>| v.iter().any(|x| *x < 0.0)) => {
                return Err(err(line, "c must be nonnegative"));
            }
            "power" if !(power > 0.0 && f64::is_finite(power)) => return Err(err(line, "power must be positive")),
            "trials" if trials == Some(0) => return Err(err(line, "trials must be >= 1")),
            "quadrature_order" if !(1..=512).contains(&order) => {
                return Err(err(line, "quadrature_order must be in 1..=512"));
            }
            _ => {}
        }
    }
    let missing = |k: &str| err(0, format!("missing required key {k}"));
    let mut search = SearchSpace::default_for(power);
    if !(d_min > 0.0 && d_max >= d_min && d_pts >= 1 && g_pts >= 1) {
        return Err(err(0, "invalid optimizer grid"));
    }
    search.delta_grid = log_spaced(d_min, d_max, d_pts);
    let g_max = g_max.unwrap_or(3.0 * power.sqrt());
    search.digital_gain_grid = (0..g_pts)
        .map(|j| if g_pts == 1 { 0.0 } else { g_max * j as f64 / (g_pts - 1) as f64 })
        .collect();
    search.refinement = refinement;
    search.validate().map_err(|e| err(0, e.to_string()))?;
    Ok(ExperimentConfig {
        schemes: schemes.ok_or_else(|| missing("scheme"))?,
        rho: rho.ok_or_else(|| missing("rho"))?,
        c: c.ok_or_else(|| missing("c"))?,
        power,
        csnr_db: csnr.ok_or_else(|| missing("csnr_db"))?,
        trials,
        seed,
        quadrature_order: order,
        output,
        search,
    })
}

fn log_spaced(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    (0..n).map(|i| (lo.ln() + (hi / lo).ln() * i as f64 / (n - 1) as f64).exp()).collect()
}

pub fn load_config(path: &Path) -> Result<ExperimentConfig> {
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io { path: path.to_path_buf(), source })?;
    parse_config(&text)
}
