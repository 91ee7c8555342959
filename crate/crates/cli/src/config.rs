//! Flat `key = value` experiment configuration.
//!
//! Lines are `key = value`; `#` starts a comment. Arrays are comma separated,
//! and seed points are `x,y,z` triples separated by `;`.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sbpp_core::solver::SolverOptions;
use serde::Serialize;
use sbpp_core::{Products, SystemParams, TorusGrid, TorusPoint};

use crate::CliError;

/// Minimum number of grid points across the peak diameter `4ε`.
pub const MIN_POINTS_ACROSS_PEAK: f64 = 6.0;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub p: f64,
    pub a: f64,
    pub period_length: f64,
    pub n_per_axis: usize,
    pub epsilon_list: Vec<f64>,
    pub seed_points: Vec<TorusPoint>,
    pub solver: SolverOptions,
    #[serde(skip)]
    pub output_dir: PathBuf,
    pub rng_seed: u64,
    pub dealias: bool,
    pub ground_state_tol: f64,
    /// Write a JSON-lines iteration log per solve.
    pub verbose: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        let l = 2.0 * PI;
        ExperimentConfig {
            p: 5.0,
            a: 0.25,
            period_length: l,
            n_per_axis: 64,
            epsilon_list: vec![0.4, 0.3, 0.2, 0.15],
            seed_points: default_seeds(l),
            solver: SolverOptions::default(),
            output_dir: PathBuf::from("out"),
            rng_seed: 0,
            dealias: false,
            ground_state_tol: 1e-10,
            verbose: false,
        }
    }
}

/// Four centres pairwise `L/√2` apart.
pub fn default_seeds(l: f64) -> Vec<TorusPoint> {
    let h = 0.5 * l;
    vec![[0.0, 0.0, 0.0], [h, h, 0.0], [h, 0.0, h], [0.0, h, h]]
}

fn bad(key: &str, reason: impl std::fmt::Display) -> CliError {
    CliError::Config(format!("{key}: {reason}"))
}

fn parse_f64(key: &str, v: &str) -> Result<f64, CliError> {
    v.trim().parse::<f64>().map_err(|e| bad(key, format!("`{v}` is not a number ({e})")))
}

fn parse_list(key: &str, v: &str) -> Result<Vec<f64>, CliError> {
    if v.trim().is_empty() {
        return Ok(Vec::new());
    }
    v.split(',').map(|s| parse_f64(key, s)).collect()
}

fn parse_points(key: &str, v: &str) -> Result<Vec<TorusPoint>, CliError> {
    v.split(';')
        .filter(|s| !s.trim().is_empty())
        .map(|s| {
            let xs = parse_list(key, s)?;
            <[f64; 3]>::try_from(xs).map_err(|_| bad(key, format!("`{s}` is not an x,y,z triple")))
        })
        .collect()
}

fn parse_bool(key: &str, v: &str) -> Result<bool, CliError> {
    match v.trim() {
        "true" | "1" | "yes" => Ok(true),
        "false" | "0" | "no" => Ok(false),
        other => Err(bad(key, format!("`{other}` is not a boolean"))),
    }
}

/// Splits `key = value` lines into a map; later keys win.
pub fn parse_pairs(text: &str) -> Result<BTreeMap<String, String>, CliError> {
    let mut out = BTreeMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| CliError::Config(format!("line {}: expected `key = value`", lineno + 1)))?;
        out.insert(k.trim().to_string(), v.trim().to_string());
    }
    Ok(out)
}

impl ExperimentConfig {
    pub fn from_file(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        let mut cfg = ExperimentConfig::default();
        cfg.apply(&parse_pairs(&text)?)?;
        Ok(cfg)
    }

    /// Applies key/value overrides. Seed points given without an explicit
    /// list but with `seed_count` are drawn from `rng_seed`.
    pub fn apply(&mut self, pairs: &BTreeMap<String, String>) -> Result<(), CliError> {
        let mut seed_count = None;
        let mut explicit_seeds = false;
        let mut new_length = None;
        for (k, v) in pairs {
            match k.as_str() {
                "p" => self.p = parse_f64(k, v)?,
                "a" => self.a = parse_f64(k, v)?,
                "period_length" => new_length = Some(parse_f64(k, v)?),
                "n_per_axis" => {
                    self.n_per_axis = v.trim().parse().map_err(|e| bad(k, format!("{e}")))?
                }
                "epsilon_list" => self.epsilon_list = parse_list(k, v)?,
                "seed_points" => {
                    self.seed_points = parse_points(k, v)?;
                    explicit_seeds = true;
                }
                "seed_count" => seed_count = Some(v.trim().parse::<usize>().map_err(|e| bad(k, format!("{e}")))?),
                "output_dir" => self.output_dir = PathBuf::from(v.trim()),
                "rng_seed" => self.rng_seed = v.trim().parse().map_err(|e| bad(k, format!("{e}")))?,
                "dealias" => self.dealias = parse_bool(k, v)?,
                "verbose" => self.verbose = parse_bool(k, v)?,
                "ground_state_tol" => self.ground_state_tol = parse_f64(k, v)?,
                "max_iters" => self.solver.max_iters = v.trim().parse().map_err(|e| bad(k, format!("{e}")))?,
                "grad_tol" => self.solver.grad_tol = parse_f64(k, v)?,
                "step_init" => self.solver.step_init = parse_f64(k, v)?,
                "backtrack_factor" => self.solver.backtrack_factor = parse_f64(k, v)?,
                "armijo_c" => self.solver.armijo_c = parse_f64(k, v)?,
                "max_step" => self.solver.max_step = parse_f64(k, v)?,
                other => return Err(bad(other, "unknown key")),
            }
        }
        if let Some(l) = new_length {
            if !explicit_seeds && self.seed_points == default_seeds(self.period_length) {
                self.seed_points = default_seeds(l);
            }
            self.period_length = l;
        }
        if let Some(count) = seed_count {
            if !explicit_seeds {
                let mut rng = ChaCha8Rng::seed_from_u64(self.rng_seed);
                let l = self.period_length;
                self.seed_points = (0..count)
                    .map(|_| [rng.gen_range(0.0..l), rng.gen_range(0.0..l), rng.gen_range(0.0..l)])
                    .collect();
            } else if count != self.seed_points.len() {
                return Err(bad("seed_count", "disagrees with the number of seed_points"));
            }
        }
        Ok(())
    }

    pub fn grid(&self) -> Result<TorusGrid, CliError> {
        Ok(TorusGrid::new(self.n_per_axis, self.period_length)?)
    }

    pub fn params(&self, epsilon: f64) -> Result<SystemParams, CliError> {
        let products = if self.dealias { Products::Dealiased } else { Products::Pointwise };
        Ok(SystemParams::new(self.p, self.a, epsilon)?.with_products(products))
    }

    /// A single ε must be admissible, resolved and small enough for a peak.
    pub fn check_epsilon(&self, eps: f64) -> Result<(), CliError> {
        self.params(eps)?;
        let h = self.grid()?.spacing();
        if 4.0 * eps / h < MIN_POINTS_ACROSS_PEAK {
            return Err(bad(
                "epsilon",
                format!("ε = {eps} is unresolved: fewer than {MIN_POINTS_ACROSS_PEAK} points across 4ε (h = {h})"),
            ));
        }
        if eps > self.period_length / 8.0 {
            return Err(bad("epsilon", format!("ε = {eps} exceeds L/8, the peak does not fit")));
        }
        Ok(())
    }

    /// Checks every invariant a sweep relies on.
    pub fn validate(&self) -> Result<(), CliError> {
        self.grid()?;
        if self.epsilon_list.is_empty() {
            return Err(bad("epsilon_list", "must not be empty"));
        }
        if self.epsilon_list.windows(2).any(|w| w[1] >= w[0]) {
            return Err(bad("epsilon_list", "must be strictly decreasing"));
        }
        for &eps in &self.epsilon_list {
            self.check_epsilon(eps)?;
        }
        if self.seed_points.is_empty() {
            return Err(bad("seed_points", "must not be empty"));
        }
        if self.seed_points.iter().flatten().any(|c| !c.is_finite()) {
            return Err(bad("seed_points", "coordinates must be finite"));
        }
        self.solver.validate()?;
        if !(self.ground_state_tol > 0.0) {
            return Err(bad("ground_state_tol", "must be positive"));
        }
        Ok(())
    }
}
