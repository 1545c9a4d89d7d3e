//! Run configuration: a flat `key = value` text file.
//!
//! ```text
//! # comments start with '#'
//! cone = 1.0, 0.25, 1.0     # sigma, alpha, B0; repeat the key for several cones
//! k_max = 40
//! window_k = 8
//! grid = quick
//! ```

use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::ConeConfig;
use crate::kernels::TruncationSpec;
use crate::spectrum::{QuadratureSpec, Window};
use crate::verify::{ReducedGrid, SweepGrid};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum GridPreset {
    Quick,
    Standard,
}

impl GridPreset {
    pub fn sweep(self) -> SweepGrid {
        match self {
            GridPreset::Quick => SweepGrid::quick(),
            GridPreset::Standard => SweepGrid::standard(),
        }
    }

    pub fn reduced(self) -> ReducedGrid {
        match self {
            GridPreset::Quick => ReducedGrid::quick(),
            GridPreset::Standard => ReducedGrid::standard(),
        }
    }

    /// θ samples of the A-integrand L¹ sweep.
    pub fn a_theta(self) -> usize {
        match self {
            GridPreset::Quick => 64,
            GridPreset::Standard => 128,
        }
    }

    /// Random trials of the energy check.
    pub fn trials(self) -> usize {
        match self {
            GridPreset::Quick => 20,
            GridPreset::Standard => 50,
        }
    }
}

impl std::str::FromStr for GridPreset {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "quick" => Ok(GridPreset::Quick),
            "standard" => Ok(GridPreset::Standard),
            _ => Err(Error::Config(format!("unknown grid preset '{s}' (expected quick or standard)"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub cones: Vec<ConeConfig>,
    pub trunc: TruncationSpec,
    pub window: Window,
    pub quad: QuadratureSpec,
    pub grid: GridPreset,
    /// Dyadic shells used by the half-wave sweep.
    pub halfwave_j: Vec<i32>,
    pub output_dir: PathBuf,
    pub seed: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            cones: ConeConfig::reference().to_vec(),
            trunc: TruncationSpec::default(),
            window: Window::default_window(),
            quad: QuadratureSpec::default(),
            grid: GridPreset::Standard,
            halfwave_j: vec![2],
            output_dir: PathBuf::from("out"),
            seed: 20240917,
        }
    }
}

fn parse_num<T: std::str::FromStr>(key: &str, v: &str, line: usize) -> Result<T> {
    v.trim()
        .parse()
        .map_err(|_| Error::Config(format!("line {line}: cannot parse '{v}' as a value for {key}")))
}

fn parse_list<T: std::str::FromStr>(key: &str, v: &str, line: usize) -> Result<Vec<T>> {
    v.split(',').map(|s| parse_num(key, s, line)).collect()
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = RunConfig::default();
        let mut cones = Vec::new();
        let (mut k_max, mut nodes, mut s_max) = (cfg.trunc.k_max, cfg.trunc.quad_nodes, cfg.trunc.s_max);
        let (mut wk, mut wm) = (cfg.window.k_max, cfg.window.m_max);
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let body = raw.split('#').next().unwrap().trim();
            if body.is_empty() {
                continue;
            }
            let (key, value) = body
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {line}: expected 'key = value'")))?;
            let (key, value) = (key.trim(), value.trim());
            match key {
                "cone" => {
                    let v: Vec<f64> = parse_list(key, value, line)?;
                    if v.len() != 3 {
                        return Err(Error::Config(format!("line {line}: cone needs sigma, alpha, B0")));
                    }
                    cones.push(ConeConfig::new(v[0], v[2], v[1]).map_err(|e| Error::Config(format!("line {line}: {e}")))?);
                }
                "k_max" => k_max = parse_num(key, value, line)?,
                "quad_nodes" => nodes = parse_num(key, value, line)?,
                "s_max" => s_max = parse_num(key, value, line)?,
                "window_k" => wk = parse_num(key, value, line)?,
                "window_m" => wm = parse_num(key, value, line)?,
                "n_rad" => cfg.quad.n_rad = parse_num(key, value, line)?,
                "n_ang" => cfg.quad.n_ang = parse_num(key, value, line)?,
                "grid" => cfg.grid = value.parse()?,
                "halfwave_j" => cfg.halfwave_j = parse_list(key, value, line)?,
                "seed" => cfg.seed = parse_num(key, value, line)?,
                "out" => cfg.output_dir = PathBuf::from(value),
                _ => return Err(Error::Config(format!("line {line}: unknown key '{key}'"))),
            }
        }
        if !cones.is_empty() {
            cfg.cones = cones;
        }
        cfg.trunc = TruncationSpec::new(k_max, nodes, s_max)?;
        if wk < 0 {
            return Err(Error::Config(format!("window_k must be non-negative, got {wk}")));
        }
        cfg.window = Window::symmetric(wk, wm);
        if cfg.quad.n_rad < 2 || cfg.quad.n_ang < 2 {
            return Err(Error::Config("n_rad and n_ang must be at least 2".into()));
        }
        if cfg.halfwave_j.is_empty() || cfg.halfwave_j.iter().any(|&j| !(1..=6).contains(&j)) {
            return Err(Error::Config("halfwave_j entries must lie in 1..=6".into()));
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }
}
