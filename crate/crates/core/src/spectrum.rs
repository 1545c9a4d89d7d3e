//! Exact spectrum, eigenfunctions, expansion and functional calculus.

use std::f64::consts::PI;
use std::io::Write;
use std::path::Path;

use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{ConeConfig, ConePoint};
use crate::quad::gauss_laguerre_cached;
use crate::specfun::{binomial, laguerre_function_table, ln_gamma, p_poly};
use crate::sum::{pairwise_sum, pairwise_sum_c};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ModeIndex {
    pub k: i64,
    pub m: u32,
}

impl ModeIndex {
    pub fn new(k: i64, m: u32) -> Self {
        Self { k, m }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ModeData {
    pub alpha_k: f64,
    pub beta_k: f64,
    pub lambda: f64,
    /// Squared L² norm of the unnormalised eigenfunction.
    pub norm_sq: f64,
}

/// Eigen-data of the mode (k, m).
pub fn mode_data(idx: ModeIndex, cfg: &ConeConfig) -> ModeData {
    let s = cfg.shifted(idx.k);
    // α_k + (k/σ + α) is 0 or 2(k/σ + α) exactly, decided by sign
    let (alpha_k, sum) = if s < 0.0 { (-s, 0.0) } else { (s, 2.0 * s) };
    let beta_k = (1.0 + sum) * cfg.b0;
    let lambda = (2.0 * idx.m as f64 + 1.0 + sum) * cfg.b0;
    let ln_norm = alpha_k * 2f64.ln() + ln_gamma(1.0 + alpha_k) - (alpha_k + 1.0) * cfg.b0.ln();
    let norm_sq = ln_norm.exp() / binomial(idx.m, alpha_k);
    ModeData { alpha_k, beta_k, lambda, norm_sq }
}

/// Eigenfunction V_{k,m}(r, θ); `normalized` divides by its L² norm.
pub fn eigenfunction(idx: ModeIndex, p: &ConePoint, cfg: &ConeConfig, normalized: bool) -> Complex64 {
    let phase = Complex64::from_polar(1.0, idx.k as f64 * p.theta() / cfg.sigma);
    if normalized {
        let t = radial_table(idx.k, idx.m, p.r(), cfg);
        return phase * t[idx.m as usize];
    }
    let s = cfg.shifted(idx.k);
    let a = s.abs();
    let r = p.r();
    let u = 0.5 * cfg.b0 * r * r;
    let radial = if r == 0.0 {
        0.0
    } else {
        (a * r.ln() - 0.5 * u).exp() * p_poly(s, idx.m, u)
    };
    phase * radial / (2.0 * PI * cfg.sigma).sqrt()
}

/// Normalised radial factors sqrt(B0/(2σπ)) ℓ_m^{α_k}(B0 r²/2), m = 0..=m_max.
pub fn radial_table(k: i64, m_max: u32, r: f64, cfg: &ConeConfig) -> Vec<f64> {
    let u = 0.5 * cfg.b0 * r * r;
    let c = (cfg.b0 / (2.0 * PI * cfg.sigma)).sqrt();
    let mut t = laguerre_function_table(cfg.alpha_k(k), m_max, u);
    t.iter_mut().for_each(|v| *v *= c);
    t
}

/// Rectangular mode window k_min ≤ k ≤ k_max, 0 ≤ m ≤ m_max.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Window {
    pub k_min: i64,
    pub k_max: i64,
    pub m_max: u32,
}

impl Window {
    /// |k| ≤ k, m ≤ m.
    pub fn symmetric(k: i64, m: u32) -> Self {
        Self { k_min: -k, k_max: k, m_max: m }
    }

    pub fn default_window() -> Self {
        Self::symmetric(24, 24)
    }

    pub fn k_range(&self) -> std::ops::RangeInclusive<i64> {
        self.k_min..=self.k_max
    }

    pub fn m_count(&self) -> usize {
        self.m_max as usize + 1
    }

    pub fn len(&self) -> usize {
        if self.k_max < self.k_min {
            return 0;
        }
        (self.k_max - self.k_min + 1) as usize * self.m_count()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn index_of(&self, idx: ModeIndex) -> Option<usize> {
        if idx.k < self.k_min || idx.k > self.k_max || idx.m > self.m_max {
            return None;
        }
        Some((idx.k - self.k_min) as usize * self.m_count() + idx.m as usize)
    }

    pub fn modes(&self) -> impl Iterator<Item = ModeIndex> + '_ {
        self.k_range().flat_map(move |k| (0..=self.m_max).map(move |m| ModeIndex::new(k, m)))
    }

    pub fn max_abs_k(&self) -> i64 {
        self.k_min.abs().max(self.k_max.abs())
    }
}

/// Reference quadrature: Gauss-Laguerre in u = B0 r²/2 times a trapezoid rule in θ.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuadratureSpec {
    pub n_rad: usize,
    pub n_ang: usize,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self { n_rad: 80, n_ang: 128 }
    }
}

/// A function on the cone stored as coefficients against the normalised eigenfunctions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralField {
    cfg: ConeConfig,
    window: Window,
    quad: QuadratureSpec,
    coeffs: Vec<Complex64>,
}

impl SpectralField {
    pub fn new(cfg: ConeConfig, window: Window, quad: QuadratureSpec, coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() != window.len() {
            return Err(Error::Config(format!(
                "coefficient count {} does not match window size {}",
                coeffs.len(),
                window.len()
            )));
        }
        Ok(Self { cfg, window, quad, coeffs })
    }

    pub fn zeros(cfg: ConeConfig, window: Window) -> Self {
        Self { cfg, window, quad: QuadratureSpec::default(), coeffs: vec![Complex64::new(0.0, 0.0); window.len()] }
    }

    /// A single normalised mode with coefficient c.
    pub fn single(cfg: ConeConfig, window: Window, idx: ModeIndex, c: Complex64) -> Result<Self> {
        let mut f = Self::zeros(cfg, window);
        let i = window
            .index_of(idx)
            .ok_or_else(|| Error::WindowTooSmall(format!("mode ({}, {}) outside window", idx.k, idx.m)))?;
        f.coeffs[i] = c;
        Ok(f)
    }

    /// Coefficients drawn uniformly on the unit disc, then scaled to unit L² norm.
    pub fn random<R: Rng>(cfg: ConeConfig, window: Window, rng: &mut R) -> Self {
        let mut coeffs: Vec<Complex64> = (0..window.len())
            .map(|_| {
                let r = rng.gen::<f64>().sqrt();
                let t = rng.gen::<f64>() * 2.0 * PI;
                Complex64::from_polar(r, t)
            })
            .collect();
        let n = pairwise_sum(&coeffs.iter().map(|c| c.norm_sqr()).collect::<Vec<_>>()).sqrt();
        coeffs.iter_mut().for_each(|c| *c /= n);
        Self { cfg, window, quad: QuadratureSpec::default(), coeffs }
    }

    /// Replaces the reference quadrature used by grid norms and expansion.
    pub fn with_quadrature(mut self, quad: QuadratureSpec) -> Self {
        self.quad = quad;
        self
    }

    pub fn cfg(&self) -> &ConeConfig {
        &self.cfg
    }

    pub fn window(&self) -> &Window {
        &self.window
    }

    pub fn quadrature(&self) -> &QuadratureSpec {
        &self.quad
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn get(&self, idx: ModeIndex) -> Option<Complex64> {
        self.window.index_of(idx).map(|i| self.coeffs[i])
    }

    pub fn iter(&self) -> impl Iterator<Item = (ModeIndex, Complex64)> + '_ {
        self.window.modes().zip(self.coeffs.iter().copied())
    }

    /// ℓ² norm of the coefficients, equal to the L² norm of the field.
    pub fn l2_norm(&self) -> f64 {
        pairwise_sum(&self.coeffs.iter().map(|c| c.norm_sqr()).collect::<Vec<_>>()).sqrt()
    }

    /// Writes the CSV table (k, m, re_c, im_c).
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        wr.write_record(["k", "m", "re_c", "im_c"])?;
        for (idx, c) in self.iter() {
            wr.write_record(&[idx.k.to_string(), idx.m.to_string(), fmt_f64(c.re), fmt_f64(c.im)])?;
        }
        wr.flush()?;
        Ok(())
    }

    pub fn header_json(&self) -> serde_json::Value {
        serde_json::json!({ "window": self.window, "cfg": self.cfg, "quadrature": self.quad })
    }

    /// Writes `<stem>.csv` and `<stem>.json`.
    pub fn save(&self, dir: &Path, stem: &str) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        let f = std::fs::File::create(dir.join(format!("{stem}.csv")))?;
        self.write_csv(std::io::BufWriter::new(f))?;
        let h = serde_json::to_string_pretty(&self.header_json())?;
        std::fs::write(dir.join(format!("{stem}.json")), h + "\n")?;
        Ok(())
    }

    /// Reads a field written by [`SpectralField::save`].
    pub fn load(dir: &Path, stem: &str) -> Result<Self> {
        #[derive(Deserialize)]
        struct Header {
            window: Window,
            cfg: ConeConfig,
            quadrature: QuadratureSpec,
        }
        let h: Header = serde_json::from_str(&std::fs::read_to_string(dir.join(format!("{stem}.json")))?)?;
        let mut rd = csv::Reader::from_path(dir.join(format!("{stem}.csv")))?;
        let mut coeffs = vec![Complex64::new(0.0, 0.0); h.window.len()];
        for rec in rd.records() {
            let rec = rec?;
            let parse = |i: usize| -> Result<f64> {
                rec.get(i)
                    .and_then(|s| s.trim().parse::<f64>().ok())
                    .ok_or_else(|| Error::Config(format!("malformed field row: {:?}", rec)))
            };
            let k = parse(0)? as i64;
            let m = parse(1)? as u32;
            let i = h
                .window
                .index_of(ModeIndex::new(k, m))
                .ok_or_else(|| Error::Config(format!("mode ({k}, {m}) outside the stored window")))?;
            coeffs[i] = Complex64::new(parse(2)?, parse(3)?);
        }
        Self::new(h.cfg, h.window, h.quadrature, coeffs)
    }
}

/// Shortest representation that round-trips exactly.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:e}")
}

/// The sample points (r, θ) at which [`expand`] evaluates f for angular mode k.
pub fn sample_points(k: i64, cfg: &ConeConfig, quad: &QuadratureSpec) -> Vec<(f64, f64)> {
    let rule = gauss_laguerre_cached(quad.n_rad, cfg.alpha_k(k));
    let mut pts = Vec::with_capacity(quad.n_rad * quad.n_ang);
    for &u in &rule.nodes {
        let r = (2.0 * u / cfg.b0).sqrt();
        for j in 0..quad.n_ang {
            pts.push((r, cfg.period() * j as f64 / quad.n_ang as f64));
        }
    }
    pts
}

/// Coefficients c_{k,m} = ∫ f conj(Ṽ_{k,m}) by the reference quadrature.
pub fn expand<F>(f: F, window: Window, cfg: &ConeConfig, quad: QuadratureSpec) -> Result<SpectralField>
where
    F: Fn(&ConePoint) -> Complex64 + Sync,
{
    if 2 * window.max_abs_k() as usize >= quad.n_ang {
        return Err(Error::Quadrature(format!(
            "|k| up to {} needs more than {} angular samples",
            window.max_abs_k(),
            quad.n_ang
        )));
    }
    let ks: Vec<i64> = window.k_range().collect();
    let blocks: Vec<Result<Vec<Complex64>>> = ks
        .par_iter()
        .map(|&k| {
            let samples = sample_points(k, cfg, &quad);
            let values: Vec<Complex64> = samples
                .iter()
                .map(|&(r, t)| ConePoint::new(r, t, cfg).map(|p| f(&p)))
                .collect::<Result<_>>()?;
            Ok(project_k(k, &values, window.m_max, cfg, &quad))
        })
        .collect();
    let mut coeffs = Vec::with_capacity(window.len());
    for b in blocks {
        coeffs.extend(b?);
    }
    SpectralField::new(*cfg, window, quad, coeffs)
}

/// Projects samples taken at [`sample_points`]`(k, ..)` onto the modes (k, 0..=m_max).
pub fn project_k(k: i64, values: &[Complex64], m_max: u32, cfg: &ConeConfig, quad: &QuadratureSpec) -> Vec<Complex64> {
    let rule = gauss_laguerre_cached(quad.n_rad, cfg.alpha_k(k));
    let n_ang = quad.n_ang;
    let phases: Vec<Complex64> = (0..n_ang)
        .map(|j| Complex64::from_polar(1.0, -2.0 * PI * (k as f64) * j as f64 / n_ang as f64))
        .collect();
    let mut terms: Vec<Vec<Complex64>> = vec![Vec::with_capacity(rule.nodes.len()); m_max as usize + 1];
    for (i, &u) in rule.nodes.iter().enumerate() {
        let row = &values[i * n_ang..(i + 1) * n_ang];
        let proj: Vec<Complex64> = row.iter().zip(&phases).map(|(v, p)| v * p).collect();
        let fk = pairwise_sum_c(&proj) / n_ang as f64;
        let ell = laguerre_function_table(rule.alpha, m_max, u);
        for (m, l) in ell.iter().enumerate() {
            terms[m].push(fk * (rule.scaled_weights[i] * l));
        }
    }
    // 2σπ/B0 from the measure, times the sqrt(B0/(2σπ)) of Ṽ
    let scale = (2.0 * PI * cfg.sigma / cfg.b0).sqrt();
    terms.iter().map(|t| pairwise_sum_c(t) * scale).collect()
}

/// Σ c_{k,m} Ṽ_{k,m}(p) over the window.
pub fn synthesize(field: &SpectralField, p: &ConePoint) -> Complex64 {
    let cfg = field.cfg;
    let w = field.window;
    if w.is_empty() {
        return Complex64::new(0.0, 0.0);
    }
    let mut terms = Vec::with_capacity(w.len());
    for k in w.k_range() {
        let t = radial_table(k, w.m_max, p.r(), &cfg);
        let phase = Complex64::from_polar(1.0, k as f64 * p.theta() / cfg.sigma);
        for (m, g) in t.iter().enumerate() {
            let c = field.coeffs[w.index_of(ModeIndex::new(k, m as u32)).unwrap()];
            terms.push(c * phase * *g);
        }
    }
    pairwise_sum_c(&terms)
}

/// Multiplies each coefficient by F(λ_{k,m}).
pub fn spectral_apply<F: Fn(f64) -> Complex64>(f: F, field: &SpectralField) -> SpectralField {
    let coeffs = field
        .iter()
        .map(|(idx, c)| c * f(mode_data(idx, &field.cfg).lambda))
        .collect();
    SpectralField { cfg: field.cfg, window: field.window, quad: field.quad, coeffs }
}

/// (k, m, λ, ‖V‖²) over the window.
pub fn mode_table(window: &Window, cfg: &ConeConfig) -> Vec<(ModeIndex, ModeData)> {
    window.modes().map(|i| (i, mode_data(i, cfg))).collect()
}
