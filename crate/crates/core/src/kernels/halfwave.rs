use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{ConeConfig, ConePoint};
use crate::lpbesov::dyadic_phi;
use crate::specfun::laguerre_function_table;
use crate::spectrum::{mode_data, radial_table, ModeIndex, Window};
use crate::sum::pairwise_sum_c;

/// Modes with λ below this are negligible beyond the window edge.
const EDGE_TOL: f64 = 1e-10;

/// Upper end 4^{j+1} of the eigenvalues seen by φ(2^{−j}√λ).
fn shell_top(j: i32) -> f64 {
    4f64.powi(j + 1)
}

/// Largest m with λ = B0(2m + 1) < 4^{j+1}, the widest m-range over all k.
fn shell_m_max(j: i32, cfg: &ConeConfig) -> u32 {
    ((shell_top(j) / cfg.b0 - 1.0) / 2.0).ceil().max(1.0) as u32 - 1
}

/// Largest |ℓ_m^{α_k}(u)| over in-shell m and u ∈ [0, B0 R²/2].
fn edge_magnitude(k: i64, j: i32, cfg: &ConeConfig, radii: &[f64]) -> f64 {
    let m_top = shell_m_max(j, cfg);
    let mut worst: f64 = 0.0;
    for &r in radii {
        let u = 0.5 * cfg.b0 * r * r;
        let t = laguerre_function_table(cfg.alpha_k(k), m_top, u);
        for (m, v) in t.iter().enumerate() {
            if mode_data(ModeIndex::new(k, m as u32), cfg).lambda < shell_top(j) {
                worst = worst.max(v.abs());
            }
        }
    }
    worst
}

/// A mode window sized for the half-wave kernel of shell j at radii ≤ r_bound.
///
/// The lowest Landau levels are infinitely degenerate in k, so the negative-k
/// side is cut where the in-shell radial functions drop below 1e−10 on [0, r_bound].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HalfwaveWindow {
    pub window: Window,
    pub r_bound: f64,
}

impl HalfwaveWindow {
    pub fn for_shell(j: i32, cfg: &ConeConfig, r_bound: f64) -> Result<Self> {
        if !(r_bound > 0.0 && r_bound.is_finite()) {
            return Err(Error::Domain(format!("radius bound must be positive, got {r_bound}")));
        }
        let top = shell_top(j);
        // λ_{k,0} = B0(1 + 2(k/σ + α)) for k/σ + α > 0
        let k_max = ((cfg.sigma * ((top / cfg.b0 - 1.0) / 2.0 - cfg.alpha)).ceil() as i64 - 1).max(0);
        let radii: Vec<f64> = (1..=48).map(|i| r_bound * i as f64 / 48.0).collect();
        let mut k = -1i64;
        let mut quiet = 0;
        while quiet < 3 {
            if edge_magnitude(k, j, cfg, &radii) < EDGE_TOL {
                quiet += 1;
            } else {
                quiet = 0;
            }
            k -= 1;
            if k < -1_000_000 {
                return Err(Error::WindowTooSmall("negative-k edge not reached".into()));
            }
        }
        let window = Window { k_min: k + 3, k_max, m_max: shell_m_max(j, cfg) };
        Ok(Self { window, r_bound })
    }
}

/// Checks that every eigenvalue of the shell 2^{j−1} ≤ √λ ≤ 2^{j+1} that is
/// visible at radii r1, r2 lies in the window.
pub fn check_shell_coverage(j: i32, window: &Window, cfg: &ConeConfig, r1: f64, r2: f64) -> Result<()> {
    let top = shell_top(j);
    let next = mode_data(ModeIndex::new(window.k_max + 1, 0), cfg).lambda;
    if next < top {
        return Err(Error::WindowTooSmall(format!("k = {} has λ = {next} inside shell {j}", window.k_max + 1)));
    }
    for k in window.k_range() {
        let lam = mode_data(ModeIndex::new(k, window.m_max + 1), cfg).lambda;
        if lam < top {
            return Err(Error::WindowTooSmall(format!("m = {} at k = {k} has λ = {lam} inside shell {j}", window.m_max + 1)));
        }
    }
    let radii = [r1.max(r2), r1.min(r2)];
    for d in 1..=3 {
        let k = window.k_min - d;
        if cfg.shifted(k) < 0.0 && edge_magnitude(k, j, cfg, &radii) >= EDGE_TOL {
            return Err(Error::WindowTooSmall(format!("k = {k} contributes to shell {j} at r = {}", radii[0])));
        }
        if cfg.shifted(k) >= 0.0 {
            let lam = mode_data(ModeIndex::new(k, 0), cfg).lambda;
            if lam < top {
                return Err(Error::WindowTooSmall(format!("k = {k} has λ = {lam} inside shell {j}")));
            }
        }
    }
    Ok(())
}

/// Radial coefficients A_k = Σ_m φ(2^{−j}√λ) e^{it√λ} R_{k,m}(r1) R_{k,m}(r2) for the
/// window's k in ascending order; the kernel is Σ_k A_k e^{ik(θ1−θ2)/σ}.
pub fn halfwave_angular_coeffs(j: i32, t: f64, r1: f64, r2: f64, cfg: &ConeConfig, window: &Window) -> Vec<Complex64> {
    let scale = 2f64.powi(-j);
    window
        .k_range()
        .map(|k| {
            let a = radial_table(k, window.m_max, r1, cfg);
            let b = radial_table(k, window.m_max, r2, cfg);
            let terms: Vec<Complex64> = (0..=window.m_max)
                .filter_map(|m| {
                    let lam = mode_data(ModeIndex::new(k, m), cfg).lambda;
                    let w = dyadic_phi(scale * lam.sqrt());
                    (w > 0.0).then(|| Complex64::from_polar(w * a[m as usize] * b[m as usize], t * lam.sqrt()))
                })
                .collect();
            pairwise_sum_c(&terms)
        })
        .collect()
}

/// Σ_k A_k e^{ikδ/σ}.
pub fn resum_angular(coeffs: &[Complex64], k_min: i64, delta: f64, cfg: &ConeConfig) -> Complex64 {
    let terms: Vec<Complex64> = coeffs
        .iter()
        .enumerate()
        .map(|(i, a)| a * Complex64::from_polar(1.0, (k_min + i as i64) as f64 * delta / cfg.sigma))
        .collect();
    pairwise_sum_c(&terms)
}

/// Kernel of F(H) truncated to the window, Σ_{k,m} F(λ) R_{k,m}(r1) R_{k,m}(r2) e^{ik(θ1−θ2)/σ},
/// with the largest single term.
pub fn spectral_kernel<F: Fn(f64) -> Complex64>(mult: F, p: &ConePoint, q: &ConePoint, cfg: &ConeConfig, window: &Window) -> (Complex64, f64) {
    let mut largest: f64 = 0.0;
    let coeffs: Vec<Complex64> = window
        .k_range()
        .map(|k| {
            let a = radial_table(k, window.m_max, p.r(), cfg);
            let b = radial_table(k, window.m_max, q.r(), cfg);
            let terms: Vec<Complex64> = (0..=window.m_max)
                .map(|m| mult(mode_data(ModeIndex::new(k, m), cfg).lambda) * (a[m as usize] * b[m as usize]))
                .collect();
            largest = terms.iter().fold(largest, |l, t| l.max(t.norm()));
            pairwise_sum_c(&terms)
        })
        .collect();
    (resum_angular(&coeffs, window.k_min, p.theta() - q.theta(), cfg), largest)
}

/// Kernel of φ(2^{−j}√H) e^{it√H} summed over the window.
pub fn halfwave_kernel_truncated(j: i32, t: f64, p: &ConePoint, q: &ConePoint, cfg: &ConeConfig, window: &Window) -> Result<Complex64> {
    check_shell_coverage(j, window, cfg, p.r(), q.r())?;
    let coeffs = halfwave_angular_coeffs(j, t, p.r(), q.r(), cfg, window);
    Ok(resum_angular(&coeffs, window.k_min, p.theta() - q.theta(), cfg))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lpbesov::littlewood_paley_piece;
    use crate::spectrum::{synthesize, SpectralField};

    #[test]
    fn window_covers_shell() {
        let cfg = ConeConfig::new(1.0, 1.0, 0.25).unwrap();
        let hw = HalfwaveWindow::for_shell(1, &cfg, 3.0).unwrap();
        let w = hw.window;
        assert!(check_shell_coverage(1, &w, &cfg, 3.0, 2.0).is_ok());
        let small = Window { k_min: w.k_min + 5, ..w };
        assert!(matches!(check_shell_coverage(1, &small, &cfg, 3.0, 3.0), Err(Error::WindowTooSmall(_))));
        let short = Window { m_max: w.m_max - 1, ..w };
        assert!(check_shell_coverage(1, &short, &cfg, 1.0, 1.0).is_err());
        let narrow = Window { k_max: w.k_max - 1, ..w };
        assert!(check_shell_coverage(1, &narrow, &cfg, 1.0, 1.0).is_err());
    }

    #[test]
    fn time_zero_is_hermitian_and_matches_functional_calculus() {
        let cfg = ConeConfig::new(1.5, 1.0, 0.4).unwrap();
        let w = HalfwaveWindow::for_shell(1, &cfg, 2.0).unwrap().window;
        let p = ConePoint::new(1.2, 0.4, &cfg).unwrap();
        let q = ConePoint::new(0.7, 3.9, &cfg).unwrap();
        let a = halfwave_kernel_truncated(1, 0.0, &p, &q, &cfg, &w).unwrap();
        let b = halfwave_kernel_truncated(1, 0.0, &q, &p, &cfg, &w).unwrap();
        assert!((a - b.conj()).norm() < 1e-14);
        // ∫ K(p, ·) g = φ_j(√H) g evaluated at p for g = a single eigenmode
        let g = SpectralField::single(cfg, w, ModeIndex::new(1, 0), Complex64::new(1.0, 0.0)).unwrap();
        let lam = mode_data(ModeIndex::new(1, 0), &cfg).lambda;
        let direct = synthesize(&littlewood_paley_piece(&g, 1), &p);
        let want = synthesize(&g, &p) * dyadic_phi(0.5 * lam.sqrt());
        assert!((direct - want).norm() < 1e-14);
    }
}
