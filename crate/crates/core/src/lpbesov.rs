//! Littlewood–Paley pieces φ_j(√H), homogeneous Besov and Sobolev norms, and
//! Bernstein checks on spectral fields.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{ConeConfig, ConePoint};
use crate::quad::gauss_laguerre_cached;
use crate::spectrum::{eigenfunction, mode_data, radial_table, spectral_apply, QuadratureSpec, SpectralField, Window};
use crate::sum::pairwise_sum;

/// Mother bump ψ(λ) = exp(−1/(1 − log₂²λ)), supported on (1/2, 2).
pub fn bump(lambda: f64) -> f64 {
    if !(lambda > 0.0) {
        return 0.0;
    }
    bump_log(lambda.log2())
}

fn bump_log(u: f64) -> f64 {
    if u.abs() >= 1.0 {
        0.0
    } else {
        (-1.0 / (1.0 - u * u)).exp()
    }
}

/// φ(λ) = ψ(λ)/Σ_i ψ(2^{−i}λ); only the two shells i = ⌊log₂λ⌋, ⌊log₂λ⌋+1 meet λ.
pub fn dyadic_phi(lambda: f64) -> f64 {
    if !(lambda > 0.0) {
        return 0.0;
    }
    let u = lambda.log2();
    if u.abs() >= 1.0 {
        return 0.0;
    }
    let f = u - u.floor();
    let den = bump_log(f) + bump_log(f - 1.0);
    bump_log(u) / den
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DyadicCutoff {
    /// max |Σ_j φ(2^{−j}λ) − 1| over 200 log-spaced λ ∈ [1e−3, 1e3].
    pub partition_residual: f64,
}

impl DyadicCutoff {
    pub fn phi(&self, lambda: f64) -> f64 {
        dyadic_phi(lambda)
    }

    /// φ_j(λ) = φ(2^{−j}λ).
    pub fn phi_j(&self, j: i32, lambda: f64) -> f64 {
        dyadic_phi(lambda * 2f64.powi(-j))
    }
}

pub fn make_cutoff() -> DyadicCutoff {
    let mut worst: f64 = 0.0;
    for i in 0..200 {
        let lambda = 10f64.powf(-3.0 + 6.0 * i as f64 / 199.0);
        let s: f64 = (-20..=20).map(|j| dyadic_phi(lambda * 2f64.powi(-j))).sum();
        worst = worst.max((s - 1.0).abs());
    }
    DyadicCutoff { partition_residual: worst }
}

/// Shells j whose piece φ_j(√λ) can be nonzero for some mode of the window.
pub fn shell_range(window: &Window, cfg: &ConeConfig) -> Option<(i32, i32)> {
    let lams: Vec<f64> = window.modes().map(|i| mode_data(i, cfg).lambda).collect();
    let lo = lams.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = lams.iter().copied().fold(0.0, f64::max);
    if lams.is_empty() {
        return None;
    }
    // 2^{j−1} < √λ < 2^{j+1}
    Some(((0.5 * lo.log2()).floor() as i32 - 1, (0.5 * hi.log2()).ceil() as i32 + 1))
}

/// φ_j(√H) f.
pub fn littlewood_paley_piece(field: &SpectralField, j: i32) -> SpectralField {
    spectral_apply(|lam| Complex64::new(dyadic_phi(2f64.powi(-j) * lam.sqrt()), 0.0), field)
}

/// ‖H^{s/2} f‖_{L²} from the coefficients.
pub fn sobolev_norm(field: &SpectralField, s: f64) -> f64 {
    let terms: Vec<f64> = field.iter().map(|(i, c)| mode_data(i, field.cfg()).lambda.powf(s) * c.norm_sqr()).collect();
    pairwise_sum(&terms).sqrt()
}

/// ‖(I + H)^{s/2} f‖_{L²}, the inhomogeneous Sobolev norm.
pub fn inhomogeneous_sobolev_norm(field: &SpectralField, s: f64) -> f64 {
    let terms: Vec<f64> = field
        .iter()
        .map(|(i, c)| (1.0 + mode_data(i, field.cfg()).lambda).powf(s) * c.norm_sqr())
        .collect();
    pairwise_sum(&terms).sqrt()
}

/// Values of the field on the reference grid for L^p: radial Gauss–Laguerre
/// nodes in w = p u/2 (u = B0 r²/2) times `n_ang` equispaced angles. Returns
/// (values[radial][angle], radial weights including e^{w}).
pub fn lp_grid(field: &SpectralField, p: f64) -> Result<(Vec<Vec<Complex64>>, Vec<f64>)> {
    let cfg = *field.cfg();
    let w = *field.window();
    let quad = *field.quadrature();
    if 2 * w.max_abs_k() as usize >= quad.n_ang {
        return Err(Error::WindowTooSmall(format!(
            "|k| up to {} is not resolved by {} angular nodes",
            w.max_abs_k(),
            quad.n_ang
        )));
    }
    let rule = gauss_laguerre_cached(quad.n_rad, 0.0);
    let stretch = if p.is_finite() { 0.5 * p } else { 1.0 };
    let ks: Vec<i64> = w.k_range().collect();
    let rows: Vec<Vec<Complex64>> = rule
        .nodes
        .par_iter()
        .map(|&wn| {
            let u = wn / stretch;
            let r = (2.0 * u / cfg.b0).sqrt();
            let amps: Vec<Complex64> = ks
                .iter()
                .map(|&k| {
                    let t = radial_table(k, w.m_max, r, &cfg);
                    let base = w.index_of(crate::spectrum::ModeIndex::new(k, 0)).unwrap();
                    let cs = &field.coeffs()[base..base + w.m_count()];
                    cs.iter().zip(&t).map(|(c, g)| c * g).sum()
                })
                .collect();
            (0..quad.n_ang)
                .map(|a| {
                    let th = cfg.period() * a as f64 / quad.n_ang as f64;
                    ks.iter()
                        .zip(&amps)
                        .map(|(&k, amp)| amp * Complex64::from_polar(1.0, k as f64 * th / cfg.sigma))
                        .sum()
                })
                .collect()
        })
        .collect();
    // ∫_X g = (1/B0)∫∫ g du dθ and du = dw/stretch
    let ang_w = cfg.period() / quad.n_ang as f64;
    let weights = rule.scaled_weights.iter().map(|v| v * ang_w / (cfg.b0 * stretch)).collect();
    Ok((rows, weights))
}

/// ‖f‖_{L^p} on the reference grid; p = ∞ is the grid maximum.
pub fn lp_norm(field: &SpectralField, p: f64) -> Result<f64> {
    if !(p >= 1.0) {
        return Err(Error::Domain(format!("L^p needs p >= 1, got {p}")));
    }
    let (rows, weights) = lp_grid(field, p)?;
    if p.is_infinite() {
        return Ok(rows.iter().flatten().map(|v| v.norm()).fold(0.0, f64::max));
    }
    let terms: Vec<f64> = rows
        .iter()
        .zip(&weights)
        .map(|(row, w)| w * pairwise_sum(&row.iter().map(|v| v.norm().powf(p)).collect::<Vec<_>>()))
        .collect();
    Ok(pairwise_sum(&terms).powf(1.0 / p))
}

/// L^p norm of a piece: Parseval for p = 2, grid otherwise.
fn piece_norm(piece: &SpectralField, p: f64) -> Result<f64> {
    if p == 2.0 {
        Ok(piece.l2_norm())
    } else {
        lp_norm(piece, p)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ShellNorm {
    pub j: i32,
    pub norm: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NormReport {
    pub s: f64,
    pub p: f64,
    pub q: f64,
    pub window: Window,
    pub value: f64,
    pub shells: Vec<ShellNorm>,
}

/// Homogeneous Besov norm (Σ_j 2^{jsq}‖φ_j(√H)f‖_{L^p}^q)^{1/q}, with the shell report.
pub fn besov_report(field: &SpectralField, s: f64, p: f64, q: f64) -> Result<NormReport> {
    if !(p >= 1.0 && q >= 1.0) {
        return Err(Error::Domain(format!("Besov norm needs p, q >= 1, got p={p}, q={q}")));
    }
    let window = *field.window();
    let Some((j_lo, j_hi)) = shell_range(&window, field.cfg()) else {
        return Ok(NormReport { s, p, q, window, value: 0.0, shells: vec![] });
    };
    let shells: Vec<ShellNorm> = (j_lo..=j_hi)
        .into_par_iter()
        .map(|j| Ok(ShellNorm { j, norm: piece_norm(&littlewood_paley_piece(field, j), p)? }))
        .collect::<Result<_>>()?;
    let value = if q.is_infinite() {
        shells.iter().map(|sh| 2f64.powf(j_f(sh.j) * s) * sh.norm).fold(0.0, f64::max)
    } else {
        let terms: Vec<f64> = shells.iter().map(|sh| (2f64.powf(j_f(sh.j) * s) * sh.norm).powf(q)).collect();
        pairwise_sum(&terms).powf(1.0 / q)
    };
    Ok(NormReport { s, p, q, window, value, shells })
}

fn j_f(j: i32) -> f64 {
    j as f64
}

pub fn besov_norm(field: &SpectralField, s: f64, p: f64, q: f64) -> Result<f64> {
    Ok(besov_report(field, s, p, q)?.value)
}

/// (Σ_j ‖φ_j(√H)f‖²_{L²}) / ‖f‖²_{L²}, computed from coefficients.
pub fn square_function_ratio(field: &SpectralField) -> f64 {
    let cfg = field.cfg();
    let num: Vec<f64> = field
        .iter()
        .map(|(i, c)| {
            let r = mode_data(i, cfg).lambda.sqrt();
            let fl = r.log2().floor();
            // the two shells meeting √λ
            (dyadic_phi(r * 2f64.powf(-fl)).powi(2) + dyadic_phi(r * 2f64.powf(-fl - 1.0)).powi(2)) * c.norm_sqr()
        })
        .collect();
    pairwise_sum(&num) / field.l2_norm().powi(2)
}

/// The packet χ_j(√H)δ_y truncated to the window, with χ_j = φ_{j−1} + φ_j + φ_{j+1}
/// (equal to 1 on the support of φ_j).
pub fn shell_packet(j: i32, y: &ConePoint, cfg: &ConeConfig, window: Window) -> SpectralField {
    let chi = |lam: f64| (j - 1..=j + 1).map(|i| dyadic_phi(2f64.powi(-i) * lam.sqrt())).sum::<f64>();
    let coeffs = window
        .modes()
        .map(|i| eigenfunction(i, y, cfg, true).conj() * chi(mode_data(i, cfg).lambda))
        .collect();
    SpectralField::new(*cfg, window, QuadratureSpec::default(), coeffs).expect("window-sized coefficients")
}

/// Whether the window holds every mode of χ_j(√H) with k ≥ 0 and every Landau level
/// index m it needs; negative k beyond the window live far from the origin.
pub fn packet_covered(j: i32, window: &Window, cfg: &ConeConfig) -> bool {
    let top = 4f64.powi(j + 2);
    let m_need = ((top / cfg.b0 - 1.0) / 2.0).ceil().max(0.0);
    let k_need = (cfg.sigma * ((top / cfg.b0 - 1.0) / 2.0 - cfg.alpha)).ceil().max(0.0);
    window.m_max as f64 >= m_need && window.k_max as f64 >= k_need
}

/// Largest ‖φ_j(√H)f‖_{L^p} / (2^{2j(1/q−1/p)}‖f‖_{L^q}) over seeded trial fields: random
/// fields on the window and shell packets χ_j(√H)δ_y at random centres y with
/// r ∈ [0.5, 1.5]/√B0.
pub fn bernstein_ratio(j: i32, p: f64, q_exp: f64, cfg: &ConeConfig, window: Window, quad: QuadratureSpec, trials: usize, seed: u64) -> Result<f64> {
    if !(q_exp >= 1.0 && p >= q_exp) {
        return Err(Error::Domain(format!("Bernstein needs 1 <= q <= p, got p={p}, q={q_exp}")));
    }
    let in_shell = window.modes().any(|i| dyadic_phi(2f64.powi(-j) * mode_data(i, cfg).lambda.sqrt()) > 0.0);
    if !in_shell {
        return Err(Error::WindowTooSmall(format!("shell {j} holds no eigenvalue of the window")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let inv = |x: f64| if x.is_infinite() { 0.0 } else { 1.0 / x };
    let scale = 2f64.powf(2.0 * j as f64 * (inv(q_exp) - inv(p)));
    let mut best: f64 = 0.0;
    for _ in 0..trials {
        let r = (0.5 + rng.gen::<f64>()) / cfg.b0.sqrt();
        let y = ConePoint::new(r, rng.gen::<f64>() * cfg.period(), cfg)?;
        let fields = [
            SpectralField::random(*cfg, window, &mut rng).with_quadrature(quad),
            shell_packet(j, &y, cfg, window).with_quadrature(quad),
        ];
        for f in &fields {
            let piece = littlewood_paley_piece(f, j);
            best = best.max(piece_norm(&piece, p)? / (scale * piece_norm(f, q_exp)?));
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectrum::ModeIndex;

    #[test]
    fn cutoff_support_and_partition() {
        assert_eq!(dyadic_phi(0.4), 0.0);
        assert_eq!(dyadic_phi(2.1), 0.0);
        assert!(dyadic_phi(1.1) > 0.0);
        let c = make_cutoff();
        assert!(c.partition_residual < 1e-12);
        let s = dyadic_phi(0.75) + dyadic_phi(1.5);
        assert!((s - 1.0).abs() < 1e-15);
        for i in 0..1000 {
            let l = 0.5 + 1.5 * i as f64 / 999.0;
            let v = dyadic_phi(l);
            assert!((0.0..=1.0).contains(&v));
        }
        assert_eq!(c.phi_j(3, 8.0), 1.0);
    }

    #[test]
    fn single_mode_norms() {
        let cfg = ConeConfig::new(1.0, 1.0, 0.25).unwrap();
        let w = Window::symmetric(3, 3);
        let f = SpectralField::single(cfg, w, ModeIndex::new(1, 2), Complex64::new(1.0, 0.0)).unwrap();
        let b = besov_norm(&f, 0.0, 2.0, 2.0).unwrap();
        assert!(b >= 1.0 / 2f64.sqrt() - 1e-12 && b <= 1.0 + 1e-12, "{b}");
        let lam = mode_data(ModeIndex::new(1, 2), &cfg).lambda;
        assert!((sobolev_norm(&f, 1.3) - lam.powf(0.65)).abs() < 1e-12);
        assert!((sobolev_norm(&f, 0.0) - 1.0).abs() < 1e-15);
        let b1 = besov_report(&f, 1.0, 2.0, 2.0).unwrap();
        let b0 = besov_report(&f, 0.0, 2.0, 2.0).unwrap();
        for (a, z) in b1.shells.iter().zip(&b0.shells) {
            assert_eq!(a.norm, z.norm);
        }
    }

    #[test]
    fn grid_l2_agrees_with_parseval() {
        let cfg = ConeConfig::new(1.5, 1.0, 0.4).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let f = SpectralField::random(cfg, Window::symmetric(5, 6), &mut rng);
        // fractional powers u^{α_k} at the tip limit the Laguerre grid to ~1e−4
        let g = lp_norm(&f, 2.0).unwrap();
        assert!((g - 1.0).abs() < 5e-4, "{g}");
    }

    #[test]
    fn besov_sobolev_equivalence() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for cfg in ConeConfig::reference() {
            for _ in 0..5 {
                let f = SpectralField::random(cfg, Window::symmetric(6, 8), &mut rng);
                for &s in &[-1.0, 0.0, 0.5, 1.5] {
                    let r = besov_norm(&f, s, 2.0, 2.0).unwrap() / sobolev_norm(&f, s);
                    assert!(r >= 1.0 / 2f64.sqrt() - 1e-6 && r <= 2f64.sqrt() + 1e-6, "{r}");
                }
            }
        }
    }

    #[test]
    fn square_function_bounds() {
        let cfg = ConeConfig::new(2.0, 0.5, 0.3).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let f = SpectralField::random(cfg, Window::symmetric(4, 4), &mut rng);
        let r = square_function_ratio(&f);
        assert!((0.5..=1.0).contains(&r));
        let rep = besov_report(&f, 0.0, 2.0, 2.0).unwrap();
        assert!((rep.value.powi(2) - r).abs() < 1e-12);
    }

    #[test]
    fn bernstein_equal_exponents_is_bounded() {
        let cfg = ConeConfig::new(1.0, 1.0, 0.25).unwrap();
        let r = bernstein_ratio(1, 2.0, 2.0, &cfg, Window::symmetric(4, 4), QuadratureSpec::default(), 4, 1).unwrap();
        assert!(r <= 1.0 + 1e-12);
        assert!(bernstein_ratio(-3, 2.0, 2.0, &cfg, Window::symmetric(2, 2), QuadratureSpec::default(), 1, 1).is_err());
    }
}
