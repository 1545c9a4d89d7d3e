use std::f64::consts::PI;

use num_complex::Complex64;

use super::integrands::b_integrand_c;
use super::{angular_coeffs, angular_sum, AngularSeries, KernelValue, TruncationSpec};
use crate::error::{Error, Result};
use crate::geometry::{angular_difference, ConeConfig, ConePoint};
use crate::quad::adaptive_c;
use crate::specfun::{ln_bessel_i_scaled, ln_gamma};

fn check_time(t: f64) -> Result<()> {
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::Domain(format!("heat kernel needs t > 0, got {t}")));
    }
    Ok(())
}

/// ln sinh τ for τ > 0 without overflow.
fn ln_sinh(tau: f64) -> f64 {
    if tau > 20.0 {
        tau - 2f64.ln() + (-(-2.0 * tau).exp()).ln_1p()
    } else {
        tau.sinh().ln()
    }
}

struct HeatGeometry {
    tau: f64,
    theta: f64,
    x: f64,
    /// −B0(r1²+r2²)/(4 tanh τ)
    gauss: f64,
    ln_pref: f64,
}

fn geometry(t: f64, p: &ConePoint, q: &ConePoint, cfg: &ConeConfig) -> HeatGeometry {
    let tau = t * cfg.b0;
    let (r1, r2) = (p.r(), q.r());
    let ls = ln_sinh(tau);
    let x = (cfg.b0 * r1 * r2 / 2.0).ln() - ls;
    let x = if r1 == 0.0 || r2 == 0.0 { 0.0 } else { x.exp() };
    HeatGeometry {
        tau,
        theta: angular_difference(p.theta(), q.theta(), cfg),
        x,
        gauss: -cfg.b0 * (r1 * r1 + r2 * r2) / (4.0 * tau.tanh()),
        ln_pref: cfg.b0.ln() - tau * cfg.alpha - (4.0 * PI * cfg.sigma).ln() - ls,
    }
}

/// Heat kernel by its angular mode series, summed in log scale so that the
/// e^{−kτ/σ} growth and the Bessel decay never overflow separately.
pub fn heat_kernel_series(t: f64, p: &ConePoint, q: &ConePoint, cfg: &ConeConfig, trunc: &TruncationSpec) -> Result<KernelValue> {
    check_time(t)?;
    let g = geometry(t, p, q, cfg);
    if g.x == 0.0 {
        return Ok(KernelValue { value: Complex64::new(0.0, 0.0), largest_term: 0.0, truncation: *trunc });
    }
    let base = g.ln_pref + g.gauss + g.x;
    let sig = cfg.sigma;
    let term = |k: i64| -> Result<Complex64> {
        let nu = cfg.alpha_k(k);
        let ln_mag = base - k as f64 * g.tau / sig + ln_bessel_i_scaled(nu, g.x);
        Ok(Complex64::from_polar(ln_mag.exp(), k as f64 * g.theta / sig))
    };
    let ln_env = |k: i64| -> f64 {
        let nu = cfg.alpha_k(k);
        base - k as f64 * g.tau / sig + nu * (0.5 * g.x).ln() - ln_gamma(nu + 1.0) + g.x * g.x / (4.0 * (nu + 1.0)) - g.x
    };
    let s = angular_sum(trunc.k_max, term, ln_env)?;
    Ok(KernelValue {
        value: s.value,
        largest_term: s.largest,
        truncation: TruncationSpec { k_max: s.k_used as usize, ..*trunc },
    })
}

/// Angular form of the heat kernel at radii r1, r2: K^H_t = Σ_k c_k e^{ik(θ1−θ2)/σ}.
pub fn heat_series_coeffs(t: f64, r1: f64, r2: f64, cfg: &ConeConfig, trunc: &TruncationSpec) -> Result<AngularSeries> {
    check_time(t)?;
    let p = ConePoint::new(r1, 0.0, cfg)?;
    let q = ConePoint::new(r2, 0.0, cfg)?;
    let g = geometry(t, &p, &q, cfg);
    if g.x == 0.0 {
        return Ok(AngularSeries { k_min: 0, coeffs: vec![], ln_scale: 0.0, sigma: cfg.sigma });
    }
    let sig = cfg.sigma;
    // c_k relative to e^{ln_scale}; ln_scale = ln of the k = 0 envelope level
    let ln_scale = g.ln_pref + g.gauss + g.x;
    let term = |k: i64| Ok(Complex64::new((-(k as f64) * g.tau / sig + ln_bessel_i_scaled(cfg.alpha_k(k), g.x)).exp(), 0.0));
    let ln_env = |k: i64| {
        let nu = cfg.alpha_k(k);
        -(k as f64) * g.tau / sig + nu * (0.5 * g.x).ln() - ln_gamma(nu + 1.0) + g.x * g.x / (4.0 * (nu + 1.0)) - g.x
    };
    let (k_min, coeffs) = angular_coeffs(trunc.k_max, term, ln_env)?;
    Ok(AngularSeries { k_min, coeffs, ln_scale, sigma: sig })
}

/// Heat kernel as a finite sum over the sheets of the covering plane plus a line
/// integral of the diffraction term. The line is shifted to Im s = c so that it
/// stays away from the poles at Re s = τ.
pub fn heat_kernel_closed(t: f64, p: &ConePoint, q: &ConePoint, cfg: &ConeConfig, trunc: &TruncationSpec) -> Result<KernelValue> {
    check_time(t)?;
    let g = geometry(t, p, q, cfg);
    if g.x == 0.0 {
        return Ok(KernelValue { value: Complex64::new(0.0, 0.0), largest_term: 0.0, truncation: *trunc });
    }
    let (sig, a) = (cfg.sigma, cfg.alpha);
    let c = contour_shift(g.theta, sig);
    let pref = g.ln_pref.exp();
    let iu = Complex64::new(0.0, 1.0);

    let j_lo = ((-PI - c - g.theta) / (2.0 * PI * sig)).floor() as i64 - 1;
    let j_hi = ((PI - c - g.theta) / (2.0 * PI * sig)).ceil() as i64 + 1;
    let mut geo = Complex64::new(0.0, 0.0);
    let mut largest: f64 = 0.0;
    for jj in j_lo..=j_hi {
        let th = g.theta + 2.0 * jj as f64 * sig * PI;
        if (th + c).abs() >= PI {
            continue;
        }
        let e = Complex64::new(g.gauss + a * g.tau, -a * th) + g.x * (Complex64::new(th, g.tau)).cos();
        let v = pref * sig * e.exp();
        largest = largest.max(v.norm());
        geo += v;
    }

    let reach = (60.0 / (g.x * c.cos())).max(1.0).acosh() + 1.0;
    let s_lim = reach.min(trunc.s_max);
    let mut breaks: Vec<f64> = (0..=trunc.quad_nodes)
        .map(|i| -s_lim + 2.0 * s_lim * i as f64 / trunc.quad_nodes as f64)
        .collect();
    if g.tau > -s_lim && g.tau < s_lim {
        breaks.push(g.tau);
        breaks.sort_by(|x, y| x.partial_cmp(y).unwrap());
    }
    let f = |s: f64| {
        let z = Complex64::new(s, c);
        (g.gauss - g.x * z.cosh()).exp() * b_integrand_c(z, g.theta, t, cfg)
    };
    let integral = adaptive_c(f, &breaks, 1e-15 * geo.norm(), 1e-13, 4000);
    if !integral.value.is_finite() {
        return Err(Error::Quadrature("heat line integral is not finite".into()));
    }
    let diff = pref * integral.value / (2.0 * PI * iu);
    largest = largest.max(diff.norm());
    Ok(KernelValue { value: geo + diff, largest_term: largest, truncation: *trunc })
}

/// Shift c ∈ [−π/4, π/4] of the integration line that maximises the distance to the
/// pole lines c ≡ −θ ± π (mod 2σπ).
fn contour_shift(theta: f64, sig: f64) -> f64 {
    let period = 2.0 * PI * sig;
    let dist = |c: f64| {
        [c + theta + PI, c + theta - PI]
            .iter()
            .map(|v| {
                let r = v.rem_euclid(period);
                r.min(period - r)
            })
            .fold(f64::INFINITY, f64::min)
    };
    (0..=16)
        .map(|i| -PI / 4.0 + PI / 2.0 * i as f64 / 16.0)
        .fold((0.0, -1.0), |best, c| {
            let d = dist(c);
            if d > best.1 + 1e-12 {
                (c, d)
            } else {
                best
            }
        })
        .0
}

/// Heat kernel of the Landau Hamiltonian on the plane (σ = 1, no flux), the
/// Mehler formula in polar coordinates.
pub fn landau_heat_kernel(t: f64, r1: f64, th1: f64, r2: f64, th2: f64, b0: f64) -> Complex64 {
    let tau = t * b0;
    let d2 = r1 * r1 + r2 * r2 - 2.0 * r1 * r2 * (th1 - th2).cos();
    let mag = b0 / (4.0 * PI * tau.sinh()) * (-b0 * d2 / (4.0 * tau.tanh())).exp();
    Complex64::from_polar(mag, -0.5 * b0 * r1 * r2 * (th1 - th2).sin())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pt(r: f64, th: f64, cfg: &ConeConfig) -> ConePoint {
        ConePoint::new(r, th, cfg).unwrap()
    }

    #[test]
    fn landau_diagonal_value() {
        let cfg = ConeConfig::new(1.0, 1.0, 1e-9).unwrap();
        let p = pt(1.0, 0.7, &cfg);
        let v = heat_kernel_series(1.0, &p, &p, &cfg, &TruncationSpec::default()).unwrap();
        let want = 1.0 / (4.0 * PI * 1f64.sinh());
        assert!((v.value.re - want).abs() < 1e-9 && v.value.im.abs() < 1e-12, "{:?}", v.value);
        assert!((want - 0.0677139).abs() < 1e-7);
    }

    #[test]
    fn series_matches_landau_off_diagonal() {
        let cfg = ConeConfig::new(1.0, 0.5, 1e-9).unwrap();
        for &(t, r1, t1, r2, t2) in &[(0.7, 1.0, 0.3, 0.8, 2.1), (2.0, 0.4, 5.0, 1.7, 1.0), (0.3, 2.0, 1.0, 2.2, 1.4)] {
            let v = heat_kernel_series(t, &pt(r1, t1, &cfg), &pt(r2, t2, &cfg), &cfg, &TruncationSpec::default()).unwrap();
            let w = landau_heat_kernel(t, r1, t1, r2, t2, cfg.b0);
            assert!((v.value - w).norm() < 1e-7 * w.norm(), "{t}: {} {}", v.value, w);
        }
    }

    #[test]
    fn series_matches_closed() {
        let cfg = ConeConfig::new(1.5, 1.0, 0.4).unwrap();
        let tr = TruncationSpec::default();
        let (p, q) = (pt(1.0, 0.3, &cfg), pt(0.8, 2.1, &cfg));
        let a = heat_kernel_series(0.7, &p, &q, &cfg, &tr).unwrap();
        let b = heat_kernel_closed(0.7, &p, &q, &cfg, &tr).unwrap();
        assert!((a.value - b.value).norm() < 1e-10 * a.value.norm(), "{} {}", a.value, b.value);
        for cfg in ConeConfig::reference() {
            for &th in &[0.0, 1.0, PI, 4.0, 2.0 * PI * cfg.sigma - 0.2] {
                for &t in &[0.3, 1.1, 2.0] {
                    let p = pt(0.9, th, &cfg);
                    let q = pt(0.6, 0.0, &cfg);
                    let a = heat_kernel_series(t, &p, &q, &cfg, &tr).unwrap().value;
                    let b = heat_kernel_closed(t, &p, &q, &cfg, &tr).unwrap().value;
                    assert!((a - b).norm() < 1e-9 * a.norm(), "{cfg:?} θ={th} t={t}: {a} {b}");
                }
            }
        }
    }

    #[test]
    fn angular_form_matches_series() {
        let tr = TruncationSpec::default();
        for cfg in ConeConfig::reference() {
            let a = heat_series_coeffs(0.8, 1.1, 0.6, &cfg, &tr).unwrap();
            for &th in &[0.0, 1.0, 3.0] {
                let v = heat_kernel_series(0.8, &pt(1.1, th, &cfg), &pt(0.6, 0.0, &cfg), &cfg, &tr).unwrap().value;
                assert!((a.eval(th) - v).norm() < 1e-13 * v.norm());
            }
        }
    }

    #[test]
    fn hermitian_and_domain() {
        let cfg = ConeConfig::new(2.0, 0.5, 0.3).unwrap();
        let tr = TruncationSpec::default();
        let (p, q) = (pt(1.3, 0.3, &cfg), pt(0.4, 5.1, &cfg));
        let a = heat_kernel_series(0.9, &p, &q, &cfg, &tr).unwrap().value;
        let b = heat_kernel_series(0.9, &q, &p, &cfg, &tr).unwrap().value;
        assert!((a - b.conj()).norm() <= 1e-15 * a.norm());
        assert!(matches!(heat_kernel_series(0.0, &p, &q, &cfg, &tr), Err(Error::Domain(_))));
        assert!(matches!(heat_kernel_closed(-1.0, &p, &q, &cfg, &tr), Err(Error::Domain(_))));
    }

    #[test]
    fn long_time_and_far_points_stay_finite() {
        let cfg = ConeConfig::new(1.0, 1.0, 0.25).unwrap();
        let tr = TruncationSpec::default();
        let (p, q) = (pt(6.0, 0.0, &cfg), pt(5.0, 3.0, &cfg));
        for &t in &[0.05, 5.0, 40.0] {
            let v = heat_kernel_series(t, &p, &q, &cfg, &tr).unwrap();
            assert!(v.value.is_finite());
        }
    }
}
