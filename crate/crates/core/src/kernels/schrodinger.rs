use std::f64::consts::PI;

use num_complex::Complex64;

use super::integrands::a_integrand_c;
use super::{angular_coeffs, angular_sum, AngularSeries, KernelValue, TruncationSpec, SINGULAR_GUARD};
use crate::error::{Error, Result};
use crate::geometry::{angular_difference, ConeConfig, ConePoint};
use crate::quad::adaptive_c;
use crate::specfun::{bessel_i, ln_gamma};

/// Prefactor, reduced radius ρ and reduced angle δ of the Schrödinger kernel,
/// K^S_t(p, q) = prefactor · K(ρ, δ), for the group e^{itH}.
pub fn schrodinger_prefactor(t: f64, p: &ConePoint, q: &ConePoint, cfg: &ConeConfig) -> Result<(Complex64, f64, f64)> {
    let tau = t * cfg.b0;
    let s = tau.sin();
    if !t.is_finite() || s.abs() < SINGULAR_GUARD {
        return Err(Error::SingularTime { t, sin_abs: s.abs() });
    }
    let (r1, r2) = (p.r(), q.r());
    let iu = Complex64::new(0.0, 1.0);
    let lead = iu * cfg.b0 / (4.0 * PI * cfg.sigma * s) * Complex64::from_polar(1.0, tau * cfg.alpha);
    // e^{B0(r1²+r2²)/(4i tan τ)}
    let gauss = Complex64::from_polar(1.0, -cfg.b0 * (r1 * r1 + r2 * r2) / (4.0 * tau.tan()));
    let rho = cfg.b0 * r1 * r2 / (2.0 * s);
    let delta = tau + angular_difference(p.theta(), q.theta(), cfg);
    Ok((lead * gauss, rho, delta))
}

/// K(ρ, δ) = Σ_k e^{ikδ/σ} I_{α_k}(iρ).
pub fn reduced_kernel(rho: f64, delta: f64, cfg: &ConeConfig, trunc: &TruncationSpec) -> Result<KernelValue> {
    if rho == 0.0 {
        return Ok(KernelValue { value: Complex64::new(0.0, 0.0), largest_term: 0.0, truncation: *trunc });
    }
    let z = Complex64::new(0.0, rho);
    let sig = cfg.sigma;
    let term = |k: i64| -> Result<Complex64> {
        let i = bessel_i(cfg.alpha_k(k), z)?;
        Ok(Complex64::from_polar(1.0, k as f64 * delta / sig) * i.value)
    };
    let ln_env = |k: i64| {
        let nu = cfg.alpha_k(k);
        nu * (0.5 * rho.abs()).ln() - ln_gamma(nu + 1.0)
    };
    let s = angular_sum(trunc.k_max, term, ln_env)?;
    Ok(KernelValue { value: s.value, largest_term: s.largest, truncation: TruncationSpec { k_max: s.k_used as usize, ..*trunc } })
}

/// Angular form of the reduced kernel: K(ρ, δ) = Σ_k c_k e^{ikδ/σ}.
pub fn reduced_series_coeffs(rho: f64, cfg: &ConeConfig, trunc: &TruncationSpec) -> Result<AngularSeries> {
    if rho == 0.0 {
        return Ok(AngularSeries { k_min: 0, coeffs: vec![], ln_scale: 0.0, sigma: cfg.sigma });
    }
    let z = Complex64::new(0.0, rho);
    let term = |k: i64| Ok(bessel_i(cfg.alpha_k(k), z)?.value);
    let ln_env = |k: i64| {
        let nu = cfg.alpha_k(k);
        nu * (0.5 * rho.abs()).ln() - ln_gamma(nu + 1.0)
    };
    // the envelope underestimates |J| near its turning point, so pad the start
    let start = trunc.k_max.max((2.0 * cfg.sigma * rho.abs()) as usize + 8);
    let (k_min, coeffs) = angular_coeffs(start, term, ln_env)?;
    Ok(AngularSeries { k_min, coeffs, ln_scale: 0.0, sigma: cfg.sigma })
}

/// K(ρ, δ) from the covering-plane sum and a half-line diffraction integral. The
/// half line is bent into the half strip where e^{−iρ cosh s} decays.
pub fn reduced_kernel_closed(rho: f64, delta: f64, cfg: &ConeConfig, trunc: &TruncationSpec) -> Result<KernelValue> {
    if rho == 0.0 {
        return Ok(KernelValue { value: Complex64::new(0.0, 0.0), largest_term: 0.0, truncation: *trunc });
    }
    let (sig, a) = (cfg.sigma, cfg.alpha);
    let iu = Complex64::new(0.0, 1.0);
    let mut geo = Complex64::new(0.0, 0.0);
    let mut largest: f64 = 0.0;
    let j_lo = ((-PI - delta) / (2.0 * PI * sig)).floor() as i64 - 1;
    let j_hi = ((PI - delta) / (2.0 * PI * sig)).ceil() as i64 + 1;
    for jj in j_lo..=j_hi {
        let th = delta + 2.0 * jj as f64 * sig * PI;
        let edge = (th.abs() - PI).abs() < 1e-13;
        if th.abs() > PI && !edge {
            continue;
        }
        let w = if edge { 0.5 } else { 1.0 };
        let v = sig * w * Complex64::from_polar(1.0, rho * th.cos() - a * th);
        largest = largest.max(v.norm());
        geo += v;
    }

    let sg = rho.signum();
    let bend = |x: f64| Complex64::new(x, -sg * 0.5 * PI * (-(-x).exp_m1()));
    let rate = a.min(1.0 / sig - a);
    let decay = |x: f64| rho.abs() * x.sinh() * (0.5 * PI * (-(-x).exp_m1())).sin() + rate * x;
    let mut x_end = 1.0;
    while decay(x_end) < 40.0 && x_end < trunc.s_max {
        x_end = (x_end * 1.25).min(trunc.s_max);
    }
    let mut breaks = vec![0.0, 1e-4, 1e-3, 1e-2, 0.1];
    let n = trunc.quad_nodes;
    breaks.extend((1..=n).map(|i| 0.1 + (x_end - 0.1) * i as f64 / n as f64));
    let f = |x: f64| {
        let s = bend(x);
        let ds = Complex64::new(1.0, -sg * 0.5 * PI * (-x).exp());
        (-iu * rho * s.cosh()).exp() * a_integrand_c(s, delta, cfg) * ds
    };
    let integral = adaptive_c(f, &breaks, 1e-15 * geo.norm().max(1.0), 1e-13, 4000);
    if !integral.value.is_finite() {
        return Err(Error::Quadrature("diffraction integral is not finite".into()));
    }
    let diff = integral.value / PI;
    largest = largest.max(diff.norm());
    Ok(KernelValue { value: geo - diff, largest_term: largest, truncation: *trunc })
}

fn scale(pref: Complex64, mut v: KernelValue) -> KernelValue {
    v.value *= pref;
    v.largest_term *= pref.norm();
    v
}

/// Schrödinger kernel of e^{itH} by its angular mode series.
pub fn schrodinger_kernel_series(t: f64, p: &ConePoint, q: &ConePoint, cfg: &ConeConfig, trunc: &TruncationSpec) -> Result<KernelValue> {
    let (pref, rho, delta) = schrodinger_prefactor(t, p, q, cfg)?;
    Ok(scale(pref, reduced_kernel(rho, delta, cfg, trunc)?))
}

/// Schrödinger kernel of e^{itH} in closed form.
pub fn schrodinger_kernel_closed(t: f64, p: &ConePoint, q: &ConePoint, cfg: &ConeConfig, trunc: &TruncationSpec) -> Result<KernelValue> {
    let (pref, rho, delta) = schrodinger_prefactor(t, p, q, cfg)?;
    Ok(scale(pref, reduced_kernel_closed(rho, delta, cfg, trunc)?))
}
