use std::f64::consts::PI;

use num_complex::Complex64;

use super::gamma::ln_gamma;
use super::{SeriesResult, SERIES_CAP, SERIES_TOL};
use crate::error::{Error, Result};
use crate::quad::{composite_gl, gl16};

/// Envelope (x/2)^ν/Γ(ν+1) bounding |J_ν(x)| for real x and ν ≥ 0.
pub fn j_order_bound(nu: f64, x: f64) -> f64 {
    if x == 0.0 {
        return if nu == 0.0 { 1.0 } else { 0.0 };
    }
    (nu * (0.5 * x.abs()).ln() - ln_gamma(nu + 1.0)).exp()
}

fn j_series(nu: f64, x: f64) -> f64 {
    let q = 0.25 * x * x;
    let mut term = j_order_bound(nu, x);
    let mut sum = term;
    let mut small = 0;
    for m in 0..SERIES_CAP {
        let mf = m as f64;
        term *= -q / ((mf + 1.0) * (mf + nu + 1.0));
        sum += term;
        if term.abs() <= SERIES_TOL * sum.abs() && q < (mf + 1.0) * (mf + nu + 1.0) {
            small += 1;
            if small >= 2 {
                break;
            }
        } else {
            small = 0;
        }
    }
    sum
}

/// Hankel asymptotic expansion; None when the series does not reach full precision.
fn j_hankel(nu: f64, x: f64) -> Option<f64> {
    let mu = 4.0 * nu * nu;
    let mut p = 1.0;
    let mut q = 0.0;
    let mut term: f64 = 1.0;
    let mut prev = f64::INFINITY;
    for k in 1..200 {
        let kf = k as f64;
        let odd = 2.0 * kf - 1.0;
        term *= (mu - odd * odd) / (8.0 * kf * x);
        if term.abs() > prev {
            return None;
        }
        prev = term.abs();
        // a_k/x^k enters P with sign (−1)^{k/2} for even k, Q with (−1)^{(k−1)/2} for odd k
        match k % 4 {
            1 => q += term,
            2 => p -= term,
            3 => q -= term,
            _ => p += term,
        }
        if term.abs() < 1e-17 {
            let chi = x - (0.5 * nu + 0.25) * PI;
            return Some((2.0 / (PI * x)).sqrt() * (p * chi.cos() - q * chi.sin()));
        }
    }
    None
}

/// Schläfli's integral for x > 0.
fn j_schlafli(nu: f64, x: f64) -> f64 {
    let rule = gl16();
    let omega = nu + x;
    let panels = (PI * omega / 6.0).ceil() as usize + 1;
    let first = composite_gl(|s| (nu * s - x * s.sin()).cos(), 0.0, PI, panels, rule) / PI;
    let sin_nu = (nu * PI).sin();
    if sin_nu == 0.0 {
        return first;
    }
    let s_max = (40.0 / x).asinh() + 1.0;
    let second = composite_gl(|s| (-x * s.sinh() - nu * s).exp(), 0.0, s_max, 6, rule);
    first - sin_nu / PI * second
}

/// Bessel function of the first kind J_ν(x), ν ≥ 0, x ≥ 0.
///
/// Ascending series when it is free of cancellation (x ≤ 4 or x²/4 ≤ ν+1),
/// the Hankel expansion for x ≥ 25 when it converges to full precision,
/// Schläfli's integral otherwise.
pub fn bessel_j(nu: f64, x: f64) -> f64 {
    if nu < 0.0 || x < 0.0 || nu.is_nan() || x.is_nan() {
        return f64::NAN;
    }
    if x == 0.0 {
        return if nu == 0.0 { 1.0 } else { 0.0 };
    }
    if x <= 4.0 || 0.25 * x * x <= nu + 1.0 {
        return j_series(nu, x);
    }
    if x >= 25.0 {
        if let Some(v) = j_hankel(nu, x) {
            return v;
        }
    }
    j_schlafli(nu, x)
}

/// Modified Bessel function I_ν(z), ν ≥ 0, by the ascending series with the
/// principal branch of (z/2)^ν. On the imaginary axis with |z| > 8 the series
/// cancels, and the value is taken from I_ν(iρ) = e^{iνπ/2} J_ν(ρ) instead.
pub fn bessel_i(nu: f64, z: Complex64) -> Result<SeriesResult> {
    if nu < 0.0 {
        return Err(Error::Domain(format!("bessel_i: negative order {nu}")));
    }
    if z.norm() == 0.0 {
        let v = if nu == 0.0 { 1.0 } else { 0.0 };
        return Ok(SeriesResult { value: Complex64::new(v, 0.0), largest_term: v, terms_used: 1 });
    }
    if z.re == 0.0 && z.im.abs() > 8.0 {
        let v = i_imaginary(nu, z.im);
        return Ok(SeriesResult { value: v, largest_term: v.norm(), terms_used: 1 });
    }
    i_series(nu, z)
}

/// I_ν(iρ) through the rotation to J_ν; I_ν(−iρ) is the conjugate for real ν.
pub(crate) fn i_imaginary(nu: f64, rho: f64) -> Complex64 {
    let v = Complex64::from_polar(bessel_j(nu, rho.abs()), 0.5 * nu * PI);
    if rho < 0.0 {
        v.conj()
    } else {
        v
    }
}

pub(crate) fn i_series(nu: f64, z: Complex64) -> Result<SeriesResult> {
    let half = z * 0.5;
    let lead = (half.ln() * nu - ln_gamma(nu + 1.0)).exp();
    let q = half * half;
    let mut term = lead;
    let mut sum = term;
    let mut largest = term.norm();
    let mut small = 0;
    for m in 0..SERIES_CAP {
        let mf = m as f64;
        let denom = (mf + 1.0) * (mf + nu + 1.0);
        term *= q / denom;
        sum += term;
        largest = largest.max(term.norm());
        if term.norm() <= SERIES_TOL * sum.norm() && q.norm() < denom {
            small += 1;
            if small >= 2 {
                return Ok(SeriesResult { value: sum, largest_term: largest, terms_used: m + 2 });
            }
        } else {
            small = 0;
        }
    }
    Err(Error::Nonconvergence { terms: SERIES_CAP, last_term: term.norm() })
}

/// e^{−x} I_ν(x) for real x ≥ 0, summed outward from the largest term in log scale.
pub fn bessel_i_scaled(nu: f64, x: f64) -> f64 {
    if x == 0.0 {
        return if nu == 0.0 { 1.0 } else { 0.0 };
    }
    let (ln_peak, rel) = scaled_i_parts(nu, x);
    let peak = ln_peak.exp();
    if peak == 0.0 {
        return 0.0;
    }
    peak * rel
}

/// ln(e^{−x} I_ν(x)) for x ≥ 0, finite far beyond the range of [`bessel_i_scaled`].
pub fn ln_bessel_i_scaled(nu: f64, x: f64) -> f64 {
    if x == 0.0 {
        return if nu == 0.0 { 0.0 } else { f64::NEG_INFINITY };
    }
    let (ln_peak, rel) = scaled_i_parts(nu, x);
    ln_peak + rel.ln()
}

// Series summed outward from its largest term: (ln of that term, sum / term).
fn scaled_i_parts(nu: f64, x: f64) -> (f64, f64) {
    let h = 0.5 * x;
    let q = h * h;
    // largest term where (m+1)(m+ν+1) crosses x²/4
    let disc = nu * nu + x * x;
    let m0 = ((disc.sqrt() - nu - 2.0) * 0.5).max(0.0).floor();
    let ln_peak = (2.0 * m0 + nu) * h.ln() - ln_gamma(m0 + 1.0) - ln_gamma(m0 + nu + 1.0) - x;
    let mut sum = 1.0;
    let mut term = 1.0;
    let mut m = m0;
    loop {
        term *= q / ((m + 1.0) * (m + nu + 1.0));
        m += 1.0;
        sum += term;
        if term <= 1e-17 * sum {
            break;
        }
    }
    let mut term = 1.0;
    let mut m = m0;
    while m >= 1.0 {
        term *= m * (m + nu) / q;
        m -= 1.0;
        sum += term;
        if term <= 1e-17 * sum {
            break;
        }
    }
    (ln_peak, sum)
}
