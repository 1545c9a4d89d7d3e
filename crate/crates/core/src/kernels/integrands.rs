use std::f64::consts::PI;

use num_complex::Complex64;

use crate::geometry::ConeConfig;

/// e^z − 1 without cancellation near z = 0.
pub fn cexpm1(z: Complex64) -> Complex64 {
    let (x, y) = (z.re, z.im);
    let s = (0.5 * y).sin();
    Complex64::new(x.exp_m1() * y.cos() - 2.0 * s * s, x.exp() * y.sin())
}

fn i() -> Complex64 {
    Complex64::new(0.0, 1.0)
}

/// True when φ is within rounding of 2πℤ.
fn on_lattice(phi: f64) -> bool {
    let r = phi.rem_euclid(2.0 * PI);
    r.min(2.0 * PI - r) < 1e-14
}

/// S(s, θ) = Σ_k e^{ikθ/σ} sin(πα_k) e^{−α_k s}, the half-line integrand of the
/// reduced Schrödinger kernel, for complex s with Re s ≥ 0.
pub fn a_integrand_c(s: Complex64, theta: f64, cfg: &ConeConfig) -> Complex64 {
    let (a, sig) = (cfg.alpha, cfg.sigma);
    let ia = i() * (a * PI);
    let base = Complex64::new((a * PI).sin(), 0.0) * (-s * a).exp();
    let plus_singular = on_lattice((theta + PI) / sig);
    let minus_singular = on_lattice((theta - PI) / sig);
    let half_i = Complex64::new(0.0, 2.0);
    let mut acc = Complex64::new(0.0, 0.0);
    // pair with φ₊ = (θ+π)/σ
    if plus_singular {
        acc += ia.exp() * (-2.0) * pair_ratio(s, a, sig);
    } else {
        let e1 = cexpm1((s - i() * (theta + PI)) / sig);
        let e4 = cexpm1((s + i() * (theta + PI)) / sig);
        acc += (ia - s * a).exp() / e1 - (s * a + ia).exp() / e4;
    }
    // pair with φ₋ = (θ−π)/σ
    if minus_singular {
        acc += (-ia).exp() * 2.0 * pair_ratio(s, a, sig);
    } else {
        let e2 = cexpm1((s - i() * (theta - PI)) / sig);
        let e3 = cexpm1((s + i() * (theta - PI)) / sig);
        acc += (s * a - ia).exp() / e3 - (-(s * a) - ia).exp() / e2;
    }
    base + acc / half_i
}

/// sinh(αs)/(e^{s/σ} − 1), with its limit ασ at s = 0.
fn pair_ratio(s: Complex64, a: f64, sig: f64) -> Complex64 {
    if s.norm() < 1e-300 {
        return Complex64::new(a * sig, 0.0);
    }
    (s * a).sinh() / cexpm1(s / sig)
}

/// Real-s form of [`a_integrand_c`].
pub fn a_integrand(s: f64, theta: f64, cfg: &ConeConfig) -> Complex64 {
    a_integrand_c(Complex64::new(s, 0.0), theta, cfg)
}

/// B(s, θ) = e^{αs}[e^{iαπ}/(e^{(s−τ+i(θ+π))/σ} − 1) − e^{−iαπ}/(e^{(s−τ+i(θ−π))/σ} − 1)], τ = tB0,
/// the line integrand of the closed heat kernel, for complex s.
pub fn b_integrand_c(s: Complex64, theta: f64, t: f64, cfg: &ConeConfig) -> Complex64 {
    let (a, sig) = (cfg.alpha, cfg.sigma);
    let tau = t * cfg.b0;
    let ia = i() * (a * PI);
    let z = s - tau;
    let f1 = ia.exp() / cexpm1((z + i() * (theta + PI)) / sig);
    let f2 = (-ia).exp() / cexpm1((z + i() * (theta - PI)) / sig);
    (s * a).exp() * (f1 - f2)
}

pub fn b_integrand(s: f64, theta: f64, t: f64, cfg: &ConeConfig) -> Complex64 {
    b_integrand_c(Complex64::new(s, 0.0), theta, t, cfg)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn series_s(s: f64, theta: f64, cfg: &ConeConfig) -> Complex64 {
        (-400i64..=400)
            .map(|k| {
                let ak = cfg.alpha_k(k);
                Complex64::from_polar((PI * ak).sin() * (-ak * s).exp(), k as f64 * theta / cfg.sigma)
            })
            .sum()
    }

    #[test]
    fn expm1_is_accurate_near_zero() {
        let z = Complex64::new(1e-10, -2e-10);
        let v = cexpm1(z);
        let want = z + z * z / 2.0;
        assert!((v - want).norm() < 1e-25);
        let z = Complex64::new(0.7, 2.1);
        assert!((cexpm1(z) - (z.exp() - 1.0)).norm() < 1e-15);
    }

    #[test]
    fn a_integrand_matches_mode_series() {
        for cfg in ConeConfig::reference() {
            for &theta in &[0.0, 0.4, -2.0, 3.0, 5.5] {
                for &s in &[0.3, 1.0, 4.0] {
                    let a = a_integrand(s, theta, &cfg);
                    let b = series_s(s, theta, &cfg);
                    assert!((a - b).norm() < 1e-12 * (1.0 + b.norm()), "{cfg:?} θ={theta} s={s}: {a} {b}");
                }
            }
        }
    }

    #[test]
    fn a_integrand_removable_point() {
        let cfg = ConeConfig::new(1.0, 1.0, 0.25).unwrap();
        // θ = π: the φ₊ pair is singular at s = 0 but cancels
        let v0 = a_integrand(0.0, PI, &cfg);
        let v1 = a_integrand(1e-7, PI, &cfg);
        assert!(v0.is_finite() && (v0 - v1).norm() < 1e-5);
        let far = a_integrand(1.0, PI, &cfg);
        assert!((far - series_s(1.0, PI, &cfg)).norm() < 1e-12);
    }

    #[test]
    fn a_integrand_decays_exponentially() {
        let cfg = ConeConfig::new(1.5, 1.0, 0.4).unwrap();
        let rate = cfg.alpha.min(1.0 / cfg.sigma - cfg.alpha);
        for &s in &[10.0, 20.0, 40.0] {
            let v = a_integrand(s, 1.0, &cfg).norm();
            assert!(v <= 4.0 * (-rate * s).exp(), "s={s} |A|={v}");
        }
    }

    #[test]
    fn b_integrand_properties() {
        let cfg = ConeConfig::new(1.0, 1.0, 0.25).unwrap();
        let (s, t) = (1.0, 1.0);
        let x = Complex64::new(s - t, PI).exp();
        let y = Complex64::new(s - t, -PI).exp();
        let f1 = 1.0 / (x - 1.0);
        let f2 = 1.0 / (y - 1.0);
        assert!((f1 - f2.conj()).norm() < 1e-15);
        let ph = Complex64::from_polar(1.0, cfg.alpha * PI);
        let direct = (cfg.alpha * s).exp() * (ph * f1 - ph.conj() * f2);
        assert!((b_integrand(s, 0.0, t, &cfg) - direct).norm() < 1e-14);
        let tiny = ConeConfig::new(1.0, 1.0, 1e-12).unwrap();
        let v = b_integrand(s, 0.0, t, &tiny);
        assert!((v - (f1 - f2)).norm() < 1e-10);
        for &s in &[10.0, 20.0] {
            let v = b_integrand(s, 0.5, 1.0, &ConeConfig::new(1.5, 1.0, 0.4).unwrap()).norm();
            assert!(v <= 4.0 * ((0.4 - 1.0 / 1.5) * (s - 1.0)).exp());
        }
    }
}
