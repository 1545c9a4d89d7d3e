//! Cone parameters, points and the flat-cone metric.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// The triple (σ, B0, α): cone angle 2σπ, field strength and flux.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawCone")]
pub struct ConeConfig {
    pub sigma: f64,
    pub b0: f64,
    pub alpha: f64,
}

#[derive(Deserialize)]
struct RawCone {
    sigma: f64,
    b0: f64,
    alpha: f64,
}

impl TryFrom<RawCone> for ConeConfig {
    type Error = Error;
    fn try_from(r: RawCone) -> Result<Self> {
        ConeConfig::new(r.sigma, r.b0, r.alpha)
    }
}

impl ConeConfig {
    pub fn new(sigma: f64, b0: f64, alpha: f64) -> Result<Self> {
        if !(sigma.is_finite() && sigma >= 1.0) {
            return Err(Error::Config(format!("sigma must be >= 1, got {sigma}")));
        }
        if !(b0.is_finite() && b0 > 0.0) {
            return Err(Error::Config(format!("b0 must be > 0, got {b0}")));
        }
        if !(alpha.is_finite() && alpha > 0.0 && alpha < 1.0 / sigma) {
            return Err(Error::Config(format!(
                "alpha must lie strictly inside (0, 1/sigma) = (0, {}), got {alpha}",
                1.0 / sigma
            )));
        }
        Ok(Self { sigma, b0, alpha })
    }

    /// Angular period 2σπ.
    pub fn period(&self) -> f64 {
        2.0 * PI * self.sigma
    }

    /// k/σ + α.
    pub fn shifted(&self, k: i64) -> f64 {
        k as f64 / self.sigma + self.alpha
    }

    /// α_k = |k/σ + α|.
    pub fn alpha_k(&self, k: i64) -> f64 {
        self.shifted(k).abs()
    }

    /// The three reference configurations (σ, α, B0).
    pub fn reference() -> [ConeConfig; 3] {
        [
            ConeConfig::new(1.0, 1.0, 0.25).unwrap(),
            ConeConfig::new(1.5, 1.0, 0.4).unwrap(),
            ConeConfig::new(2.0, 0.5, 0.3).unwrap(),
        ]
    }
}

/// A point (r, θ) with θ stored in [0, 2σπ).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConePoint {
    r: f64,
    theta: f64,
}

impl ConePoint {
    pub fn new(r: f64, theta: f64, cfg: &ConeConfig) -> Result<Self> {
        if !(r.is_finite() && r >= 0.0) {
            return Err(Error::Domain(format!("radius must be >= 0, got {r}")));
        }
        if !theta.is_finite() {
            return Err(Error::Domain("angle must be finite".into()));
        }
        Ok(Self { r, theta: canonical_angle(theta, cfg.period()) })
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }
}

fn canonical_angle(theta: f64, period: f64) -> f64 {
    let t = theta.rem_euclid(period);
    // rem_euclid can round up to the period itself
    if t >= period {
        0.0
    } else {
        t
    }
}

/// The representative of t1 − t2 modulo 2σπ in (−σπ, σπ].
pub fn angular_difference(t1: f64, t2: f64, cfg: &ConeConfig) -> f64 {
    let period = cfg.period();
    let half = 0.5 * period;
    let mut d = (t1 - t2).rem_euclid(period);
    if d > half {
        d -= period;
    }
    if d <= -half {
        d += period;
    }
    d
}

/// Geodesic distance on the flat cone.
pub fn cone_distance(p: &ConePoint, q: &ConePoint, cfg: &ConeConfig) -> f64 {
    let delta = angular_difference(p.theta, q.theta, cfg).abs();
    if delta >= PI {
        return p.r + q.r;
    }
    if delta == 0.0 {
        return (p.r - q.r).abs();
    }
    // 4 r_p r_q sin²(δ/2) avoids cancellation for nearby points
    let s = (0.5 * delta).sin();
    let d2 = (p.r - q.r).powi(2) + 4.0 * p.r * q.r * s * s;
    d2.sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FluxDistance {
    pub kappa: f64,
}

/// κ_σ = dist(α, σ^{-1}ℤ).
pub fn kappa_sigma(cfg: &ConeConfig) -> FluxDistance {
    let bound = (cfg.sigma * cfg.alpha.abs()).ceil() as i64 + 1;
    let mut best = f64::INFINITY;
    for n in -bound..=bound {
        best = best.min((cfg.alpha - n as f64 / cfg.sigma).abs());
    }
    FluxDistance { kappa: best }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_parameters() {
        assert!(ConeConfig::new(0.5, 1.0, 0.1).is_err());
        assert!(ConeConfig::new(1.0, 0.0, 0.1).is_err());
        assert!(ConeConfig::new(2.0, 1.0, 0.5).is_err());
        assert!(ConeConfig::new(2.0, 1.0, 0.0).is_err());
        assert!(ConeConfig::new(2.0, 1.0, 0.49).is_ok());
    }

    #[test]
    fn deserializes_and_validates() {
        let c: ConeConfig = serde_json::from_str(r#"{"sigma":1.5,"b0":1,"alpha":0.4}"#).unwrap();
        assert_eq!(c.sigma, 1.5);
        assert!(serde_json::from_str::<ConeConfig>(r#"{"sigma":1.5,"b0":1,"alpha":0.9}"#).is_err());
    }

    #[test]
    fn angle_is_canonical() {
        let c = ConeConfig::new(1.5, 1.0, 0.4).unwrap();
        let p = ConePoint::new(1.0, -0.5, &c).unwrap();
        assert!((p.theta() - (3.0 * PI - 0.5)).abs() < 1e-14);
        let p = ConePoint::new(1.0, 3.0 * PI, &c).unwrap();
        assert_eq!(p.theta(), 0.0);
    }

    #[test]
    fn angular_difference_examples() {
        let c1 = ConeConfig::new(1.0, 1.0, 0.25).unwrap();
        assert_eq!(angular_difference(0.3, 0.3, &c1), 0.0);
        let c2 = ConeConfig::new(2.0, 1.0, 0.3).unwrap();
        assert!((angular_difference(0.0, 4.0 * PI - 0.1, &c2) - 0.1).abs() < 1e-12);
        let c3 = ConeConfig::new(1.5, 1.0, 0.4).unwrap();
        let d = angular_difference(1.5 * PI + 0.2, 0.0, &c3);
        // brute force over shifts
        let mut want = f64::NAN;
        for j in -3..=3 {
            let v = 1.5 * PI + 0.2 + j as f64 * 3.0 * PI;
            if v > -1.5 * PI && v <= 1.5 * PI {
                want = v;
            }
        }
        assert!((d - want).abs() < 1e-12);
        assert!((d - (-1.5 * PI + 0.2)).abs() < 1e-12);
    }

    #[test]
    fn distance_examples() {
        let c = ConeConfig::new(2.0, 1.0, 0.3).unwrap();
        let p = ConePoint::new(1.0, 0.0, &c).unwrap();
        let q = ConePoint::new(2.0, 0.0, &c).unwrap();
        assert_eq!(cone_distance(&p, &p, &c), 0.0);
        assert_eq!(cone_distance(&p, &q, &c), 1.0);
        let q = ConePoint::new(1.0, 2.0 * PI, &c).unwrap();
        assert_eq!(cone_distance(&p, &q, &c), 2.0);
    }

    #[test]
    fn kappa_examples() {
        let k = |s, a| kappa_sigma(&ConeConfig::new(s, 1.0, a).unwrap()).kappa;
        assert!((k(1.0, 0.25) - 0.25).abs() < 1e-15);
        assert!((k(2.0, 0.3) - 0.2).abs() < 1e-15);
        assert!((k(1.0, 0.5) - 0.5).abs() < 1e-15);
    }
}
