use std::f64::consts::PI;

use magcone::geometry::{angular_difference, cone_distance, kappa_sigma, ConeConfig, ConePoint};
use magcone::kernels::{heat_kernel_closed, heat_kernel_series, heat_series_coeffs, schrodinger_kernel_series, TruncationSpec};
use magcone::lpbesov::{bernstein_ratio, dyadic_phi, littlewood_paley_piece, packet_covered, shell_range};
use magcone::quad::adaptive_c;
use magcone::spectrum::{mode_data, spectral_apply, synthesize, ModeIndex, QuadratureSpec, SpectralField, Window};
use magcone::verify::{dispersive_constant_schrodinger, weighted_dispersive_constant, SweepGrid};
use num_complex::Complex64;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn admissible() -> impl Strategy<Value = ConeConfig> {
    (1.0f64..4.0, 0.2f64..3.0, 0.01f64..0.99).prop_map(|(s, b, a)| ConeConfig::new(s, b, a / s).unwrap())
}

fn point(cfg: ConeConfig) -> impl Strategy<Value = ConePoint> {
    (0.0f64..5.0, 0.0f64..1.0).prop_map(move |(r, u)| ConePoint::new(r, u * cfg.period(), &cfg).unwrap())
}

fn triple() -> impl Strategy<Value = (ConeConfig, ConePoint, ConePoint, ConePoint)> {
    admissible().prop_flat_map(|c| (Just(c), point(c), point(c), point(c)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn distance_is_a_metric((cfg, p, q, s) in triple()) {
        let d = |a: &ConePoint, b: &ConePoint| cone_distance(a, b, &cfg);
        prop_assert!((d(&p, &q) - d(&q, &p)).abs() <= 1e-12);
        prop_assert!(d(&p, &s) <= d(&p, &q) + d(&q, &s) + 1e-12);
        prop_assert!(d(&p, &q) >= 0.0);
    }

    #[test]
    fn distance_along_a_ray(cfg in admissible(), r1 in 0.0f64..10.0, r2 in 0.0f64..10.0, u in 0.0f64..1.0) {
        let th = u * cfg.period();
        let p = ConePoint::new(r1, th, &cfg).unwrap();
        let q = ConePoint::new(r2, th, &cfg).unwrap();
        prop_assert_eq!(cone_distance(&p, &q, &cfg), (r1 - r2).abs());
    }

    #[test]
    fn flux_distance_is_at_most_half_spacing(cfg in admissible()) {
        let k = kappa_sigma(&cfg).kappa;
        prop_assert!(k > 0.0 && k <= 0.5 / cfg.sigma + 1e-15);
    }

    #[test]
    fn angular_difference_is_canonical(cfg in admissible(), a in -50.0f64..50.0, b in -50.0f64..50.0) {
        let d = angular_difference(a, b, &cfg);
        let half = PI * cfg.sigma;
        prop_assert!(d > -half && d <= half);
        let n = ((a - b - d) / cfg.period()).round();
        prop_assert!((a - b - d - n * cfg.period()).abs() < 1e-9);
    }

    #[test]
    fn lowest_landau_levels_are_exact(cfg in admissible(), k in -200i64..=-1, m in 0u32..50) {
        let lam = mode_data(ModeIndex::new(k, m), &cfg).lambda;
        if (k as f64) / cfg.sigma + cfg.alpha < 0.0 {
            prop_assert_eq!(lam, (2.0 * m as f64 + 1.0) * cfg.b0);
        }
    }

    #[test]
    fn partition_of_unity(x in -12.0f64..12.0) {
        let lambda = 2f64.powf(x);
        let s: f64 = (-20..=20).map(|j| dyadic_phi(lambda * 2f64.powi(-j))).sum();
        prop_assert!((s - 1.0).abs() < 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn heat_kernel_is_hermitian_and_representations_agree(
        cfg in admissible(),
        tau in 0.2f64..3.0,
        r1 in 0.1f64..2.0, r2 in 0.1f64..2.0, u1 in 0.0f64..1.0, u2 in 0.0f64..1.0,
    ) {
        let tr = TruncationSpec::default();
        let s = 1.0 / cfg.b0.sqrt();
        let p = ConePoint::new(r1 * s, u1 * cfg.period(), &cfg).unwrap();
        let q = ConePoint::new(r2 * s, u2 * cfg.period(), &cfg).unwrap();
        let t = tau / cfg.b0;
        let a = heat_kernel_series(t, &p, &q, &cfg, &tr).unwrap().value;
        let b = heat_kernel_series(t, &q, &p, &cfg, &tr).unwrap().value;
        prop_assert!((a - b.conj()).norm() <= 1e-12 * a.norm());
        let c = heat_kernel_closed(t, &p, &q, &cfg, &tr).unwrap().value;
        prop_assert!((a - c).norm() <= 1e-8 * a.norm(), "{} vs {}", a, c);
    }

    #[test]
    fn schrodinger_time_reversal(
        cfg in admissible(),
        tau in 0.25f64..2.9,
        r1 in 0.1f64..2.0, r2 in 0.1f64..2.0, u1 in 0.0f64..1.0, u2 in 0.0f64..1.0,
    ) {
        let tr = TruncationSpec::default();
        let s = 1.0 / cfg.b0.sqrt();
        let p = ConePoint::new(r1 * s, u1 * cfg.period(), &cfg).unwrap();
        let q = ConePoint::new(r2 * s, u2 * cfg.period(), &cfg).unwrap();
        let t = tau / cfg.b0;
        let a = schrodinger_kernel_series(t, &p, &q, &cfg, &tr).unwrap().value;
        let b = schrodinger_kernel_series(-t, &q, &p, &cfg, &tr).unwrap().value;
        prop_assert!((a - b.conj()).norm() <= 1e-12 * a.norm());
    }

    #[test]
    fn multipliers_compose(cfg in admissible(), seed in 0u64..1000, t1 in 0.0f64..2.0, t2 in 0.0f64..2.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let f = SpectralField::random(cfg, Window::symmetric(5, 5), &mut rng);
        let heat = |t: f64| move |l: f64| Complex64::new((-t * l).exp(), 0.0);
        let once = spectral_apply(heat(t1 + t2), &f);
        let twice = spectral_apply(heat(t2), &spectral_apply(heat(t1), &f));
        for (a, b) in once.coeffs().iter().zip(twice.coeffs()) {
            prop_assert!((a - b).norm() <= 1e-14);
        }
        let pieces: Vec<SpectralField> = (-4..=8).map(|j| littlewood_paley_piece(&f, j)).collect();
        for (i, c) in f.coeffs().iter().enumerate() {
            let s: Complex64 = pieces.iter().map(|p| p.coeffs()[i]).sum();
            prop_assert!((s - c).norm() <= 1e-12);
        }
    }
}

/// ∫_X K^H_t(p, y) f(y) dy for a band-limited f against e^{−tH}f evaluated at p.
#[test]
fn heat_kernel_acts_like_the_multiplier() {
    let tr = TruncationSpec::default();
    for cfg in ConeConfig::reference() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let f = SpectralField::random(cfg, Window::symmetric(2, 2), &mut rng);
        let t = 0.6 / cfg.b0;
        let p = ConePoint::new(0.9 / cfg.b0.sqrt(), 1.1, &cfg).unwrap();
        let n_theta = 64;
        let inner = |r: f64| -> Complex64 {
            if r == 0.0 {
                return Complex64::new(0.0, 0.0);
            }
            let k = heat_series_coeffs(t, p.r(), r, &cfg, &tr).unwrap();
            let sum: Complex64 = (0..n_theta)
                .map(|i| {
                    let th = cfg.period() * i as f64 / n_theta as f64;
                    k.eval(p.theta() - th) * synthesize(&f, &ConePoint::new(r, th, &cfg).unwrap())
                })
                .sum();
            sum * (cfg.period() / n_theta as f64 * r)
        };
        let reach = 14.0 / cfg.b0.sqrt();
        let breaks: Vec<f64> = (0..=20).map(|i| reach * i as f64 / 20.0).collect();
        let integral = adaptive_c(inner, &breaks, 0.0, 1e-10, 2000).value;
        let direct = synthesize(&spectral_apply(|l| Complex64::new((-t * l).exp(), 0.0), &f), &p);
        assert!((integral - direct).norm() < 1e-6 * direct.norm(), "{cfg:?}: {integral} vs {direct}");
    }
}

#[test]
fn bernstein_ratio_is_uniform_across_shells() {
    let w = Window::symmetric(48, 40);
    let quad = QuadratureSpec { n_rad: 120, n_ang: 128 };
    for cfg in ConeConfig::reference() {
        let (lo, hi) = shell_range(&w, &cfg).unwrap();
        let ratios: Vec<(i32, f64)> = (lo.max(-1)..=hi.min(4))
            .filter(|&j| packet_covered(j, &w, &cfg))
            .filter_map(|j| bernstein_ratio(j, f64::INFINITY, 1.0, &cfg, w, quad, 2, 9).ok().map(|r| (j, r)))
            .collect();
        assert!(ratios.len() >= 2, "{cfg:?}: {ratios:?}");
        let max = ratios.iter().map(|r| r.1).fold(0.0, f64::max);
        let min = ratios.iter().map(|r| r.1).fold(f64::INFINITY, f64::min);
        assert!(max / min < 4.0, "{cfg:?}: {ratios:?}");
    }
}

#[test]
fn sweeps_are_deterministic_and_agree_at_zero_weight() {
    let cfg = ConeConfig::reference()[1];
    let tr = TruncationSpec::default();
    let g = SweepGrid { n_t: 3, n_r: 3, n_theta: 8, r_max: 2.0 };
    let a = dispersive_constant_schrodinger(&cfg, &g, &tr).unwrap();
    let b = dispersive_constant_schrodinger(&cfg, &g, &tr).unwrap();
    let mut ca = Vec::new();
    let mut cb = Vec::new();
    a.write_samples_csv(&mut ca).unwrap();
    b.write_samples_csv(&mut cb).unwrap();
    assert_eq!(ca, cb);
    assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
    let w = weighted_dispersive_constant(&cfg, 0.0, &g, &tr).unwrap();
    assert!((w.empirical_constant - a.empirical_constant).abs() <= 1e-12 * a.empirical_constant);
}
