//! Quadrature rules: Gauss-Legendre, generalized Gauss-Laguerre and an
//! adaptive Gauss-Kronrod integrator for complex integrands.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;

use crate::specfun::laguerre_function_table;

/// Nodes and weights of a quadrature rule.
#[derive(Debug, Clone, PartialEq)]
pub struct Rule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

/// n-point Gauss-Legendre rule on [−1, 1].
pub fn gauss_legendre(n: usize) -> Rule {
    assert!(n >= 1);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let nf = n as f64;
    for i in 0..(n + 1) / 2 {
        let mut x = (PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    Rule { nodes, weights }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    if n == 0 {
        return (1.0, 0.0);
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// The 16-point Gauss-Legendre rule, computed once.
pub fn gl16() -> &'static Rule {
    static R: OnceLock<Rule> = OnceLock::new();
    R.get_or_init(|| gauss_legendre(16))
}

/// Composite Gauss-Legendre on [a, b] with equal panels.
pub fn composite_gl<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, panels: usize, rule: &Rule) -> f64 {
    let h = (b - a) / panels as f64;
    let mut total = 0.0;
    for p in 0..panels {
        let lo = a + h * p as f64;
        let mid = lo + 0.5 * h;
        let mut s = 0.0;
        for (x, w) in rule.nodes.iter().zip(&rule.weights) {
            s += w * f(mid + 0.5 * h * x);
        }
        total += 0.5 * h * s;
    }
    total
}

/// Symmetric tridiagonal eigenvalues by implicit QL; `e[i]` couples i and i+1.
fn tridiagonal_eigenvalues(mut d: Vec<f64>, mut e: Vec<f64>) -> Vec<f64> {
    let n = d.len();
    e.resize(n, 0.0);
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            assert!(iter < 100, "QL iteration failed to converge");
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut i = m;
            let mut deflated = false;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    deflated = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
            }
            if deflated {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    d.sort_by(|a, b| a.partial_cmp(b).unwrap());
    d
}

/// Generalized Gauss-Laguerre rule. `scaled_weights[i]` = w_i x_i^{−α} e^{x_i},
/// which stays representable where w_i underflows.
#[derive(Debug, Clone, PartialEq)]
pub struct LaguerreRule {
    pub alpha: f64,
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    pub scaled_weights: Vec<f64>,
}

/// n-point generalized Gauss-Laguerre rule for the weight x^α e^{−x} on (0, ∞).
pub fn gauss_laguerre(n: usize, alpha: f64) -> LaguerreRule {
    assert!(n >= 1 && alpha > -1.0);
    let d: Vec<f64> = (0..n).map(|i| 2.0 * i as f64 + alpha + 1.0).collect();
    let e: Vec<f64> = (1..n).map(|i| (i as f64 * (i as f64 + alpha)).sqrt()).collect();
    let mut nodes = tridiagonal_eigenvalues(d, e);
    let nf = n as f64;
    for x in nodes.iter_mut() {
        for _ in 0..3 {
            let t = laguerre_function_table(alpha, n as u32, *x);
            let (ln, lnm1) = (t[n], t[n - 1]);
            if ln == 0.0 || lnm1 == 0.0 {
                break;
            }
            // L_{n−1}/L_n from the orthonormal functions
            let ratio = lnm1 / ln * (nf / (nf + alpha)).sqrt();
            let step = *x / (nf - (nf + alpha) * ratio);
            if !step.is_finite() || step.abs() > 0.1 * *x {
                break;
            }
            *x -= step;
            if step.abs() <= 1e-16 * *x {
                break;
            }
        }
    }
    // Christoffel numbers from the orthonormal functions
    let scaled_weights: Vec<f64> = nodes
        .iter()
        .map(|&x| {
            let t = laguerre_function_table(alpha, (n - 1) as u32, x);
            1.0 / t.iter().map(|v| v * v).sum::<f64>()
        })
        .collect();
    let weights = nodes
        .iter()
        .zip(&scaled_weights)
        .map(|(&x, s)| s * (alpha * x.ln() - x).exp())
        .collect();
    LaguerreRule { alpha, nodes, weights, scaled_weights }
}

type LaguerreKey = (usize, u64);

/// Cached generalized Gauss-Laguerre rules, keyed by (n, α bits).
pub fn gauss_laguerre_cached(n: usize, alpha: f64) -> Arc<LaguerreRule> {
    static CACHE: OnceLock<Mutex<HashMap<LaguerreKey, Arc<LaguerreRule>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let key = (n, alpha.to_bits());
    if let Some(r) = cache.lock().unwrap().get(&key) {
        return r.clone();
    }
    let rule = Arc::new(gauss_laguerre(n, alpha));
    cache.lock().unwrap().entry(key).or_insert(rule).clone()
}

const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

fn gk15<F: FnMut(f64) -> Complex64>(f: &mut F, a: f64, b: f64) -> (Complex64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = fc * WGK[7];
    let mut g = fc * WG[3];
    for j in 0..7 {
        let x = h * XGK[j];
        let s = f(c - x) + f(c + x);
        k += s * WGK[j];
        if j % 2 == 1 {
            g += s * WG[j / 2];
        }
    }
    (k * h, ((k - g) * h).norm())
}

/// Result of an adaptive integration.
#[derive(Debug, Clone, Copy)]
pub struct Integral {
    pub value: Complex64,
    pub error: f64,
    pub intervals: usize,
}

/// Globally adaptive Gauss-Kronrod (7/15) on [a, b] with break points.
/// Stops when the summed error estimate is below max(abs_tol, rel_tol·|I|).
pub fn adaptive_c<F: FnMut(f64) -> Complex64>(
    mut f: F,
    breaks: &[f64],
    abs_tol: f64,
    rel_tol: f64,
    max_intervals: usize,
) -> Integral {
    let mut segs: Vec<(f64, f64, Complex64, f64)> = Vec::new();
    for w in breaks.windows(2) {
        if w[1] > w[0] {
            let (v, e) = gk15(&mut f, w[0], w[1]);
            segs.push((w[0], w[1], v, e));
        }
    }
    loop {
        let total: Complex64 = segs.iter().map(|s| s.2).sum();
        let err: f64 = segs.iter().map(|s| s.3).sum();
        let done = err <= abs_tol.max(rel_tol * total.norm());
        if done || segs.len() >= max_intervals || segs.is_empty() {
            return Integral { value: total, error: err, intervals: segs.len() };
        }
        let (imax, _) = segs
            .iter()
            .enumerate()
            .fold((0, -1.0), |acc, (i, s)| if s.3 > acc.1 { (i, s.3) } else { acc });
        let (a, b, _, _) = segs[imax];
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            return Integral { value: total, error: err, intervals: segs.len() };
        }
        let (v1, e1) = gk15(&mut f, a, m);
        let (v2, e2) = gk15(&mut f, m, b);
        segs[imax] = (a, m, v1, e1);
        segs.push((m, b, v2, e2));
    }
}

/// Real-valued wrapper around [`adaptive_c`].
pub fn adaptive<F: FnMut(f64) -> f64>(mut f: F, breaks: &[f64], abs_tol: f64, rel_tol: f64) -> (f64, f64) {
    let r = adaptive_c(|x| Complex64::new(f(x), 0.0), breaks, abs_tol, rel_tol, 4000);
    (r.value.re, r.error)
}
