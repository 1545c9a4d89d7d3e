use super::gamma::{binomial, ln_gamma};

/// Generalized Laguerre polynomial L_m^α(x) by the three-term recurrence.
pub fn laguerre(alpha: f64, m: u32, x: f64) -> f64 {
    let mut prev = 1.0;
    if m == 0 {
        return prev;
    }
    let mut cur = 1.0 + alpha - x;
    for n in 1..m {
        let nf = n as f64;
        let next = ((2.0 * nf + 1.0 + alpha - x) * cur - (nf + alpha) * prev) / (nf + 1.0);
        prev = cur;
        cur = next;
    }
    cur
}

/// P(x) = C(m+α_k, m)^{-1} L_m^{α_k}(x) with α_k = |k/σ+α|, normalised so P(0) = 1.
pub fn p_poly(k_over_sigma_plus_alpha: f64, m: u32, x: f64) -> f64 {
    let a = k_over_sigma_plus_alpha.abs();
    laguerre(a, m, x) / binomial(m, a)
}

/// Orthonormal Laguerre functions sqrt(m!/Γ(m+α+1)) u^{α/2} e^{−u/2} L_m^α(u)
/// for m = 0..=m_max, computed with a rescaled recurrence.
pub fn laguerre_function_table(alpha: f64, m_max: u32, u: f64) -> Vec<f64> {
    let n = m_max as usize + 1;
    if u == 0.0 {
        let mut out = vec![0.0; n];
        if alpha == 0.0 {
            // ℓ_m(0) = sqrt(m!/m!)·L_m^0(0) = 1
            out.iter_mut().for_each(|v| *v = 1.0);
        }
        return out;
    }
    let mut scale = 0.5 * alpha * u.ln() - 0.5 * u - 0.5 * ln_gamma(alpha + 1.0);
    let mut out = Vec::with_capacity(n);
    let mut prev = 0.0;
    let mut cur = 1.0;
    out.push(scale.exp());
    const BIG: f64 = 1e200;
    let ln_big = BIG.ln();
    // the scaled pair (prev, cur) carries a factor exp(scale)
    for mi in 0..m_max {
        let m = mi as f64;
        let next = ((2.0 * m + 1.0 + alpha - u) * cur - (m * (m + alpha)).sqrt() * prev)
            / ((m + 1.0) * (m + 1.0 + alpha)).sqrt();
        prev = cur;
        cur = next;
        if cur.abs() > BIG {
            prev /= BIG;
            cur /= BIG;
            scale += ln_big;
        }
        out.push(if cur == 0.0 { 0.0 } else { cur.signum() * (cur.abs().ln() + scale).exp() });
    }
    out
}
