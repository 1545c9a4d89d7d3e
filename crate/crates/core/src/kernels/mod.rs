//! Propagator kernels: heat and Schrödinger in series and closed forms, the
//! reduced kernel, the contour integrands, and the frequency-localised half-wave kernel.


mod halfwave;
mod heat;
mod integrands;
mod schrodinger;


pub use halfwave::{
    check_shell_coverage, halfwave_angular_coeffs, halfwave_kernel_truncated, resum_angular, spectral_kernel, HalfwaveWindow,
};
pub use heat::{heat_kernel_closed, heat_series_coeffs, heat_kernel_series, landau_heat_kernel};
pub use integrands::{a_integrand, a_integrand_c, b_integrand, b_integrand_c, cexpm1};
pub use schrodinger::{
    reduced_kernel, reduced_kernel_closed, reduced_series_coeffs, schrodinger_kernel_closed, schrodinger_kernel_series, schrodinger_prefactor,
};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sum::pairwise_sum_c;

/// Guard on |sin(tB0)| for the Schrödinger kernel.
pub const SINGULAR_GUARD: f64 = 1e-6;
/// Relative size of the angular-sum tail at which enlargement stops.
pub const TAIL_TOL: f64 = 1e-14;
const K_CAP: i64 = 200_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TruncationSpec {
    /// Initial angular cutoff |k| ≤ k_max; enlarged automatically.
    pub k_max: usize,
    /// Initial panel count of the adaptive s-integrals.
    pub quad_nodes: usize,
    /// Hard cap on |s| for the line and half-line integrals.
    pub s_max: f64,
}

impl Default for TruncationSpec {
    fn default() -> Self {
        Self { k_max: 40, quad_nodes: 16, s_max: 60.0 }
    }
}

impl TruncationSpec {
    pub fn new(k_max: usize, quad_nodes: usize, s_max: f64) -> Result<Self> {
        if k_max < 1 || quad_nodes < 16 || !(s_max >= 10.0) {
            return Err(Error::Config(format!(
                "truncation needs k_max >= 1, quad_nodes >= 16, s_max >= 10 (got {k_max}, {quad_nodes}, {s_max})"
            )));
        }
        Ok(Self { k_max, quad_nodes, s_max })
    }
}

/// A kernel value with its conditioning diagnostic.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KernelValue {
    pub value: Complex64,
    /// Largest modulus among the summed contributions.
    pub largest_term: f64,
    /// Truncation actually used (k_max after enlargement).
    pub truncation: TruncationSpec,
}

pub(crate) struct AngularSum {
    pub value: Complex64,
    pub largest: f64,
    pub k_used: i64,
}

/// Σ_k term(k), enlarging |k| ≤ K until the envelope tail on both sides is below
/// TAIL_TOL of the running magnitude. `ln_env(k)` bounds ln|term(k)| and must be
/// eventually decreasing with decreasing ratio.
pub(crate) fn angular_sum<T, E>(k_start: usize, term: T, ln_env: E) -> Result<AngularSum>
where
    T: Fn(i64) -> Result<Complex64>,
    E: Fn(i64) -> f64,
{
    let mut k_hi = k_start.max(1) as i64;
    let mut neg: Vec<Complex64> = Vec::new();
    let mut pos: Vec<Complex64> = vec![term(0)?];
    let mut filled = 0i64;
    loop {
        for k in (filled + 1)..=k_hi {
            pos.push(term(k)?);
            neg.push(term(-k)?);
        }
        filled = k_hi;
        let running: Complex64 = pos.iter().chain(neg.iter()).sum();
        let largest = pos.iter().chain(neg.iter()).map(|t| t.norm()).fold(0.0, f64::max);
        let tail = side_tail(k_hi, 1, &ln_env) + side_tail(k_hi, -1, &ln_env);
        let scale = running.norm().max(1e-300);
        if tail <= TAIL_TOL * scale || (largest == 0.0 && tail == 0.0) {
            // ascending order in k for a reproducible pairwise sum
            let mut ordered: Vec<Complex64> = neg.iter().rev().copied().collect();
            ordered.extend(pos.iter().copied());
            return Ok(AngularSum { value: pairwise_sum_c(&ordered), largest, k_used: k_hi });
        }
        if k_hi >= K_CAP {
            return Err(Error::Nonconvergence { terms: (2 * k_hi + 1) as usize, last_term: tail });
        }
        k_hi = (k_hi + (k_hi / 2).max(8)).min(K_CAP);
    }
}

fn side_tail<E: Fn(i64) -> f64>(k: i64, dir: i64, ln_env: &E) -> f64 {
    let e1 = ln_env(dir * (k + 1));
    let e2 = ln_env(dir * (k + 2));
    let e3 = ln_env(dir * (k + 3));
    if e1 == f64::NEG_INFINITY {
        return 0.0;
    }
    let r = (e2 - e1).exp();
    let r_next = (e3 - e2).exp();
    if r < 1.0 && r_next <= r * (1.0 + 1e-12) {
        e1.exp() / (1.0 - r)
    } else {
        f64::INFINITY
    }
}


/// A kernel in angular form e^{ln_scale} Σ_k c_k e^{ikδ/σ}, k = k_min, k_min+1, ….
#[derive(Debug, Clone, PartialEq)]
pub struct AngularSeries {
    pub k_min: i64,
    pub coeffs: Vec<Complex64>,
    pub ln_scale: f64,
    pub sigma: f64,
}

impl AngularSeries {
    /// Σ_k c_k e^{ikδ/σ} without the scale factor.
    pub fn resum(&self, delta: f64) -> Complex64 {
        let terms: Vec<Complex64> = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(i, c)| c * Complex64::from_polar(1.0, (self.k_min + i as i64) as f64 * delta / self.sigma))
            .collect();
        pairwise_sum_c(&terms)
    }

    pub fn eval(&self, delta: f64) -> Complex64 {
        self.resum(delta) * self.ln_scale.exp()
    }
}

/// Coefficients c_k = term(k) for |k| ≤ K with K enlarged until the envelope
/// tails fall below TAIL_TOL of the largest envelope value seen.
pub(crate) fn angular_coeffs<T, E>(k_start: usize, term: T, ln_env: E) -> Result<(i64, Vec<Complex64>)>
where
    T: Fn(i64) -> Result<Complex64>,
    E: Fn(i64) -> f64,
{
    let mut k_hi = k_start.max(1) as i64;
    loop {
        let peak = (-k_hi..=k_hi).map(&ln_env).fold(f64::NEG_INFINITY, f64::max);
        let tail = side_tail(k_hi, 1, &ln_env) + side_tail(k_hi, -1, &ln_env);
        if peak == f64::NEG_INFINITY || tail <= TAIL_TOL * peak.exp() {
            let coeffs = (-k_hi..=k_hi).map(&term).collect::<Result<Vec<_>>>()?;
            return Ok((-k_hi, coeffs));
        }
        if k_hi >= K_CAP {
            return Err(Error::Nonconvergence { terms: (2 * k_hi + 1) as usize, last_term: tail });
        }
        k_hi = (k_hi + (k_hi / 2).max(8)).min(K_CAP);
    }
}
