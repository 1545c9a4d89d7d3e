//! Special functions: Pochhammer, log-Gamma, Laguerre, Kummer M, Tricomi U,
//! Bessel J_ν and modified Bessel I_ν.

mod bessel;
mod gamma;
mod hypergeom;
mod laguerre;

pub use bessel::{bessel_i, bessel_i_scaled, ln_bessel_i_scaled, bessel_j, j_order_bound};
pub use gamma::{binomial, gamma, ln_gamma, ln_gamma_signed, pochhammer};
pub use hypergeom::{kummer_m, tricomi_u};
pub use laguerre::{laguerre, laguerre_function_table, p_poly};

use num_complex::Complex64;
use serde::Serialize;

/// Value of a summed series plus its cancellation diagnostics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SeriesResult {
    pub value: Complex64,
    /// Largest modulus of any summed term.
    pub largest_term: f64,
    pub terms_used: usize,
}

/// Relative tail tolerance for ascending series.
pub const SERIES_TOL: f64 = 1e-16;
/// Hard cap on series length.
pub const SERIES_CAP: usize = 10_000;
