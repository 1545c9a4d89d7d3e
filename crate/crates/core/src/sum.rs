//! Deterministic pairwise summation.

use num_complex::Complex64;
use std::ops::Add;

const BLOCK: usize = 32;

fn pairwise<T: Copy + Add<Output = T>>(xs: &[T], zero: T) -> T {
    if xs.len() <= BLOCK {
        xs.iter().fold(zero, |a, &b| a + b)
    } else {
        let mid = xs.len() / 2;
        pairwise(&xs[..mid], zero) + pairwise(&xs[mid..], zero)
    }
}

pub fn pairwise_sum(xs: &[f64]) -> f64 {
    pairwise(xs, 0.0)
}

pub fn pairwise_sum_c(xs: &[Complex64]) -> Complex64 {
    pairwise(xs, Complex64::new(0.0, 0.0))
}

/// Max of a slice, propagating NaN.
pub fn max_nan(xs: &[f64]) -> f64 {
    let mut m = f64::NEG_INFINITY;
    for &x in xs {
        if x.is_nan() {
            return f64::NAN;
        }
        if x > m {
            m = x;
        }
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pairwise_matches_exact_integers() {
        let xs: Vec<f64> = (1..=1000).map(|i| i as f64).collect();
        assert_eq!(pairwise_sum(&xs), 500500.0);
        assert_eq!(pairwise_sum(&[]), 0.0);
    }

    #[test]
    fn max_propagates_nan() {
        assert!(max_nan(&[1.0, f64::NAN, 2.0]).is_nan());
        assert_eq!(max_nan(&[1.0, 3.0, 2.0]), 3.0);
    }
}
