//! Spectral theory and propagator kernels for the magnetic Schrödinger operator
//! with an Aharonov-Bohm flux and a uniform field on the flat cone of angle 2σπ.
//!
//! The crate is organised bottom-up: [`specfun`] and [`quad`] provide the
//! numerics, [`spectrum`] the exact eigen-decomposition, [`kernels`] the heat,
//! Schrödinger and frequency-localised half-wave kernels, [`lpbesov`] the
//! dyadic calculus, and [`verify`] turns the decay estimates into sweeps.

pub mod cli;
pub mod config;
pub mod error;
pub mod geometry;
pub mod kernels;
pub mod lpbesov;
pub mod quad;
pub mod specfun;
pub mod spectrum;
pub mod sum;
pub mod verify;

pub use error::{Error, Result};
pub use geometry::{ConeConfig, ConePoint};
pub use num_complex::Complex64;
