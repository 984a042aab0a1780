//! Core numerics for restriction and oscillatory-integral experiments.
//!
//! `no_std` with `alloc`: exact exponent arithmetic, Lorentz quasi-norms of step
//! functions, atomic measures with direct Fourier evaluation, smooth bumps,
//! log-log fits and phase-function checks.
#![no_std]
extern crate alloc;

pub mod bump;
pub mod error;
pub mod exponents;
pub mod field;
pub mod fit;
pub mod lorentz;
pub mod measure;
pub mod phase;
pub mod quad;
