//! Quasi-periodic response solutions of strongly dissipative forced
//! oscillators `eps x'' + x' + eps g(x) = eps f(omega t)` and
//! `eps x'' + x' + eps h(x, omega t) = 0`, computed as convergent power series
//! in an auxiliary parameter and cross-checked against a tree expansion, a
//! direct fixed-point solve and time integration.

pub mod bifurcation;
pub mod diophantine;
pub mod error;
pub mod fourier;
pub mod problem;
pub mod range;
pub mod system;
pub mod trees;
pub mod validation;

pub use error::{Error, Result};
pub use fourier::{FourierSeries, MultiIndex};
