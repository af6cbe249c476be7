use thiserror::Error;

use crate::fourier::MultiIndex;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// Hypothesis 1/2 could not be certified (no simple zero of the averaged force).
    #[error("hypothesis not certified: {0}")]
    Hypothesis(String),

    /// A denominator vanished or a small divisor dropped to zero.
    #[error("resonance at mode {nu}: |omega . nu| = {value:e}")]
    Resonance { nu: MultiIndex, value: f64 },

    #[error("enumeration guard exceeded: l1 radius {radius} > {limit} for d = {dim}")]
    GuardExceeded {
        radius: u64,
        limit: u64,
        dim: usize,
    },

    /// The order ladder or a fixed-point iteration failed to contract.
    #[error("divergence: {0}")]
    Divergence(String),

    #[error("no root of the bifurcation equation in [{lo}, {hi}]")]
    RootNotFound { lo: f64, hi: f64 },

    #[error("bifurcation equation has {count} sign changes in [{lo}, {hi}]")]
    NonUniqueRoot { lo: f64, hi: f64, count: usize },

    #[error("reality symmetry violated: {0}")]
    Symmetry(String),

    #[error("integration failed: {0}")]
    Integration(String),

    #[error("tree enumeration refused: order {order} exceeds guard {guard}")]
    TreeGuard { order: usize, guard: usize },

    #[error("malformed json: {0}")]
    Json(#[from] serde_json::Error),
}
