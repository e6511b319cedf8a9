//! Norms of Mahalanobis-Gaussian kernel machines.
//!
//! A kernel machine here is a finite combination `f = Σ αᵢ k_M(xᵢ, ·)` of
//! Gaussian kernel sections with an SPD Mahalanobis matrix `M`. This crate
//! computes two different size measures of such functions and the apparatus
//! connecting them:
//!
//! * the RKHS norm `‖f‖² = αᵀKα` via the Gram matrix ([`kernel`]);
//! * the second-order Radon-domain total variation RTV², the representational
//!   cost of `f` as an infinite-width shallow ReLU network, evaluated through
//!   its odd-dimension closed form as a sphere integral of Hermite-Gaussian
//!   mixtures ([`radon`], [`hermite`]);
//! * separated center constructions and spherical-cap geometry ([`geometry`]);
//! * a certified lower bound showing RTV² diverges along harmonic-coefficient
//!   machines whose RKHS norm stays bounded ([`bounds`], [`experiments`]).
//!
//! Everything is deterministic: Monte Carlo components take explicit seeds and
//! the experiment harness reproduces byte-identical CSV output.

pub mod bounds;
pub mod experiments;
pub mod geometry;
pub mod hermite;
pub mod kernel;
pub mod radon;

mod tridiag;

use thiserror::Error;

/// Errors shared across the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is asymmetric: |M[{row},{col}] - M[{col},{row}]| = {deviation:e}")]
    Asymmetric {
        row: usize,
        col: usize,
        deviation: f64,
    },

    #[error("matrix is not positive definite (min eigenvalue {lambda_min:e})")]
    NotPositiveDefinite { lambda_min: f64 },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("odd input dimension required, got d = {0}")]
    EvenDimension(usize),

    #[error("constant polynomial has no roots")]
    NoRoots,

    #[error("{name} must be positive, got {value}")]
    NonPositive { name: &'static str, value: f64 },

    #[error("{name} = {value} outside valid range {range}")]
    OutOfRange {
        name: &'static str,
        value: f64,
        range: &'static str,
    },

    #[error("kernel machine needs at least one center")]
    EmptyMachine,

    #[error("invalid machine spec: {0}")]
    Spec(String),

    #[error("lower-bound preconditions violated: {0}")]
    Preconditions(String),

    #[error("invalid experiment config: {0}")]
    Config(String),

    #[error("failed writing {path}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

/// Guard for parameters that must be strictly positive (NaN rejected).
#[allow(clippy::neg_cmp_op_on_partial_ord)]
pub(crate) fn ensure_positive(name: &'static str, value: f64) -> Result<()> {
    if !(value > 0.0) {
        Err(Error::NonPositive { name, value })
    } else {
        Ok(())
    }
}
