//! CMV-type discrete-time quantum walk on the integer lattice with a
//! periodic diagonal local field.
//!
//! The walker carries a spin-1/2 internal degree of freedom; spin and site
//! are flattened into one "doubled" integer index (see [`lattice`]). The
//! one-step unitary is the product of a coin and a conditional shift and has
//! the five-diagonal CMV structure; multiplying by a diagonal unitary field
//! each step gives the driven walk.
//!
//! The crate provides:
//!
//! - exact algebra of periodic banded operators ([`bandop`]),
//! - constructors for the walk, field, and their building blocks ([`model`]),
//! - elementary symmetric polynomials of the non-commuting conjugated
//!   building blocks, their scalar collapse, recursions, and commutator
//!   bounds ([`sympoly`]),
//! - sparse state evolution, distributions, moments, and velocities
//!   ([`dynamics`]),
//! - executable checks for the transport bounds ([`verify`]).
//!
//! All computations are double-precision complex, sequential, and
//! deterministic: identical inputs (including seeds) give identical bytes.

pub mod bandop;
pub mod dynamics;
pub mod lattice;
pub mod model;
pub mod sympoly;
pub mod verify;

use thiserror::Error;

/// Errors surfaced by constructors and checks.
///
/// Numerical non-convergence of a norm estimate is not an error; it is
/// recorded on the estimate itself (see [`bandop::NormEstimate`]).
#[derive(Debug, Error)]
pub enum WalkError {
    /// A parameter violated a documented precondition.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// A symmetric-polynomial enumeration would exceed the term cap.
    #[error("enumeration of {terms} terms exceeds the cap of {cap}")]
    TermCapExceeded { terms: u128, cap: u64 },

    /// A window radius is too small to hold the operator's band.
    #[error("window radius {radius} sites is below the required {required}")]
    WindowTooSmall { radius: i64, required: i64 },

    /// Two independent constructions of the same operator disagree.
    /// This always signals an implementation bug, never bad input.
    #[error("{what}: independent constructions disagree by {max_dev:e}")]
    ConstructionMismatch { what: &'static str, max_dev: f64 },

    /// A state that must be normalized is not.
    #[error("state norm {norm} is not 1 within tolerance")]
    NotNormalized { norm: f64 },
}

pub type Result<T> = std::result::Result<T, WalkError>;
