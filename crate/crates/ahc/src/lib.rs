//! Numerical laboratory for the effective (homogenized) surface tension of
//! scalar phase-transition energies in stationary random media.
//!
//! The energy of a configuration `u : A -> [-1,1]` is
//! `F(u; A) = sum over cells of (1/2) phi(x, Du)^2 + W(u)`, where `phi` is a
//! per-point norm sampled from a stationary random field and `W` is a
//! double-well potential. The crate discretizes cylinder domains aligned with
//! a direction `e`, minimizes `F` under planar Dirichlet data, and runs the
//! sweep procedures (growing cross-section, growing height, direction scans)
//! that estimate the deterministic surface tension together with checks of
//! the structural properties the estimates must satisfy (upper bound,
//! near-monotonicity in height, subadditivity, convexity of the direction
//! dependence).

pub mod cli;
pub mod config;
pub mod glue;
pub mod grid;
pub mod homogenize;
pub mod medium;
pub mod potential;
pub mod solve;

mod hashrng;

pub use medium::{FinslerMedium, MediumKind, MediumSpec};
pub use potential::{DoubleWell, TransitionProfile};

use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum AhcError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("config error at `{key}`: {msg}")]
    Config { key: String, msg: String },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("ill-conditioned fit: {0}")]
    IllConditionedFit(String),
    #[error("missing output: {0}")]
    MissingOutput(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, AhcError>;
