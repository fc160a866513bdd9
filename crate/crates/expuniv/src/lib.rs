//! Numerical laboratory for entire functions of exponential type under the
//! translation operator `f ↦ f(·+1)`.
//!
//! The crate provides:
//! - convex compacts in the plane with exact polytope support functions
//!   ([`geometry`]),
//! - closed-form algebra and stable evaluation of exponential polynomials and
//!   the building blocks `(e^{αz}−1)²/z²` ([`expfun`]),
//! - the weighted sup-norm family of `Exp(K)`, series/convergence checks and a
//!   least-squares density surrogate ([`expk`]),
//! - Borel and transposed Borel transforms with closed forms for exponential
//!   polynomials ([`borel`]),
//! - construction of truncated frequently-universal candidates on
//!   positive-lower-density schedules with recurrence and growth measurement
//!   ([`fhc`]),
//! - argument-principle zero location, the numerical Carleman identity and the
//!   zero-density obstruction bound ([`carleman`]).

pub mod borel;
pub mod carleman;
pub mod cjson;
pub mod cli;
pub mod expfun;
pub mod expk;
pub mod fhc;
pub mod geometry;

use num_complex::Complex64;
use thiserror::Error;

/// Shorthand for the plane points used throughout (`z`, `α`, `β`, ...).
pub type C = Complex64;

#[derive(Debug, Error)]
pub enum Error {
    #[error("empty input: {0}")]
    EmptyInput(&'static str),
    #[error("evaluation overflow: |Re(exponent)| = {0} exceeds the exponent range")]
    Overflow(f64),
    #[error("function is not a member of Exp(K): witness direction theta = {theta}")]
    NotMember { theta: f64 },
    #[error("norm unbounded along direction theta = {theta} (exponent gap {gap})")]
    Unbounded { theta: f64, gap: f64 },
    #[error("least-squares system is rank deficient (pivot {pivot:e})")]
    RankDeficient { pivot: f64 },
    #[error("zero on integration boundary persists after {0} jiggles")]
    BoundaryZero(usize),
    #[error("argument out of range: {0}")]
    OutOfRange(String),
    #[error("identically zero function has no frequency hull")]
    ZeroFunction,
    #[error("target {0} violates membership in K")]
    TargetNotInK(usize),
    #[error("horizon {horizon} too small for {targets} targets with gap {gap}")]
    HorizonTooSmall {
        horizon: usize,
        targets: usize,
        gap: usize,
    },
    #[error("series truncation outside the convergence region: |z| = {z_abs} vs type {tau}")]
    SeriesDivergent { z_abs: f64, tau: f64 },
    #[error("quadrature node failure at t = {0}")]
    QuadratureNode(f64),
}

pub type Result<T> = std::result::Result<T, Error>;
