//! Crate-wide error type.

use thiserror::Error;

/// Errors produced by solvers, constants lookups, and verification drivers.
#[derive(Debug, Clone, Error)]
pub enum Error {
    /// Parameters outside the admissible domain (n < 3, eps out of range, ...).
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    /// Adaptive step control underflowed the minimum step size.
    #[error("step control underflow at r = {r}: required step {step} below floor")]
    NonConvergence { r: f64, step: f64 },

    /// The stop rule did not fire before the integration ceiling.
    #[error("stop rule not reached before r = {ceiling} (got {found} of the requested events)")]
    StopNotReached { ceiling: f64, found: usize },

    /// Two events coincide within refinement tolerance; the step grid is too
    /// coarse to separate them.
    #[error("ambiguous events near r = {r}: two sign changes within tolerance {tol}")]
    AmbiguousEvent { r: f64, tol: f64 },

    /// Evaluation outside the integrated range.
    #[error("radius {r} outside the integrated range [0, {r_end}]")]
    OutOfRange { r: f64, r_end: f64 },

    /// Constant requested outside the index family stated by the limit theorems.
    #[error("index k = {k} outside the valid range {lo}..={hi} for {family}")]
    IndexError {
        family: &'static str,
        k: usize,
        lo: usize,
        hi: usize,
    },

    /// Nonpositive or non-finite argument to a special function.
    #[error("special function argument out of domain: {0}")]
    DomainError(String),

    /// Adaptive quadrature failed to reach the requested tolerance.
    #[error("quadrature did not converge on [{a}, {b}]: error estimate {estimate}")]
    QuadratureFailure { a: f64, b: f64, estimate: f64 },

    /// Rate fit impossible (nonpositive data or too few points).
    #[error("degenerate rate fit: {0}")]
    DegenerateFit(String),

    /// A sweep aborted because one epsilon failed.
    #[error("sweep aborted at eps = {eps}: {source}")]
    SweepAborted {
        eps: f64,
        #[source]
        source: Box<Error>,
    },
}

pub type Result<T> = std::result::Result<T, Error>;
