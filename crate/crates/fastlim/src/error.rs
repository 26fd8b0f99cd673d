//! Error type shared across the crate.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Invalid configuration: bad grid, malformed spec, mismatched inputs.
    #[error("configuration error: {0}")]
    Config(String),

    /// Initial data violates the segregation requirement u0*v0 = 0.
    #[error("segregation violated at node {index} ({location}): u0*v0 = {product:e}")]
    Segregation {
        index: usize,
        location: String,
        product: f64,
    },

    /// Initial data violates a structural assumption (u0 or v0 identically
    /// zero, negative values, u0 nonzero on the support of v0, ...).
    #[error("assumption violated: {0}")]
    Assumption(String),

    /// Scalar kernel called outside its domain.
    #[error("domain error: {0}")]
    Domain(String),

    /// A numerical procedure failed to reach its tolerance or budget.
    #[error("numerical failure: {0}")]
    Numerical(String),

    /// Min-patching failed: continuity or the delta-gap condition broke.
    #[error("patch failure at y={location:e}: {reason}")]
    Patch { location: f64, reason: String },
}

pub type Result<T> = std::result::Result<T, Error>;
