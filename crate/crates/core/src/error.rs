use num_complex::Complex64;
use thiserror::Error;

/// Errors raised by the spectral toolkit.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("non-finite entry in {0}")]
    NonFinite(&'static str),

    #[error("matrix is numerically singular (pivot {pivot:e} at step {step})")]
    SingularMatrix { step: usize, pivot: f64 },

    #[error("argument outside the documented validity window: {0}")]
    DomainExceeded(String),

    #[error("point {z} lies outside the domain of the family")]
    DomainError { z: Complex64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("Laurent coefficients did not stabilize (last change {change:e})")]
    QuadratureDivergence { change: f64 },

    #[error("index is not an integer: raw value {raw}, residual {residual:e}")]
    NonIntegralIndex { raw: Complex64, residual: f64 },

    #[error("family is singular on the contour at node {node} (z = {z})")]
    SingularOnContour { node: usize, z: Complex64 },

    #[error("function vanishes on the contour at z = {z}")]
    ZeroOnContour { z: Complex64 },

    #[error("phase increment {increment:.3} exceeds pi/2 with {nodes} nodes")]
    PhaseJump { increment: f64, nodes: usize },

    #[error("input is not a Jordan chain (residual {residual:e})")]
    NotAChain { residual: f64 },

    #[error("eigenvector image vanishes (norm {norm:e})")]
    VanishingEigenvector { norm: f64 },

    #[error("algebraic multiplicity is not finite")]
    InfiniteMultiplicity,

    #[error("identity `{name}` violated: residual {residual:e}")]
    IdentityResidualExceeded { name: String, residual: f64 },

    #[error("eigenfunction vanishes identically for zero coupling")]
    DegenerateEigenfunction,

    #[error("generalized eigenfunction requires nonzero coupling")]
    ZeroCoupling,
}

pub type Result<T> = std::result::Result<T, Error>;
