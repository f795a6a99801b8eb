//! Jordan chains, multiplicities, contour indices and Birman-Schwinger chain
//! transfer for finite-dimensional operators and analytic matrix families.

pub mod bs;
pub mod contour;
pub mod error;
pub mod family;
pub mod jordan;
pub mod numerics;
pub mod schrodinger;
pub mod seeded;
pub mod wa;

pub use error::{Error, Result};
pub use num_complex::Complex64;
pub use numerics::{ComplexMatrix, ComplexVector, Contour};
