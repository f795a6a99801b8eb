//! Dense complex linear algebra, Bessel functions and circle quadrature.

pub mod bessel;
pub mod lu;
pub mod matrix;
pub mod quadrature;
pub mod svd;

pub use bessel::{bessel_j, bessel_j_orders};
pub use lu::{fold_phase, inverse, log_det, lu_factor, solve, LuFactors};
pub use matrix::{ComplexMatrix, ComplexVector};
pub use quadrature::{circle_integral, circle_integral_scalar, Contour};
pub use svd::{rank_nullspace, rank_nullspace_scaled, right_singular_pairs, singular_values, RankNullspace, DEFAULT_REL_TOL};
