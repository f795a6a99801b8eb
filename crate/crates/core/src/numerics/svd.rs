//! Rank decisions and nullspaces by singular-value thresholding.

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::matrix::{ComplexMatrix, ComplexVector};
use crate::error::{Error, Result};

/// Default relative threshold for rank decisions.
pub const DEFAULT_REL_TOL: f64 = 1e-10;

/// Numerical rank and an orthonormal nullspace basis.
#[derive(Debug, Clone)]
pub struct RankNullspace {
    pub rank: usize,
    pub basis: Vec<ComplexVector>,
    /// Singular values in decreasing order (length `min(rows, cols)` of the padded square).
    pub singular_values: Vec<f64>,
}

fn to_nalgebra(m: &ComplexMatrix, rows: usize) -> DMatrix<Complex64> {
    // Zero rows pad a wide matrix to square so the SVD returns a full right basis.
    DMatrix::from_fn(rows, m.cols(), |i, j| if i < m.rows() { m[(i, j)] } else { Complex64::new(0.0, 0.0) })
}

/// Singular values of `m`, largest first.
pub fn singular_values(m: &ComplexMatrix) -> Vec<f64> {
    if m.rows() == 0 || m.cols() == 0 {
        return Vec::new();
    }
    let mut s: Vec<f64> = to_nalgebra(m, m.rows()).singular_values().iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

/// Rank of `m` (singular values above `rel_tol` times the largest) and an
/// orthonormal basis of its nullspace.
pub fn rank_nullspace(m: &ComplexMatrix, rel_tol: f64) -> Result<RankNullspace> {
    rank_nullspace_scaled(m, rel_tol, 0.0)
}

/// Like [`rank_nullspace`], with the threshold `rel_tol * max(largest, reference)`
/// so that a matrix that is tiny relative to its source counts as zero.
pub fn rank_nullspace_scaled(m: &ComplexMatrix, rel_tol: f64, reference: f64) -> Result<RankNullspace> {
    if !(rel_tol > 0.0 && rel_tol < 1.0) {
        return Err(Error::InvalidArgument(format!("rel_tol {rel_tol} not in (0, 1)")));
    }
    let n = m.cols();
    if n == 0 {
        return Ok(RankNullspace { rank: 0, basis: Vec::new(), singular_values: Vec::new() });
    }
    let padded_rows = m.rows().max(n);
    let svd = to_nalgebra(m, padded_rows).svd(false, true);
    let v_t = svd.v_t.expect("right singular vectors requested");
    let sigma: Vec<f64> = svd.singular_values.iter().copied().collect();
    let largest = sigma.iter().copied().fold(0.0, f64::max).max(reference);
    let threshold = rel_tol * largest;

    let mut rank = 0;
    let mut basis = Vec::new();
    for (k, &s) in sigma.iter().enumerate() {
        if largest > 0.0 && s > threshold {
            rank += 1;
        } else {
            // Rows of V^H are conjugated right singular vectors.
            let v: Vec<Complex64> = (0..n).map(|j| v_t[(k, j)].conj()).collect();
            basis.push(ComplexVector::new(v)?);
        }
    }
    let mut singular_values = sigma;
    singular_values.sort_by(|a, b| b.total_cmp(a));
    Ok(RankNullspace { rank, basis, singular_values })
}

/// Singular values (largest first) with the matching right singular vectors.
pub fn right_singular_pairs(m: &ComplexMatrix) -> Result<Vec<(f64, ComplexVector)>> {
    let n = m.cols();
    if n == 0 {
        return Ok(Vec::new());
    }
    let svd = to_nalgebra(m, m.rows().max(n)).svd(false, true);
    let v_t = svd.v_t.expect("right singular vectors requested");
    let mut pairs = Vec::with_capacity(n);
    for (k, &s) in svd.singular_values.iter().enumerate() {
        let v: Vec<Complex64> = (0..n).map(|j| v_t[(k, j)].conj()).collect();
        pairs.push((s, ComplexVector::new(v)?));
    }
    pairs.sort_by(|a, b| b.0.total_cmp(&a.0));
    Ok(pairs)
}
