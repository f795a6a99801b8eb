//! Partial-pivoted LU factorization and the solves and determinants built on it.

use std::f64::consts::PI;

use num_complex::Complex64;

use super::matrix::{ComplexMatrix, ComplexVector};
use crate::error::{Error, Result};

/// Pivots smaller than this multiple of the largest input entry flag singularity.
pub const PIVOT_TOLERANCE: f64 = 1e-14;

/// `P * M = L * U` with `L` unit lower triangular, stored together in `combined`.
#[derive(Debug, Clone)]
pub struct LuFactors {
    combined: ComplexMatrix,
    /// `perm[i]` is the row of the input that ended up in row `i`.
    perm: Vec<usize>,
    parity: i8,
}

/// Factors a square matrix with partial pivoting.
pub fn lu_factor(m: &ComplexMatrix) -> Result<LuFactors> {
    if !m.is_square() {
        return Err(Error::DimensionMismatch(format!("LU of a {}x{} matrix", m.rows(), m.cols())));
    }
    let n = m.rows();
    let scale = m.max_abs();
    let mut a = m.clone();
    let mut perm: Vec<usize> = (0..n).collect();
    let mut parity = 1i8;

    for k in 0..n {
        let (p, pivot_abs) = (k..n)
            .map(|i| (i, a[(i, k)].norm()))
            .fold((k, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
        if pivot_abs <= PIVOT_TOLERANCE * scale || pivot_abs == 0.0 {
            return Err(Error::SingularMatrix { step: k, pivot: pivot_abs });
        }
        if p != k {
            for j in 0..n {
                let tmp = a[(k, j)];
                a[(k, j)] = a[(p, j)];
                a[(p, j)] = tmp;
            }
            perm.swap(k, p);
            parity = -parity;
        }
        let pivot = a[(k, k)];
        for i in k + 1..n {
            let factor = a[(i, k)] / pivot;
            a[(i, k)] = factor;
            if factor == Complex64::new(0.0, 0.0) {
                continue;
            }
            for j in k + 1..n {
                let u = a[(k, j)];
                a[(i, j)] -= factor * u;
            }
        }
    }
    Ok(LuFactors { combined: a, perm, parity })
}

impl LuFactors {
    pub fn dim(&self) -> usize {
        self.perm.len()
    }

    pub fn permutation(&self) -> &[usize] {
        &self.perm
    }

    /// Sign of the row permutation.
    pub fn parity(&self) -> i8 {
        self.parity
    }

    pub fn lower(&self) -> ComplexMatrix {
        let n = self.dim();
        ComplexMatrix::from_fn(n, n, |i, j| match i.cmp(&j) {
            std::cmp::Ordering::Greater => self.combined[(i, j)],
            std::cmp::Ordering::Equal => Complex64::new(1.0, 0.0),
            std::cmp::Ordering::Less => Complex64::new(0.0, 0.0),
        })
    }

    pub fn upper(&self) -> ComplexMatrix {
        let n = self.dim();
        ComplexMatrix::from_fn(n, n, |i, j| if i <= j { self.combined[(i, j)] } else { Complex64::new(0.0, 0.0) })
    }

    /// Applies the row permutation to `m`, giving `P * m`.
    pub fn permute_rows(&self, m: &ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix::from_fn(m.rows(), m.cols(), |i, j| m[(self.perm[i], j)])
    }

    /// Determinant computed directly from the factors.
    pub fn determinant(&self) -> Complex64 {
        let prod: Complex64 = (0..self.dim()).map(|i| self.combined[(i, i)]).product();
        prod * f64::from(self.parity)
    }

    fn solve_in_place(&self, x: &mut [Complex64]) {
        let n = self.dim();
        for i in 0..n {
            let mut s = x[i];
            for j in 0..i {
                s -= self.combined[(i, j)] * x[j];
            }
            x[i] = s;
        }
        for i in (0..n).rev() {
            let mut s = x[i];
            for j in i + 1..n {
                s -= self.combined[(i, j)] * x[j];
            }
            x[i] = s / self.combined[(i, i)];
        }
    }

    pub fn solve_vec(&self, b: &ComplexVector) -> Result<ComplexVector> {
        if b.len() != self.dim() {
            return Err(Error::DimensionMismatch(format!("rhs of length {} for dimension {}", b.len(), self.dim())));
        }
        let mut x: Vec<Complex64> = self.perm.iter().map(|&p| b[p]).collect();
        self.solve_in_place(&mut x);
        ComplexVector::new(x)
    }
}

/// Solves `M X = B` given the factors of `M`.
pub fn solve(lu: &LuFactors, b: &ComplexMatrix) -> Result<ComplexMatrix> {
    let n = lu.dim();
    if b.rows() != n {
        return Err(Error::DimensionMismatch(format!("rhs with {} rows for dimension {n}", b.rows())));
    }
    let cols = b.cols();
    let mut out = ComplexMatrix::zeros(n, cols);
    let mut x = vec![Complex64::new(0.0, 0.0); n];
    for j in 0..cols {
        for i in 0..n {
            x[i] = b[(lu.perm[i], j)];
        }
        lu.solve_in_place(&mut x);
        if x.iter().any(|z| !z.is_finite()) {
            return Err(Error::SingularMatrix { step: n, pivot: 0.0 });
        }
        for i in 0..n {
            out[(i, j)] = x[i];
        }
    }
    Ok(out)
}

/// Inverse of the factored matrix.
pub fn inverse(lu: &LuFactors) -> Result<ComplexMatrix> {
    solve(lu, &ComplexMatrix::identity(lu.dim()))
}

/// Folds an angle into `(-pi, pi]`.
pub fn fold_phase(theta: f64) -> f64 {
    let mut t = theta % (2.0 * PI);
    if t <= -PI {
        t += 2.0 * PI;
    } else if t > PI {
        t -= 2.0 * PI;
    }
    t
}

/// Determinant as `(log |det|, arg det)` with the phase in `(-pi, pi]`.
pub fn log_det(lu: &LuFactors) -> Result<(f64, f64)> {
    let mut log_mag = 0.0;
    let mut phase = if lu.parity < 0 { PI } else { 0.0 };
    for i in 0..lu.dim() {
        let u = lu.combined[(i, i)];
        if u.norm() == 0.0 {
            return Err(Error::SingularMatrix { step: i, pivot: 0.0 });
        }
        log_mag += u.norm().ln();
        phase = fold_phase(phase + u.arg());
    }
    Ok((log_mag, phase))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn identity_factors() {
        let lu = lu_factor(&ComplexMatrix::identity(3)).unwrap();
        assert_eq!(lu.parity(), 1);
        assert_eq!(lu.lower(), ComplexMatrix::identity(3));
        assert_eq!(lu.upper(), ComplexMatrix::identity(3));
        assert_eq!(log_det(&lu).unwrap(), (0.0, 0.0));
    }

    #[test]
    fn two_by_two_determinant() {
        let m = ComplexMatrix::from_real_rows(&[&[1.0, 2.0], &[3.0, 4.0]]).unwrap();
        let lu = lu_factor(&m).unwrap();
        assert!((lu.determinant() - c(-2.0, 0.0)).norm() < 1e-14);
        let (lm, ph) = log_det(&lu).unwrap();
        assert!((lm - 2f64.ln()).abs() < 1e-14);
        assert!((ph - PI).abs() < 1e-14);
    }

    #[test]
    fn diag_solves() {
        let lu = lu_factor(&ComplexMatrix::from_real_diag(&[2.0, 4.0])).unwrap();
        let x = solve(&lu, &ComplexMatrix::identity(2)).unwrap();
        assert_eq!(x, ComplexMatrix::from_real_diag(&[0.5, 0.25]));
        let lu = lu_factor(&ComplexMatrix::identity(2)).unwrap();
        let b = ComplexMatrix::from_real_rows(&[&[1.0, 2.0, 3.0], &[4.0, 5.0, 6.0]]).unwrap();
        assert_eq!(solve(&lu, &b).unwrap(), b);
    }

    #[test]
    fn sign_of_reflection() {
        let lu = lu_factor(&ComplexMatrix::from_real_diag(&[-1.0, 1.0])).unwrap();
        let (lm, ph) = log_det(&lu).unwrap();
        assert_eq!(lm, 0.0);
        assert!((ph - PI).abs() < 1e-15);
    }

    #[test]
    fn singular_detected() {
        let m = ComplexMatrix::from_real_rows(&[&[1.0, 2.0], &[2.0, 4.0]]).unwrap();
        assert!(matches!(lu_factor(&m), Err(Error::SingularMatrix { .. })));
        assert!(matches!(lu_factor(&ComplexMatrix::zeros(2, 2)), Err(Error::SingularMatrix { .. })));
    }

    #[test]
    fn large_diagonal_log_det_does_not_overflow() {
        let d: Vec<f64> = (1..=300).map(f64::from).collect();
        let lu = lu_factor(&ComplexMatrix::from_real_diag(&d)).unwrap();
        let (lm, ph) = log_det(&lu).unwrap();
        let oracle: f64 = d.iter().map(|x| x.ln()).sum();
        assert!(((lm - oracle) / oracle).abs() < 1e-9);
        assert_eq!(ph, 0.0);
    }

    #[test]
    fn fold_phase_range() {
        assert!((fold_phase(3.0 * PI) - PI).abs() < 1e-12);
        assert!((fold_phase(-PI) - PI).abs() < 1e-12);
        assert!((fold_phase(0.5) - 0.5).abs() < 1e-15);
    }
}
