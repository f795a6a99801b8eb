//! Reproducible random instances.
//!
//! Every generator draws from ChaCha8 seeded through `seed_from_u64`, so the
//! same seed gives the same matrices on every platform.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::numerics::{inverse, lu_factor, ComplexMatrix, ComplexVector};

pub type SeededRng = ChaCha8Rng;

pub fn rng(seed: u64) -> SeededRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Real and imaginary parts uniform in `[-1, 1)`.
pub fn complex(rng: &mut SeededRng) -> Complex64 {
    Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
}

pub fn matrix(rng: &mut SeededRng, rows: usize, cols: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(rows, cols, |_, _| complex(rng))
}

pub fn vector(rng: &mut SeededRng, len: usize) -> ComplexVector {
    ComplexVector::new((0..len).map(|_| complex(rng)).collect()).expect("finite draws")
}

/// Unitary matrix from Gram-Schmidt on random columns.
pub fn unitary(rng: &mut SeededRng, n: usize) -> ComplexMatrix {
    loop {
        let raw = matrix(rng, n, n);
        let mut cols: Vec<ComplexVector> = Vec::with_capacity(n);
        let mut ok = true;
        for j in 0..n {
            let mut v = raw.column(j);
            for _ in 0..2 {
                for q in &cols {
                    let p = q.dot(&v);
                    v.axpy(-p, q);
                }
            }
            let nv = v.norm();
            if nv < 1e-8 {
                ok = false;
                break;
            }
            cols.push(v.scale(Complex64::new(1.0 / nv, 0.0)));
        }
        if ok {
            return ComplexMatrix::from_columns(n, &cols).expect("columns have length n");
        }
    }
}

/// Well-conditioned similarity `I + 0.25 G / sqrt(n)` and its inverse.
pub fn similarity(rng: &mut SeededRng, n: usize) -> Result<(ComplexMatrix, ComplexMatrix)> {
    let g = matrix(rng, n, n);
    let s = ComplexMatrix::identity(n).add_scaled(Complex64::new(0.25 / (n as f64).sqrt(), 0.0), &g)?;
    let s_inv = inverse(&lu_factor(&s)?)?;
    Ok((s, s_inv))
}
