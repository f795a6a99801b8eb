//! Modified Fredholm determinants `det_p(I - F)` and the Weinstein-Aronszajn
//! bookkeeping `m_a(z; H) = m_a(z; H0) + m(z; det_p(I - K))`, with
//! `K(z) = -V1 (H0 - z)^{-1} V2^*`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::bs::BsProblem;
use crate::contour::{index, riesz_projection, winding_from_phase};
use crate::error::{Error, Result};
use crate::jordan::power_kernel_dims;
use crate::numerics::{fold_phase, log_det, lu_factor, ComplexMatrix, Contour};

/// Sign of the trace correction in the exponent.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Convention {
    /// `det(I - F) exp(sum_{j<p} tr(F^j)/j)`, i.e. `det_p(I + A) = det((I + A) e^{-A} ...)` at `A = -F`.
    Standard,
    /// `det(I - F) exp(-sum_{j<p} tr(F^j)/j)`.
    Negated,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DetReport {
    pub p: usize,
    pub log_magnitude: f64,
    /// In `(-pi, pi]`.
    pub phase: f64,
    /// `sum_{j=1}^{p-1} tr(F^j) / j`, before the convention's sign.
    pub correction: Complex64,
    pub convention: Convention,
}

impl DetReport {
    pub fn value(&self) -> Complex64 {
        Complex64::from_polar(self.log_magnitude.exp(), self.phase)
    }
}

/// `det_p(I - F)` in log form; a singular `I - F` gives log-magnitude `-inf`.
pub fn modified_det(f: &ComplexMatrix, p: usize, convention: Convention) -> Result<DetReport> {
    if p == 0 {
        return Err(Error::InvalidArgument("p must be at least 1".into()));
    }
    if !f.is_square() {
        return Err(Error::DimensionMismatch("modified determinant of a non-square matrix".into()));
    }
    let n = f.rows();
    let mut correction = Complex64::new(0.0, 0.0);
    let mut power = ComplexMatrix::identity(n);
    for j in 1..p {
        power = power.matmul(f)?;
        correction += power.trace() / j as f64;
    }
    let signed = match convention {
        Convention::Standard => correction,
        Convention::Negated => -correction,
    };
    let base = ComplexMatrix::identity(n).add_scaled(Complex64::new(-1.0, 0.0), f)?;
    let (log_magnitude, phase) = match lu_factor(&base) {
        Ok(lu) => {
            let (m, ph) = log_det(&lu)?;
            (m + signed.re, fold_phase(ph + signed.im))
        }
        Err(Error::SingularMatrix { .. }) => (f64::NEG_INFINITY, 0.0),
        Err(e) => return Err(e),
    };
    Ok(DetReport { p, log_magnitude, phase, correction, convention })
}

/// `K(z) = -V1 (H0 - z)^{-1} V2^*`.
pub fn k_operator(problem: &BsProblem, z: Complex64) -> Result<ComplexMatrix> {
    Ok(ComplexMatrix::identity(problem.m()).add_scaled(Complex64::new(-1.0, 0.0), &problem.family()?.eval(z)?)?)
}

/// Winding of `det_p(I - K(.))` around `c`, by phase tracking.
pub fn det_multiplicity_with(problem: &BsProblem, p: usize, c: &Contour, convention: Convention) -> Result<i64> {
    winding_from_phase(
        |z| {
            let k = k_operator(problem, z).map_err(|e| match e {
                Error::DomainError { z } => Error::SingularOnContour { node: 0, z },
                other => other,
            })?;
            let d = modified_det(&k, p, convention)?;
            if !d.log_magnitude.is_finite() {
                return Err(Error::ZeroOnContour { z });
            }
            Ok(d.phase)
        },
        c,
    )
}

/// Order of `z -> det_p(I - K(z))` inside `c` (zeros minus poles), standard convention.
pub fn det_multiplicity(problem: &BsProblem, p: usize, c: &Contour) -> Result<i64> {
    det_multiplicity_with(problem, p, c, Convention::Standard)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct DetWinding {
    pub p: usize,
    pub standard: i64,
    pub negated: i64,
}

#[derive(Debug, Clone, Serialize)]
pub struct WaReport {
    pub z: Complex64,
    pub radius: f64,
    pub windings: Vec<DetWinding>,
    pub index: i64,
    pub index_residual: f64,
    /// From Riesz projection traces.
    pub ma_h: i64,
    pub ma_h0: i64,
    pub trace_residual: f64,
    /// From the kernels of `(H - z)^j` and `(H0 - z)^j`.
    pub ma_h_kernel: usize,
    pub ma_h0_kernel: usize,
    pub holds: bool,
}

fn rounded_trace(a: &ComplexMatrix, c: &Contour) -> Result<(i64, f64)> {
    let t = riesz_projection(a, c)?.trace();
    let r = t.re.round();
    Ok((r as i64, (t - r).norm()))
}

/// All windings for `p` in `p_list` and both conventions, the index of `I - K`,
/// and both multiplicity oracles; `holds` when every integer agrees with
/// `m_a(z; H) - m_a(z; H0)`.
pub fn wa_check(problem: &BsProblem, z: Complex64, p_list: &[usize], c: &Contour) -> Result<WaReport> {
    let mut windings = Vec::with_capacity(p_list.len());
    for &p in p_list {
        windings.push(DetWinding {
            p,
            standard: det_multiplicity_with(problem, p, c, Convention::Standard)?,
            negated: det_multiplicity_with(problem, p, c, Convention::Negated)?,
        });
    }
    let iv = index(&problem.family()?, c)?;
    let (ma_h, rh) = rounded_trace(problem.h(), c)?;
    let (ma_h0, rh0) = rounded_trace(problem.h0(), c)?;
    let ma_h_kernel = *power_kernel_dims(problem.h(), z)?.last().expect("nonempty");
    let ma_h0_kernel = *power_kernel_dims(problem.h0(), z)?.last().expect("nonempty");
    let delta = ma_h - ma_h0;
    let holds = windings.iter().all(|w| w.standard == delta && w.negated == delta)
        && iv.value == delta
        && ma_h_kernel as i64 == ma_h
        && ma_h0_kernel as i64 == ma_h0;
    Ok(WaReport {
        z,
        radius: c.radius,
        windings,
        index: iv.value,
        index_residual: iv.residual,
        ma_h,
        ma_h0,
        trace_residual: rh.max(rh0),
        ma_h_kernel,
        ma_h0_kernel,
        holds,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn half_with_p2() {
        let f = ComplexMatrix::from_real_diag(&[0.5]);
        let d = modified_det(&f, 2, Convention::Standard).unwrap();
        assert!((d.value() - Complex64::new(0.5 * 0.5f64.exp(), 0.0)).norm() < 1e-15);
        let lit = modified_det(&f, 2, Convention::Negated).unwrap();
        assert!((lit.value() - Complex64::new(0.5 * (-0.5f64).exp(), 0.0)).norm() < 1e-15);
    }

    #[test]
    fn p1_is_plain_determinant() {
        let f = ComplexMatrix::from_real_rows(&[&[0.2, 1.0], &[-0.3, 0.4]]).unwrap();
        let d = modified_det(&f, 1, Convention::Standard).unwrap();
        let plain = lu_factor(&ComplexMatrix::identity(2).add_scaled(Complex64::new(-1.0, 0.0), &f).unwrap()).unwrap();
        let (m, ph) = log_det(&plain).unwrap();
        assert_eq!((d.log_magnitude, d.phase), (m, ph));
        assert_eq!(d.correction, Complex64::new(0.0, 0.0));
    }

    #[test]
    fn zero_operator_gives_one() {
        for p in 1..4 {
            let d = modified_det(&ComplexMatrix::zeros(3, 3), p, Convention::Standard).unwrap();
            assert_eq!(d.value(), Complex64::new(1.0, 0.0));
        }
    }
}
