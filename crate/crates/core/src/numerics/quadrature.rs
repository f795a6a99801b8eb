//! Trapezoidal quadrature on circles.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::matrix::ComplexMatrix;
use crate::error::{Error, Result};

pub const DEFAULT_NODES: usize = 256;
pub const MIN_NODES: usize = 16;

/// Counterclockwise circle `center + radius * exp(i theta)` sampled at
/// `nodes` equispaced angles.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Contour {
    pub center: Complex64,
    pub radius: f64,
    #[serde(default = "default_nodes")]
    pub nodes: usize,
}

fn default_nodes() -> usize {
    DEFAULT_NODES
}

impl Contour {
    pub fn new(center: Complex64, radius: f64, nodes: usize) -> Result<Self> {
        let c = Self { center, radius, nodes };
        c.validate()?;
        Ok(c)
    }

    /// Circle with the default node count.
    pub fn circle(center: Complex64, radius: f64) -> Result<Self> {
        Self::new(center, radius, DEFAULT_NODES)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.center.is_finite() || !self.radius.is_finite() || self.radius <= 0.0 {
            return Err(Error::InvalidArgument(format!("contour radius {} must be positive", self.radius)));
        }
        if self.nodes < MIN_NODES || !self.nodes.is_power_of_two() {
            return Err(Error::InvalidArgument(format!(
                "node count {} must be a power of two >= {MIN_NODES}",
                self.nodes
            )));
        }
        Ok(())
    }

    pub fn with_nodes(&self, nodes: usize) -> Result<Self> {
        Self::new(self.center, self.radius, nodes)
    }

    /// Offset `zeta - center` of node `k`.
    pub fn offset(&self, k: usize) -> Complex64 {
        Complex64::from_polar(self.radius, 2.0 * PI * k as f64 / self.nodes as f64)
    }

    pub fn node(&self, k: usize) -> Complex64 {
        self.center + self.offset(k)
    }

    pub fn node_points(&self) -> Vec<Complex64> {
        (0..self.nodes).map(|k| self.node(k)).collect()
    }

    /// Whether `z` lies strictly inside the circle.
    pub fn encloses(&self, z: Complex64) -> bool {
        (z - self.center).norm() < self.radius
    }
}

/// Trapezoidal approximation of `(1/2 pi i) \oint f(zeta) d zeta`.
///
/// With `zeta_k = c + r e^{i theta_k}` the weight of node `k` is `(zeta_k - c) / N`.
pub fn circle_integral<F>(f: F, contour: &Contour) -> Result<ComplexMatrix>
where
    F: Fn(Complex64) -> Result<ComplexMatrix>,
{
    contour.validate()?;
    let n = contour.nodes;
    let mut acc: Option<ComplexMatrix> = None;
    for k in 0..n {
        let w = contour.offset(k) / n as f64;
        let v = f(contour.center + contour.offset(k))?;
        acc = Some(match acc {
            None => v.scale(w),
            Some(a) => a.add_scaled(w, &v)?,
        });
    }
    Ok(acc.expect("node count is at least 16"))
}

/// Scalar version of [`circle_integral`].
pub fn circle_integral_scalar<F>(f: F, contour: &Contour) -> Result<Complex64>
where
    F: Fn(Complex64) -> Result<Complex64>,
{
    contour.validate()?;
    let n = contour.nodes;
    let mut acc = Complex64::new(0.0, 0.0);
    for k in 0..n {
        let off = contour.offset(k);
        acc += f(contour.center + off)? * off;
    }
    Ok(acc / n as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn constant_integrates_to_zero() {
        let ct = Contour::circle(c(0.3, -0.2), 0.7).unwrap();
        let v = circle_integral_scalar(|_| Ok(c(1.0, 0.0)), &ct).unwrap();
        assert!(v.norm() < 1e-15);
    }

    #[test]
    fn cauchy_kernel() {
        let z0 = c(1.0, 2.0);
        let ct = Contour::circle(z0, 0.5).unwrap();
        let v = circle_integral_scalar(|z| Ok(1.0 / (z - z0)), &ct).unwrap();
        assert!((v - 1.0).norm() < 1e-12);
    }

    #[test]
    fn third_order_pole_has_no_residue() {
        let z0 = c(0.0, 0.0);
        let cm = ComplexMatrix::from_real_rows(&[&[1.0, 2.0], &[3.0, 4.0]]).unwrap();
        let ct = Contour::circle(z0, 1.0).unwrap();
        let v = circle_integral(|z| Ok(cm.scale((z - z0).powi(-3))), &ct).unwrap();
        assert!(v.max_abs() < 1e-12);
    }

    #[test]
    fn contour_validation() {
        assert!(Contour::new(c(0.0, 0.0), 1.0, 12).is_err());
        assert!(Contour::new(c(0.0, 0.0), 1.0, 48).is_err());
        assert!(Contour::new(c(0.0, 0.0), -1.0, 64).is_err());
        assert!(Contour::new(c(0.0, 0.0), 1.0, 16).is_ok());
    }

    #[test]
    fn contour_json() {
        let ct = Contour::new(c(1.0, -1.0), 0.5, 64).unwrap();
        let s = serde_json::to_string(&ct).unwrap();
        assert_eq!(s, r#"{"center":[1.0,-1.0],"radius":0.5,"nodes":64}"#);
        let back: Contour = serde_json::from_str(&s).unwrap();
        assert_eq!(back, ct);
    }
}
