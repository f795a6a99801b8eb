//! Eigenvalue location by recursive rectangle subdivision driven by the
//! winding number of `det(A - z I)`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use super::{det_phase, riesz_projection, winding_from_phase};
use crate::error::{Error, Result};
use crate::numerics::{fold_phase, inverse, log_det, lu_factor, ComplexMatrix, Contour};

/// A group of eigenvalues (counted with algebraic multiplicity) at one point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpectralCluster {
    pub center: Complex64,
    pub multiplicity: usize,
}

#[derive(Debug, Clone, Copy)]
pub struct SpectrumOptions {
    /// Cells are never split below this size (relative to the spectral scale).
    pub min_cell: f64,
    /// Cells at most this size (relative) are polished by a contour centroid.
    pub polish_cell: f64,
    /// Nodes on polishing circles.
    pub polish_nodes: usize,
}

impl Default for SpectrumOptions {
    fn default() -> Self {
        Self { min_cell: 1e-9, polish_cell: 1e-2, polish_nodes: 128 }
    }
}

// Split points avoid simple fractions so integer and half-integer eigenvalues
// never land on a cut.
const SPLITS: [f64; 4] = [0.476_393_202_250_021, 0.523_606_797_749_979, 0.458_578_643_762_690, 0.541_421_356_237_310];
const MAX_EDGE_DEPTH: u32 = 48;

#[derive(Debug, Clone, Copy)]
struct Rect {
    lo: Complex64,
    hi: Complex64,
}

impl Rect {
    fn width(&self) -> f64 {
        self.hi.re - self.lo.re
    }
    fn height(&self) -> f64 {
        self.hi.im - self.lo.im
    }
    fn size(&self) -> f64 {
        self.width().max(self.height())
    }
    fn center(&self) -> Complex64 {
        (self.lo + self.hi) * 0.5
    }
    fn corners(&self) -> [Complex64; 4] {
        [self.lo, Complex64::new(self.hi.re, self.lo.im), self.hi, Complex64::new(self.lo.re, self.hi.im)]
    }
    fn split(&self, t: f64) -> (Rect, Rect) {
        if self.width() >= self.height() {
            let x = self.lo.re + t * self.width();
            (
                Rect { lo: self.lo, hi: Complex64::new(x, self.hi.im) },
                Rect { lo: Complex64::new(x, self.lo.im), hi: self.hi },
            )
        } else {
            let y = self.lo.im + t * self.height();
            (
                Rect { lo: self.lo, hi: Complex64::new(self.hi.re, y) },
                Rect { lo: Complex64::new(self.lo.re, y), hi: self.hi },
            )
        }
    }
}

struct Search<'a> {
    a: &'a ComplexMatrix,
    opts: SpectrumOptions,
    scale: f64,
    found: Vec<SpectralCluster>,
    polished: Vec<SpectralCluster>,
}

impl Search<'_> {
    fn phase(&self, z: Complex64) -> Result<f64> {
        det_phase(&self.a.shift_diag(z), z)
    }

    /// Phase of `det(A - z)` and `|tr (A - z)^{-1}|`, the modulus of its log-derivative.
    fn phase_rate(&self, z: Complex64) -> Result<(f64, f64)> {
        let lu = lu_factor(&self.a.shift_diag(z)).map_err(|_| Error::ZeroOnContour { z })?;
        let (_, phase) = log_det(&lu)?;
        let rate = inverse(&lu)?.trace().norm();
        Ok((phase, rate))
    }

    // Refines until each piece turns by less than pi/4 both by the observed
    // increment and by the log-derivative bound, which catches clustered zeros
    // close to the edge that would otherwise alias.
    fn edge(&self, a: Complex64, b: Complex64, pa: (f64, f64), pb: (f64, f64), depth: u32) -> Result<f64> {
        let d = fold_phase(pb.0 - pa.0);
        let bound = pa.1.max(pb.1) * (b - a).norm();
        if d.abs() < PI / 4.0 && bound < PI / 2.0 {
            return Ok(d);
        }
        if depth >= MAX_EDGE_DEPTH {
            return Err(Error::PhaseJump { increment: d.abs(), nodes: 1 << depth });
        }
        let m = (a + b) * 0.5;
        let pm = self.phase_rate(m)?;
        Ok(self.edge(a, m, pa, pm, depth + 1)? + self.edge(m, b, pm, pb, depth + 1)?)
    }

    fn rect_count(&self, r: &Rect) -> Result<usize> {
        let corners = r.corners();
        let mut total = 0.0;
        for i in 0..4 {
            let (a, b) = (corners[i], corners[(i + 1) % 4]);
            let pieces = 8;
            let mut prev = (a, self.phase_rate(a)?);
            for k in 1..=pieces {
                let z = a + (b - a) * (k as f64 / pieces as f64);
                let p = self.phase_rate(z)?;
                total += self.edge(prev.0, z, prev.1, p, 0)?;
                prev = (z, p);
            }
        }
        let w = (total / (2.0 * PI)).round();
        if w < 0.0 {
            return Err(Error::InvalidArgument("negative eigenvalue count".into()));
        }
        Ok(w as usize)
    }

    fn circle_count(&self, c: &Contour) -> Result<usize> {
        let w = winding_from_phase(|z| self.phase(z), c)?;
        usize::try_from(w).map_err(|_| Error::InvalidArgument("negative eigenvalue count".into()))
    }

    /// Contour centroid `tr(A P) / m` over a circle containing the cell.
    ///
    /// Accepted when the circle and one of twice the radius hold the same
    /// number `m >= count` of eigenvalues, a small circle around the centroid
    /// holds all `m`, and `(A - mu)^m` vanishes on the range of the projection. A cluster
    /// cut by an earlier split is found from both sides and recorded once.
    fn polish(&mut self, cell: &Rect, count: usize) -> Result<bool> {
        let radius = cell.size().max(1e-12 * self.scale);
        let inner = Contour::new(cell.center(), radius, self.opts.polish_nodes)?;
        let outer = Contour::new(cell.center(), 2.0 * radius, self.opts.polish_nodes)?;
        let m = match (self.circle_count(&inner), self.circle_count(&outer)) {
            (Ok(a), Ok(b)) if a == b && a >= count => a,
            _ => return Ok(false),
        };
        let p = match riesz_projection(self.a, &inner) {
            Ok(p) => p,
            Err(Error::ZeroOnContour { .. } | Error::SingularOnContour { .. } | Error::SingularMatrix { .. }) => return Ok(false),
            Err(e) => return Err(e),
        };
        let mu = self.a.matmul(&p)?.trace() / m as f64;
        // The centroid of several distinct eigenvalues need not be one of them.
        let tight = Contour::new(mu, (1e-3 * radius).max(1e-9 * self.scale), self.opts.polish_nodes)?;
        if !matches!(self.circle_count(&tight), Ok(k) if k == m) {
            return Ok(false);
        }
        // A single eigenvalue of multiplicity m makes (A - mu)^m vanish on ran P.
        let shifted = self.a.shift_diag(mu).pow(m)?.matmul(&p)?;
        let tol = 1e-8 * (self.a.max_abs() + mu.norm()).max(1.0).powi(m as i32) * p.max_abs().max(1.0);
        if shifted.max_abs() > tol {
            return Ok(false);
        }
        if !self.polished.iter().any(|c| (c.center - mu).norm() <= 1e-7 * self.scale) {
            self.polished.push(SpectralCluster { center: mu, multiplicity: m });
        }
        Ok(true)
    }

    fn refine(&mut self, cell: Rect, count: usize) -> Result<()> {
        if count == 0 {
            return Ok(());
        }
        if cell.size() <= self.opts.polish_cell * self.scale && self.polish(&cell, count)? {
            return Ok(());
        }
        if cell.size() <= self.opts.min_cell * self.scale {
            self.found.push(SpectralCluster { center: cell.center(), multiplicity: count });
            return Ok(());
        }
        let mut last_err = None;
        for t in SPLITS {
            let (first, second) = cell.split(t);
            match self.rect_count(&first) {
                Ok(n1) if n1 <= count => {
                    self.refine(first, n1)?;
                    return self.refine(second, count - n1);
                }
                Ok(n1) => last_err = Some(Error::InvalidArgument(format!("sub-cell count {n1} exceeds {count}"))),
                Err(e @ Error::ZeroOnContour { .. }) => last_err = Some(e),
                Err(e) => return Err(e),
            }
        }
        Err(last_err.expect("at least one split attempted"))
    }
}

/// Eigenvalues of `a` with algebraic multiplicities.
///
/// The search starts from a Gershgorin box and splits cells (at irrational
/// fractions) by the argument principle; small cells are polished with the
/// contour centroid `tr(A P)/m`, which is accurate even for defective eigenvalues.
pub fn locate_spectrum(a: &ComplexMatrix, opts: &SpectrumOptions) -> Result<Vec<SpectralCluster>> {
    if !a.is_square() {
        return Err(Error::DimensionMismatch("spectrum of a non-square matrix".into()));
    }
    let n = a.rows();
    if n == 0 {
        return Ok(Vec::new());
    }
    let mut lo = Complex64::new(f64::INFINITY, f64::INFINITY);
    let mut hi = Complex64::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
    for i in 0..n {
        let r: f64 = (0..n).filter(|&j| j != i).map(|j| a[(i, j)].norm()).sum();
        let d = a[(i, i)];
        lo = Complex64::new(lo.re.min(d.re - r), lo.im.min(d.im - r));
        hi = Complex64::new(hi.re.max(d.re + r), hi.im.max(d.im + r));
    }
    let scale = (hi.re - lo.re).max(hi.im - lo.im).max(1.0);
    // Irrational margins keep the outer boundary off lattice points.
    let pad = Complex64::new(0.1 * scale + 0.123_606_797_749_979, 0.1 * scale + 0.141_421_356_237_31);
    let root = Rect { lo: lo - pad, hi: hi + pad };
    let mut search = Search { a, opts: *opts, scale, found: Vec::new(), polished: Vec::new() };
    search.refine(root, n)?;

    let mut merged: Vec<SpectralCluster> = Vec::new();
    for c in search.polished.into_iter().chain(search.found) {
        match merged.iter_mut().find(|m| (m.center - c.center).norm() <= 1e-7 * scale) {
            Some(m) => {
                let total = (m.multiplicity + c.multiplicity) as f64;
                m.center = (m.center * m.multiplicity as f64 + c.center * c.multiplicity as f64) / total;
                m.multiplicity += c.multiplicity;
            }
            None => merged.push(c),
        }
    }
    let total: usize = merged.iter().map(|c| c.multiplicity).sum();
    if total != n {
        return Err(Error::InvalidArgument(format!("located {total} eigenvalues for dimension {n}")));
    }
    merged.sort_by(|x, y| x.center.re.total_cmp(&y.center.re).then(x.center.im.total_cmp(&y.center.im)));
    Ok(merged)
}

/// Distance from `z` to the nearest cluster other than those within `exclude` of `z`.
pub fn nearest_other(clusters: &[SpectralCluster], z: Complex64, exclude: f64) -> Option<f64> {
    clusters
        .iter()
        .map(|c| (c.center - z).norm())
        .filter(|&d| d > exclude)
        .min_by(|a, b| a.total_cmp(b))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn diagonal_spectrum() {
        let a = ComplexMatrix::from_diag(&[c(1.0, 0.0), c(-2.0, 0.5), c(1.0, 0.0), c(3.0, -1.0)]);
        let s = locate_spectrum(&a, &SpectrumOptions::default()).unwrap();
        assert_eq!(s.len(), 3);
        assert!((s[0].center - c(-2.0, 0.5)).norm() < 1e-10);
        assert_eq!(s[1].multiplicity, 2);
        assert!((s[1].center - c(1.0, 0.0)).norm() < 1e-10);
    }

    #[test]
    fn defective_eigenvalue_is_one_cluster() {
        let mut a = ComplexMatrix::jordan_block(3, c(2.0, 0.0));
        a[(0, 2)] = c(0.7, 0.0);
        let s = locate_spectrum(&a, &SpectrumOptions::default()).unwrap();
        assert_eq!(s.len(), 1);
        assert_eq!(s[0].multiplicity, 3);
        assert!((s[0].center - c(2.0, 0.0)).norm() < 1e-10);
    }
}
