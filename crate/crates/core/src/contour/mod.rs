//! Contour-integral machinery: Gohberg-Sigal index, Riesz projections, Kato's
//! nilpotent part and reduced resolvent, and scalar winding numbers.

pub mod search;

use std::collections::BTreeMap;
use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::family::OperatorFamily;
use crate::numerics::{fold_phase, log_det, lu_factor, solve, ComplexMatrix, LuFactors};

pub use crate::numerics::Contour;

/// Maximum number of node doublings for any contour operation.
pub const MAX_DOUBLINGS: usize = 4;
/// Doublings allowed before an index is declared non-integral.
pub const INDEX_DOUBLINGS: usize = 2;
/// Distance of a raw index from the nearest integer that is accepted.
pub const INDEX_TOLERANCE: f64 = 1e-6;
/// Threshold for the identities checked by [`kato_expansion`].
pub const IDENTITY_TOLERANCE: f64 = 1e-8;

/// Integer index with the quadrature diagnostics behind it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IndexValue {
    pub value: i64,
    pub raw: Complex64,
    pub residual: f64,
    pub nodes: usize,
}

fn index_raw(f: &OperatorFamily, c: &Contour) -> Result<Complex64> {
    let mut acc = Complex64::new(0.0, 0.0);
    for k in 0..c.nodes {
        let off = c.offset(k);
        let z = c.center + off;
        let on_contour = |_| Error::SingularOnContour { node: k, z };
        let d = f.taylor_coefficients(z, 2).map_err(on_contour)?;
        let lu = lu_factor(&d[0]).map_err(on_contour)?;
        let x = solve(&lu, &d[1]).map_err(on_contour)?;
        acc += x.trace() * off;
    }
    Ok(acc / c.nodes as f64)
}

/// `(1/2 pi i) \oint tr(F(zeta)^{-1} F'(zeta)) d zeta`, rounded.
///
/// The node count is doubled (at most twice) until the raw value is within
/// `1e-6` of an integer.
pub fn index(f: &OperatorFamily, c: &Contour) -> Result<IndexValue> {
    c.validate()?;
    let mut ct = *c;
    let mut doublings = 0;
    loop {
        let raw = index_raw(f, &ct)?;
        let value = raw.re.round();
        let residual = (raw - value).norm();
        if residual <= INDEX_TOLERANCE {
            return Ok(IndexValue { value: value as i64, raw, residual, nodes: ct.nodes });
        }
        if doublings == INDEX_DOUBLINGS {
            return Err(Error::NonIntegralIndex { raw, residual });
        }
        ct = ct.with_nodes(ct.nodes * 2)?;
        doublings += 1;
    }
}

fn resolvent_lu(a: &ComplexMatrix, node: usize, z: Complex64) -> Result<LuFactors> {
    lu_factor(&a.shift_diag(z)).map_err(|_| Error::SingularOnContour { node, z })
}

/// Sums `(1/N) sum_k w(zeta_k) (A - zeta_k)^{-1} (zeta_k - c)` for several weights at once.
fn resolvent_moments(a: &ComplexMatrix, c: &Contour, weights: &[&dyn Fn(Complex64) -> Complex64]) -> Result<Vec<ComplexMatrix>> {
    if !a.is_square() {
        return Err(Error::DimensionMismatch("contour integral of a non-square matrix".into()));
    }
    c.validate()?;
    let n = a.rows();
    let id = ComplexMatrix::identity(n);
    let mut out = vec![ComplexMatrix::zeros(n, n); weights.len()];
    for k in 0..c.nodes {
        let off = c.offset(k);
        let z = c.center + off;
        let r = solve(&resolvent_lu(a, k, z)?, &id)?;
        for (acc, w) in out.iter_mut().zip(weights) {
            *acc = acc.add_scaled(w(z) * off / c.nodes as f64, &r)?;
        }
    }
    Ok(out)
}

/// Riesz projection `-(1/2 pi i) \oint (A - zeta)^{-1} d zeta`.
pub fn riesz_projection(a: &ComplexMatrix, c: &Contour) -> Result<ComplexMatrix> {
    let minus_one = |_: Complex64| Complex64::new(-1.0, 0.0);
    Ok(resolvent_moments(a, c, &[&minus_one])?.pop().expect("one weight"))
}

/// Projection, nilpotent part and reduced resolvent at an isolated eigenvalue.
#[derive(Debug, Clone, Serialize)]
pub struct RieszData {
    pub lambda0: Complex64,
    pub projection: ComplexMatrix,
    pub nilpotent: ComplexMatrix,
    pub reduced_resolvent: ComplexMatrix,
    pub ma: usize,
    /// Raw trace of the projection.
    pub trace: Complex64,
    pub residuals: BTreeMap<String, f64>,
}

impl RieszData {
    pub fn max_residual(&self) -> f64 {
        self.residuals.values().copied().fold(0.0, f64::max)
    }

    /// Truncated Laurent form of `(A - z)^{-1}` around `lambda0`:
    /// `(l0 - z)^{-1} P + sum_k (l0 - z)^{-k-1} (-1)^k F^k + sum_k (l0 - z)^k (-1)^k S^{k+1}`.
    pub fn laurent_resolvent(&self, z: Complex64) -> Result<ComplexMatrix> {
        let n = self.projection.rows();
        let h = self.lambda0 - z;
        let mut out = self.projection.scale(1.0 / h);
        let mut fk = ComplexMatrix::identity(n);
        for k in 1..=n {
            fk = fk.matmul(&self.nilpotent)?;
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            out = out.add_scaled(h.powi(-(k as i32) - 1) * sign, &fk)?;
        }
        let mut sk = self.reduced_resolvent.clone();
        let mut term_scale = Complex64::new(1.0, 0.0);
        for _ in 0..2000 {
            let term = sk.scale(term_scale);
            let size = term.max_abs();
            out = &out + &term;
            if size <= 1e-18 * out.max_abs().max(1.0) {
                break;
            }
            sk = sk.matmul(&self.reduced_resolvent)?;
            term_scale *= -h;
        }
        Ok(out)
    }
}

fn rel(x: f64, scale: f64) -> f64 {
    x / scale.max(1.0)
}

/// Kato's decomposition of the resolvent around `lambda0` inside `c`, with every
/// identity between `P`, `F` and `S` checked to `1e-8`.
pub fn kato_expansion(a: &ComplexMatrix, lambda0: Complex64, c: &Contour) -> Result<RieszData> {
    for k in 0..c.nodes {
        if (c.node(k) - lambda0).norm() == 0.0 {
            return Err(Error::InvalidArgument("lambda0 coincides with a contour node".into()));
        }
    }
    let w_p = |_: Complex64| Complex64::new(-1.0, 0.0);
    let w_f = |z: Complex64| lambda0 - z;
    let w_s = |z: Complex64| -1.0 / (lambda0 - z);
    let mut m = resolvent_moments(a, c, &[&w_p, &w_f, &w_s])?;
    let s = m.pop().expect("three weights");
    let f = m.pop().expect("three weights");
    let p = m.pop().expect("three weights");
    let n = a.rows();
    let trace = p.trace();
    let ma = trace.re.round().max(0.0) as usize;
    let id = ComplexMatrix::identity(n);
    let a_shift = a.shift_diag(lambda0);

    let np = p.max_abs();
    let nf = f.max_abs();
    let ns = s.max_abs();
    let mut residuals = BTreeMap::new();
    residuals.insert("idempotent".to_string(), rel(p.matmul(&p)?.max_abs_diff(&p)?, np));
    residuals.insert("range_pf".to_string(), rel(p.matmul(&f)?.max_abs_diff(&f)?, np * nf));
    residuals.insert("range_fp".to_string(), rel(f.matmul(&p)?.max_abs_diff(&f)?, np * nf));
    residuals.insert("nilpotent_is_shifted_projection".to_string(), rel(a_shift.matmul(&p)?.max_abs_diff(&f)?, a_shift.max_abs() * np));
    residuals.insert(
        "reduced_resolvent_inverse".to_string(),
        rel(a_shift.matmul(&s)?.max_abs_diff(&(&id - &p))?, a_shift.max_abs() * ns),
    );
    residuals.insert("sp_zero".to_string(), rel(s.matmul(&p)?.max_abs(), ns * np));
    residuals.insert("ps_zero".to_string(), rel(p.matmul(&s)?.max_abs(), ns * np));
    let fm = if ma == 0 { f.clone() } else { f.pow(ma)? };
    residuals.insert("nilpotent_order".to_string(), rel(fm.max_abs(), nf.powi(ma.max(1) as i32)));
    residuals.insert("trace_integrality".to_string(), (trace - ma as f64).norm());

    let mut data = RieszData { lambda0, projection: p, nilpotent: f, reduced_resolvent: s, ma, trace, residuals };

    let mut laurent_gap = 0.0f64;
    for probe in [Complex64::from_polar(0.25 * c.radius, 0.3), Complex64::from_polar(0.2 * c.radius, 2.1)] {
        let z = c.center + probe;
        if (z - lambda0).norm() < 1e-3 * c.radius {
            continue;
        }
        let exact = solve(&lu_factor(&a.shift_diag(z))?, &id)?;
        let approx = data.laurent_resolvent(z)?;
        laurent_gap = laurent_gap.max(rel(approx.max_abs_diff(&exact)?, exact.max_abs()));
    }
    data.residuals.insert("laurent_form".to_string(), laurent_gap);

    if let Some((name, &residual)) = data.residuals.iter().find(|(_, &r)| !(r <= IDENTITY_TOLERANCE)) {
        return Err(Error::IdentityResidualExceeded { name: name.clone(), residual });
    }
    Ok(data)
}

/// Winding number of `arg` along the contour, given a phase function.
///
/// Increments between consecutive nodes are folded into `(-pi, pi]`; the node
/// count is doubled until the largest increment is below `pi/2`.
pub fn winding_from_phase<P>(phase: P, c: &Contour) -> Result<i64>
where
    P: Fn(Complex64) -> Result<f64>,
{
    c.validate()?;
    let mut ct = *c;
    let mut doublings = 0;
    loop {
        let phases: Vec<f64> = ct.node_points().into_iter().map(&phase).collect::<Result<_>>()?;
        let mut total = 0.0;
        let mut largest = 0.0f64;
        for k in 0..ct.nodes {
            let d = fold_phase(phases[(k + 1) % ct.nodes] - phases[k]);
            largest = largest.max(d.abs());
            total += d;
        }
        if largest < PI / 2.0 {
            return Ok((total / (2.0 * PI)).round() as i64);
        }
        if doublings == MAX_DOUBLINGS {
            return Err(Error::PhaseJump { increment: largest, nodes: ct.nodes });
        }
        ct = ct.with_nodes(ct.nodes * 2)?;
        doublings += 1;
    }
}

/// Winding number of a scalar function around the contour, by phase tracking.
pub fn winding_number<F>(f: F, c: &Contour) -> Result<i64>
where
    F: Fn(Complex64) -> Result<Complex64>,
{
    winding_from_phase(
        |z| {
            let v = f(z)?;
            if v.norm() == 0.0 || !v.is_finite() {
                return Err(Error::ZeroOnContour { z });
            }
            Ok(v.arg())
        },
        c,
    )
}

/// Phase of `det M` from an LU factorization; a singular `M` means a zero on the contour.
pub fn det_phase(m: &ComplexMatrix, z: Complex64) -> Result<f64> {
    let lu = lu_factor(m).map_err(|e| match e {
        Error::SingularMatrix { .. } => Error::ZeroOnContour { z },
        other => other,
    })?;
    Ok(log_det(&lu)?.1)
}

/// Winding number of `det F` around the contour.
pub fn det_winding(f: &OperatorFamily, c: &Contour) -> Result<i64> {
    winding_from_phase(
        |z| {
            let m = f.eval(z).map_err(|e| match e {
                Error::DomainError { z } => Error::SingularOnContour { node: 0, z },
                other => other,
            })?;
            det_phase(&m, z)
        },
        c,
    )
}

fn log_det_complex(m: &ComplexMatrix) -> Result<Complex64> {
    let (lm, ph) = log_det(&lu_factor(m)?)?;
    Ok(Complex64::new(lm, ph))
}

/// Gap between `tr (A - z)^{-1}` and `-d/dz log det(I - (z - z0)(A - z0)^{-1})`,
/// the latter from Richardson-extrapolated central differences with step `1e-5`.
pub fn trace_logdet_check(a: &ComplexMatrix, z: Complex64, z0: Complex64) -> Result<f64> {
    let n = a.rows();
    let id = ComplexMatrix::identity(n);
    let lhs = solve(&lu_factor(&a.shift_diag(z))?, &id)?.trace();
    let r0 = solve(&lu_factor(&a.shift_diag(z0))?, &id)?;
    let g = |w: Complex64| log_det_complex(&id.add_scaled(-(w - z0), &r0)?);
    let central = |h: f64| -> Result<Complex64> {
        let hp = g(z + h)?;
        let hm = g(z - h)?;
        let d = hp - hm;
        Ok(Complex64::new(d.re, fold_phase(d.im)) / (2.0 * h))
    };
    let h = 1e-5;
    let d1 = central(h)?;
    let d2 = central(h / 2.0)?;
    let rhs = -(4.0 * d2 - d1) / 3.0;
    Ok((lhs - rhs).norm() / lhs.norm().max(1.0))
}
