//! Analytic and finitely meromorphic matrix-valued functions `z -> A(z)` with
//! exact derivatives.

use std::fmt;
use std::sync::{Arc, OnceLock};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::contour::search::{locate_spectrum, SpectrumOptions};
use crate::error::{Error, Result};
use crate::numerics::{lu_factor, singular_values, solve, ComplexMatrix, Contour, LuFactors};

/// Which construction produced a family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FamilyKind {
    Taylor,
    Pencil,
    BirmanSchwinger,
    ResolventBased,
    Custom,
}

/// `(z, order) -> d^order/dz^order A(z)`.
pub type CustomEvaluator = dyn Fn(Complex64, usize) -> Result<ComplexMatrix> + Send + Sync;

#[derive(Clone)]
enum Repr {
    Taylor { center: Complex64, coeffs: Vec<ComplexMatrix> },
    Pencil { a: ComplexMatrix },
    Bs { h0: ComplexMatrix, v1: ComplexMatrix, v2_adj: ComplexMatrix },
    Resolvent { a: ComplexMatrix },
    Custom(Arc<CustomEvaluator>),
}

/// Matrix-valued function of one complex variable.
///
/// Values are immutable; evaluation is pure and may happen from several threads.
#[derive(Clone)]
pub struct OperatorFamily {
    dim: usize,
    kind: FamilyKind,
    repr: Repr,
    excluded: Arc<OnceLock<std::result::Result<Vec<Complex64>, Error>>>,
}

impl fmt::Debug for OperatorFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("OperatorFamily").field("dim", &self.dim).field("kind", &self.kind).finish()
    }
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

fn falling(k: usize, l: usize) -> f64 {
    (k + 1 - l..=k).map(|j| j as f64).product()
}

/// `A(z) = sum_k (z - center)^k coeffs[k]`.
pub fn make_taylor(center: Complex64, coeffs: Vec<ComplexMatrix>) -> Result<OperatorFamily> {
    let first = coeffs.first().ok_or_else(|| Error::DimensionMismatch("no Taylor coefficients".into()))?;
    let dim = first.rows();
    if coeffs.iter().any(|c| c.rows() != dim || c.cols() != dim) {
        return Err(Error::DimensionMismatch("Taylor coefficients must be square of equal size".into()));
    }
    Ok(OperatorFamily::new(dim, FamilyKind::Taylor, Repr::Taylor { center, coeffs }))
}

/// `B(z) = A - z I`.
pub fn make_pencil(a: ComplexMatrix) -> Result<OperatorFamily> {
    if !a.is_square() {
        return Err(Error::DimensionMismatch("pencil of a non-square matrix".into()));
    }
    Ok(OperatorFamily::new(a.rows(), FamilyKind::Pencil, Repr::Pencil { a }))
}

/// `I_m + V1 (H0 - z)^{-1} V2^*` with `V1, V2` of shape `m x n`.
pub fn make_bs_family(h0: ComplexMatrix, v1: ComplexMatrix, v2: ComplexMatrix) -> Result<OperatorFamily> {
    if !h0.is_square() {
        return Err(Error::DimensionMismatch("H0 must be square".into()));
    }
    let n = h0.rows();
    if v1.cols() != n || v2.cols() != n || v1.rows() != v2.rows() {
        return Err(Error::DimensionMismatch(format!(
            "V1 {}x{}, V2 {}x{} against H0 {n}x{n}",
            v1.rows(),
            v1.cols(),
            v2.rows(),
            v2.cols()
        )));
    }
    let m = v1.rows();
    Ok(OperatorFamily::new(m, FamilyKind::BirmanSchwinger, Repr::Bs { h0, v1, v2_adj: v2.adjoint() }))
}

/// `I + V (H0 - z)^{-1}`, i.e. `I - K(z)` with `K(z) = -V (H0 - z)^{-1}`.
pub fn make_simple_bs(h0: ComplexMatrix, v: ComplexMatrix) -> Result<OperatorFamily> {
    if !h0.is_square() || v.rows() != h0.rows() || v.cols() != h0.cols() {
        return Err(Error::DimensionMismatch("H0 and V must be square of equal size".into()));
    }
    let n = h0.rows();
    make_bs_family(h0, v, ComplexMatrix::identity(n))
}

/// Resolvent `(A - z I)^{-1}`.
pub fn make_resolvent(a: ComplexMatrix) -> Result<OperatorFamily> {
    if !a.is_square() {
        return Err(Error::DimensionMismatch("resolvent of a non-square matrix".into()));
    }
    Ok(OperatorFamily::new(a.rows(), FamilyKind::ResolventBased, Repr::Resolvent { a }))
}

/// Family given by a user closure returning the `order`-th derivative at `z`.
pub fn make_custom<F>(dim: usize, f: F) -> OperatorFamily
where
    F: Fn(Complex64, usize) -> Result<ComplexMatrix> + Send + Sync + 'static,
{
    OperatorFamily::new(dim, FamilyKind::Custom, Repr::Custom(Arc::new(f)))
}

impl OperatorFamily {
    fn new(dim: usize, kind: FamilyKind, repr: Repr) -> Self {
        Self { dim, kind, repr, excluded: Arc::new(OnceLock::new()) }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn kind(&self) -> FamilyKind {
        self.kind
    }

    /// Whether the family is entire (no excluded points).
    pub fn is_entire(&self) -> bool {
        matches!(self.repr, Repr::Taylor { .. } | Repr::Pencil { .. })
    }

    fn shifted_lu(&self, a: &ComplexMatrix, z: Complex64) -> Result<LuFactors> {
        if !z.is_finite() {
            return Err(Error::NonFinite("evaluation point"));
        }
        lu_factor(&a.shift_diag(z)).map_err(|e| match e {
            Error::SingularMatrix { .. } => Error::DomainError { z },
            other => other,
        })
    }

    pub fn eval(&self, z: Complex64) -> Result<ComplexMatrix> {
        self.deriv(z, 0)
    }

    /// Exact `order`-th derivative at `z`.
    pub fn deriv(&self, z: Complex64, order: usize) -> Result<ComplexMatrix> {
        Ok(self.taylor_coefficients(z, order + 1)?.pop().expect("count >= 1").scale_real(factorial(order)))
    }

    /// `F^{(l)}(z) / l!` for `l = 0..count`.
    pub fn taylor_coefficients(&self, z: Complex64, count: usize) -> Result<Vec<ComplexMatrix>> {
        let n = self.dim;
        match &self.repr {
            Repr::Taylor { center, coeffs } => {
                if !z.is_finite() {
                    return Err(Error::NonFinite("evaluation point"));
                }
                let h = z - center;
                Ok((0..count)
                    .map(|l| {
                        let mut acc = ComplexMatrix::zeros(n, n);
                        for (k, c) in coeffs.iter().enumerate().skip(l) {
                            let w = h.powu((k - l) as u32) * (falling(k, l) / factorial(l));
                            acc = acc.add_scaled(w, c).expect("equal shapes");
                        }
                        acc
                    })
                    .collect())
            }
            Repr::Pencil { a } => {
                if !z.is_finite() {
                    return Err(Error::NonFinite("evaluation point"));
                }
                Ok((0..count)
                    .map(|l| match l {
                        0 => a.shift_diag(z),
                        1 => ComplexMatrix::identity(n).scale_real(-1.0),
                        _ => ComplexMatrix::zeros(n, n),
                    })
                    .collect())
            }
            Repr::Bs { h0, v1, v2_adj } => {
                let lu = self.shifted_lu(h0, z)?;
                let mut out = Vec::with_capacity(count);
                let mut y = v2_adj.clone();
                for l in 0..count {
                    y = solve(&lu, &y)?;
                    let mut d = v1.matmul(&y)?;
                    if l == 0 {
                        d = &d + &ComplexMatrix::identity(n);
                    }
                    out.push(d);
                }
                Ok(out)
            }
            Repr::Resolvent { a } => {
                // d^l/dz^l (A - z)^{-1} = l! (A - z)^{-(l+1)}
                let lu = self.shifted_lu(a, z)?;
                let mut out = Vec::with_capacity(count);
                let mut y = ComplexMatrix::identity(n);
                for _ in 0..count {
                    y = solve(&lu, &y)?;
                    out.push(y.clone());
                }
                Ok(out)
            }
            Repr::Custom(f) => (0..count)
                .map(|l| {
                    let m = f(z, l)?;
                    if m.rows() != n || m.cols() != n {
                        return Err(Error::DimensionMismatch(format!(
                            "custom family returned {}x{} for dimension {n}",
                            m.rows(),
                            m.cols()
                        )));
                    }
                    Ok(m.scale_real(1.0 / factorial(l)))
                })
                .collect(),
        }
    }

    /// Points where the family is undefined: the spectrum of `H0` (or `A`) for
    /// resolvent-based kinds, empty for entire kinds. Located once, lazily.
    pub fn excluded_points(&self) -> Result<Vec<Complex64>> {
        let a = match &self.repr {
            Repr::Bs { h0, .. } => h0,
            Repr::Resolvent { a } => a,
            _ => return Ok(Vec::new()),
        };
        self.excluded
            .get_or_init(|| {
                locate_spectrum(a, &SpectrumOptions::default())
                    .map(|clusters| clusters.into_iter().map(|c| c.center).collect())
            })
            .clone()
    }
}

/// Laurent coefficients `M_k` of a family around `center` for `k_min..=k_max`.
#[derive(Debug, Clone, Serialize)]
pub struct LaurentExpansion {
    pub center: Complex64,
    pub lowest_order: i32,
    pub coefficients: Vec<ComplexMatrix>,
    /// Numerical rank of each coefficient, in the same order.
    pub ranks: Vec<usize>,
    /// Max relative gap between the truncated series and the family on a circle of 0.7 times the radius.
    pub reconstruction_residual: f64,
    pub finitely_meromorphic: bool,
    pub nodes: usize,
}

impl LaurentExpansion {
    pub fn coefficient(&self, k: i32) -> Option<&ComplexMatrix> {
        usize::try_from(k - self.lowest_order).ok().and_then(|i| self.coefficients.get(i))
    }

    pub fn rank(&self, k: i32) -> Option<usize> {
        usize::try_from(k - self.lowest_order).ok().and_then(|i| self.ranks.get(i).copied())
    }

    /// `sum_k (z - center)^k M_k`.
    pub fn evaluate(&self, z: Complex64) -> ComplexMatrix {
        let n = self.coefficients[0].rows();
        let h = z - self.center;
        self.coefficients.iter().enumerate().fold(ComplexMatrix::zeros(n, n), |acc, (i, m)| {
            acc.add_scaled(h.powi(self.lowest_order + i as i32), m).expect("equal shapes")
        })
    }
}

/// Default highest order for a principal part of order `n0`.
pub fn default_k_max(n0: i32) -> i32 {
    n0 + 4
}

const LAURENT_START_NODES: usize = 256;
const LAURENT_MAX_NODES: usize = 4096;
const LAURENT_STABLE: f64 = 1e-8;
const LAURENT_RANK_TOL: f64 = 1e-9;

fn laurent_at(f: &OperatorFamily, center: Complex64, radius: f64, orders: &[i32], nodes: usize) -> Result<Vec<ComplexMatrix>> {
    let ct = Contour::new(center, radius, nodes)?;
    let n = f.dim();
    let mut acc = vec![ComplexMatrix::zeros(n, n); orders.len()];
    for j in 0..nodes {
        let h = ct.offset(j);
        let v = f.eval(center + h)?;
        for (a, &k) in acc.iter_mut().zip(orders) {
            *a = a.add_scaled(h.powi(-k) / nodes as f64, &v)?;
        }
    }
    Ok(acc)
}

/// Coefficients `(1/2 pi i) \oint F(zeta) (zeta - center)^{-k-1} d zeta`, with node
/// doubling until successive estimates agree to `1e-8`.
pub fn laurent_coeffs(f: &OperatorFamily, center: Complex64, radius: f64, k_min: i32, k_max: i32) -> Result<LaurentExpansion> {
    if k_min > k_max {
        return Err(Error::InvalidArgument(format!("order range [{k_min}, {k_max}] is empty")));
    }
    let orders: Vec<i32> = (k_min..=k_max).collect();
    let mut nodes = LAURENT_START_NODES;
    let mut coeffs = laurent_at(f, center, radius, &orders, nodes)?;
    let mut change = f64::INFINITY;
    while change > LAURENT_STABLE {
        if nodes * 2 > LAURENT_MAX_NODES {
            return Err(Error::QuadratureDivergence { change });
        }
        let next = laurent_at(f, center, radius, &orders, nodes * 2)?;
        let weighted = |m: &ComplexMatrix, k: i32| m.max_abs() * radius.powi(k);
        let scale = next.iter().zip(&orders).map(|(m, &k)| weighted(m, k)).fold(0.0, f64::max).max(1e-300);
        change = coeffs
            .iter()
            .zip(&next)
            .zip(&orders)
            .map(|((a, b), &k)| weighted(&(a - b), k))
            .fold(0.0, f64::max)
            / scale;
        coeffs = next;
        nodes *= 2;
    }

    let scale = coeffs
        .iter()
        .zip(&orders)
        .map(|(m, &k)| m.norm_fro() * radius.powi(k))
        .fold(0.0, f64::max);
    let ranks: Vec<usize> = coeffs
        .iter()
        .zip(&orders)
        .map(|(m, &k)| {
            // Coefficients are compared at the scale they contribute on the circle.
            let weight = radius.powi(k);
            singular_values(m).iter().filter(|&&s| s * weight > LAURENT_RANK_TOL * scale.max(1e-300)).count()
        })
        .collect();
    let finitely_meromorphic = orders.iter().zip(&ranks).filter(|(&k, _)| k < 0).all(|(_, &r)| r < f.dim());

    let mut expansion = LaurentExpansion {
        center,
        lowest_order: k_min,
        coefficients: coeffs,
        ranks,
        reconstruction_residual: 0.0,
        finitely_meromorphic,
        nodes,
    };
    let probe = Contour::new(center, 0.7 * radius, 16)?;
    let mut worst = 0.0f64;
    for z in probe.node_points() {
        let exact = f.eval(z)?;
        let gap = expansion.evaluate(z).max_abs_diff(&exact)? / exact.max_abs().max(1e-300);
        worst = worst.max(gap);
    }
    expansion.reconstruction_residual = worst;
    Ok(expansion)
}

/// JSON description of a family.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum FamilySpec {
    Taylor {
        #[serde(default)]
        center: Complex64,
        coeffs: Vec<ComplexMatrix>,
    },
    Pencil {
        #[serde(rename = "A", alias = "a")]
        a: ComplexMatrix,
    },
    BirmanSchwinger {
        #[serde(rename = "H0", alias = "h0")]
        h0: ComplexMatrix,
        #[serde(rename = "V1", alias = "v1")]
        v1: ComplexMatrix,
        #[serde(rename = "V2", alias = "v2")]
        v2: ComplexMatrix,
    },
    SimpleBs {
        #[serde(rename = "H0", alias = "h0")]
        h0: ComplexMatrix,
        #[serde(rename = "V", alias = "v")]
        v: ComplexMatrix,
    },
    Resolvent {
        #[serde(rename = "A", alias = "a")]
        a: ComplexMatrix,
    },
}

impl FamilySpec {
    pub fn build(&self) -> Result<OperatorFamily> {
        match self.clone() {
            FamilySpec::Taylor { center, coeffs } => make_taylor(center, coeffs),
            FamilySpec::Pencil { a } => make_pencil(a),
            FamilySpec::BirmanSchwinger { h0, v1, v2 } => make_bs_family(h0, v1, v2),
            FamilySpec::SimpleBs { h0, v } => make_simple_bs(h0, v),
            FamilySpec::Resolvent { a } => make_resolvent(a),
        }
    }
}
