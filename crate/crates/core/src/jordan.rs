//! Jordan chains and multiplicities of matrices and analytic matrix families.
//!
//! Family chains satisfy `sum_{l <= j} D_l phi_{j-l} = 0` with
//! `D_l = F^{(l)}(lambda0) / l!`. All tuples of length `k` solving these
//! equations form the kernel of the block lower-triangular Toeplitz matrix
//! `T_k` with blocks `D_{i-j}`; its dimension is `sum_i min(k, k_i)` over the
//! chain lengths `k_i`, which gives both the multiplicities and a canonical
//! system of chains.

use num_complex::Complex64;
use serde::{Serialize, Serializer};

use crate::contour::search::{locate_spectrum, nearest_other, SpectrumOptions};
use crate::contour::{det_winding, index, riesz_projection};
use crate::error::{Error, Result};
use crate::family::{make_pencil, make_taylor, OperatorFamily};
use crate::numerics::{
    lu_factor, rank_nullspace_scaled, right_singular_pairs, ComplexMatrix, ComplexVector, Contour, DEFAULT_REL_TOL,
};

const ZERO_VECTOR: f64 = 1e-12;
const DET_ZERO: f64 = 1e-12;
const CHAIN_TOLERANCE: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ChainKind {
    /// `(A - lambda0) phi_0 = 0`, `(A - lambda0) phi_j = phi_{j-1}`; every vector nonzero.
    OperatorChain,
    /// Chain of an analytic family; generalized vectors may vanish.
    FamilyChain,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct JordanChain {
    lambda0: Complex64,
    vectors: Vec<ComplexVector>,
    kind: ChainKind,
}

impl JordanChain {
    pub fn new(lambda0: Complex64, vectors: Vec<ComplexVector>, kind: ChainKind) -> Result<Self> {
        let first = vectors.first().ok_or_else(|| Error::InvalidArgument("empty chain".into()))?;
        if vectors.iter().any(|v| v.len() != first.len()) {
            return Err(Error::DimensionMismatch("chain vectors of different lengths".into()));
        }
        if first.norm() <= ZERO_VECTOR {
            return Err(Error::InvalidArgument("leading chain vector vanishes".into()));
        }
        if kind == ChainKind::OperatorChain && vectors.iter().any(|v| v.norm() <= ZERO_VECTOR) {
            return Err(Error::InvalidArgument("operator chains have nonzero generalized eigenvectors".into()));
        }
        Ok(Self { lambda0, vectors, kind })
    }

    pub fn lambda0(&self) -> Complex64 {
        self.lambda0
    }

    pub fn vectors(&self) -> &[ComplexVector] {
        &self.vectors
    }

    pub fn kind(&self) -> ChainKind {
        self.kind
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.vectors[0].len()
    }

    /// The first `len` vectors, itself a chain.
    pub fn prefix(&self, len: usize) -> Result<Self> {
        if len == 0 || len > self.len() {
            return Err(Error::InvalidArgument(format!("prefix length {len} of a chain of length {}", self.len())));
        }
        Ok(Self { lambda0: self.lambda0, vectors: self.vectors[..len].to_vec(), kind: self.kind })
    }
}

/// Max over `j` of `|(A - lambda0) phi_j - phi_{j-1}|`, each relative to `|phi_j| |A|_F`.
pub fn verify_operator_chain(a: &ComplexMatrix, lambda0: Complex64, chain: &JordanChain) -> Result<f64> {
    if !a.is_square() || a.rows() != chain.dim() {
        return Err(Error::DimensionMismatch(format!(
            "chain of dimension {} against a {}x{} matrix",
            chain.dim(),
            a.rows(),
            a.cols()
        )));
    }
    let shifted = a.shift_diag(lambda0);
    let a_norm = a.norm_fro();
    let mut worst = 0.0f64;
    for (j, phi) in chain.vectors.iter().enumerate() {
        let mut r = shifted.mul_vec(phi)?;
        if j > 0 {
            r = &r - &chain.vectors[j - 1];
        }
        let denom = phi.norm() * a_norm;
        let denom = if denom > 0.0 { denom } else { 1.0 };
        worst = worst.max(r.norm() / denom);
    }
    Ok(worst)
}

/// Max over `j` of `|sum_{l <= j} D_l phi_{j-l}|`, relative to `max(1, |phi_0|)`.
pub fn verify_family_chain(f: &OperatorFamily, lambda0: Complex64, chain: &JordanChain) -> Result<f64> {
    if f.dim() != chain.dim() {
        return Err(Error::DimensionMismatch(format!("chain of dimension {} against a family of dimension {}", chain.dim(), f.dim())));
    }
    let d = f.taylor_coefficients(lambda0, chain.len())?;
    Ok(family_residual(&d, &chain.vectors) / chain.vectors[0].norm().max(1.0))
}

fn family_residual(d: &[ComplexMatrix], phis: &[ComplexVector]) -> f64 {
    let mut worst = 0.0f64;
    for j in 0..phis.len() {
        let mut acc = ComplexVector::zeros(phis[0].len());
        for l in 0..=j {
            acc = &acc + &d[l].mul_vec(&phis[j - l]).expect("matching dimensions");
        }
        worst = worst.max(acc.norm());
    }
    worst
}

/// Taylor coefficients rescaled to `s^l D_l` so that all blocks of the Toeplitz
/// matrix have comparable size; kernel tuples map back via `phi_j = s^{-j} psi_j`.
struct Balanced {
    coeffs: Vec<ComplexMatrix>,
    s: f64,
}

impl Balanced {
    fn new(f: &OperatorFamily, lambda0: Complex64, count: usize) -> Result<Self> {
        let mut coeffs = f.taylor_coefficients(lambda0, count)?;
        let d0 = coeffs[0].norm_fro();
        let mut s = f64::INFINITY;
        if d0 > 0.0 {
            for (l, c) in coeffs.iter().enumerate().skip(1) {
                let dl = c.norm_fro();
                if dl > 0.0 {
                    s = s.min((d0 / dl).powf(1.0 / l as f64));
                }
            }
        }
        let s = if s.is_finite() { s.clamp(1e-3, 1e3) } else { 1.0 };
        for (l, c) in coeffs.iter_mut().enumerate() {
            *c = c.scale_real(s.powi(l as i32));
        }
        Ok(Self { coeffs, s })
    }

    /// Size of the largest block, the reference for kernel thresholds.
    fn scale(&self) -> f64 {
        self.coeffs.iter().map(ComplexMatrix::norm_fro).fold(0.0, f64::max)
    }

    fn kernel(&self, k: usize, rel_tol: f64) -> Result<Vec<ComplexVector>> {
        Ok(rank_nullspace_scaled(&self.toeplitz(k), rel_tol, self.scale())?.basis)
    }

    fn toeplitz(&self, k: usize) -> ComplexMatrix {
        let n = self.coeffs[0].rows();
        let mut t = ComplexMatrix::zeros(k * n, k * n);
        for i in 0..k {
            for j in 0..=i {
                t.set_block(i * n, j * n, &self.coeffs[i - j]);
            }
        }
        t
    }

    /// Splits a kernel tuple into unscaled chain vectors.
    fn unpack(&self, psi: &ComplexVector, k: usize) -> Vec<ComplexVector> {
        let n = psi.len() / k;
        (0..k)
            .map(|j| {
                let w = Complex64::new(self.s.powi(-(j as i32)), 0.0);
                ComplexVector::new(psi.as_slice()[j * n..(j + 1) * n].iter().map(|x| x * w).collect())
                    .expect("finite entries")
            })
            .collect()
    }
}

/// `dim ker T_k` for `k = 1..=k_max`.
pub fn toeplitz_kernel_dims(f: &OperatorFamily, lambda0: Complex64, k_max: usize) -> Result<Vec<usize>> {
    if k_max == 0 {
        return Err(Error::InvalidArgument("k_max must be at least 1".into()));
    }
    let b = Balanced::new(f, lambda0, k_max)?;
    (1..=k_max).map(|k| Ok(b.kernel(k, DEFAULT_REL_TOL)?.len())).collect()
}

/// Kernel filtration up to the first repeated dimension.
struct Filtration {
    dims: Vec<usize>,
    bases: Vec<Vec<ComplexVector>>,
    stabilized: bool,
    balanced: Balanced,
}

fn filtration(f: &OperatorFamily, lambda0: Complex64, k_max: usize, rel_tol: f64) -> Result<Filtration> {
    let balanced = Balanced::new(f, lambda0, k_max.max(1))?;
    let mut dims = Vec::new();
    let mut bases = Vec::new();
    let mut stabilized = false;
    for k in 1..=k_max {
        let basis = balanced.kernel(k, rel_tol)?;
        let d = basis.len();
        let prev = dims.last().copied().unwrap_or(0);
        dims.push(d);
        bases.push(basis);
        if d == prev {
            stabilized = true;
            break;
        }
    }
    Ok(Filtration { dims, bases, stabilized, balanced })
}

impl Filtration {
    /// Number of chains of length at least `k` (1-based).
    fn at_least(&self, k: usize) -> usize {
        let d = |k: usize| if k == 0 { 0 } else { self.dims.get(k - 1).copied().unwrap_or(*self.dims.last().unwrap_or(&0)) };
        d(k) - d(k - 1)
    }

    fn lengths(&self) -> Vec<usize> {
        let top = self.dims.len();
        let mut lengths = Vec::new();
        for k in (1..=top).rev() {
            let exact = self.at_least(k) - self.at_least(k + 1);
            lengths.extend(std::iter::repeat(k).take(exact));
        }
        lengths
    }

    fn chains(&self, lambda0: Complex64) -> Result<Vec<JordanChain>> {
        let top = self.dims.len();
        let n = self.balanced.coeffs[0].rows();
        let mut chosen: Vec<ComplexVector> = Vec::new();
        let mut chains = Vec::new();
        for k in (1..=top).rev() {
            let want = self.at_least(k) - self.at_least(k + 1);
            if want == 0 {
                continue;
            }
            let basis = &self.bases[k - 1];
            // Leading blocks with the span of the eigenvectors already used removed.
            let cols: Vec<ComplexVector> = basis
                .iter()
                .map(|z| {
                    let mut lead = ComplexVector::new(z.as_slice()[..n].to_vec()).expect("finite entries");
                    for _ in 0..2 {
                        for q in &chosen {
                            let p = q.dot(&lead);
                            lead.axpy(-p, q);
                        }
                    }
                    lead
                })
                .collect();
            let w = ComplexMatrix::from_columns(n, &cols)?;
            for (_, v) in right_singular_pairs(&w)?.into_iter().take(want) {
                let mut psi = ComplexVector::zeros(k * n);
                for (z, &c) in basis.iter().zip(v.as_slice()) {
                    psi.axpy(c, z);
                }
                let mut phis = self.balanced.unpack(&psi, k);
                let lead = phis[0].norm();
                if lead <= ZERO_VECTOR {
                    return Err(Error::InvalidArgument(format!("kernel filtration gave a chain with vanishing eigenvector at length {k}")));
                }
                let inv = Complex64::new(1.0 / lead, 0.0);
                for p in phis.iter_mut() {
                    *p = p.scale(inv);
                }
                let mut q = phis[0].clone();
                for _ in 0..2 {
                    for prev in &chosen {
                        let p = prev.dot(&q);
                        q.axpy(-p, prev);
                    }
                }
                let qn = q.norm();
                chosen.push(q.scale(Complex64::new(1.0 / qn, 0.0)));
                chains.push(JordanChain::new(lambda0, phis, ChainKind::FamilyChain)?);
            }
        }
        Ok(chains)
    }
}

/// Algebraic multiplicity, finite or not resolved within the order cap.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MultiplicityValue {
    Finite(usize),
    ExceededCap,
}

impl MultiplicityValue {
    pub fn finite(self) -> Option<usize> {
        match self {
            MultiplicityValue::Finite(m) => Some(m),
            MultiplicityValue::ExceededCap => None,
        }
    }
}

impl Serialize for MultiplicityValue {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            MultiplicityValue::Finite(m) => s.serialize_u64(*m as u64),
            MultiplicityValue::ExceededCap => s.serialize_str("exceeded_cap"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Toeplitz,
    Index,
    Projection,
    DetWinding,
}

fn serialize_chains<S: Serializer>(chains: &[JordanChain], s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_seq(chains.iter().map(|c| &c.vectors))
}

#[derive(Debug, Clone, Serialize)]
pub struct MultiplicityReport {
    pub lambda0: Complex64,
    pub mg: usize,
    pub ma: MultiplicityValue,
    /// Chain lengths, nonincreasing.
    pub lengths: Vec<usize>,
    pub kernel_dims: Vec<usize>,
    /// Largest chain verification residual.
    pub residual: f64,
    pub methods: Vec<Method>,
    pub tolerance: f64,
    pub warnings: Vec<String>,
    pub det_identically_zero: bool,
    pub index: Option<i64>,
    pub index_residual: Option<f64>,
    pub det_winding: Option<i64>,
    pub projection_trace: Option<f64>,
    /// `dim ker (A - lambda0)^j` up to the first repeat (operators only).
    pub power_kernel_dims: Option<Vec<usize>>,
    #[serde(serialize_with = "serialize_chains")]
    pub chains: Vec<JordanChain>,
}

impl MultiplicityReport {
    /// Every integer multiplicity produced by the methods that ran.
    pub fn method_values(&self) -> Vec<(Method, i64)> {
        let mut out = Vec::new();
        if let Some(m) = self.ma.finite() {
            out.push((Method::Toeplitz, m as i64));
        }
        if let Some(i) = self.index {
            out.push((Method::Index, i));
        }
        if let Some(w) = self.det_winding {
            out.push((Method::DetWinding, w));
        }
        if let Some(t) = self.projection_trace {
            out.push((Method::Projection, t.round() as i64));
        }
        out
    }

    /// Whether all methods returned the same integer.
    pub fn methods_agree(&self) -> bool {
        let v = self.method_values();
        v.windows(2).all(|w| w[0].1 == w[1].1)
    }
}

#[derive(Debug, Clone)]
pub struct MultiplicityOptions {
    /// Largest Toeplitz order tried; `None` means `2 * dim + 2`.
    pub k_max: Option<usize>,
    /// Contour for the index and winding cross-checks; chosen automatically when `None`.
    pub contour: Option<Contour>,
    pub rel_tol: f64,
}

impl Default for MultiplicityOptions {
    fn default() -> Self {
        Self { k_max: None, contour: None, rel_tol: DEFAULT_REL_TOL }
    }
}

pub fn default_k_max(dim: usize) -> usize {
    2 * dim + 2
}

/// Whether `|det F| < 1e-12` at 16 points of the circle (a singular LU counts as zero).
pub fn det_identically_zero(f: &OperatorFamily, center: Complex64, radius: f64) -> Result<bool> {
    let probe = Contour::new(center, radius, 16)?;
    for z in probe.node_points() {
        let m = f.eval(z)?;
        let det = match lu_factor(&m) {
            Ok(lu) => lu.determinant().norm(),
            Err(Error::SingularMatrix { .. }) => 0.0,
            Err(e) => return Err(e),
        };
        if det >= DET_ZERO {
            return Ok(false);
        }
    }
    Ok(true)
}

fn base_radius(f: &OperatorFamily, lambda0: Complex64) -> Result<f64> {
    let nearest = f
        .excluded_points()?
        .into_iter()
        .map(|p| (p - lambda0).norm())
        .fold(f64::INFINITY, f64::min);
    Ok((0.5f64).min(nearest / 2.0).max(1e-6))
}

/// Circle around `lambda0` on which the determinant winding has settled:
/// the radius is halved until the windings at `r` and `r/2` agree.
fn auto_contour(f: &OperatorFamily, lambda0: Complex64) -> Result<Option<Contour>> {
    let mut r = base_radius(f, lambda0)?;
    while r >= 1e-6 {
        let w1 = det_winding(f, &Contour::circle(lambda0, r)?);
        let w2 = det_winding(f, &Contour::circle(lambda0, r / 2.0)?);
        if let (Ok(a), Ok(b)) = (w1, w2) {
            if a == b {
                return Contour::circle(lambda0, r / 2.0).map(Some);
            }
        }
        r /= 2.0;
    }
    Ok(None)
}

pub fn algebraic_multiplicity(f: &OperatorFamily, lambda0: Complex64, k_max: usize) -> Result<MultiplicityReport> {
    algebraic_multiplicity_with(f, lambda0, &MultiplicityOptions { k_max: Some(k_max), ..Default::default() })
}

/// Multiplicities of the zero `lambda0` of `f` from the Toeplitz kernel
/// filtration, cross-checked by the index and the determinant winding.
pub fn algebraic_multiplicity_with(f: &OperatorFamily, lambda0: Complex64, opts: &MultiplicityOptions) -> Result<MultiplicityReport> {
    let k_max = opts.k_max.unwrap_or_else(|| default_k_max(f.dim()));
    let filt = filtration(f, lambda0, k_max, opts.rel_tol)?;
    let mg = filt.dims.first().copied().unwrap_or(0);
    let mut report = MultiplicityReport {
        lambda0,
        mg,
        ma: MultiplicityValue::ExceededCap,
        lengths: Vec::new(),
        kernel_dims: filt.dims.clone(),
        residual: 0.0,
        methods: vec![Method::Toeplitz],
        tolerance: opts.rel_tol,
        warnings: Vec::new(),
        det_identically_zero: false,
        index: None,
        index_residual: None,
        det_winding: None,
        projection_trace: None,
        power_kernel_dims: None,
        chains: Vec::new(),
    };

    let probe_radius = match &opts.contour {
        Some(c) => c.radius,
        None => base_radius(f, lambda0)?,
    };
    report.det_identically_zero = det_identically_zero(f, lambda0, probe_radius)?;

    if filt.stabilized {
        let ma = *filt.dims.last().expect("at least one order");
        report.ma = MultiplicityValue::Finite(ma);
        report.lengths = filt.lengths();
        report.chains = filt.chains(lambda0)?;
        for c in &report.chains {
            report.residual = report.residual.max(verify_family_chain(f, lambda0, c)?);
        }
        if report.residual > CHAIN_TOLERANCE {
            report.warnings.push(format!("chain residual {:.3e} above {CHAIN_TOLERANCE:e}", report.residual));
        }
    } else if !report.det_identically_zero {
        report.warnings.push(format!("kernel dimensions still growing at order {k_max}"));
    }

    if report.det_identically_zero {
        return Ok(report);
    }
    let contour = match &opts.contour {
        Some(c) => Some(*c),
        None => auto_contour(f, lambda0)?,
    };
    let Some(contour) = contour else {
        report.warnings.push("no contour with a settled determinant winding".into());
        return Ok(report);
    };
    match index(f, &contour) {
        Ok(iv) => {
            report.index = Some(iv.value);
            report.index_residual = Some(iv.residual);
            report.methods.push(Method::Index);
        }
        Err(e) => report.warnings.push(format!("index: {e}")),
    }
    match det_winding(f, &contour) {
        Ok(w) => {
            report.det_winding = Some(w);
            report.methods.push(Method::DetWinding);
        }
        Err(e) => report.warnings.push(format!("det winding: {e}")),
    }
    if !report.methods_agree() {
        report.warnings.push(format!("methods disagree: {:?}", report.method_values()));
    }
    Ok(report)
}

/// Canonical system of chains: lengths nonincreasing, eigenvectors a basis of `ker F(lambda0)`.
pub fn extract_canonical_chains(f: &OperatorFamily, lambda0: Complex64) -> Result<Vec<JordanChain>> {
    let filt = filtration(f, lambda0, default_k_max(f.dim()), DEFAULT_REL_TOL)?;
    if !filt.stabilized {
        return Err(Error::InfiniteMultiplicity);
    }
    filt.chains(lambda0)
}

/// `dim ker (A - lambda0)^j` for `j = 1, 2, ...` up to the first repeat.
pub fn power_kernel_dims(a: &ComplexMatrix, lambda0: Complex64) -> Result<Vec<usize>> {
    if !a.is_square() {
        return Err(Error::DimensionMismatch("kernel filtration of a non-square matrix".into()));
    }
    let shifted = a.shift_diag(lambda0);
    let unit = a.max_abs().max(lambda0.norm());
    let mut power = ComplexMatrix::identity(a.rows());
    let mut dims: Vec<usize> = Vec::new();
    for j in 1..=a.rows() + 1 {
        power = power.matmul(&shifted)?;
        let d = rank_nullspace_scaled(&power, DEFAULT_REL_TOL, unit.powi(j as i32))?.basis.len();
        let repeat = dims.last() == Some(&d);
        dims.push(d);
        if repeat {
            break;
        }
    }
    Ok(dims)
}

/// Multiplicities of an eigenvalue of a matrix: the pencil `A - z` through the
/// family machinery, the powers of `A - lambda0`, and the Riesz projection trace.
pub fn operator_multiplicities(a: &ComplexMatrix, lambda0: Complex64) -> Result<MultiplicityReport> {
    operator_multiplicities_within(a, lambda0, isolating_radius(a, lambda0, 1.0)?)
}

/// Half the distance from `lambda0` to the nearest other eigenvalue of `a`, at most `cap`.
pub fn isolating_radius(a: &ComplexMatrix, lambda0: Complex64, cap: f64) -> Result<f64> {
    let clusters = locate_spectrum(a, &SpectrumOptions::default())?;
    let scale = a.max_abs().max(1.0);
    Ok(nearest_other(&clusters, lambda0, 1e-6 * scale).map_or(cap, |d| (d / 2.0).min(cap)))
}

/// [`operator_multiplicities`] with a caller-chosen contour radius.
pub fn operator_multiplicities_within(a: &ComplexMatrix, lambda0: Complex64, radius: f64) -> Result<MultiplicityReport> {
    let pencil = make_pencil(a.clone())?;
    let contour = Contour::circle(lambda0, radius)?;
    let mut report = algebraic_multiplicity_with(&pencil, lambda0, &MultiplicityOptions { contour: Some(contour), ..Default::default() })?;

    let powers = power_kernel_dims(a, lambda0)?;
    let brute = *powers.last().expect("at least one power");
    if report.ma.finite() != Some(brute) {
        report.warnings.push(format!("kernel filtration of powers gives {brute}"));
    }
    report.power_kernel_dims = Some(powers);

    match riesz_projection(a, &contour) {
        Ok(p) => {
            let t = p.trace();
            report.projection_trace = Some(t.re);
            report.methods.push(Method::Projection);
            if (t.re - t.re.round()).abs() > 1e-6 || t.im.abs() > 1e-6 {
                report.warnings.push(format!("projection trace {t} is not an integer"));
            }
        }
        Err(e) => report.warnings.push(format!("projection: {e}")),
    }
    if !report.methods_agree() {
        report.warnings.push(format!("methods disagree: {:?}", report.method_values()));
    }
    Ok(report)
}

/// Order of the zero of `det F` at `lambda0`: its winding on a 256-node circle.
pub fn det_zero_order(f: &OperatorFamily, lambda0: Complex64, radius: f64) -> Result<i64> {
    det_winding(f, &Contour::circle(lambda0, radius)?)
}

/// `diag(z^{e_1}, ..., z^{e_n})` around 0, where `None` stands for the zero entry.
pub fn monomial_diagonal(exponents: &[Option<usize>]) -> Result<OperatorFamily> {
    let n = exponents.len();
    if n == 0 {
        return Err(Error::DimensionMismatch("empty diagonal".into()));
    }
    let top = exponents.iter().flatten().copied().max().unwrap_or(0);
    let mut coeffs = vec![ComplexMatrix::zeros(n, n); top + 1];
    for (i, e) in exponents.iter().enumerate() {
        if let Some(k) = e {
            coeffs[*k][(i, i)] = Complex64::new(1.0, 0.0);
        }
    }
    make_taylor(Complex64::new(0.0, 0.0), coeffs)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn e(n: usize, i: usize) -> ComplexVector {
        ComplexVector::unit(n, i)
    }

    #[test]
    fn jordan_block_chain() {
        let a = ComplexMatrix::jordan_block(2, c(0.0, 0.0));
        let ch = JordanChain::new(c(0.0, 0.0), vec![e(2, 0), e(2, 1)], ChainKind::OperatorChain).unwrap();
        assert_eq!(verify_operator_chain(&a, c(0.0, 0.0), &ch).unwrap(), 0.0);
    }

    #[test]
    fn operator_chain_rejects_zero_vectors() {
        let r = JordanChain::new(c(0.0, 0.0), vec![e(2, 0), ComplexVector::zeros(2)], ChainKind::OperatorChain);
        assert!(r.is_err());
        assert!(JordanChain::new(c(0.0, 0.0), vec![e(2, 0), ComplexVector::zeros(2)], ChainKind::FamilyChain).is_ok());
    }

    #[test]
    fn a2_dims() {
        let f = monomial_diagonal(&[Some(1), Some(2), Some(0)]).unwrap();
        assert_eq!(toeplitz_kernel_dims(&f, c(0.0, 0.0), 4).unwrap(), vec![2, 3, 3, 3]);
    }

    #[test]
    fn a_infinity_never_stabilizes() {
        let f = monomial_diagonal(&[None, Some(1), Some(0)]).unwrap();
        let r = algebraic_multiplicity_with(&f, c(0.0, 0.0), &MultiplicityOptions::default()).unwrap();
        assert_eq!(r.ma, MultiplicityValue::ExceededCap);
        assert!(r.det_identically_zero);
        assert!(matches!(extract_canonical_chains(&f, c(0.0, 0.0)), Err(Error::InfiniteMultiplicity)));
    }

    #[test]
    fn mixed_lengths() {
        let f = monomial_diagonal(&[Some(1), Some(2), Some(2), Some(0)]).unwrap();
        let r = algebraic_multiplicity_with(&f, c(0.0, 0.0), &MultiplicityOptions::default()).unwrap();
        assert_eq!((r.mg, r.ma), (3, MultiplicityValue::Finite(5)));
        assert_eq!(r.lengths, vec![2, 2, 1]);
        assert_eq!(r.index, Some(5));
        assert_eq!(r.det_winding, Some(5));
        assert!(r.residual < 1e-12, "{}", r.residual);
        assert!(r.warnings.is_empty(), "{:?}", r.warnings);
    }

    #[test]
    fn defective_operator() {
        let r = operator_multiplicities(&ComplexMatrix::jordan_block(3, c(2.0, 0.0)), c(2.0, 0.0)).unwrap();
        assert_eq!((r.mg, r.ma), (1, MultiplicityValue::Finite(3)));
        assert_eq!(r.power_kernel_dims, Some(vec![1, 2, 3, 3]));
        assert!(r.methods_agree(), "{:?}", r.method_values());
        assert_eq!(r.methods.len(), 4);
    }

    #[test]
    fn serializes_infinite_cap() {
        let v = serde_json::to_string(&MultiplicityValue::ExceededCap).unwrap();
        assert_eq!(v, "\"exceeded_cap\"");
        assert_eq!(serde_json::to_string(&MultiplicityValue::Finite(3)).unwrap(), "3");
    }
}
